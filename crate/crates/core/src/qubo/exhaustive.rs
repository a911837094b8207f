//! Exhaustive scans over all `2^n` assignments.
//!
//! The index space is split into blocks sharing their high bits; each block
//! walks its low bits in Gray-code order so consecutive assignments differ by
//! one flip, and the energy is updated from per-variable local fields in time
//! proportional to the flipped variable's coupling count. Blocks run on the
//! rayon pool and are merged in index order, so results are deterministic.

use rayon::prelude::*;

use crate::encoding::{check_validity, Assignment};
use crate::error::{Error, Result};

use super::{Qubo, QuboModel};

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 26;

const BLOCK_BITS: usize = 16;

/// Incremental energy of an assignment under single-bit flips.
#[derive(Debug, Clone)]
pub struct GrayWalker<'a> {
    couplings: &'a [Vec<(usize, f64)>],
    /// `linear_k + sum_j Q_kj x_j`: the energy gained by switching `k` on.
    field: Vec<f64>,
    state: u64,
    energy: f64,
}

impl<'a> GrayWalker<'a> {
    pub fn new(qubo: &Qubo, couplings: &'a [Vec<(usize, f64)>], start: u64) -> Self {
        let n = qubo.len();
        let mut field = qubo.linear().to_vec();
        for (k, list) in couplings.iter().enumerate() {
            for &(j, c) in list {
                if (start >> j) & 1 == 1 {
                    field[k] += c;
                }
            }
        }
        debug_assert!(n <= 64);
        GrayWalker {
            couplings,
            field,
            state: start,
            energy: qubo.energy_of_index(start),
        }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn flip(&mut self, k: usize) {
        let on = (self.state >> k) & 1 == 1;
        let sign = if on { -1.0 } else { 1.0 };
        self.energy += sign * self.field[k];
        self.state ^= 1 << k;
        for &(j, c) in &self.couplings[k] {
            self.field[j] += sign * c;
        }
    }
}

fn block_bits(n: usize) -> usize {
    n.min(BLOCK_BITS)
}

/// Visits every assignment of block `prefix`, calling `visit(index, energies)`
/// with one energy per model.
fn walk_block<F>(models: &[&Qubo], couplings: &[Vec<Vec<(usize, f64)>>], prefix: u64, mut visit: F)
where
    F: FnMut(u64, &[f64]),
{
    let k = block_bits(models[0].len());
    let start = prefix << k;
    let mut walkers: Vec<GrayWalker> = models
        .iter()
        .zip(couplings)
        .map(|(q, c)| GrayWalker::new(q, c, start))
        .collect();
    let mut energies: Vec<f64> = walkers.iter().map(|w| w.energy()).collect();
    visit(start, &energies);
    for g in 1u64..(1u64 << k) {
        let bit = g.trailing_zeros() as usize;
        for (w, e) in walkers.iter_mut().zip(energies.iter_mut()) {
            w.flip(bit);
            *e = w.energy();
        }
        visit(walkers[0].state(), &energies);
    }
}

fn check_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit || n > 63 {
        return Err(Error::TooManyVariables { n, limit: limit.min(63) });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimumResult {
    pub index: u64,
    pub assignment: Assignment,
    pub energy: f64,
}

fn within(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Folds `(energy, index)` keeping the lowest energy; near-ties keep the
/// smaller index.
fn better(current: (f64, u64), candidate: (f64, u64)) -> (f64, u64) {
    if within(candidate.0, current.0) {
        (current.0.min(candidate.0), current.1.min(candidate.1))
    } else if candidate.0 < current.0 {
        candidate
    } else {
        current
    }
}

/// Global minimum over all `2^n` assignments; ties go to the smallest index.
pub fn exhaustive_minimize(qubo: &Qubo, limit: usize) -> Result<MinimumResult> {
    let n = qubo.len();
    check_limit(n, limit)?;
    let couplings = vec![qubo.couplings()];
    let blocks = 1u64 << (n - block_bits(n));
    let per_block: Vec<(f64, u64)> = (0..blocks)
        .into_par_iter()
        .map(|prefix| {
            let mut best = (f64::INFINITY, u64::MAX);
            walk_block(&[qubo], &couplings, prefix, |idx, e| {
                best = better(best, (e[0], idx));
            });
            best
        })
        .collect();
    let (_, index) = per_block
        .into_iter()
        .fold((f64::INFINITY, u64::MAX), better);
    Ok(MinimumResult {
        index,
        assignment: Assignment::from_index(index, n),
        energy: qubo.energy_of_index(index),
    })
}

/// Energies of every basis index, `table[z] = E(z)`.
pub fn energy_table(qubo: &Qubo, limit: usize) -> Result<Vec<f64>> {
    let n = qubo.len();
    check_limit(n, limit)?;
    let couplings = vec![qubo.couplings()];
    let mut table = vec![0.0; 1usize << n];
    let block = 1usize << block_bits(n);
    table
        .par_chunks_mut(block)
        .enumerate()
        .for_each(|(prefix, chunk)| {
            let base = (prefix as u64) << block_bits(n);
            walk_block(&[qubo], &couplings, prefix as u64, |idx, e| {
                chunk[(idx - base) as usize] = e[0];
            });
        });
    Ok(table)
}

/// Exhaustive comparison of penalized and penalty-free assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyAudit {
    pub n: usize,
    /// Lowest energy among assignments the validity checker accepts.
    pub min_valid_energy: f64,
    pub min_valid_index: u64,
    /// Lowest energy among assignments with a nonzero penalty.
    pub min_penalized_energy: f64,
    pub min_penalized_index: u64,
    pub penalty_free: usize,
    pub valid: usize,
    /// Penalty-free yet rejected by the validity checker, in index order.
    pub penalty_free_invalid: Vec<u64>,
}

impl PenaltyAudit {
    /// Every penalized assignment lies strictly above the best valid one.
    pub fn penalties_sufficient(&self) -> bool {
        self.min_penalized_energy > self.min_valid_energy
    }
}

pub fn penalty_audit(model: &QuboModel, limit: usize) -> Result<PenaltyAudit> {
    let n = model.len();
    check_limit(n, limit)?;
    let couplings = vec![model.qubo.couplings(), model.penalty.couplings()];
    let blocks = 1u64 << (n - block_bits(n));
    let per_block: Vec<((f64, u64), Vec<u64>)> = (0..blocks)
        .into_par_iter()
        .map(|prefix| {
            let mut best = (f64::INFINITY, u64::MAX);
            let mut free = Vec::new();
            walk_block(&[&model.qubo, &model.penalty], &couplings, prefix, |idx, e| {
                // penalty values are small integers, exact in floating point
                if e[1] > 0.5 {
                    best = better(best, (e[0], idx));
                } else {
                    free.push(idx);
                }
            });
            (best, free)
        })
        .collect();

    let mut min_penalized = (f64::INFINITY, u64::MAX);
    let mut free = Vec::new();
    for (best, list) in per_block {
        min_penalized = better(min_penalized, best);
        free.extend(list);
    }
    free.sort_unstable();

    let mut min_valid = (f64::INFINITY, u64::MAX);
    let mut valid = 0;
    let mut invalid = Vec::new();
    for &idx in &free {
        let a = Assignment::from_index(idx, n);
        if check_validity(&model.layout, &a)?.valid {
            valid += 1;
            min_valid = better(min_valid, (model.qubo.energy_of_index(idx), idx));
        } else {
            invalid.push(idx);
        }
    }
    Ok(PenaltyAudit {
        n,
        min_valid_energy: if valid > 0 {
            model.qubo.energy_of_index(min_valid.1)
        } else {
            f64::INFINITY
        },
        min_valid_index: min_valid.1,
        min_penalized_energy: model.qubo.energy_of_index(min_penalized.1),
        min_penalized_index: min_penalized.1,
        penalty_free: free.len(),
        valid,
        penalty_free_invalid: invalid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_qubo(n: usize, seed: u64) -> Qubo {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut q = Qubo::new(n);
        q.add_constant(rng.gen_range(-3.0..3.0));
        for i in 0..n {
            q.add_linear(i, rng.gen_range(-5.0..5.0));
            for j in i + 1..n {
                if rng.gen_bool(0.4) {
                    q.add_quadratic(i, j, rng.gen_range(-4.0..4.0));
                }
            }
        }
        q
    }

    #[test]
    fn single_positive_linear_prefers_zero() {
        let mut q = Qubo::new(1);
        q.add_linear(0, 5.0);
        let r = exhaustive_minimize(&q, DEFAULT_EXHAUSTIVE_LIMIT).unwrap();
        assert_eq!(r.index, 0);
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn matches_plain_enumeration() {
        for seed in 0..6 {
            let q = random_qubo(12, seed);
            let (mut best_e, mut best_i) = (f64::INFINITY, 0);
            for idx in 0..(1u64 << 12) {
                let e = q.energy_of_index(idx);
                if e < best_e - 1e-9 {
                    best_e = e;
                    best_i = idx;
                }
            }
            let r = exhaustive_minimize(&q, 26).unwrap();
            assert_eq!(r.index, best_i);
            assert!((r.energy - best_e).abs() < 1e-9);
        }
    }

    #[test]
    fn ties_resolve_to_smallest_index() {
        // every assignment has energy 2
        let mut q = Qubo::new(18);
        q.add_constant(2.0);
        let r = exhaustive_minimize(&q, 26).unwrap();
        assert_eq!(r.index, 0);
        let mut q = Qubo::new(3);
        q.add_linear(0, -1.0);
        q.add_linear(1, -1.0);
        q.add_quadratic(0, 1, 1.0);
        // 0b001, 0b010 and 0b011 all reach -1
        assert_eq!(exhaustive_minimize(&q, 26).unwrap().index, 0b001);
    }

    #[test]
    fn table_matches_direct_energies() {
        let q = random_qubo(17, 42);
        let table = energy_table(&q, 26).unwrap();
        for (idx, &e) in table.iter().enumerate() {
            assert!((e - q.energy_of_index(idx as u64)).abs() < 1e-9);
        }
    }

    #[test]
    fn limit_is_enforced() {
        let q = Qubo::new(30);
        assert!(matches!(
            exhaustive_minimize(&q, 26),
            Err(Error::TooManyVariables { n: 30, limit: 26 })
        ));
    }
}
