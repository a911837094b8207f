//! Single-flip Metropolis annealing with geometric cooling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::encoding::Assignment;
use crate::error::{Error, Result};

use super::{MinimumResult, Qubo};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    pub final_temperature: f64,
    pub sweeps: usize,
}

impl AnnealSchedule {
    /// Temperatures scaled to the largest single-flip energy change.
    pub fn for_qubo(qubo: &Qubo, sweeps: usize) -> Self {
        let couplings = qubo.couplings();
        let scale = (0..qubo.len())
            .map(|i| {
                qubo.linear()[i].abs() + couplings[i].iter().map(|&(_, c)| c.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
            .max(1e-9);
        AnnealSchedule {
            initial_temperature: scale,
            final_temperature: scale * 1e-4,
            sweeps,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
        }
        if !(self.initial_temperature > 0.0 && self.final_temperature > 0.0) {
            return Err(Error::InvalidParameter("temperatures must be positive".into()));
        }
        Ok(())
    }
}

/// One annealing run; returns the lowest-energy assignment visited.
pub fn anneal(qubo: &Qubo, schedule: AnnealSchedule, seed: u64) -> Result<MinimumResult> {
    schedule.validate()?;
    let n = qubo.len();
    let couplings = qubo.couplings();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();

    let mut field = qubo.linear().to_vec();
    for k in 0..n {
        for &(j, c) in &couplings[k] {
            if x[j] {
                field[k] += c;
            }
        }
    }
    let mut energy = qubo.energy(&Assignment::from_bits(x.clone()))?;
    let mut best = (energy, x.clone());

    let ratio = if schedule.sweeps > 1 {
        (schedule.final_temperature / schedule.initial_temperature)
            .powf(1.0 / (schedule.sweeps - 1) as f64)
    } else {
        1.0
    };
    let mut temperature = schedule.initial_temperature;
    for _ in 0..schedule.sweeps {
        for k in 0..n {
            let sign = if x[k] { -1.0 } else { 1.0 };
            let delta = sign * field[k];
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
                x[k] = !x[k];
                energy += delta;
                for &(j, c) in &couplings[k] {
                    field[j] += sign * c;
                }
                if energy < best.0 {
                    best = (energy, x.clone());
                }
            }
        }
        temperature *= ratio;
    }
    let assignment = Assignment::from_bits(best.1);
    let energy = qubo.energy(&assignment)?;
    let index = if n <= 64 { assignment.to_index() } else { 0 };
    Ok(MinimumResult {
        index,
        assignment,
        energy,
    })
}

/// Independent runs seeded `seed, seed + 1, ...`; the best (lowest energy,
/// then earliest run) wins.
pub fn anneal_restarts(
    qubo: &Qubo,
    schedule: AnnealSchedule,
    seed: u64,
    restarts: usize,
) -> Result<MinimumResult> {
    let runs: Vec<MinimumResult> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| anneal(qubo, schedule, seed.wrapping_add(r)))
        .collect::<Result<_>>()?;
    Ok(runs
        .into_iter()
        .reduce(|a, b| if b.energy < a.energy { b } else { a })
        .expect("at least one run"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_model_is_solved_in_one_sweep() {
        let mut q = Qubo::new(10);
        for i in 0..10 {
            q.add_linear(i, if i % 3 == 0 { -2.0 } else { 1.5 });
        }
        let schedule = AnnealSchedule {
            initial_temperature: 1e-6,
            final_temperature: 1e-6,
            sweeps: 1,
        };
        let r = anneal(&q, schedule, 9).unwrap();
        let expected: Vec<bool> = (0..10).map(|i| i % 3 == 0).collect();
        assert_eq!(r.assignment.bits(), &expected[..]);
        assert_eq!(r.energy, -8.0);
    }

    #[test]
    fn same_seed_same_result() {
        let mut q = Qubo::new(8);
        for i in 0..8 {
            q.add_linear(i, (i as f64) - 3.5);
            q.add_quadratic(i, (i + 1) % 8, 2.0);
        }
        let s = AnnealSchedule::for_qubo(&q, 50);
        assert_eq!(anneal(&q, s, 3).unwrap(), anneal(&q, s, 3).unwrap());
        assert_eq!(
            anneal_restarts(&q, s, 3, 4).unwrap(),
            anneal_restarts(&q, s, 3, 4).unwrap()
        );
    }

    #[test]
    fn zero_sweeps_is_rejected() {
        let q = Qubo::new(2);
        let s = AnnealSchedule {
            initial_temperature: 1.0,
            final_temperature: 0.1,
            sweeps: 0,
        };
        assert!(anneal(&q, s, 0).is_err());
    }
}
