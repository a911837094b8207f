//! Statevector simulation of the alternating-operator ansatz.
//!
//! The state starts in the uniform superposition. Each layer multiplies
//! every amplitude `a_z` by `exp(-i gamma E(z))`, where `E` is the QUBO
//! energy of basis state `z` (the cost Hamiltonian is diagonal, so no gate
//! decomposition is needed), then applies `exp(-i beta X)` to every qubit.
//! Basis index bit `i` is variable `i`.

mod optimize;
mod plot;

pub use optimize::{optimize_parameters, OptimizationOutcome, OptimizerConfig, TraceEntry};
pub use plot::render_frequency_svg;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::encoding::{decode, Assignment, Decoded};
use crate::error::{Error, Result};
use crate::oracle::Path;
use crate::qubo::{energy_table, Qubo, QuboModel};
use crate::topology::Topology;

pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Amplitude blocks below this size are processed serially.
const PAR_CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct QaoaState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= usize::BITS as usize - 1 {
        return Err(Error::TooManyVariables { n, limit: cap });
    }
    Ok(())
}

impl QaoaState {
    /// Uniform superposition over `n` qubits.
    pub fn uniform(n: usize, cap: usize) -> Result<Self> {
        check_cap(n, cap)?;
        let dim = 1usize << n;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(QaoaState {
            n,
            amplitudes: vec![amp; dim],
        })
    }

    pub fn basis(n: usize, index: u64, cap: usize) -> Result<Self> {
        check_cap(n, cap)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        Ok(QaoaState { n, amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "statevector length {dim} is not a power of two"
            )));
        }
        Ok(QaoaState {
            n: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        chunked_sum(&self.amplitudes, |a| a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.par_iter().map(|a| a.norm_sqr()).collect()
    }

    fn reset_uniform(&mut self) {
        let amp = Complex64::new((self.amplitudes.len() as f64).sqrt().recip(), 0.0);
        self.amplitudes.par_iter_mut().for_each(|a| *a = amp);
    }
}

pub fn init_state(n: usize, cap: usize) -> Result<QaoaState> {
    QaoaState::uniform(n, cap)
}

/// Order-stable parallel sum: fixed-size chunks, then a serial total.
fn chunked_sum<T: Sync>(items: &[T], f: impl Fn(&T) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = items
        .par_chunks(PAR_CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    partial.into_iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::LengthMismatch {
                expected: gammas.len(),
                found: betas.len(),
            });
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn zeros(layers: usize) -> Self {
        QaoaParams {
            gammas: vec![0.0; layers],
            betas: vec![0.0; layers],
        }
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    /// `[gamma_1..gamma_p, beta_1..beta_p]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        let p = flat.len() / 2;
        QaoaParams {
            gammas: flat[..p].to_vec(),
            betas: flat[p..2 * p].to_vec(),
        }
    }
}

/// Diagonal of the cost Hamiltonian: the QUBO energy of every basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDiagonal {
    n: usize,
    energies: Vec<f64>,
}

impl CostDiagonal {
    pub fn from_qubo(qubo: &Qubo, cap: usize) -> Result<Self> {
        check_cap(qubo.len(), cap)?;
        Ok(CostDiagonal {
            n: qubo.len(),
            energies: energy_table(qubo, cap)?,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn mean(&self) -> f64 {
        chunked_sum(&self.energies, |&e| e) / self.energies.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        (chunked_sum(&self.energies, |&e| (e - mean) * (e - mean)) / self.energies.len() as f64)
            .sqrt()
    }
}

fn check_dims(state: &QaoaState, cost: &CostDiagonal) -> Result<()> {
    if state.n != cost.n {
        return Err(Error::LengthMismatch {
            expected: cost.n,
            found: state.n,
        });
    }
    Ok(())
}

pub fn apply_cost_phase(state: &mut QaoaState, cost: &CostDiagonal, gamma: f64) {
    state
        .amplitudes
        .par_iter_mut()
        .zip(cost.energies.par_iter())
        .for_each(|(a, &e)| *a *= Complex64::from_polar(1.0, -gamma * e));
}

/// `exp(-i beta X)` on every qubit.
pub fn apply_mixer(state: &mut QaoaState, beta: f64) {
    let (c, s) = (beta.cos(), beta.sin());
    let rotate = |lo: &mut Complex64, hi: &mut Complex64| {
        let (a0, a1) = (*lo, *hi);
        // [[cos, -i sin], [-i sin, cos]]
        *lo = Complex64::new(c * a0.re + s * a1.im, c * a0.im - s * a1.re);
        *hi = Complex64::new(c * a1.re + s * a0.im, c * a1.im - s * a0.re);
    };
    let dim = state.amplitudes.len();
    for q in 0..state.n {
        let half = 1usize << q;
        let block = half << 1;
        if block <= PAR_CHUNK {
            // many small pairs: hand out runs of whole blocks
            state
                .amplitudes
                .par_chunks_mut(PAR_CHUNK.min(dim))
                .for_each(|run| {
                    for pair in run.chunks_mut(block) {
                        let (lo, hi) = pair.split_at_mut(half);
                        lo.iter_mut().zip(hi.iter_mut()).for_each(|(a, b)| rotate(a, b));
                    }
                });
        } else {
            state.amplitudes.par_chunks_mut(block).for_each(|pair| {
                let (lo, hi) = pair.split_at_mut(half);
                lo.par_chunks_mut(PAR_CHUNK)
                    .zip(hi.par_chunks_mut(PAR_CHUNK))
                    .for_each(|(l, h)| {
                        l.iter_mut().zip(h.iter_mut()).for_each(|(a, b)| rotate(a, b));
                    });
            });
        }
    }
}

/// Applies every layer of `params` in order.
pub fn evolve(state: &mut QaoaState, cost: &CostDiagonal, params: &QaoaParams) -> Result<()> {
    check_dims(state, cost)?;
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        apply_cost_phase(state, cost, gamma);
        apply_mixer(state, beta);
    }
    Ok(())
}

/// `sum_z |a_z|^2 E(z)`.
pub fn expectation(state: &QaoaState, cost: &CostDiagonal) -> Result<f64> {
    check_dims(state, cost)?;
    let partial: Vec<f64> = state
        .amplitudes
        .par_chunks(PAR_CHUNK)
        .zip(cost.energies.par_chunks(PAR_CHUNK))
        .map(|(a, e)| a.iter().zip(e).map(|(a, e)| a.norm_sqr() * e).sum::<f64>())
        .collect();
    Ok(partial.into_iter().sum())
}

/// Expectation after evolving the uniform state, reusing `scratch`.
pub(crate) fn evaluate_params(
    scratch: &mut QaoaState,
    cost: &CostDiagonal,
    params: &QaoaParams,
) -> f64 {
    scratch.reset_uniform();
    evolve(scratch, cost, params).expect("dimensions checked by caller");
    expectation(scratch, cost).expect("dimensions checked by caller")
}

/// Measurement outcomes keyed by basis index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleHistogram {
    pub num_qubits: usize,
    pub shots: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl SampleHistogram {
    pub fn bitstring(&self, index: u64) -> String {
        Assignment::from_index(index, self.num_qubits).to_bitstring()
    }
}

/// Multinomial draw of `shots` outcomes from `|a_z|^2`.
pub fn sample(state: &QaoaState, shots: u64, seed: u64) -> Result<SampleHistogram> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(state.amplitudes.len());
    let mut total = 0.0;
    for a in &state.amplitudes {
        total += a.norm_sqr();
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.gen::<f64>() * total;
        let idx = cumulative
            .partition_point(|&c| c <= u)
            .min(cumulative.len() - 1);
        *counts.entry(idx as u64).or_insert(0) += 1;
    }
    Ok(SampleHistogram {
        num_qubits: state.n,
        shots,
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedRow {
    pub index: u64,
    pub bitstring: String,
    pub count: u64,
    pub frequency: f64,
    pub energy: f64,
    pub valid: bool,
    /// Failed checks, or `valid`.
    pub validity: String,
    #[serde(skip)]
    pub paths: Option<(Path, Path)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedReport {
    pub shots: u64,
    pub rows: Vec<RankedRow>,
    /// Row index of the most frequent valid outcome.
    pub answer: Option<usize>,
}

impl RankedReport {
    pub fn answer_row(&self) -> Option<&RankedRow> {
        self.answer.map(|i| &self.rows[i])
    }

    pub fn describe_paths(&self, row: &RankedRow, topology: &Topology) -> Option<(String, String)> {
        row.paths
            .as_ref()
            .map(|(a, b)| (a.describe(topology), b.describe(topology)))
    }
}

/// Rows sorted by frequency (descending), then energy (ascending), then
/// index. The answer is the first valid row.
pub fn rank_solutions(histogram: &SampleHistogram, model: &QuboModel) -> Result<RankedReport> {
    if histogram.num_qubits != model.len() {
        return Err(Error::LengthMismatch {
            expected: model.len(),
            found: histogram.num_qubits,
        });
    }
    let mut rows = Vec::with_capacity(histogram.counts.len());
    for (&index, &count) in &histogram.counts {
        let a = Assignment::from_index(index, model.len());
        let decoded = decode(&model.layout, &a)?;
        let (valid, validity, paths) = match decoded {
            Decoded::Valid { path1, path2 } => (true, "valid".to_string(), Some((path1, path2))),
            Decoded::Invalid(report) => (false, report.describe(), None),
        };
        rows.push(RankedRow {
            index,
            bitstring: a.to_bitstring(),
            count,
            frequency: count as f64 / histogram.shots as f64,
            energy: model.qubo.energy_of_index(index),
            valid,
            validity,
            paths,
        });
    }
    rows.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(a.energy.total_cmp(&b.energy))
            .then(a.index.cmp(&b.index))
    });
    let answer = rows.iter().position(|r| r.valid);
    Ok(RankedReport {
        shots: histogram.shots,
        rows,
        answer,
    })
}

/// Settings for [`run_pipeline`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub layers: usize,
    pub shots: u64,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub qubit_cap: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            layers: 8,
            shots: 20_000,
            seed: 0,
            optimizer: OptimizerConfig::default(),
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub optimization: OptimizationOutcome,
    pub histogram: SampleHistogram,
    pub report: RankedReport,
}

/// Optimize, evolve, sample and rank. The optimizer and the sampler share
/// `config.seed`.
pub fn run_pipeline(model: &QuboModel, config: &PipelineConfig) -> Result<PipelineOutcome> {
    let cost = CostDiagonal::from_qubo(&model.qubo, config.qubit_cap)?;
    let optimization = optimize_parameters(&cost, config.layers, &config.optimizer, config.seed)?;
    let mut state = init_state(model.len(), config.qubit_cap)?;
    evolve(&mut state, &cost, &optimization.params)?;
    let histogram = sample(&state, config.shots, config.seed)?;
    let report = rank_solutions(&histogram, model)?;
    Ok(PipelineOutcome {
        optimization,
        histogram,
        report,
    })
}
