//! Classical outer loop: Nelder-Mead over `(gamma, beta)` with restarts.
//!
//! Gammas are optimized in units of `1 / sigma`, where `sigma` is the
//! standard deviation of the energy over all basis states, so the simplex
//! sees comparable scales for both angle families whatever the magnitude of
//! the QUBO coefficients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::{evaluate_params, CostDiagonal, QaoaParams, QaoaState};

/// Above this many qubits restarts run one after another to bound memory.
const PARALLEL_RESTART_QUBITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// Objective evaluations per restart.
    pub max_evaluations: usize,
    pub restarts: usize,
    /// Total angle of the linear-ramp start used by restart 0.
    pub ramp: f64,
    /// Initial simplex edge, in scaled units.
    pub step: f64,
    /// Stop once the simplex values span less than this.
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_evaluations: 200,
            restarts: 5,
            ramp: 0.75,
            step: 0.15,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub evaluation: usize,
    pub value: f64,
    /// Best value seen so far in this restart.
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationOutcome {
    pub params: QaoaParams,
    pub expectation: f64,
    /// Expectation at all-zero angles, i.e. the mean energy.
    pub baseline: f64,
    pub gamma_scale: f64,
    pub best_restart: usize,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    tolerance: f64,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..dim {
        if evals >= max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    if simplex.len() < dim + 1 {
        order(&mut simplex);
        return simplex.swap_remove(0);
    }

    while evals < max_evals {
        order(&mut simplex);
        if simplex[dim].1 - simplex[0].1 < tolerance {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = if evals < max_evals { eval(&xe, &mut evals) } else { f64::INFINITY };
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else if evals >= max_evals {
            if fr < simplex[dim].1 {
                simplex[dim] = (xr, fr);
            }
        } else {
            let (xc, fc) = if fr < simplex[dim].1 {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[dim].1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    if evals >= max_evals {
                        break;
                    }
                    let x: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let fx = eval(&x, &mut evals);
                    *v = (x, fx);
                }
            }
        }
    }
    order(&mut simplex);
    simplex.swap_remove(0)
}

fn start_point(layers: usize, config: &OptimizerConfig, restart: usize, seed: u64) -> Vec<f64> {
    let p = layers as f64;
    if restart == 0 {
        let gammas = (0..layers).map(|k| (k as f64 + 0.5) / p * config.ramp);
        let betas = (0..layers).map(|k| (1.0 - (k as f64 + 0.5) / p) * config.ramp);
        return gammas.chain(betas).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
    let mut x: Vec<f64> = (0..layers).map(|_| rng.gen_range(0.0..2.0 * config.ramp)).collect();
    x.extend((0..layers).map(|_| rng.gen_range(0.0..std::f64::consts::FRAC_PI_2)));
    x
}

/// Minimizes the expectation over `layers` rounds of angles.
///
/// Restart 0 starts from a linear ramp, later restarts from seeded random
/// angles. The result is never worse than all-zero angles.
pub fn optimize_parameters(
    cost: &CostDiagonal,
    layers: usize,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationOutcome> {
    if layers == 0 {
        return Err(Error::InvalidParameter("at least one layer is required".into()));
    }
    if config.max_evaluations == 0 || config.restarts == 0 {
        return Err(Error::InvalidParameter(
            "optimizer needs at least one evaluation and one restart".into(),
        ));
    }
    let n = cost.num_qubits();
    let sigma = cost.std_dev();
    let gamma_scale = if sigma > 0.0 { sigma.recip() } else { 1.0 };
    let baseline = cost.mean();

    let to_params = |u: &[f64]| {
        let mut params = QaoaParams::from_flat(u);
        params.gammas.iter_mut().for_each(|g| *g *= gamma_scale);
        params
    };
    let run = |restart: usize| -> Result<(Vec<f64>, f64, Vec<TraceEntry>)> {
        let mut scratch = QaoaState::uniform(n, n)?;
        let mut trace = Vec::new();
        let mut best = f64::INFINITY;
        let mut objective = |u: &[f64]| {
            let value = evaluate_params(&mut scratch, cost, &to_params(u));
            best = best.min(value);
            trace.push(TraceEntry {
                restart,
                evaluation: trace.len() + 1,
                value,
                best,
            });
            value
        };
        let x0 = start_point(layers, config, restart, seed);
        let (x, fx) = nelder_mead(
            &mut objective,
            &x0,
            config.step,
            config.max_evaluations,
            config.tolerance,
        );
        Ok((x, fx, trace))
    };
    let runs: Vec<(Vec<f64>, f64, Vec<TraceEntry>)> = if n <= PARALLEL_RESTART_QUBITS {
        (0..config.restarts).into_par_iter().map(run).collect::<Result<_>>()?
    } else {
        (0..config.restarts).map(run).collect::<Result<_>>()?
    };

    let mut best_restart = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.1 < runs[best_restart].1 {
            best_restart = r;
        }
    }
    let evaluations = runs.iter().map(|r| r.2.len()).sum();
    let trace: Vec<TraceEntry> = runs.iter().flat_map(|r| r.2.iter().copied()).collect();
    let (x, fx, _) = &runs[best_restart];
    let (params, expectation) = if *fx <= baseline {
        (to_params(x), *fx)
    } else {
        (QaoaParams::zeros(layers), baseline)
    };
    Ok(OptimizationOutcome {
        params,
        expectation,
        baseline,
        gamma_scale,
        best_restart,
        evaluations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::Qubo;

    #[test]
    fn nelder_mead_finds_a_quadratic_bowl() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5;
        let (x, fx) = nelder_mead(&mut f, &[0.0, 0.0], 0.5, 2000, 1e-14);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 2.0).abs() < 1e-4);
        assert!((fx - 0.5).abs() < 1e-8);
    }

    #[test]
    fn nelder_mead_respects_the_budget() {
        let mut count = 0;
        let mut f = |x: &[f64]| {
            count += 1;
            x.iter().map(|v| v.sin()).sum::<f64>()
        };
        let _ = nelder_mead(&mut f, &[0.3; 6], 0.1, 25, 0.0);
        assert!(count <= 25);
    }

    fn ferromagnet(n: usize) -> Qubo {
        let mut q = Qubo::new(n);
        for i in 0..n {
            q.add_linear(i, 1.0);
            if i + 1 < n {
                q.add_quadratic(i, i + 1, -1.5);
            }
        }
        q
    }

    #[test]
    fn optimized_expectation_beats_the_mean() {
        let cost = CostDiagonal::from_qubo(&ferromagnet(6), 26).unwrap();
        let config = OptimizerConfig {
            max_evaluations: 80,
            restarts: 3,
            ..Default::default()
        };
        let out = optimize_parameters(&cost, 2, &config, 5).unwrap();
        assert!(out.expectation < out.baseline - 0.1);
        assert_eq!(out.evaluations, out.trace.len());
        assert!(out.trace.len() <= 240);
        assert_eq!(out, optimize_parameters(&cost, 2, &config, 5).unwrap());
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let cost = CostDiagonal::from_qubo(&ferromagnet(2), 26).unwrap();
        assert!(optimize_parameters(&cost, 0, &OptimizerConfig::default(), 0).is_err());
        let config = OptimizerConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(optimize_parameters(&cost, 1, &config, 0).is_err());
    }
}
