use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, HaltingRule, SignalModel};
use super::generate::{draw_noise, generate_compressible_with, generate_signal_with, rng_from_seed};
use crate::guarantees::oracle_mse_exact;
use crate::linalg::{best_k_approx, Dictionary, SupportSet};
use crate::pursuit::{oracle_estimator, run, Algorithm, Halting, NormEstimate, PursuitConfig};

/// Everything a trial needs besides the dictionary and sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOptions {
    pub halting: HaltingRule,
    pub iterations: usize,
    pub iteration_cap: usize,
    pub signal_model: SignalModel,
}

impl TrialOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        TrialOptions {
            halting: cfg.halting,
            iterations: cfg.iterations,
            iteration_cap: cfg.iteration_cap,
            signal_model: cfg.signal(),
        }
    }

    fn pursuit_config(&self, k: usize, sigma: f64, x_norm: f64) -> PursuitConfig {
        let halting = match self.halting {
            HaltingRule::Fixed => Halting::FixedIterations(self.iterations),
            HaltingRule::TrueNorm => Halting::PracticalLogRule {
                sigma,
                norm: NormEstimate::Known(x_norm),
            },
            HaltingRule::MeasurementNorm => Halting::PracticalLogRule {
                sigma,
                norm: NormEstimate::MeasurementNorm,
            },
        };
        PursuitConfig {
            k,
            halting,
            max_iterations_cap: self.iteration_cap,
            trace_enabled: false,
        }
    }
}

/// One algorithm's outcome on one `(x, e)` draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// The trial seed, which reproduces the draw.
    pub trial_id: u64,
    pub trial_index: usize,
    pub k: usize,
    pub sigma: f64,
    pub algorithm: Algorithm,
    /// `||x - x_hat||_2^2`, absent when the algorithm failed.
    pub squared_error: Option<f64>,
    pub oracle_squared_error: f64,
    /// `trace((D_T* D_T)^{-1}) sigma^2` on the true support.
    pub oracle_expected_se: f64,
    /// Estimated support equals the true (or dominant `K`) support.
    pub support_recovered: bool,
    pub iterations_run: usize,
    /// Error category when the algorithm failed.
    pub error: Option<String>,
}

/// Draw one signal and one noise vector from `trial_seed` and run every
/// requested algorithm on the shared measurement. Failures are recorded,
/// not raised.
pub fn run_trial(
    dict: &Dictionary,
    k: usize,
    sigma: f64,
    algorithms: &[Algorithm],
    trial_seed: u64,
    trial_index: usize,
    opts: &TrialOptions,
) -> Vec<TrialRecord> {
    let mut rng = rng_from_seed(trial_seed);
    let n = dict.n_atoms();
    let (x, support): (DVector<f64>, SupportSet) = match opts.signal_model {
        SignalModel::Spikes => {
            let s = generate_signal_with(&mut rng, n, k);
            (s.values().clone(), s.support().clone())
        }
        SignalModel::Compressible { decay } => {
            let x = generate_compressible_with(&mut rng, n, decay);
            let support = best_k_approx(&x, k).support().clone();
            (x, support)
        }
    };
    let e = draw_noise(&mut rng, dict.m(), sigma);
    let y = dict.apply(&x) + &e;

    let oracle = oracle_estimator(dict, &y, &support);
    let oracle_se = oracle.as_ref().map(|r| r.squared_error(&x)).unwrap_or(f64::NAN);
    let oracle_expected = oracle_mse_exact(dict, &support, sigma).unwrap_or(f64::NAN);
    let cfg = opts.pursuit_config(k, sigma, x.norm());

    algorithms
        .iter()
        .map(|&alg| {
            let outcome = if alg == Algorithm::Oracle {
                oracle_estimator(dict, &y, &support)
            } else {
                run(alg, dict, &y, &cfg, None)
            };
            let mut rec = TrialRecord {
                trial_id: trial_seed,
                trial_index,
                k,
                sigma,
                algorithm: alg,
                squared_error: None,
                oracle_squared_error: oracle_se,
                oracle_expected_se: oracle_expected,
                support_recovered: false,
                iterations_run: 0,
                error: None,
            };
            match outcome {
                Ok(res) => {
                    rec.squared_error = Some(res.squared_error(&x));
                    rec.support_recovered = res.estimate.support() == &support;
                    rec.iterations_run = res.iterations_run;
                }
                Err(err) => rec.error = Some(err.category().to_string()),
            }
            rec
        })
        .collect()
}
