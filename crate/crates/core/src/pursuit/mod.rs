//! Greedy-like recovery: Subspace Pursuit, CoSaMP, Iterative Hard
//! Thresholding, and the support-aware oracle they are measured against.
//!
//! Every pursuit starts from an empty support with residual `y`, runs the
//! number of iterations chosen by its [`Halting`] rule, and returns a
//! `K`-sparse estimate with an optional per-iteration trace.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Dictionary, SparseSignal, SupportSet};

mod cosamp;
pub mod diagnostics;
mod iht;
mod oracle;
mod sp;
pub mod trace;

pub use cosamp::cosamp;
pub use diagnostics::{
    check_recurrences, recurrence_diagnostics, recurrence_diagnostics_with_budget, Inequality,
    InequalityCheck, RecurrenceReport,
};
pub use iht::{iht, DIVERGENCE_FACTOR};
pub use oracle::oracle_estimator;
pub use sp::subspace_pursuit;
pub use trace::{read_trace_jsonl, write_trace_jsonl};

pub const DEFAULT_ITERATION_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sp,
    Cosamp,
    Iht,
    Oracle,
}

impl Algorithm {
    pub const PURSUITS: [Algorithm; 3] = [Algorithm::Sp, Algorithm::Cosamp, Algorithm::Iht];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sp => "sp",
            Algorithm::Cosamp => "cosamp",
            Algorithm::Iht => "iht",
            Algorithm::Oracle => "oracle",
        }
    }

    /// Multiple `p` such that the algorithm's guarantee uses `delta_{pK}`.
    pub fn rip_order(self) -> usize {
        match self {
            Algorithm::Cosamp => 4,
            _ => 3,
        }
    }

    /// Largest `K` for which the restricted solves stay well posed.
    pub fn max_sparsity(self, m: usize) -> usize {
        match self {
            Algorithm::Sp | Algorithm::Iht => m / 3,
            Algorithm::Cosamp => m / 4,
            Algorithm::Oracle => m,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sp" | "subspace_pursuit" => Ok(Algorithm::Sp),
            "cosamp" => Ok(Algorithm::Cosamp),
            "iht" => Ok(Algorithm::Iht),
            "oracle" => Ok(Algorithm::Oracle),
            other => Err(Error::Parse(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Where the practical halting rule gets its estimate of `||x||_2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormEstimate {
    /// `||y||_2`, available to any solver.
    MeasurementNorm,
    /// A caller-supplied value, e.g. the true norm in a simulation.
    Known(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Halting {
    FixedIterations(usize),
    /// `ceil(log2(||x||_2 / (sqrt(K) sigma)))` iterations.
    PracticalLogRule { sigma: f64, norm: NormEstimate },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PursuitConfig {
    pub k: usize,
    pub halting: Halting,
    pub max_iterations_cap: usize,
    pub trace_enabled: bool,
}

impl PursuitConfig {
    pub fn fixed(k: usize, iterations: usize) -> Self {
        PursuitConfig {
            k,
            halting: Halting::FixedIterations(iterations),
            max_iterations_cap: DEFAULT_ITERATION_CAP.max(iterations),
            trace_enabled: false,
        }
    }

    pub fn practical(k: usize, sigma: f64, norm: NormEstimate) -> Self {
        PursuitConfig {
            k,
            halting: Halting::PracticalLogRule { sigma, norm },
            max_iterations_cap: DEFAULT_ITERATION_CAP,
            trace_enabled: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace_enabled = true;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.max_iterations_cap = cap;
        self
    }

    /// Number of iterations to run for measurement `y`.
    pub fn iterations_for(&self, y: &DVector<f64>) -> Result<usize> {
        if self.max_iterations_cap == 0 {
            return Err(Error::Config("max_iterations_cap must be at least 1".into()));
        }
        match self.halting {
            Halting::FixedIterations(0) => {
                Err(Error::Config("fixed iteration count must be at least 1".into()))
            }
            Halting::FixedIterations(count) if count > self.max_iterations_cap => {
                Err(Error::IterationBudgetExceeded {
                    requested: count,
                    cap: self.max_iterations_cap,
                })
            }
            Halting::FixedIterations(count) => Ok(count),
            Halting::PracticalLogRule { sigma, norm } => {
                let x_norm = match norm {
                    NormEstimate::MeasurementNorm => y.norm(),
                    NormEstimate::Known(v) => v,
                };
                Ok(practical_iteration_count(x_norm, self.k, sigma, self.max_iterations_cap))
            }
        }
    }

    pub(crate) fn validate(&self, algorithm: Algorithm, dict: &Dictionary, y: &DVector<f64>) -> Result<()> {
        if y.len() != dict.m() {
            return Err(Error::Dimension(format!(
                "y has length {}, dictionary has {} rows",
                y.len(),
                dict.m()
            )));
        }
        if self.k == 0 {
            return Err(Error::Precondition("K must be at least 1".into()));
        }
        if self.k > dict.n_atoms() {
            return Err(Error::Precondition(format!(
                "K = {} exceeds the number of atoms {}",
                self.k,
                dict.n_atoms()
            )));
        }
        let limit = algorithm.max_sparsity(dict.m());
        if self.k > limit {
            return Err(Error::Precondition(format!(
                "{algorithm} needs {}K <= m, got K = {} with m = {}",
                algorithm.rip_order(),
                self.k,
                dict.m()
            )));
        }
        Ok(())
    }
}

/// `ceil(log2(x_norm / (sqrt(k) sigma)))`, clamped to `[1, cap]`.
///
/// A zero or non-finite `sigma` means the ratio is unbounded and returns
/// `cap`; a non-positive `x_norm` returns 1.
pub fn practical_iteration_count(x_norm: f64, k: usize, sigma: f64, cap: usize) -> usize {
    let cap = cap.max(1);
    if !(sigma > 0.0) || !sigma.is_finite() {
        return cap;
    }
    if !(x_norm > 0.0) {
        return 1;
    }
    let ratio = x_norm / ((k.max(1) as f64).sqrt() * sigma);
    // shave rounding noise so exact powers of two are not bumped up
    let l = (ratio.log2() - 1e-9).ceil();
    if l.is_nan() || l < 1.0 {
        1
    } else if l >= cap as f64 {
        cap
    } else {
        l as usize
    }
}

/// One pass of a pursuit's main loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// `l`, starting at 1.
    pub iteration: usize,
    /// `T^{l-1}`.
    pub support_before: SupportSet,
    /// `T_Delta` (SP and CoSaMP).
    pub delta_support: Option<SupportSet>,
    /// `T~^l = T^{l-1} u T_Delta` (SP and CoSaMP).
    pub merged_support: Option<SupportSet>,
    /// `T^l`.
    pub pruned_support: SupportSet,
    /// `x_p` on `merged_support` (SP, CoSaMP) or the full gradient step
    /// restricted to `pruned_support` (IHT).
    pub coefficients: Vec<f64>,
    /// The iterate `x^l` on `pruned_support`.
    pub estimate: Vec<f64>,
    /// `||y_r^l||_2`.
    pub residual_norm: f64,
    /// `||x - x^l||_2` once ground truth is attached.
    pub estimate_error: Option<f64>,
}

impl IterationRecord {
    /// The iterate as a dense length-`n` vector.
    pub fn estimate_dense(&self, n: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        for (i, &c) in self.pruned_support.iter().zip(&self.estimate) {
            v[i] = c;
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PursuitResult {
    pub algorithm: Algorithm,
    pub estimate: SparseSignal,
    pub iterations_run: usize,
    pub trace: Option<Vec<IterationRecord>>,
}

impl PursuitResult {
    /// `||x - x_hat||_2^2`.
    pub fn squared_error(&self, x: &DVector<f64>) -> f64 {
        (x - self.estimate.values()).norm_squared()
    }

    /// Fill `estimate_error` on every trace record.
    pub fn attach_ground_truth(&mut self, x: &DVector<f64>) {
        if let Some(trace) = self.trace.as_mut() {
            for rec in trace.iter_mut() {
                let err = (x - rec.estimate_dense(x.len())).norm();
                rec.estimate_error = Some(err);
            }
        }
    }
}

/// Run `algorithm`; the oracle needs the true support in `oracle_support`.
pub fn run(
    algorithm: Algorithm,
    dict: &Dictionary,
    y: &DVector<f64>,
    cfg: &PursuitConfig,
    oracle_support: Option<&SupportSet>,
) -> Result<PursuitResult> {
    match algorithm {
        Algorithm::Sp => subspace_pursuit(dict, y, cfg),
        Algorithm::Cosamp => cosamp(dict, y, cfg),
        Algorithm::Iht => iht(dict, y, cfg),
        Algorithm::Oracle => {
            let support = oracle_support
                .ok_or_else(|| Error::Precondition("the oracle needs the true support".into()))?;
            oracle_estimator(dict, y, support)
        }
    }
}

/// Map indices into `within` back to atom indices.
pub(crate) fn lift_support(local: &SupportSet, within: &SupportSet) -> SupportSet {
    // both are increasing, so the lifted list is increasing too
    SupportSet::from_unsorted(local.iter().map(|i| within.indices()[i]).collect())
}
