//! Per-iteration checks of the recurrence inequalities behind the
//! pursuit guarantees.
//!
//! With `delta` the relevant restricted isometry constant (`delta_{3K}` for
//! SP and IHT, `delta_{4K}` for CoSaMP) and `nu = ||D*_{T_e} e||_2`:
//!
//! * SP identification: `||x_{T - T~^l}|| <= 2 delta/(1-delta)^2 ||x_{T - T^{l-1}}|| + 2/(1-delta)^2 nu`
//! * SP pruning: `||x_{T - T^l}|| <= (1+delta)/(1-delta) ||x_{T - T~^l}|| + 4/(1-delta) nu`
//! * SP composed: `||x_{T - T^l}|| <= rho_SP ||x_{T - T^{l-1}}|| + tau_SP nu`
//! * CoSaMP: `||x - x^l|| <= rho_CoSaMP ||x - x^{l-1}|| + tau_CoSaMP nu`
//! * IHT: `||x - x^l|| <= sqrt(8) delta ||x - x^{l-1}|| + 4 nu`
//!
//! The first iterate of every algorithm is compared against `x^0 = 0` and
//! `T^0 = {}`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{Algorithm, IterationRecord};
use crate::error::{Error, Result};
use crate::guarantees::{cosamp_constants, sp_constants};
use crate::linalg::{Dictionary, SparseSignal, SupportSet};
use crate::metrics::{
    rip_exact_with_budget, worst_case_noise_correlation, NoiseMode, DEFAULT_ENUMERATION_BUDGET,
};

/// Absolute slack, scaled by `1 + ||x||_2`, allowed for rounding.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    SpIdentification,
    SpPruning,
    SpComposed,
    Cosamp,
    Iht,
}

impl Inequality {
    pub fn name(self) -> &'static str {
        match self {
            Inequality::SpIdentification => "sp_identification",
            Inequality::SpPruning => "sp_pruning",
            Inequality::SpComposed => "sp_composed",
            Inequality::Cosamp => "cosamp",
            Inequality::Iht => "iht",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub iteration: usize,
    pub inequality: Inequality,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub algorithm: Algorithm,
    /// The RIP constant plugged into the coefficients.
    pub delta: f64,
    /// `||D*_{T_e} e||_2`, or its upper bound when `noise_mode` says so.
    pub noise_correlation: f64,
    pub noise_mode: NoiseMode,
    /// False when `delta >= 1`, where the coefficients are meaningless and
    /// no check is made.
    pub applicable: bool,
    pub checks: Vec<InequalityCheck>,
}

impl RecurrenceReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }

    /// Fraction of checks that hold; 1 when there are none.
    pub fn pass_rate(&self) -> f64 {
        if self.checks.is_empty() {
            return 1.0;
        }
        self.checks.iter().filter(|c| c.holds).count() as f64 / self.checks.len() as f64
    }
}

/// Evaluate the recurrences of `algorithm` along `trace` for ground truth
/// `x`, given `delta` and the noise correlation `nu`.
pub fn check_recurrences(
    algorithm: Algorithm,
    trace: &[IterationRecord],
    x: &DVector<f64>,
    delta: f64,
    nu: f64,
    noise_mode: NoiseMode,
) -> Result<RecurrenceReport> {
    let mut report = RecurrenceReport {
        algorithm,
        delta,
        noise_correlation: nu,
        noise_mode,
        applicable: (0.0..1.0).contains(&delta),
        checks: Vec::new(),
    };
    if !report.applicable {
        return Ok(report);
    }
    let tol = CHECK_TOLERANCE * (1.0 + x.norm());
    let mut push = |iteration, inequality, lhs: f64, rhs: f64| {
        report.checks.push(InequalityCheck {
            iteration,
            inequality,
            lhs,
            rhs,
            holds: lhs <= rhs + tol,
        })
    };
    let support = SupportSet::from_unsorted(
        x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect(),
    );
    let missed = |s: &SupportSet| -> f64 {
        support.difference(s).iter().fold(0.0, |acc, i| acc + x[i] * x[i]).sqrt()
    };
    let d = delta;
    let mut previous = DVector::zeros(x.len());

    for rec in trace {
        let l = rec.iteration;
        match algorithm {
            Algorithm::Sp => {
                let merged = rec.merged_support.as_ref().ok_or_else(|| {
                    Error::Parse(format!("iteration {l} has no merged support"))
                })?;
                let before = missed(&rec.support_before);
                let mid = missed(merged);
                let after = missed(&rec.pruned_support);
                let q = (1.0 - d) * (1.0 - d);
                push(l, Inequality::SpIdentification, mid, 2.0 * d / q * before + 2.0 / q * nu);
                push(l, Inequality::SpPruning, after, (1.0 + d) / (1.0 - d) * mid + 4.0 / (1.0 - d) * nu);
                let c = sp_constants(d)?;
                push(l, Inequality::SpComposed, after, c.rho * before + c.tau * nu);
            }
            Algorithm::Cosamp | Algorithm::Iht => {
                let current = rec.estimate_dense(x.len());
                let before = (x - &previous).norm();
                let after = (x - &current).norm();
                if algorithm == Algorithm::Cosamp {
                    let c = cosamp_constants(d)?;
                    push(l, Inequality::Cosamp, after, c.rho * before + c.tau * nu);
                } else {
                    push(l, Inequality::Iht, after, 8f64.sqrt() * d * before + 4.0 * nu);
                }
                previous = current;
            }
            Algorithm::Oracle => {
                return Err(Error::Precondition("the oracle has no recurrence".into()));
            }
        }
    }
    Ok(report)
}

/// Recurrence checks with exact `delta_{pK}` and exact `||D*_{T_e} e||_2`.
pub fn recurrence_diagnostics(
    trace: &[IterationRecord],
    x_true: &SparseSignal,
    e: &DVector<f64>,
    dict: &Dictionary,
    algorithm: Algorithm,
) -> Result<RecurrenceReport> {
    recurrence_diagnostics_with_budget(trace, x_true, e, dict, algorithm, DEFAULT_ENUMERATION_BUDGET)
}

/// As [`recurrence_diagnostics`] with an explicit enumeration budget for
/// the RIP constant.
pub fn recurrence_diagnostics_with_budget(
    trace: &[IterationRecord],
    x_true: &SparseSignal,
    e: &DVector<f64>,
    dict: &Dictionary,
    algorithm: Algorithm,
    budget: u128,
) -> Result<RecurrenceReport> {
    let k = x_true.k();
    let order = (algorithm.rip_order() * k).min(dict.n_atoms());
    let delta = rip_exact_with_budget(dict, order, budget)?.delta;
    let nu = worst_case_noise_correlation(dict, e, k, NoiseMode::Exact)?.value;
    check_recurrences(algorithm, trace, x_true.values(), delta, nu, NoiseMode::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{generate_dictionary, generate_signal};
    use crate::linalg::normalize_columns;
    use crate::pursuit::{run, PursuitConfig};

    #[test]
    fn orthonormal_noiseless_trace_has_zero_sides() {
        let q = generate_dictionary(12, 12, 1).into_matrix().qr().q();
        let d = normalize_columns(q).unwrap();
        let x = generate_signal(12, 2, 2);
        let y = d.apply(x.values());
        let e = DVector::zeros(12);
        for alg in Algorithm::PURSUITS {
            let res = run(alg, &d, &y, &PursuitConfig::fixed(2, 1).with_trace(), None).unwrap();
            let report = recurrence_diagnostics(res.trace.as_ref().unwrap(), &x, &e, &d, alg).unwrap();
            assert!(report.delta < 1e-12);
            assert!(report.all_hold(), "{report:?}");
            for c in &report.checks {
                if c.rhs <= 1e-9 {
                    assert!(c.lhs <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn delta_at_least_one_is_not_applicable() {
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let r = check_recurrences(Algorithm::Iht, &[], &x, 1.2, 0.0, NoiseMode::Exact).unwrap();
        assert!(!r.applicable);
        assert!(r.checks.is_empty());
        assert_eq!(r.pass_rate(), 1.0);
    }

    #[test]
    fn a_violation_is_reported() {
        let rec = IterationRecord {
            iteration: 1,
            support_before: SupportSet::empty(),
            delta_support: None,
            merged_support: None,
            pruned_support: SupportSet::from_unsorted(vec![1]),
            coefficients: vec![5.0],
            estimate: vec![5.0],
            residual_norm: 0.0,
            estimate_error: None,
        };
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let r = check_recurrences(Algorithm::Iht, &[rec], &x, 0.1, 0.0, NoiseMode::Exact).unwrap();
        assert_eq!(r.failures().count(), 1);
        let c = &r.checks[0];
        assert!((c.lhs - 26f64.sqrt()).abs() < 1e-12);
        assert!((c.rhs - 8f64.sqrt() * 0.1).abs() < 1e-12);
    }
}
