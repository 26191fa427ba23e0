//! Closed-form constants, RIP conditions and error bounds for the pursuits.
//!
//! Every logarithm here is natural. Bounds are evaluated whether or not the
//! RIP condition holds; [`BoundReport::condition_met`] says whether the
//! number is actually a guarantee.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{best_k_approx, factor_support, Dictionary, SupportSet};
use crate::pursuit::Algorithm;

/// SP needs `delta_{3K}` at most this.
pub const SP_DELTA_THRESHOLD: f64 = 0.139;
/// CoSaMP needs `delta_{4K}` at most this.
pub const COSAMP_DELTA_THRESHOLD: f64 = 0.1;
/// IHT needs `delta_{3K}` at most `1/sqrt(32)`.
pub const IHT_DELTA_THRESHOLD: f64 = 0.176_776_695_296_636_87;
/// The IHT error constant, independent of `delta` under its condition.
pub const IHT_CONSTANT: f64 = 9.0;

/// Contraction factor `rho`, noise gain `tau` and final constant `C` of a
/// recurrence `e_l <= rho e_{l-1} + tau nu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub rho: f64,
    pub tau: f64,
    pub c: f64,
}

fn check_delta(delta: f64, pole: f64) -> Result<()> {
    if !(delta >= 0.0) {
        return Err(Error::Precondition(format!("delta must be non-negative, got {delta}")));
    }
    if delta >= pole {
        return Err(Error::PoleViolation { delta, pole });
    }
    Ok(())
}

pub fn sp_constants(delta3k: f64) -> Result<Constants> {
    check_delta(delta3k, 1.0)?;
    let d = delta3k;
    let q = 1.0 - d;
    Ok(Constants {
        rho: 2.0 * d * (1.0 + d) / q.powi(3),
        tau: (6.0 - 6.0 * d + 4.0 * d * d) / q.powi(3),
        c: 2.0 * (7.0 - 9.0 * d + 7.0 * d * d - d.powi(3)) / q.powi(4),
    })
}

pub fn cosamp_constants(delta4k: f64) -> Result<Constants> {
    check_delta(delta4k, 1.0)?;
    let d = delta4k;
    let q2 = (1.0 - d) * (1.0 - d);
    Ok(Constants {
        rho: 4.0 * d / q2,
        tau: (14.0 - 6.0 * d) / q2,
        c: (29.0 - 14.0 * d + d * d) / q2,
    })
}

pub fn iht_constants(delta3k: f64) -> Result<Constants> {
    if !(delta3k >= 0.0) {
        return Err(Error::Precondition(format!("delta must be non-negative, got {delta3k}")));
    }
    Ok(Constants {
        rho: 8f64.sqrt() * delta3k,
        tau: 4.0,
        c: IHT_CONSTANT,
    })
}

/// Dantzig selector constant `4 / (1 - 2 delta_{3K})`.
pub fn ds_constant(delta3k: f64) -> Result<f64> {
    check_delta(delta3k, 0.5)?;
    Ok(4.0 / (1.0 - 2.0 * delta3k))
}

/// The basis pursuit constant depends on a quantity this crate does not
/// define, so it is never evaluated.
pub fn bp_constant() -> Result<f64> {
    Err(Error::NotComputable(
        "the basis pursuit constant depends on an externally defined kappa".into(),
    ))
}

/// Constants of a pursuit at the given RIP constant.
pub fn constants(algorithm: Algorithm, delta: f64) -> Result<Constants> {
    match algorithm {
        Algorithm::Sp => sp_constants(delta),
        Algorithm::Cosamp => cosamp_constants(delta),
        Algorithm::Iht => iht_constants(delta),
        Algorithm::Oracle => Err(Error::NotComputable("the oracle has no RIP constant".into())),
    }
}

/// Largest admissible RIP constant of a pursuit.
pub fn delta_threshold(algorithm: Algorithm) -> Option<f64> {
    match algorithm {
        Algorithm::Sp => Some(SP_DELTA_THRESHOLD),
        Algorithm::Cosamp => Some(COSAMP_DELTA_THRESHOLD),
        Algorithm::Iht => Some(IHT_DELTA_THRESHOLD),
        Algorithm::Oracle => None,
    }
}

/// Whether `delta` (`delta_{3K}` or `delta_{4K}` per algorithm) satisfies
/// the algorithm's RIP condition. The oracle has none.
pub fn condition_check(algorithm: Algorithm, delta: f64) -> bool {
    match delta_threshold(algorithm) {
        Some(t) => delta >= 0.0 && delta <= t,
        None => true,
    }
}

/// The Dantzig selector condition `delta_{2K} + delta_{3K} <= 1`.
pub fn ds_condition(delta2k: f64, delta3k: f64) -> bool {
    delta2k >= 0.0 && delta3k >= 0.0 && delta2k + delta3k <= 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeParams {
    /// Probability exponent, `a > 0`.
    pub a: f64,
    pub n_atoms: usize,
    pub k: usize,
    pub sigma: f64,
    /// `delta_{3K}` or `delta_{4K}`, matching the algorithm.
    pub delta: f64,
}

impl GuaranteeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::Precondition(format!("a must be positive, got {}", self.a)));
        }
        if self.n_atoms < 2 {
            return Err(Error::Precondition("N must be at least 2".into()));
        }
        if self.k == 0 {
            return Err(Error::Precondition("K must be at least 1".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::Precondition(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::Precondition(format!("delta must lie in [0, 1), got {}", self.delta)));
        }
        Ok(())
    }
}

/// `C^2 * 2(1+a) ln N * K sigma^2`.
pub fn near_oracle_bound(c: f64, params: &GuaranteeParams) -> f64 {
    let ln_n = (params.n_atoms as f64).ln();
    c * c * 2.0 * (1.0 + params.a) * ln_n * params.k as f64 * params.sigma * params.sigma
}

/// `1 - 1 / (sqrt(pi (1+a) ln N) N^a)`.
pub fn success_probability(a: f64, n_atoms: usize) -> f64 {
    let n = n_atoms as f64;
    1.0 - 1.0 / ((std::f64::consts::PI * (1.0 + a) * n.ln()).sqrt() * n.powf(a))
}

/// `K sigma^2 / (1 - delta_K)`, an upper bound on the oracle MSE.
pub fn oracle_mse_bound(k: usize, delta_k: f64, sigma: f64) -> Result<f64> {
    check_delta(delta_k, 1.0)?;
    Ok(k as f64 * sigma * sigma / (1.0 - delta_k))
}

/// `trace((D_T* D_T)^{-1}) sigma^2`, the oracle MSE on support `T`.
pub fn oracle_mse_exact(dict: &Dictionary, support: &SupportSet, sigma: f64) -> Result<f64> {
    if support.is_empty() {
        return Ok(0.0);
    }
    let (_, qr, ratio) = factor_support(dict, support)?;
    // (D_T* D_T)^{-1} = R^{-1} R^{-T}, whose trace is ||R^{-1}||_F^2
    let k = support.len();
    let r_inv = qr
        .r()
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::RankDeficient { ratio })?;
    Ok(r_inv.norm_squared() * sigma * sigma)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub algorithm: Algorithm,
    pub delta: f64,
    pub condition_met: bool,
    pub constant: f64,
    /// `C ||D*_{T_e} e||_2`, when the noise correlation was supplied.
    pub deterministic_bound: Option<f64>,
    /// Bound on the squared error that holds with `success_probability`.
    pub probabilistic_bound: f64,
    pub success_probability: f64,
}

/// Evaluate the guarantees of `algorithm` at `params`.
pub fn bound_report(
    algorithm: Algorithm,
    params: &GuaranteeParams,
    noise_correlation: Option<f64>,
) -> Result<BoundReport> {
    params.validate()?;
    let c = constants(algorithm, params.delta)?.c;
    Ok(BoundReport {
        algorithm,
        delta: params.delta,
        condition_met: condition_check(algorithm, params.delta),
        constant: c,
        deterministic_bound: noise_correlation.map(|nu| c * nu),
        probabilistic_bound: near_oracle_bound(c, params),
        success_probability: success_probability(params.a, params.n_atoms),
    })
}

/// `||x - x_K||_2` and `||x - x_K||_1`.
pub fn tail_norms(x: &DVector<f64>, k: usize) -> (f64, f64) {
    let head = best_k_approx(x, k);
    let tail = x - head.values();
    (tail.norm(), tail.lp_norm(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearlySparseBound {
    /// Bound on `||x - x_hat||_2`.
    pub deterministic: f64,
    /// Bound on `||x - x_hat||_2^2` holding with the usual probability.
    pub probabilistic: f64,
}

/// Error bounds when `x` is only approximately `K`-sparse.
///
/// `noise_correlation` fills the `||D*_{T_e} e||_2` slot of the
/// deterministic bound. The probabilistic bound uses the `l1` norm of the
/// tail in its last term.
pub fn nearly_sparse_bound(
    c: f64,
    delta_k: f64,
    params: &GuaranteeParams,
    noise_correlation: f64,
    x: &DVector<f64>,
) -> Result<NearlySparseBound> {
    params.validate()?;
    check_delta(delta_k, 1.0)?;
    let k = params.k as f64;
    let (t2, t1) = tail_norms(x, params.k);
    let deterministic = c * (noise_correlation + (1.0 + delta_k) * t2 + (1.0 + delta_k) / k.sqrt() * t1);
    let ln_n = (params.n_atoms as f64).ln();
    let inner = ((1.0 + params.a) * ln_n * k).sqrt() * params.sigma + t2 + t1 / k.sqrt();
    Ok(NearlySparseBound {
        deterministic,
        probabilistic: 2.0 * c * c * inner * inner,
    })
}

/// Bound on the MSE of the oracle that knows the support of `x_K`.
pub fn nearly_sparse_oracle_bound(delta_k: f64, k: usize, sigma: f64, x: &DVector<f64>) -> Result<f64> {
    check_delta(delta_k, 1.0)?;
    if k == 0 {
        return Err(Error::Precondition("K must be at least 1".into()));
    }
    let (t2, t1) = tail_norms(x, k);
    let s = (1.0 + delta_k).sqrt();
    let kf = k as f64;
    let inner = (1.0 + s) * t2 + s / kf.sqrt() * t1 + kf.sqrt() * sigma;
    Ok(inner * inner / (1.0 - delta_k))
}
