use nalgebra::DVector;

use super::{Algorithm, IterationRecord, PursuitConfig, PursuitResult};
use crate::error::{Error, Result};
use crate::linalg::{top_k_support, Dictionary, SparseSignal, SupportSet};

/// An iterate larger than this multiple of `||y||_2` counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Iterative Hard Thresholding with unit step:
/// `x_p = x^{l-1} + D*(y - D x^{l-1})`, then keep the `K` largest entries.
pub fn iht(dict: &Dictionary, y: &DVector<f64>, cfg: &PursuitConfig) -> Result<PursuitResult> {
    cfg.validate(Algorithm::Iht, dict, y)?;
    let k = cfg.k;
    let iterations = cfg.iterations_for(y)?;
    let limit = DIVERGENCE_FACTOR * y.norm();

    let mut support = SupportSet::empty();
    let mut values: Vec<f64> = Vec::new();
    let mut resid = y.clone();
    let mut trace = cfg.trace_enabled.then(Vec::new);

    for l in 1..=iterations {
        let mut xp = dict.correlate(&resid);
        for (i, &v) in support.iter().zip(&values) {
            xp[i] += v;
        }
        let pruned = top_k_support(xp.as_slice(), k);
        values = pruned.iter().map(|i| xp[i]).collect();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm <= limit) {
            return Err(Error::Divergence {
                iteration: l,
                norm,
                limit,
            });
        }
        resid = y - dict.apply_on(&pruned, &values);
        if let Some(trace) = trace.as_mut() {
            trace.push(IterationRecord {
                iteration: l,
                support_before: support.clone(),
                delta_support: None,
                merged_support: None,
                pruned_support: pruned.clone(),
                coefficients: values.clone(),
                estimate: values.clone(),
                residual_norm: resid.norm(),
                estimate_error: None,
            });
        }
        support = pruned;
    }

    let estimate = SparseSignal::from_support(dict.n_atoms(), support, &values, k)?;
    Ok(PursuitResult {
        algorithm: Algorithm::Iht,
        estimate,
        iterations_run: iterations,
        trace,
    })
}
