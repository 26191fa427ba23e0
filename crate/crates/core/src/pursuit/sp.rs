use nalgebra::DVector;

use super::{lift_support, Algorithm, IterationRecord, PursuitConfig, PursuitResult};
use crate::error::Result;
use crate::linalg::{least_squares_on_support, solve_on_support, top_k_support, Dictionary, SparseSignal, SupportSet};

/// Subspace Pursuit.
///
/// Each iteration adds the `K` atoms most correlated with the residual,
/// solves least squares on the merged support, prunes back to the `K`
/// largest coefficients, and recomputes the residual of `y` against the
/// pruned atoms. The final estimate re-solves least squares on the last
/// pruned support.
pub fn subspace_pursuit(dict: &Dictionary, y: &DVector<f64>, cfg: &PursuitConfig) -> Result<PursuitResult> {
    cfg.validate(Algorithm::Sp, dict, y)?;
    let k = cfg.k;
    let iterations = cfg.iterations_for(y)?;

    let mut support = SupportSet::empty();
    let mut resid = y.clone();
    let mut coefficients = Vec::new();
    let mut trace = cfg.trace_enabled.then(Vec::new);

    for l in 1..=iterations {
        let corr = dict.correlate(&resid);
        let delta = top_k_support(corr.as_slice(), k);
        let merged = support.union(&delta);
        let xp = least_squares_on_support(dict, &merged, y)?;
        let pruned = lift_support(&top_k_support(&xp, k), &merged);
        let solve = solve_on_support(dict, &pruned, y)?;
        resid = solve.residual;
        coefficients = solve.coefficients;
        if let Some(trace) = trace.as_mut() {
            trace.push(IterationRecord {
                iteration: l,
                support_before: support.clone(),
                delta_support: Some(delta),
                merged_support: Some(merged),
                pruned_support: pruned.clone(),
                coefficients: xp,
                estimate: coefficients.clone(),
                residual_norm: resid.norm(),
                estimate_error: None,
            });
        }
        support = pruned;
    }

    let estimate = SparseSignal::from_support(dict.n_atoms(), support, &coefficients, k)?;
    Ok(PursuitResult {
        algorithm: Algorithm::Sp,
        estimate,
        iterations_run: iterations,
        trace,
    })
}
