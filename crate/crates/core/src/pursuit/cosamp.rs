use nalgebra::DVector;

use super::{lift_support, Algorithm, IterationRecord, PursuitConfig, PursuitResult};
use crate::error::Result;
use crate::linalg::{least_squares_on_support, top_k_support, Dictionary, SparseSignal, SupportSet};

/// CoSaMP.
///
/// Like Subspace Pursuit but identifies `2K` new atoms per iteration and
/// keeps the pruned least-squares coefficients as they are; the residual
/// is `y - D_{T^l} (x_p)_{T^l}` with no re-solve.
pub fn cosamp(dict: &Dictionary, y: &DVector<f64>, cfg: &PursuitConfig) -> Result<PursuitResult> {
    cfg.validate(Algorithm::Cosamp, dict, y)?;
    let k = cfg.k;
    let iterations = cfg.iterations_for(y)?;

    let mut support = SupportSet::empty();
    let mut resid = y.clone();
    let mut kept: Vec<f64> = Vec::new();
    let mut trace = cfg.trace_enabled.then(Vec::new);

    for l in 1..=iterations {
        let corr = dict.correlate(&resid);
        let delta = top_k_support(corr.as_slice(), 2 * k);
        let merged = support.union(&delta);
        let xp = least_squares_on_support(dict, &merged, y)?;
        let local = top_k_support(&xp, k);
        kept = local.iter().map(|i| xp[i]).collect();
        let pruned = lift_support(&local, &merged);
        resid = y - dict.apply_on(&pruned, &kept);
        if let Some(trace) = trace.as_mut() {
            trace.push(IterationRecord {
                iteration: l,
                support_before: support.clone(),
                delta_support: Some(delta),
                merged_support: Some(merged),
                pruned_support: pruned.clone(),
                coefficients: xp,
                estimate: kept.clone(),
                residual_norm: resid.norm(),
                estimate_error: None,
            });
        }
        support = pruned;
    }

    let estimate = SparseSignal::from_support(dict.n_atoms(), support, &kept, k)?;
    Ok(PursuitResult {
        algorithm: Algorithm::Cosamp,
        estimate,
        iterations_run: iterations,
        trace,
    })
}
