use nalgebra::DVector;

use super::{Algorithm, PursuitResult};
use crate::error::{Error, Result};
use crate::linalg::{least_squares_on_support, Dictionary, SparseSignal, SupportSet};

/// Least squares on the true support `T`, zero elsewhere.
pub fn oracle_estimator(dict: &Dictionary, y: &DVector<f64>, support: &SupportSet) -> Result<PursuitResult> {
    if y.len() != dict.m() {
        return Err(Error::Dimension(format!(
            "y has length {}, dictionary has {} rows",
            y.len(),
            dict.m()
        )));
    }
    let c = least_squares_on_support(dict, support, y)?;
    let estimate = SparseSignal::from_support(dict.n_atoms(), support.clone(), &c, support.len())?;
    Ok(PursuitResult {
        algorithm: Algorithm::Oracle,
        estimate,
        iterations_run: 0,
        trace: None,
    })
}
