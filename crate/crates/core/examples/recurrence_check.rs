//! Trace Subspace Pursuit on a nearly orthonormal dictionary and check each
//! iteration against the per-step error recurrences.

use nalgebra::DMatrix;
use rand::Rng;

use pursuit_lab::experiment::{draw_noise, generate_signal_with, rng_from_seed};
use pursuit_lab::linalg::normalize_columns;
use pursuit_lab::pursuit::{recurrence_diagnostics_with_budget, run};
use pursuit_lab::{Algorithm, PursuitConfig};

fn main() -> pursuit_lab::Result<()> {
    let n = 36;
    let mut rng = rng_from_seed(5);
    let q = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5).qr().q();
    let p = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let dict = normalize_columns(q + 0.004 * p)?;

    let k = 2;
    let x = generate_signal_with(&mut rng, n, k);
    let e = draw_noise(&mut rng, n, 0.5);
    let y = dict.apply(x.values()) + &e;

    for alg in [Algorithm::Sp, Algorithm::Cosamp, Algorithm::Iht] {
        let mut res = run(alg, &dict, &y, &PursuitConfig::fixed(k, 6).with_trace(), None)?;
        res.attach_ground_truth(x.values());
        let trace = res.trace.as_deref().unwrap_or(&[]);
        // CoSaMP needs delta_8 over all C(36, 8) supports
        let report = recurrence_diagnostics_with_budget(trace, &x, &e, &dict, alg, 50_000_000)?;
        println!(
            "{alg}: delta = {:.4}, noise correlation = {:.4}, {} of {} checks hold",
            report.delta,
            report.noise_correlation,
            report.checks.iter().filter(|c| c.holds).count(),
            report.checks.len()
        );
        for check in report.checks.iter().filter(|c| c.iteration <= 2) {
            println!(
                "  iter {:>2} {:?}: {:.4} <= {:.4}",
                check.iteration, check.inequality, check.lhs, check.rhs
            );
        }
    }
    Ok(())
}
