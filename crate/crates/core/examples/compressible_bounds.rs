//! Error bounds for a signal that is only approximately sparse, next to
//! what Subspace Pursuit and the best-K oracle actually achieve.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use pursuit_lab::experiment::{draw_noise, generate_compressible_with, rng_from_seed};
use pursuit_lab::guarantees::{constants, nearly_sparse_bound, nearly_sparse_oracle_bound, tail_norms, GuaranteeParams};
use pursuit_lab::linalg::{best_k_approx, normalize_columns};
use pursuit_lab::metrics::{worst_case_noise_correlation, NoiseMode};
use pursuit_lab::pursuit::{oracle_estimator, run};
use pursuit_lab::{Algorithm, PursuitConfig};

fn main() -> pursuit_lab::Result<()> {
    let (n, k, sigma) = (64, 8, 0.1);
    let mut rng = rng_from_seed(12);
    let q = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5).qr().q();
    let p = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let dict = normalize_columns(q + 0.002 * p)?;
    let eig = SymmetricEigen::new(dict.gram()).eigenvalues;
    // the full-dictionary constant bounds every smaller order
    let delta = (eig.max() - 1.0).max(1.0 - eig.min());

    let x = generate_compressible_with(&mut rng, n, 1.0);
    let e = draw_noise(&mut rng, n, sigma);
    let y = dict.apply(&x) + &e;
    let (t2, t1) = tail_norms(&x, k);
    println!("delta <= {delta:.4}, ||x||_2 = {:.3}, tail l2 = {t2:.3}, tail l1 = {t1:.3}", x.norm());

    let params = GuaranteeParams {
        a: 1.0,
        n_atoms: n,
        k,
        sigma,
        delta,
    };
    let nu = worst_case_noise_correlation(&dict, &e, k, NoiseMode::Exact)?.value;
    let bound = nearly_sparse_bound(constants(Algorithm::Sp, delta)?.c, delta, &params, nu, &x)?;
    let sp = run(Algorithm::Sp, &dict, &y, &PursuitConfig::fixed(k, 20), None)?;
    let err = (&x - sp.estimate.values()).norm();
    println!("sp:     ||x - x_hat|| = {err:.3} <= {:.3}", bound.deterministic);
    println!("sp:     ||x - x_hat||^2 = {:.3} <= {:.3}", err * err, bound.probabilistic);

    let head = best_k_approx(&x, k);
    let oracle = oracle_estimator(&dict, &y, head.support())?;
    println!(
        "oracle: ||x - x_hat||^2 = {:.3}, expected at most {:.3}",
        (&x - oracle.estimate.values()).norm_squared(),
        nearly_sparse_oracle_bound(delta, k, sigma, &x)?
    );
    Ok(())
}
