//! Recover one noisy sparse signal with every algorithm and compare against
//! the oracle that knows the support.

use pursuit_lab::experiment::{draw_noise, generate_dictionary, generate_signal_with, rng_from_seed};
use pursuit_lab::pursuit::{run, NormEstimate};
use pursuit_lab::{Algorithm, PursuitConfig};

fn main() -> pursuit_lab::Result<()> {
    let (m, n, k, sigma) = (128, 256, 10, 1.0);
    let dict = generate_dictionary(m, n, 7);
    let mut rng = rng_from_seed(8);
    let x = generate_signal_with(&mut rng, n, k);
    let y = dict.apply(x.values()) + draw_noise(&mut rng, m, sigma);

    println!("m = {m}, N = {n}, K = {k}, sigma = {sigma}");
    println!("{:<8} {:>10} {:>8} {:>10}", "alg", "sq. error", "iters", "support");
    for alg in [Algorithm::Sp, Algorithm::Cosamp, Algorithm::Iht, Algorithm::Oracle] {
        let cfg = PursuitConfig::practical(k, sigma, NormEstimate::MeasurementNorm);
        let res = run(alg, &dict, &y, &cfg, Some(x.support()))?;
        println!(
            "{:<8} {:>10.3} {:>8} {:>10}",
            alg.name(),
            res.squared_error(x.values()),
            res.iterations_run,
            if res.estimate.support() == x.support() { "exact" } else { "missed" }
        );
    }
    Ok(())
}
