//! Tabulate the error-bound constants and the near-oracle bound as the
//! restricted isometry constant grows.

use pursuit_lab::guarantees::{
    bound_report, constants, delta_threshold, ds_constant, success_probability, GuaranteeParams,
};
use pursuit_lab::Algorithm;

fn main() -> pursuit_lab::Result<()> {
    for alg in Algorithm::PURSUITS {
        println!("{alg}: condition delta <= {:.4}", delta_threshold(alg).unwrap_or(f64::NAN));
    }

    println!("\n{:>6} {:>10} {:>10} {:>10} {:>10}", "delta", "C_sp", "C_cosamp", "C_iht", "C_ds");
    for step in 0..=10 {
        let delta = 0.0139 * step as f64;
        println!(
            "{delta:>6.4} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            constants(Algorithm::Sp, delta)?.c,
            constants(Algorithm::Cosamp, delta)?.c,
            constants(Algorithm::Iht, delta)?.c,
            ds_constant(delta)?,
        );
    }

    let params = GuaranteeParams {
        a: 1.0,
        n_atoms: 1024,
        k: 10,
        sigma: 1.0,
        delta: 0.1,
    };
    println!(
        "\nN = 1024, K = 10, sigma = 1, delta = 0.1, probability {:.6}",
        success_probability(params.a, params.n_atoms)
    );
    for alg in Algorithm::PURSUITS {
        let report = bound_report(alg, &params, None)?;
        println!("{alg}: ||x - x_hat||^2 <= {:.1}", report.probabilistic_bound);
    }
    Ok(())
}
