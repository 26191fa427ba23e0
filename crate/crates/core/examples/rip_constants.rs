//! Coherence, restricted isometry constants and noise correlation of a
//! small Gaussian dictionary.

use pursuit_lab::experiment::{draw_noise, generate_dictionary, rng_from_seed};
use pursuit_lab::metrics::{
    binomial, mutual_coherence, rip_exact, rip_monte_carlo, worst_case_noise_correlation, NoiseMode,
};

fn main() -> pursuit_lab::Result<()> {
    let (m, n) = (20, 40);
    let dict = generate_dictionary(m, n, 1);
    println!("{m} x {n} Gaussian dictionary, coherence {:.4}", mutual_coherence(&dict)?);

    println!("{:>3} {:>12} {:>10} {:>12}", "k", "supports", "exact", "mc (500)");
    for k in 1..=4 {
        let exact = rip_exact(&dict, k)?;
        let mc = rip_monte_carlo(&dict, k, 500, 3)?;
        println!("{k:>3} {:>12} {:>10.4} {:>12.4}", binomial(n, k), exact.delta, mc.delta);
    }

    let e = draw_noise(&mut rng_from_seed(2), m, 1.0);
    for k in [1, 4, 8] {
        let exact = worst_case_noise_correlation(&dict, &e, k, NoiseMode::Exact)?;
        let relaxed = worst_case_noise_correlation(&dict, &e, k, NoiseMode::SqrtKMaxBound)?;
        println!("noise correlation, k = {k}: {:.4} (sqrt(k) max bound {:.4})", exact.value, relaxed.value);
    }
    Ok(())
}
