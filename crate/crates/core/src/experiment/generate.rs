use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{normalize_columns, Dictionary, SparseSignal, SupportSet};

/// Seeded generator used for every random draw in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// i.i.d. standard normal `m x n_atoms` matrix (filled column by column),
/// with normalized columns.
pub fn generate_dictionary(m: usize, n_atoms: usize, seed: u64) -> Dictionary {
    let mut rng = rng_from_seed(seed);
    let matrix = DMatrix::from_iterator(m, n_atoms, (0..m * n_atoms).map(|_| rng.sample::<f64, _>(StandardNormal)));
    normalize_columns(matrix).expect("a Gaussian column is nonzero with probability one")
}

/// `K` spikes `10 eps_i (1 + |n_i|)` on a uniformly random support.
pub fn generate_signal(n_atoms: usize, k: usize, seed: u64) -> SparseSignal {
    generate_signal_with(&mut rng_from_seed(seed), n_atoms, k)
}

pub fn generate_signal_with<R: Rng + ?Sized>(rng: &mut R, n_atoms: usize, k: usize) -> SparseSignal {
    let support = SupportSet::from_unsorted(index::sample(rng, n_atoms, k).into_vec());
    let values: Vec<f64> = (0..k)
        .map(|_| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let n: f64 = rng.sample(StandardNormal);
            10.0 * sign * (1.0 + n.abs())
        })
        .collect();
    SparseSignal::from_support(n_atoms, support, &values, k).expect("support drawn in range")
}

/// A dense vector whose sorted magnitudes are `10 (j+1)^(-decay)`, placed
/// in random positions with random signs. `k` is recorded as the intended
/// sparsity of its best approximation.
pub fn generate_compressible_with<R: Rng + ?Sized>(rng: &mut R, n_atoms: usize, decay: f64) -> DVector<f64> {
    let order = index::sample(rng, n_atoms, n_atoms).into_vec();
    let mut x = DVector::zeros(n_atoms);
    for (j, &pos) in order.iter().enumerate() {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        x[pos] = sign * 10.0 * ((j + 1) as f64).powf(-decay);
    }
    x
}

/// i.i.d. `N(0, sigma^2)` noise of length `m`.
pub fn draw_noise<R: Rng + ?Sized>(rng: &mut R, m: usize, sigma: f64) -> DVector<f64> {
    DVector::from_iterator(m, (0..m).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial, a hash of the sweep seed, the sweep point and the
/// trial index, so any trial can be replayed on its own.
pub fn trial_seed(seed: u64, k: usize, sigma: f64, trial: usize) -> u64 {
    [k as u64, sigma.to_bits(), trial as u64]
        .iter()
        .fold(splitmix64(seed), |acc, &part| splitmix64(acc ^ part))
}
