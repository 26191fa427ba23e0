//! Dictionary quality measures: mutual coherence, restricted isometry
//! constants and the worst-case noise correlation `||D*_{T_e} e||_2`.
//!
//! The restricted isometry constant of a support `T` is
//! `delta_T = max(lambda_max(D_T* D_T) - 1, 1 - lambda_min(D_T* D_T))`
//! and `delta_K` is its maximum over all supports of size `K`.
//!
//! [`rip_exact`] walks every support depth-first. Each node extends two
//! Cholesky factors, of `G_T - (1 - delta - eps) I` and
//! `(1 + delta + eps) I - G_T`, by one row; a leaf whose factors both exist
//! cannot raise the running maximum by more than [`SCREEN_MARGIN`] and is
//! skipped. Only the remaining leaves get a symmetric eigensolve.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{top_k_support, Dictionary, SupportSet};

/// Default cap on the number of supports an exact computation may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 2_000_000;

/// Slack used when screening supports in [`rip_exact`]. The reported
/// constant is within this distance below the true maximum.
pub const SCREEN_MARGIN: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RipMethod {
    ExactEnumeration,
    MonteCarloLowerBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub k: usize,
    pub delta: f64,
    pub method: RipMethod,
    pub supports_checked: u128,
    pub seed: Option<u64>,
    /// A support attaining `delta`.
    pub argmax: Option<SupportSet>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseMode {
    /// `max_{|T| = k} ||D_T* e||_2`.
    Exact,
    /// `sqrt(k) * max_i |<d_i, e>|`, an upper bound on the exact value.
    SqrtKMaxBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseCorrelation {
    pub k: usize,
    pub value: f64,
    pub mode: NoiseMode,
    pub argmax_support: Option<SupportSet>,
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Largest absolute inner product between two distinct atoms.
pub fn mutual_coherence(dict: &Dictionary) -> Result<f64> {
    let n = dict.n_atoms();
    if n < 2 {
        return Err(Error::Precondition(
            "mutual coherence needs at least two atoms".into(),
        ));
    }
    let gram = dict.gram();
    let mut mu = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            mu = mu.max(gram[(i, j)].abs());
        }
    }
    Ok(mu)
}

/// `delta_T` from the eigenvalues of a Gram matrix `D_T* D_T`.
pub fn gram_delta(gram: DMatrix<f64>) -> f64 {
    if gram.is_empty() {
        return 0.0;
    }
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| (lo.min(l), hi.max(l)));
    (hi - 1.0).max(1.0 - lo)
}

/// `delta_T` for one support.
pub fn support_delta(dict: &Dictionary, support: &SupportSet) -> f64 {
    let dt = dict.restrict(support);
    gram_delta(dt.tr_mul(&dt))
}

fn sub_gram(gram: &DMatrix<f64>, support: &[usize]) -> DMatrix<f64> {
    let k = support.len();
    DMatrix::from_fn(k, k, |i, j| gram[(support[i], support[j])])
}

fn check_k(dict: &Dictionary, k: usize) -> Result<()> {
    if k > dict.n_atoms() {
        return Err(Error::Precondition(format!(
            "k = {k} exceeds the number of atoms {}",
            dict.n_atoms()
        )));
    }
    Ok(())
}

/// Exact `delta_K` under the default enumeration budget.
pub fn rip_exact(dict: &Dictionary, k: usize) -> Result<RipEstimate> {
    rip_exact_with_budget(dict, k, DEFAULT_ENUMERATION_BUDGET)
}

/// Exact `delta_K` by enumerating every support of size `k`.
pub fn rip_exact_with_budget(dict: &Dictionary, k: usize, budget: u128) -> Result<RipEstimate> {
    check_k(dict, k)?;
    let n = dict.n_atoms();
    let total = binomial(n, k);
    if total > budget {
        return Err(Error::BudgetExceeded {
            required: total,
            budget,
        });
    }
    if k == 0 {
        return Ok(RipEstimate {
            k,
            delta: 0.0,
            method: RipMethod::ExactEnumeration,
            supports_checked: 1,
            seed: None,
            argmax: Some(SupportSet::empty()),
        });
    }
    let gram = dict.gram();
    // Every branch starts from the same state, so the reduction below is
    // independent of how rayon schedules the branches.
    let best = (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut search = ScreenedSearch::new(&gram, k);
            search.run_branch(first);
            (search.best_delta, search.best_support)
        })
        .reduce_with(pick_max)
        .expect("at least one branch");
    Ok(RipEstimate {
        k,
        delta: best.0.max(0.0),
        method: RipMethod::ExactEnumeration,
        supports_checked: total,
        seed: None,
        argmax: Some(SupportSet::from_unsorted(best.1)),
    })
}

fn pick_max(a: (f64, Vec<usize>), b: (f64, Vec<usize>)) -> (f64, Vec<usize>) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

struct ScreenedSearch<'a> {
    gram: &'a DMatrix<f64>,
    n: usize,
    k: usize,
    path: Vec<usize>,
    // Row-major k x k lower factors and their reciprocal diagonals.
    lower: Vec<f64>,
    upper: Vec<f64>,
    lower_inv: Vec<f64>,
    upper_inv: Vec<f64>,
    lower_ok: Vec<bool>,
    upper_ok: Vec<bool>,
    best_delta: f64,
    best_support: Vec<usize>,
}

impl<'a> ScreenedSearch<'a> {
    fn new(gram: &'a DMatrix<f64>, k: usize) -> Self {
        ScreenedSearch {
            gram,
            n: gram.nrows(),
            k,
            path: vec![0; k],
            lower: vec![0.0; k * k],
            upper: vec![0.0; k * k],
            lower_inv: vec![0.0; k],
            upper_inv: vec![0.0; k],
            lower_ok: vec![false; k],
            upper_ok: vec![false; k],
            best_delta: f64::NEG_INFINITY,
            best_support: Vec::new(),
        }
    }

    fn run_branch(&mut self, first: usize) {
        self.path[0] = first;
        self.factor_row(0);
        if self.k == 1 {
            self.visit_leaf();
        } else {
            self.descend(1, first + 1);
        }
    }

    fn descend(&mut self, depth: usize, start: usize) {
        let last = self.n - (self.k - depth);
        for i in start..=last {
            self.path[depth] = i;
            self.factor_row(depth);
            if depth + 1 == self.k {
                self.visit_leaf();
            } else {
                self.descend(depth + 1, i + 1);
            }
        }
    }

    fn factor_row(&mut self, d: usize) {
        let t = if self.best_delta.is_finite() {
            self.best_delta
        } else {
            0.0
        };
        let shift_lower = 1.0 - t - SCREEN_MARGIN;
        let shift_upper = 1.0 + t + SCREEN_MARGIN;
        let k = self.k;
        let pd = self.path[d];
        let ok_lower = d == 0 || self.lower_ok[d - 1];
        let ok_upper = d == 0 || self.upper_ok[d - 1];
        self.lower_ok[d] = ok_lower
            && extend_cholesky(
                &mut self.lower,
                &self.lower_inv[..d],
                k,
                d,
                |j| self.gram[(pd, self.path[j])],
                1.0,
                -shift_lower,
            )
            .map(|inv| self.lower_inv[d] = inv)
            .is_some();
        self.upper_ok[d] = ok_upper
            && extend_cholesky(
                &mut self.upper,
                &self.upper_inv[..d],
                k,
                d,
                |j| self.gram[(pd, self.path[j])],
                -1.0,
                shift_upper,
            )
            .map(|inv| self.upper_inv[d] = inv)
            .is_some();
    }

    fn visit_leaf(&mut self) {
        let d = self.k - 1;
        if self.lower_ok[d] && self.upper_ok[d] && !self.best_support.is_empty() {
            return;
        }
        let delta = gram_delta(sub_gram(self.gram, &self.path));
        if delta > self.best_delta {
            self.best_delta = delta;
            self.best_support = self.path.clone();
            for row in 0..self.k {
                self.factor_row(row);
            }
        }
    }
}

/// Append row `d` to the Cholesky factor of `sign * G + offset * I` where the
/// Gram entries of the new row come from `entry(j)`. Returns the reciprocal
/// of the new pivot, or `None` when the matrix is not positive definite.
fn extend_cholesky(
    factor: &mut [f64],
    inv_diag: &[f64],
    k: usize,
    d: usize,
    entry: impl Fn(usize) -> f64,
    sign: f64,
    offset: f64,
) -> Option<f64> {
    let row = d * k;
    for j in 0..d {
        let mut s = sign * entry(j);
        let rj = j * k;
        for l in 0..j {
            s -= factor[row + l] * factor[rj + l];
        }
        factor[row + j] = s * inv_diag[j];
    }
    let mut diag = sign * entry(d) + offset;
    for l in 0..d {
        diag -= factor[row + l] * factor[row + l];
    }
    if diag > 0.0 {
        let p = diag.sqrt();
        factor[row + d] = p;
        Some(1.0 / p)
    } else {
        None
    }
}

/// Lower bound on `delta_K` from `trials` uniformly drawn supports.
///
/// When `trials` covers all `C(N, k)` supports every support is visited
/// once, and the result equals the exact constant.
pub fn rip_monte_carlo(dict: &Dictionary, k: usize, trials: usize, seed: u64) -> Result<RipEstimate> {
    check_k(dict, k)?;
    if trials == 0 {
        return Err(Error::Precondition("rip_monte_carlo needs at least one trial".into()));
    }
    let n = dict.n_atoms();
    let gram = dict.gram();
    let total = binomial(n, k);
    let supports: Vec<Vec<usize>> = if (trials as u128) >= total {
        Combinations::new(n, k).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials)
            .map(|_| {
                let mut s = index::sample(&mut rng, n, k).into_vec();
                s.sort_unstable();
                s
            })
            .collect()
    };
    let checked = supports.len() as u128;
    let best = supports
        .into_par_iter()
        .map(|s| (gram_delta(sub_gram(&gram, &s)), s))
        .reduce_with(pick_max)
        .expect("at least one support");
    Ok(RipEstimate {
        k,
        delta: best.0.max(0.0),
        method: RipMethod::MonteCarloLowerBound,
        supports_checked: checked,
        seed: Some(seed),
        argmax: Some(SupportSet::from_unsorted(best.1)),
    })
}

/// `max_{|T| = k} ||D_T* e||_2` (or its `sqrt(k) max` relaxation).
///
/// The exact maximizer is the set of `k` largest `|<d_i, e>|`, so the exact
/// mode sorts correlations instead of enumerating supports.
pub fn worst_case_noise_correlation(
    dict: &Dictionary,
    e: &DVector<f64>,
    k: usize,
    mode: NoiseMode,
) -> Result<NoiseCorrelation> {
    check_k(dict, k)?;
    if e.len() != dict.m() {
        return Err(Error::Dimension(format!(
            "noise has length {}, expected {}",
            e.len(),
            dict.m()
        )));
    }
    let corr = dict.correlate(e);
    match mode {
        NoiseMode::Exact => {
            let support = top_k_support(corr.as_slice(), k);
            let value = support.iter().map(|i| corr[i] * corr[i]).sum::<f64>().sqrt();
            Ok(NoiseCorrelation {
                k,
                value,
                mode,
                argmax_support: Some(support),
            })
        }
        NoiseMode::SqrtKMaxBound => Ok(NoiseCorrelation {
            k,
            value: (k as f64).sqrt() * corr.amax(),
            mode,
            argmax_support: None,
        }),
    }
}

/// Exact noise correlation by visiting all `C(N, k)` supports.
pub fn worst_case_noise_correlation_enumerated(
    dict: &Dictionary,
    e: &DVector<f64>,
    k: usize,
    budget: u128,
) -> Result<NoiseCorrelation> {
    check_k(dict, k)?;
    let total = binomial(dict.n_atoms(), k);
    if total > budget {
        return Err(Error::BudgetExceeded {
            required: total,
            budget,
        });
    }
    let corr = dict.correlate(e);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for s in Combinations::new(dict.n_atoms(), k) {
        let v = s.iter().map(|&i| corr[i] * corr[i]).sum::<f64>().sqrt();
        if v > best.0 {
            best = (v, s);
        }
    }
    Ok(NoiseCorrelation {
        k,
        value: best.0.max(0.0),
        mode: NoiseMode::Exact,
        argmax_support: Some(SupportSet::from_unsorted(best.1)),
    })
}

/// Lexicographic iterator over the `k`-subsets of `{0, ..., n - 1}`.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let k = next.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::normalize_columns;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(m: usize, n: usize, seed: u64) -> Dictionary {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mat = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
        normalize_columns(mat).unwrap()
    }

    /// Plain eigensolve over every support, no screening.
    fn brute_delta(dict: &Dictionary, k: usize) -> f64 {
        Combinations::new(dict.n_atoms(), k)
            .map(|s| support_delta(dict, &SupportSet::from_unsorted(s)))
            .fold(0.0, f64::max)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(36, 6), 1_947_792);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(10_000, 5_000), u128::MAX);
        assert_eq!(Combinations::new(7, 3).count() as u128, binomial(7, 3));
    }

    #[test]
    fn coherence_examples() {
        let d = normalize_columns(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(mutual_coherence(&d).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        let dup = normalize_columns(DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(mutual_coherence(&dup).unwrap(), 1.0, epsilon = 1e-15);
        let one = normalize_columns(DMatrix::from_element(3, 1, 1.0)).unwrap();
        assert!(mutual_coherence(&one).is_err());
    }

    #[test]
    fn orthonormal_and_single_atom_constants_vanish() {
        let id = normalize_columns(DMatrix::identity(6, 6)).unwrap();
        for k in 1..=6 {
            assert_abs_diff_eq!(rip_exact(&id, k).unwrap().delta, 0.0, epsilon = 1e-14);
        }
        let g = gaussian(8, 15, 1);
        assert_abs_diff_eq!(rip_exact(&g, 1).unwrap().delta, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_matches_brute_force() {
        for seed in 0..4 {
            let d = gaussian(10, 14, seed);
            for k in 2..=4 {
                let est = rip_exact(&d, k).unwrap();
                let brute = brute_delta(&d, k);
                assert!(est.delta <= brute + 1e-12);
                assert!(est.delta >= brute - SCREEN_MARGIN - 1e-12, "{} vs {brute}", est.delta);
                let arg = est.argmax.unwrap();
                assert_abs_diff_eq!(support_delta(&d, &arg), est.delta, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn pair_constant_is_the_coherence() {
        let d = gaussian(6, 12, 7);
        let mu = mutual_coherence(&d).unwrap();
        assert_abs_diff_eq!(rip_exact(&d, 2).unwrap().delta, mu, epsilon = 1e-12);
    }

    #[test]
    fn constants_grow_with_order_and_obey_gershgorin() {
        let d = gaussian(12, 16, 3);
        let mu = mutual_coherence(&d).unwrap();
        let mut prev = 0.0;
        for k in 1..=5 {
            let delta = rip_exact(&d, k).unwrap().delta;
            assert!(delta >= prev - 1e-12);
            assert!(delta <= (k as f64 - 1.0) * mu + 1e-12);
            prev = delta;
        }
    }

    #[test]
    fn monte_carlo_is_a_lower_bound_and_exhausts_small_cases() {
        let d = gaussian(9, 13, 11);
        let exact = rip_exact(&d, 3).unwrap().delta;
        let mc = rip_monte_carlo(&d, 3, 50, 5).unwrap();
        assert!(mc.delta <= exact + 1e-12);
        assert_eq!(mc.supports_checked, 50);
        let full = rip_monte_carlo(&d, 3, 10_000, 5).unwrap();
        assert_eq!(full.supports_checked, binomial(13, 3));
        assert_abs_diff_eq!(full.delta, brute_delta(&d, 3), epsilon = 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let d = gaussian(10, 30, 2);
        assert!(matches!(
            rip_exact_with_budget(&d, 5, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn noise_correlation_modes_agree_with_enumeration() {
        let d = gaussian(10, 15, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = DVector::from_fn(10, |_, _| StandardNormal.sample(&mut rng));
        for k in 1..=4 {
            let exact = worst_case_noise_correlation(&d, &e, k, NoiseMode::Exact).unwrap();
            let enumerated = worst_case_noise_correlation_enumerated(&d, &e, k, 1 << 20).unwrap();
            let relaxed = worst_case_noise_correlation(&d, &e, k, NoiseMode::SqrtKMaxBound).unwrap();
            assert_abs_diff_eq!(exact.value, enumerated.value, epsilon = 1e-12);
            assert!(exact.value <= relaxed.value + 1e-12);
        }
        let base = worst_case_noise_correlation(&d, &e, 2, NoiseMode::Exact).unwrap().value;
        for p in [2usize, 3] {
            let wide = worst_case_noise_correlation(&d, &e, 2 * p, NoiseMode::Exact).unwrap().value;
            assert!(wide <= (p as f64).sqrt() * base + 1e-12);
            assert!(wide <= p as f64 * base + 1e-12);
        }
    }

    #[test]
    fn wrong_noise_length_is_rejected() {
        let d = gaussian(5, 8, 0);
        let e = DVector::zeros(4);
        assert!(matches!(
            worst_case_noise_correlation(&d, &e, 2, NoiseMode::Exact),
            Err(Error::Dimension(_))
        ));
    }
}
