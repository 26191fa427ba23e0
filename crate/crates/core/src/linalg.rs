//! Dense linear-algebra substrate shared by every pursuit.
//!
//! A [`Dictionary`] is an `m x N` matrix with unit-norm columns (atoms). Index
//! sets over its columns are [`SupportSet`]s. Restricted least squares is
//! computed with a Householder QR of `D_T`, never through the normal
//! equations, and a singular `D_T` is reported as [`Error::RankDeficient`].

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column norms below this are treated as zero columns.
pub const ZERO_COLUMN_NORM: f64 = 1e-14;
/// Relative tolerance on unit column norms.
pub const UNIT_NORM_TOL: f64 = 1e-10;
/// `sigma_min / sigma_max` of `D_T` below this is rank deficient.
pub const RANK_RATIO_TOL: f64 = 1e-12;

/// Measurement operator with unit-norm columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary {
    matrix: DMatrix<f64>,
}

impl Dictionary {
    /// Number of measurements (rows).
    pub fn m(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of atoms (columns).
    pub fn n_atoms(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn column(&self, j: usize) -> nalgebra::DVectorView<'_, f64> {
        self.matrix.column(j)
    }

    /// `D x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// `D* v`, the correlation of every atom with `v`.
    pub fn correlate(&self, v: &DVector<f64>) -> DVector<f64> {
        self.matrix.tr_mul(v)
    }

    /// `D_T`, the columns listed in `support`, in order.
    pub fn restrict(&self, support: &SupportSet) -> DMatrix<f64> {
        self.matrix.select_columns(support.indices())
    }

    /// `D_T c` for a coefficient vector indexed like `support`.
    pub fn apply_on(&self, support: &SupportSet, coefficients: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for (j, &c) in support.iter().zip(coefficients) {
            out.axpy(c, &self.matrix.column(j), 1.0);
        }
        out
    }

    /// `D_T* v`.
    pub fn correlate_on(&self, support: &SupportSet, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            support.len(),
            support.iter().map(|j| self.matrix.column(j).dot(v)),
        )
    }

    /// Gram matrix `D* D`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.matrix.tr_mul(&self.matrix)
    }

    /// Serialize as CSV: a first line `m,N` followed by `m` rows of `N` values.
    ///
    /// Values use the shortest representation that parses back to the same
    /// `f64`, so a write/read cycle is bit exact.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{},{}", self.m(), self.n_atoms())?;
        let mut line = String::new();
        for i in 0..self.m() {
            line.clear();
            for j in 0..self.n_atoms() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{:?}", self.matrix[(i, j)]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Parse the CSV layout written by [`Dictionary::write_csv`].
    ///
    /// Columns already unit-norm to within [`UNIT_NORM_TOL`] are kept as
    /// written; otherwise the matrix goes through [`normalize_columns`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dictionary file".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let dims: Vec<usize> = header
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("header `{header}`: {e}")))?;
        let [m, n] = dims[..] else {
            return Err(Error::Parse(format!(
                "header must be `m,N`, got `{header}`"
            )));
        };
        let mut data = DMatrix::zeros(m, n);
        for i in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("expected {m} rows, found {i}")))?
                .map_err(|e| Error::Parse(e.to_string()))?;
            let mut count = 0;
            for (j, field) in line.split(',').enumerate() {
                if j >= n {
                    return Err(Error::Parse(format!("row {i} has more than {n} values")));
                }
                data[(i, j)] = field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {i}, column {j}: {e}")))?;
                count += 1;
            }
            if count != n {
                return Err(Error::Parse(format!(
                    "row {i} has {count} values, expected {n}"
                )));
            }
        }
        check_finite(&data)?;
        let unit = (0..n).all(|j| (data.column(j).norm() - 1.0).abs() <= UNIT_NORM_TOL);
        if unit {
            Ok(Dictionary { matrix: data })
        } else {
            normalize_columns(data)
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

fn check_finite(matrix: &DMatrix<f64>) -> Result<()> {
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            if !matrix[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Scale every column to unit Euclidean norm.
pub fn normalize_columns(mut matrix: DMatrix<f64>) -> Result<Dictionary> {
    check_finite(&matrix)?;
    for j in 0..matrix.ncols() {
        let norm = matrix.column(j).norm();
        if norm < ZERO_COLUMN_NORM {
            return Err(Error::ZeroColumn { index: j });
        }
        matrix.column_mut(j).unscale_mut(norm);
    }
    Ok(Dictionary { matrix })
}

/// Strictly increasing list of atom indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// Build from indices that must be strictly increasing and below `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSupport(format!(
                "indices not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidSupport(format!(
                    "index {last} out of range for {n} atoms"
                )));
            }
        }
        Ok(SupportSet(indices))
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        SupportSet(indices)
    }

    /// `{0, 1, ..., n - 1}`.
    pub fn full(n: usize) -> Self {
        SupportSet((0..n).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        SupportSet(out)
    }

    /// `self - other`.
    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn intersection(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|&i| other.contains(i)).collect())
    }

    /// `T^C` within `{0, ..., n - 1}`.
    pub fn complement(&self, n: usize) -> SupportSet {
        SupportSet((0..n).filter(|&i| !self.contains(i)).collect())
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.intersection(other).is_empty()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl From<SupportSet> for Vec<usize> {
    fn from(s: SupportSet) -> Self {
        s.0
    }
}

/// A representation vector together with its support and intended cardinality.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSignal {
    values: DVector<f64>,
    support: SupportSet,
    k: usize,
}

impl SparseSignal {
    /// Wrap a dense vector whose nonzeros number at most `k`.
    pub fn from_dense(values: DVector<f64>, k: usize) -> Result<Self> {
        let support: Vec<usize> = (0..values.len()).filter(|&i| values[i] != 0.0).collect();
        if support.len() > k {
            return Err(Error::InvalidSupport(format!(
                "{} nonzeros exceed cardinality {k}",
                support.len()
            )));
        }
        Ok(SparseSignal {
            values,
            support: SupportSet(support),
            k,
        })
    }

    /// Place `coefficients` on `support` in a length-`n` vector.
    ///
    /// The support is kept as given even where a coefficient is exactly zero.
    pub fn from_support(n: usize, support: SupportSet, coefficients: &[f64], k: usize) -> Result<Self> {
        if support.len() != coefficients.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a support of size {}",
                coefficients.len(),
                support.len()
            )));
        }
        if support.len() > k {
            return Err(Error::InvalidSupport(format!(
                "support of size {} exceeds cardinality {k}",
                support.len()
            )));
        }
        if support.indices().last().is_some_and(|&l| l >= n) {
            return Err(Error::InvalidSupport(format!("support {support} out of range for {n}")));
        }
        let mut values = DVector::zeros(n);
        for (i, &c) in support.iter().zip(coefficients) {
            values[i] = c;
        }
        Ok(SparseSignal { values, support, k })
    }

    pub fn zeros(n: usize, k: usize) -> Self {
        SparseSignal {
            values: DVector::zeros(n),
            support: SupportSet::empty(),
            k,
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of entries that are actually nonzero.
    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// `x_S`, the entries of this vector on `s` (in the order of `s`).
    pub fn restricted(&self, s: &SupportSet) -> Vec<f64> {
        s.iter().map(|i| self.values[i]).collect()
    }

    /// `||x_S||_2`.
    pub fn norm_on(&self, s: &SupportSet) -> f64 {
        s.iter().map(|i| self.values[i] * self.values[i]).sum::<f64>().sqrt()
    }
}

/// `y = D x + e`, with the noise kept when known.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub y: DVector<f64>,
    pub noise: Option<DVector<f64>>,
    pub sigma: Option<f64>,
}

impl Measurement {
    /// Synthesize `y = D x + e`.
    pub fn synthesize(dict: &Dictionary, x: &DVector<f64>, noise: DVector<f64>, sigma: f64) -> Result<Self> {
        if x.len() != dict.n_atoms() || noise.len() != dict.m() {
            return Err(Error::Dimension(format!(
                "x has length {}, e has length {}, dictionary is {}x{}",
                x.len(),
                noise.len(),
                dict.m(),
                dict.n_atoms()
            )));
        }
        let y = dict.apply(x) + &noise;
        Ok(Measurement {
            y,
            noise: Some(noise),
            sigma: Some(sigma),
        })
    }

    pub fn noiseless(dict: &Dictionary, x: &DVector<f64>) -> Result<Self> {
        Self::synthesize(dict, x, DVector::zeros(dict.m()), 0.0)
    }
}

/// Least squares, orthogonal projection and residual of `y` on `span(D_T)`.
#[derive(Clone, Debug)]
pub struct RestrictedSolve {
    pub coefficients: Vec<f64>,
    pub projection: DVector<f64>,
    pub residual: DVector<f64>,
}

/// Solve `min_c ||y - D_T c||_2` and keep the projection and residual.
pub fn solve_on_support(dict: &Dictionary, support: &SupportSet, y: &DVector<f64>) -> Result<RestrictedSolve> {
    let m = dict.m();
    if y.len() != m {
        return Err(Error::Dimension(format!("y has length {}, expected {m}", y.len())));
    }
    if support.indices().last().is_some_and(|&l| l >= dict.n_atoms()) {
        return Err(Error::InvalidSupport(format!(
            "support {support} out of range for {} atoms",
            dict.n_atoms()
        )));
    }
    let k = support.len();
    if k == 0 {
        return Ok(RestrictedSolve {
            coefficients: Vec::new(),
            projection: DVector::zeros(m),
            residual: y.clone(),
        });
    }
    let (dt, qr, ratio) = factor_support(dict, support)?;
    let r = qr.r();
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let rhs = DVector::from_iterator(k, qty.iter().take(k).copied());
    let c = r
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient { ratio })?;
    let projection = &dt * &c;
    let residual = y - &projection;
    Ok(RestrictedSolve {
        coefficients: c.iter().copied().collect(),
        projection,
        residual,
    })
}

pub(crate) type SupportQr = nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>;

/// `D_T` with its QR factorization, rejecting rank-deficient supports.
pub(crate) fn factor_support(
    dict: &Dictionary,
    support: &SupportSet,
) -> Result<(DMatrix<f64>, SupportQr, f64)> {
    if support.len() > dict.m() {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let dt = dict.restrict(support);
    let qr = dt.clone().qr();
    let sv = qr.r().singular_values();
    let (smax, smin) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(ratio >= RANK_RATIO_TOL) {
        return Err(Error::RankDeficient { ratio });
    }
    Ok((dt, qr, ratio))
}

/// `D_T^dagger y`, indexed like `support`.
pub fn least_squares_on_support(dict: &Dictionary, support: &SupportSet, y: &DVector<f64>) -> Result<Vec<f64>> {
    solve_on_support(dict, support, y).map(|s| s.coefficients)
}

/// `proj(y, D_T) = D_T D_T^dagger y`.
pub fn project(y: &DVector<f64>, dict: &Dictionary, support: &SupportSet) -> Result<DVector<f64>> {
    solve_on_support(dict, support, y).map(|s| s.projection)
}

/// `resid(y, D_T) = y - proj(y, D_T)`.
pub fn residual(y: &DVector<f64>, dict: &Dictionary, support: &SupportSet) -> Result<DVector<f64>> {
    solve_on_support(dict, support, y).map(|s| s.residual)
}

/// Indices of the `k` largest magnitudes of `v`, lowest index first on ties.
pub fn top_k_support(v: &[f64], k: usize) -> SupportSet {
    let k = k.min(v.len());
    if k == 0 {
        return SupportSet::empty();
    }
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let by_magnitude = |a: &usize, b: &usize| {
        v[*b].abs()
            .total_cmp(&v[*a].abs())
            .then_with(|| a.cmp(b))
    };
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, by_magnitude);
        idx.truncate(k);
    }
    SupportSet::from_unsorted(idx)
}

/// `x_K`: keep the `k` dominant entries of `x`, zero the rest.
pub fn best_k_approx(x: &DVector<f64>, k: usize) -> SparseSignal {
    let support = top_k_support(x.as_slice(), k);
    let mut values = DVector::zeros(x.len());
    for i in support.iter() {
        values[i] = x[i];
    }
    SparseSignal { values, support, k }
}
