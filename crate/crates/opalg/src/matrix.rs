//! Dense complex matrices: the universal numeric carrier for observables,
//! states, projections and unitaries.
//!
//! [`ComplexMatrix`] wraps an `nalgebra` dense matrix and enforces two
//! invariants at every construction site: all entries are finite, and both
//! dimensions are at least one. Decompositions (hermitian eigen, SVD, null
//! spaces) are delegated to `nalgebra` behind this interface.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;

/// Dense complex matrix with finite entries, `rows, cols >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Builds from row-major entries, validating shape and finiteness.
    pub fn from_rows(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be at least 1".into(),
            ));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        let inner = DMatrix::from_row_slice(rows, cols, entries);
        Self::from_dmatrix(inner)
    }

    pub fn from_dmatrix(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be at least 1".into(),
            ));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { inner })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows.max(1), cols.max(1)),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n.max(1), n.max(1)),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Rank-one projector `|psi><psi| / <psi|psi>`.
    pub fn projector(psi: &CVector) -> Result<Self> {
        let n2 = psi.norm_squared();
        if n2 <= 0.0 {
            return Err(Error::InvalidArgument("zero vector has no projector".into()));
        }
        let m = psi * psi.adjoint() / C64::new(n2, 0.0);
        Self::from_dmatrix(m)
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NonSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            inner: &self.inner * c,
        }
    }

    /// Hilbert-Schmidt inner product `<self, other> = Tr(self* other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|| self - self* ||_F`; zero exactly for hermitian matrices.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.inner - self.inner.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * (1.0 + self.frobenius_norm())
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        self.require_square()?;
        let defect = self.hermiticity_defect();
        if defect <= tol * (1.0 + self.frobenius_norm()) {
            Ok(())
        } else {
            Err(Error::NotHermitian { defect })
        }
    }

    pub fn hermitian_part(&self) -> Self {
        Self {
            inner: (&self.inner + self.inner.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    /// `|| self* self - I ||_F`; zero exactly for unitaries.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        (self.inner.adjoint() * &self.inner - DMatrix::<C64>::identity(n, n)).norm()
    }

    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary { defect })
        }
    }

    /// Largest singular value; realizes the operator norm.
    pub fn operator_norm(&self) -> Result<f64> {
        self.require_square()?;
        Ok(singular_values(&self.inner).first().copied().unwrap_or(0.0))
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.inner * v
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let n = self.require_square()?;
        if other.require_square()? != n {
            return Err(Error::DimensionMismatch(format!(
                "commutator of {}x{} with {}x{}",
                n,
                n,
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self {
            inner: &self.inner * &other.inner - &other.inner * &self.inner,
        })
    }

    /// Eigendecomposition of a hermitian matrix, eigenvalues ascending,
    /// eigenvector columns orthonormal. The matrix is symmetrized first;
    /// callers enforce hermiticity to their own tolerance.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        let n = self.require_square()?;
        let sym = (&self.inner + self.inner.adjoint()) * C64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::<C64>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Ok(HermitianEigen {
            values,
            vectors: ComplexMatrix { inner: vectors },
        })
    }

    /// Applies `f` to the spectrum of a hermitian matrix (functional calculus).
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let eig = self.hermitian_eigen()?;
        let n = self.rows();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            eig.values.iter().map(|&l| C64::new(f(l), 0.0)),
        ));
        let v = eig.vectors.inner;
        Ok(Self {
            inner: &v * d * v.adjoint(),
        })
    }

    /// Eigendecomposition of a (near) unitary matrix by joint diagonalization
    /// of its commuting hermitian real and imaginary parts.
    pub fn unitary_eigen(&self) -> Result<(Vec<C64>, ComplexMatrix)> {
        let n = self.require_square()?;
        let re = self.hermitian_part();
        let im = ComplexMatrix {
            inner: (&self.inner - self.inner.adjoint()) * C64::new(0.0, -0.5),
        };
        let eig = re.hermitian_eigen()?;
        let clusters = cluster_scalars(&eig.values, 1e-8);
        let mut basis = eig.vectors.inner;
        for cluster in clusters {
            if cluster.len() < 2 {
                continue;
            }
            let q = basis.columns(cluster[0], cluster.len()).into_owned();
            let compressed = q.adjoint() * im.as_dmatrix() * &q;
            let sub = ComplexMatrix::from_dmatrix(compressed)?.hermitian_eigen()?;
            let refined = q * sub.vectors.inner;
            for (k, col) in cluster.iter().copied().enumerate() {
                basis.set_column(col, &refined.column(k));
            }
        }
        let values: Vec<C64> = (0..n)
            .map(|k| {
                let v = basis.column(k).into_owned();
                (v.adjoint() * &self.inner * v)[(0, 0)]
            })
            .collect();
        Ok((values, ComplexMatrix { inner: basis }))
    }
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn eigenvector(&self, k: usize) -> CVector {
        self.vectors.as_dmatrix().column(k).into_owned()
    }

    /// Groups of eigenvalue indices whose gaps are below
    /// `rel_gap * spectral_range` (degenerate clusters merged).
    pub fn clusters(&self, rel_gap: f64) -> Vec<Vec<usize>> {
        cluster_scalars(&self.values, rel_gap)
    }
}

/// Partitions sorted values into clusters separated by gaps above
/// `rel_gap * (max - min)`.
pub fn cluster_scalars(sorted: &[f64], rel_gap: f64) -> Vec<Vec<usize>> {
    if sorted.is_empty() {
        return Vec::new();
    }
    let range = sorted[sorted.len() - 1] - sorted[0];
    let threshold = rel_gap * range.max(f64::MIN_POSITIVE);
    let mut clusters = vec![vec![0]];
    for k in 1..sorted.len() {
        if sorted[k] - sorted[k - 1] <= threshold {
            clusters.last_mut().unwrap().push(k);
        } else {
            clusters.push(vec![k]);
        }
    }
    clusters
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Orthonormal kernel basis of `m`, via the hermitian eigenproblem of
/// `m* m` (complete for wide matrices, unlike a thin SVD). Directions with
/// singular value `<= rel_tol * max(sigma_max, scale)` count as null, where
/// `scale` is the caller's natural magnitude for the map (so an all-noise
/// map, e.g. commutation constraints against scalars, is recognized as
/// zero). Also returns all singular values, ascending.
///
/// A single Gram pass cannot resolve singular values below
/// `sqrt(eps) * sigma_max`; a second pass restricted to the small-sigma
/// candidate subspace pushes the floor down to machine level.
pub fn null_space_scaled(
    m: &DMatrix<C64>,
    rel_tol: f64,
    scale: f64,
) -> (Vec<CVector>, Vec<f64>) {
    let gram = m.adjoint() * m;
    let n = gram.nrows();
    let eig = ComplexMatrix::from_dmatrix(gram)
        .expect("gram matrix of finite input is finite")
        .hermitian_eigen()
        .expect("gram matrix is square");
    let mut sigmas: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let sigma_max = sigmas.last().copied().unwrap_or(0.0).max(scale);
    if sigma_max == 0.0 {
        let vectors = (0..n).map(|k| eig.eigenvector(k)).collect();
        return (vectors, sigmas);
    }

    let candidate_cut = (1e-6 * sigma_max).max(rel_tol * sigma_max);
    let k = sigmas.iter().filter(|&&s| s <= candidate_cut).count();
    let mut refined: Vec<(f64, CVector)> = Vec::new();
    if k > 0 {
        let q = eig.vectors.as_dmatrix().columns(0, k).into_owned();
        let mq = m * &q;
        let gram2 = mq.adjoint() * mq;
        let eig2 = ComplexMatrix::from_dmatrix(gram2)
            .expect("restricted gram is finite")
            .hermitian_eigen()
            .expect("restricted gram is square");
        for j in 0..k {
            let sigma = eig2.values[j].max(0.0).sqrt();
            let v = &q * eig2.eigenvector(j);
            refined.push((sigma, v));
        }
        for (j, (sigma, _)) in refined.iter().enumerate() {
            sigmas[j] = *sigma;
        }
        sigmas.sort_by(f64::total_cmp);
    }

    let cut = rel_tol * sigma_max;
    let vectors = refined
        .into_iter()
        .filter(|(sigma, _)| *sigma <= cut)
        .map(|(_, v)| v)
        .collect();
    (vectors, sigmas)
}

/// [`null_space_scaled`] with the map's own largest singular value as scale.
pub fn null_space(m: &DMatrix<C64>, rel_tol: f64) -> (Vec<CVector>, Vec<f64>) {
    null_space_scaled(m, rel_tol, 0.0)
}

/// Numerical rank relative to the largest singular value.
pub fn rank(m: &DMatrix<C64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let cut = rel_tol * sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > cut).count()
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows(), self.cols()), (rhs.rows(), rhs.cols()));
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows(), self.cols()), (rhs.rows(), rhs.cols()));
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols(), rhs.rows());
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            inner: -self.inner.clone(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows() {
            write!(f, "[")?;
            for j in 0..self.cols() {
                let z = self.inner[(i, j)];
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut entries = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.inner[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            entries,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(de)?;
        let entries: Vec<C64> = repr.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::from_rows(repr.rows, repr.cols, &entries).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for complex vectors as `[[re, im], ...]`.
pub mod serde_cvector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<CVector, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(de)?;
        Ok(CVector::from_iterator(
            pairs.len(),
            pairs.iter().map(|&[re, im]| C64::new(re, im)),
        ))
    }
}

/// The qubit Pauli matrices, used throughout tests and examples.
pub mod pauli {
    use super::{C64, ComplexMatrix};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-1.0, 0.0),
            ],
        )
        .unwrap()
    }
}
