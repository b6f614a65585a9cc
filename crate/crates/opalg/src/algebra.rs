//! Finite-dimensional *-algebras of complex matrices.
//!
//! A [`StarAlgebra`] is stored as a Hilbert-Schmidt-orthonormal basis of an
//! operator span that contains the identity and is closed under adjoints and
//! products (within `tol`). Algebras are generated from observables by
//! alternating pair products with Gram-Schmidt orthonormalization until the
//! span stops growing.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{null_space_scaled, C64, ComplexMatrix};
use crate::rng;

/// A *-closed unital operator algebra given by an orthonormal basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarAlgebra {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    tol: f64,
}

impl StarAlgebra {
    /// Smallest *-closed unital algebra containing `generators`, inside
    /// n x n matrices. The basis is built by seeding the identity, the
    /// generators and their adjoints, then repeatedly multiplying basis
    /// pairs and orthonormalizing new directions until nothing new appears.
    pub fn generate(ambient_dim: usize, generators: &[ComplexMatrix], tol: f64) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be >= 1".into()));
        }
        if !tol.is_finite() || tol <= 0.0 {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        for g in generators {
            let n = g.require_square()?;
            if n != ambient_dim {
                return Err(Error::DimensionMismatch(format!(
                    "generator is {}x{}, ambient dimension is {}",
                    g.rows(),
                    g.cols(),
                    ambient_dim
                )));
            }
        }

        let mut basis: Vec<ComplexMatrix> = Vec::new();
        let mut seeds = vec![ComplexMatrix::identity(ambient_dim)];
        for g in generators {
            seeds.push(g.clone());
            seeds.push(g.adjoint());
        }
        for s in &seeds {
            push_direction(&mut basis, s, tol);
        }

        // Closure loop: only products touching last round's new directions
        // can produce new directions.
        let max_rounds = ambient_dim * ambient_dim;
        let mut frontier_start = 0;
        for _ in 0..max_rounds {
            let len = basis.len();
            if len > ambient_dim * ambient_dim {
                return Err(Error::ClosureNotReached { rounds: max_rounds });
            }
            let mut added = false;
            for i in 0..len {
                for j in 0..len {
                    if i < frontier_start && j < frontier_start {
                        continue;
                    }
                    let prod = &basis[i] * &basis[j];
                    if push_direction(&mut basis, &prod, tol) {
                        added = true;
                    }
                }
            }
            frontier_start = len;
            if !added {
                return Ok(Self {
                    ambient_dim,
                    basis,
                    tol,
                });
            }
        }
        Err(Error::ClosureNotReached { rounds: max_rounds })
    }

    pub fn from_basis(ambient_dim: usize, basis: Vec<ComplexMatrix>, tol: f64) -> Self {
        Self {
            ambient_dim,
            basis,
            tol,
        }
    }

    /// Orthonormalizes a spanning set of an already product-closed span
    /// (no closure iteration). Used when restricting an algebra to an
    /// invariant block.
    pub fn from_spanning_set(
        ambient_dim: usize,
        elements: &[ComplexMatrix],
        tol: f64,
    ) -> Result<Self> {
        let mut basis = Vec::new();
        for e in elements {
            if e.require_square()? != ambient_dim {
                return Err(Error::DimensionMismatch(format!(
                    "spanning element is {}x{}, ambient dimension is {}",
                    e.rows(),
                    e.cols(),
                    ambient_dim
                )));
            }
            push_direction(&mut basis, e, tol);
        }
        Ok(Self {
            ambient_dim,
            basis,
            tol,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Coefficients of the orthogonal projection of `m` onto the span.
    pub fn project_coefficients(&self, m: &ComplexMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| b.hs_inner(m)).collect()
    }

    pub fn project(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (b, c) in self.basis.iter().zip(self.project_coefficients(m)) {
            acc = &acc + &b.scale(c);
        }
        acc
    }

    /// Frobenius norm of `m - project(m)`.
    pub fn span_residual(&self, m: &ComplexMatrix) -> f64 {
        (m - &self.project(m)).frobenius_norm()
    }

    pub fn span_contains(&self, m: &ComplexMatrix) -> bool {
        self.span_residual(m) <= self.tol * (1.0 + m.frobenius_norm())
    }

    /// Largest mutual projection residual between the two spans.
    pub fn span_equality_defect(&self, other: &StarAlgebra) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.basis {
            worst = worst.max(other.span_residual(b));
        }
        for b in &other.basis {
            worst = worst.max(self.span_residual(b));
        }
        worst
    }

    /// Element with the given basis coefficients.
    pub fn element(&self, coeffs: &[C64]) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (b, &c) in self.basis.iter().zip(coeffs) {
            acc = &acc + &b.scale(c);
        }
        acc
    }

    pub fn random_element(&self, rng: &mut impl Rng) -> ComplexMatrix {
        let coeffs: Vec<C64> = (0..self.dim()).map(|_| rng::complex_normal(rng)).collect();
        self.element(&coeffs)
    }

    /// Random hermitian element of the span (the span is *-closed, so the
    /// hermitian part of a span element stays inside).
    pub fn random_hermitian_element(&self, rng: &mut impl Rng) -> ComplexMatrix {
        self.random_element(rng).hermitian_part()
    }

    /// Checks all structural invariants: basis shapes, orthonormality,
    /// identity in the span, product closure, basis size.
    pub fn validate(&self) -> Result<()> {
        let n = self.ambient_dim;
        if self.basis.is_empty() {
            return Err(Error::InvalidArgument("algebra basis is empty".into()));
        }
        if self.basis.len() > n * n {
            return Err(Error::InvalidArgument(format!(
                "basis size {} exceeds ambient capacity {}",
                self.basis.len(),
                n * n
            )));
        }
        for b in &self.basis {
            if b.require_square()? != n {
                return Err(Error::DimensionMismatch(format!(
                    "basis element is {}x{}, ambient dimension is {}",
                    b.rows(),
                    b.cols(),
                    n
                )));
            }
        }
        let gram_defect = self.orthonormality_defect();
        if gram_defect > 10.0 * self.tol {
            return Err(Error::Numerical(format!(
                "basis is not orthonormal (defect {gram_defect:.3e})"
            )));
        }
        let id = ComplexMatrix::identity(n);
        let id_res = self.span_residual(&id);
        if id_res > self.tol * (1.0 + (n as f64).sqrt()) {
            return Err(Error::Numerical(format!(
                "identity is not in the span (residual {id_res:.3e})"
            )));
        }
        let (closure, star) = self.closure_defects();
        if closure > self.tol * 10.0 * (1.0 + n as f64) {
            return Err(Error::Numerical(format!(
                "span is not closed under products (residual {closure:.3e})"
            )));
        }
        if star > self.tol * 10.0 {
            return Err(Error::Numerical(format!(
                "span is not closed under adjoints (residual {star:.3e})"
            )));
        }
        Ok(())
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let g = self.basis[i].hs_inner(&self.basis[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Max span residuals of (pair products, adjoints) of basis elements.
    pub fn closure_defects(&self) -> (f64, f64) {
        let mut prod: f64 = 0.0;
        let mut star: f64 = 0.0;
        for a in &self.basis {
            star = star.max(self.span_residual(&a.adjoint()));
            for b in &self.basis {
                prod = prod.max(self.span_residual(&(a * b)));
            }
        }
        (prod, star)
    }

    /// Structure constants `c[k][(j, i)] = <B_j, B_k B_i>` resolving basis
    /// products through the basis, with the worst projection residual (a
    /// quality floor for every representation built on top of them).
    pub fn structure_constants(&self) -> StructureConstants {
        let m = self.dim();
        let mut tensors = Vec::with_capacity(m);
        let mut residual: f64 = 0.0;
        for k in 0..m {
            let mut t = DMatrix::<C64>::zeros(m, m);
            for i in 0..m {
                let prod = &self.basis[k] * &self.basis[i];
                for j in 0..m {
                    t[(j, i)] = self.basis[j].hs_inner(&prod);
                }
                let mut recon = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
                for j in 0..m {
                    recon = &recon + &self.basis[j].scale(t[(j, i)]);
                }
                residual = residual.max((&prod - &recon).frobenius_norm());
            }
            tensors.push(t);
        }
        StructureConstants { tensors, residual }
    }

    /// The algebra of all matrices commuting with every basis element,
    /// computed as the joint kernel of the maps `X -> X B_k - B_k X`.
    pub fn commutant(&self) -> StarAlgebra {
        let n = self.ambient_dim;
        let m = self.dim();
        let id = DMatrix::<C64>::identity(n, n);
        let mut stacked = DMatrix::<C64>::zeros(m * n * n, n * n);
        for (k, b) in self.basis.iter().enumerate() {
            let bd = b.as_dmatrix();
            let block = bd.transpose().kronecker(&id) - id.kronecker(bd);
            stacked.view_mut((k * n * n, 0), (n * n, n * n)).copy_from(&block);
        }
        let (kernel, _) = null_space_scaled(&stacked, self.tol.max(1e-12), 1.0);
        let basis: Vec<ComplexMatrix> = kernel
            .iter()
            .map(|v| {
                ComplexMatrix::from_dmatrix(DMatrix::from_iterator(n, n, v.iter().copied()))
                    .expect("kernel vectors are finite")
            })
            .collect();
        StarAlgebra {
            ambient_dim: n,
            basis,
            tol: self.tol,
        }
    }

    /// Intersection of this algebra with its commutant.
    pub fn center(&self) -> StarAlgebra {
        let other = self.commutant();
        self.intersect(&other)
    }

    /// Intersection of two spans inside the same ambient matrix space.
    pub fn intersect(&self, other: &StarAlgebra) -> StarAlgebra {
        let n = self.ambient_dim;
        let (ma, mb) = (self.dim(), other.dim());
        let mut stacked = DMatrix::<C64>::zeros(n * n, ma + mb);
        for (j, b) in self.basis.iter().enumerate() {
            for (r, z) in b.as_dmatrix().iter().enumerate() {
                stacked[(r, j)] = *z;
            }
        }
        for (j, b) in other.basis.iter().enumerate() {
            for (r, z) in b.as_dmatrix().iter().enumerate() {
                stacked[(r, ma + j)] = -*z;
            }
        }
        let (kernel, _) = null_space_scaled(&stacked, self.tol.max(1e-12), 1.0);
        let mut basis: Vec<ComplexMatrix> = Vec::new();
        for v in kernel {
            let coeffs: Vec<C64> = v.iter().take(ma).copied().collect();
            let candidate = self.element(&coeffs);
            push_direction(&mut basis, &candidate, self.tol);
        }
        StarAlgebra {
            ambient_dim: n,
            basis,
            tol: self.tol,
        }
    }

    /// Draws `samples` pseudo-random span elements and measures the worst
    /// violation of each norm law. All laws are theorems for matrix
    /// algebras, so residuals reflect floating-point error only.
    pub fn verify_cstar_laws(&self, samples: usize, seed: u64) -> CstarLawReport {
        let mut rng = rng::seeded(seed);
        let mut report = CstarLawReport {
            samples,
            seed,
            generator: rng::GENERATOR.to_string(),
            triangle: 0.0,
            homogeneity: 0.0,
            submultiplicative: 0.0,
            hermitian_square: 0.0,
            square_sum_monotone: 0.0,
            cstar_identity: 0.0,
        };
        let norm = |m: &ComplexMatrix| m.operator_norm().expect("square by construction");
        for _ in 0..samples {
            let x = self.random_element(&mut rng);
            let y = self.random_element(&mut rng);
            let lambda: f64 = rng::complex_normal(&mut rng).re;
            let b = x.hermitian_part();
            let c = y.hermitian_part();

            let (nx, ny) = (norm(&x), norm(&y));
            report.triangle = report.triangle.max(norm(&(&x + &y)) - nx - ny);
            report.homogeneity = report
                .homogeneity
                .max((norm(&x.scale(C64::new(lambda, 0.0))) - lambda.abs() * nx).abs());
            report.submultiplicative = report.submultiplicative.max(norm(&(&x * &y)) - nx * ny);

            let nb = norm(&b);
            report.hermitian_square = report
                .hermitian_square
                .max((norm(&(&b * &b)) - nb * nb).abs());
            let b2 = &b * &b;
            let c2 = &c * &c;
            report.square_sum_monotone = report
                .square_sum_monotone
                .max(norm(&b2) - norm(&(&b2 + &c2)));
            report.cstar_identity = report
                .cstar_identity
                .max((norm(&(&x.adjoint() * &x)) - nx * nx).abs());
        }
        report.triangle = report.triangle.max(0.0);
        report.submultiplicative = report.submultiplicative.max(0.0);
        report.square_sum_monotone = report.square_sum_monotone.max(0.0);
        report
    }
}

/// Gram-Schmidt step: orthogonalize `candidate` against `basis` and append
/// the normalized remainder when it carries more than `tol` relative mass.
/// Returns whether a direction was added.
fn push_direction(basis: &mut Vec<ComplexMatrix>, candidate: &ComplexMatrix, tol: f64) -> bool {
    let scale = candidate.frobenius_norm();
    if scale <= 0.0 {
        return false;
    }
    let mut r = candidate.clone();
    // two passes of modified Gram-Schmidt for numerical hygiene
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.hs_inner(&r);
            r = &r - &b.scale(c);
        }
    }
    let rem = r.frobenius_norm();
    if rem < tol * scale {
        return false;
    }
    basis.push(r.scale(C64::new(1.0 / rem, 0.0)));
    true
}

pub struct StructureConstants {
    /// `tensors[k][(j, i)]` is the coefficient of `B_j` in `B_k B_i`.
    pub tensors: Vec<DMatrix<C64>>,
    /// Worst reconstruction residual of a basis pair product.
    pub residual: f64,
}

/// Worst-case residuals from sampling the norm laws of a *-algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CstarLawReport {
    pub samples: usize,
    pub seed: u64,
    pub generator: String,
    /// `||X+Y|| - ||X|| - ||Y||`, clamped at zero.
    pub triangle: f64,
    /// `| ||lX|| - |l| ||X|| |`.
    pub homogeneity: f64,
    /// `||XY|| - ||X|| ||Y||`, clamped at zero.
    pub submultiplicative: f64,
    /// `| ||B^2|| - ||B||^2 |` for hermitian B.
    pub hermitian_square: f64,
    /// `||B^2|| - ||B^2 + C^2||` for hermitian B, C, clamped at zero.
    pub square_sum_monotone: f64,
    /// `| ||X* X|| - ||X||^2 |`.
    pub cstar_identity: f64,
}

impl CstarLawReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.triangle,
            self.homogeneity,
            self.submultiplicative,
            self.hermitian_square,
            self.square_sum_monotone,
            self.cstar_identity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl fmt::Display for CstarLawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "norm-law residuals over {} samples (seed {}, {})", self.samples, self.seed, self.generator)?;
        writeln!(f, "  triangle inequality      {:.3e}", self.triangle)?;
        writeln!(f, "  homogeneity              {:.3e}", self.homogeneity)?;
        writeln!(f, "  submultiplicativity      {:.3e}", self.submultiplicative)?;
        writeln!(f, "  hermitian square         {:.3e}", self.hermitian_square)?;
        writeln!(f, "  square-sum monotonicity  {:.3e}", self.square_sum_monotone)?;
        writeln!(f, "  C*-identity              {:.3e}", self.cstar_identity)?;
        write!(f, "  max                      {:.3e}", self.max_residual())
    }
}
