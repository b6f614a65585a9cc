//! Finite discrete Weyl systems: clock and shift unitaries satisfying
//! `U V = eps V U` with `eps = exp(2 pi i / n)`, relation verification, and
//! numerical unitary intertwiners between irreducible pairs.
//!
//! The intertwiner equation `W U1 = U2 W, W V1 = V2 W` is solved as the
//! kernel of the stacked linear map on matrices. For small moduli the
//! stacked map is handled densely; for large moduli the same kernel is
//! found in the eigenbasis of `U1, U2`, where the first equation pins the
//! sparsity pattern of `W` and the second becomes a small system in `n`
//! unknowns.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{null_space_scaled, C64, ComplexMatrix};

/// Moduli up to this size use the dense stacked kernel.
const DENSE_LIMIT: usize = 24;

/// A pair of unitaries with `U^n = V^n = I` and `U V = eps V U`.
#[derive(Clone, Debug)]
pub struct DiscreteWeylSystem {
    pub modulus: usize,
    pub u_matrix: ComplexMatrix,
    pub v_matrix: ComplexMatrix,
    pub phase: C64,
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    modulus: usize,
    u: ComplexMatrix,
    v: ComplexMatrix,
}

impl Serialize for DiscreteWeylSystem {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        SystemRepr {
            modulus: self.modulus,
            u: self.u_matrix.clone(),
            v: self.v_matrix.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DiscreteWeylSystem {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = SystemRepr::deserialize(de)?;
        Ok(DiscreteWeylSystem {
            modulus: repr.modulus,
            u_matrix: repr.u,
            v_matrix: repr.v,
            phase: C64::from_polar(1.0, std::f64::consts::TAU / repr.modulus.max(1) as f64),
        })
    }
}

impl DiscreteWeylSystem {
    pub fn validate(&self) -> Result<()> {
        let n = self.modulus;
        if n < 2 {
            return Err(Error::InvalidArgument("modulus must be at least 2".into()));
        }
        if self.u_matrix.rows() != n || self.v_matrix.rows() != n {
            return Err(Error::DimensionMismatch(
                "system matrices do not match the modulus".into(),
            ));
        }
        let expected = C64::from_polar(1.0, std::f64::consts::TAU / n as f64);
        if (self.phase - expected).norm() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "phase {} is not the primitive root for modulus {n}",
                self.phase
            )));
        }
        let report = verify_weyl_relations(self)?;
        if report.max_residual() > 1e-8 {
            return Err(Error::Numerical(format!(
                "Weyl relations violated (max residual {:.3e})",
                report.max_residual()
            )));
        }
        Ok(())
    }
}

/// Clock and shift pair: `U = diag(eps^k)`, `V e_j = e_{j+1 mod n}`.
pub fn schrodinger_system(n: usize) -> Result<DiscreteWeylSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "modulus {n} is too small (need at least 2)"
        )));
    }
    let eps = C64::from_polar(1.0, std::f64::consts::TAU / n as f64);
    let u = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, std::f64::consts::TAU * i as f64 / n as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })?;
    let v = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == (j + 1) % n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })?;
    Ok(DiscreteWeylSystem {
        modulus: n,
        u_matrix: u,
        v_matrix: v,
        phase: eps,
    })
}

/// Conjugates a system by a unitary: `(g U g*, g V g*)`.
pub fn conjugated_system(
    base: &DiscreteWeylSystem,
    g: &ComplexMatrix,
) -> Result<DiscreteWeylSystem> {
    if g.require_square()? != base.modulus {
        return Err(Error::DimensionMismatch(format!(
            "conjugator is {}x{}, modulus is {}",
            g.rows(),
            g.cols(),
            base.modulus
        )));
    }
    g.require_unitary(1e-8)?;
    let ga = g.adjoint();
    Ok(DiscreteWeylSystem {
        modulus: base.modulus,
        u_matrix: &(g * &base.u_matrix) * &ga,
        v_matrix: &(g * &base.v_matrix) * &ga,
        phase: base.phase,
    })
}

/// Residuals of the defining relations and the cyclic group law.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylRelationsReport {
    pub u_power: f64,
    pub v_power: f64,
    pub commutation: f64,
    pub unitarity: f64,
    pub group_law: f64,
}

impl WeylRelationsReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.u_power,
            self.v_power,
            self.commutation,
            self.unitarity,
            self.group_law,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl fmt::Display for WeylRelationsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Weyl relation residuals")?;
        writeln!(f, "  U^n = I        {:.3e}", self.u_power)?;
        writeln!(f, "  V^n = I        {:.3e}", self.v_power)?;
        writeln!(f, "  UV = eps VU    {:.3e}", self.commutation)?;
        writeln!(f, "  unitarity      {:.3e}", self.unitarity)?;
        write!(f, "  group law      {:.3e}", self.group_law)
    }
}

pub fn verify_weyl_relations(sys: &DiscreteWeylSystem) -> Result<WeylRelationsReport> {
    let n = sys.modulus;
    let id = ComplexMatrix::identity(n);
    let mut u_powers = Vec::with_capacity(n + 1);
    let mut v_powers = Vec::with_capacity(n + 1);
    u_powers.push(id.clone());
    v_powers.push(id.clone());
    for k in 1..=n {
        u_powers.push(&u_powers[k - 1] * &sys.u_matrix);
        v_powers.push(&v_powers[k - 1] * &sys.v_matrix);
    }
    let u_power = (&u_powers[n] - &id).operator_norm()?;
    let v_power = (&v_powers[n] - &id).operator_norm()?;
    let uv = &sys.u_matrix * &sys.v_matrix;
    let vu_scaled = (&sys.v_matrix * &sys.u_matrix).scale(sys.phase);
    let commutation = (&uv - &vu_scaled).operator_norm()?;
    let unitarity = sys
        .u_matrix
        .unitarity_defect()
        .max(sys.v_matrix.unitarity_defect());

    // the power tables realize the cyclic group law modulo n
    let pairs: Vec<(usize, usize)> = if n <= 12 {
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
    } else {
        (0..20).map(|k| ((7 * k + 3) % n, (11 * k + 5) % n)).collect()
    };
    let mut group_law: f64 = 0.0;
    for (a, b) in pairs {
        let prod = &u_powers[a] * &u_powers[b];
        group_law = group_law.max((&prod - &u_powers[(a + b) % n]).operator_norm()?);
    }
    Ok(WeylRelationsReport {
        u_power,
        v_power,
        commutation,
        unitarity,
        group_law,
    })
}

/// Distance `min_theta || a - e^{i theta} b ||_F` between matrices equal up
/// to a global phase.
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let overlap = b.hs_inner(a);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    (a - &b.scale(phase)).frobenius_norm()
}

/// Fixes the global phase so the first entry of the first column with
/// modulus above `1e-8` is positive real.
fn fix_phase(w: &ComplexMatrix) -> ComplexMatrix {
    for i in 0..w.rows() {
        let entry = w[(i, 0)];
        if entry.norm() > 1e-8 {
            let phase = entry.conj() / entry.norm();
            return w.scale(phase);
        }
    }
    w.clone()
}

/// Rescales a Schur-type kernel vector to a unitary and fixes its phase.
fn normalize_to_unitary(w0: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let n = w0.rows();
    let scale = (w0.hs_inner(w0).re / n as f64).sqrt();
    if scale <= 0.0 {
        return Err(Error::Numerical("kernel vector has zero norm".into()));
    }
    let w = w0.scale(C64::new(1.0 / scale, 0.0));
    let defect = w.unitarity_defect();
    if defect > tol.max(1e-8) * 100.0 {
        return Err(Error::Numerical(format!(
            "intertwiner is not proportional to a unitary (defect {defect:.3e})"
        )));
    }
    Ok(fix_phase(&w))
}

/// Kernel of the stacked map `W -> (W A_i - B_i W)_i`, densely.
/// Returns the kernel matrices and all singular values, ascending.
fn stacked_kernel(
    first: &[ComplexMatrix],
    second: &[ComplexMatrix],
    rel_tol: f64,
) -> Result<(Vec<ComplexMatrix>, Vec<f64>)> {
    let n = first[0].require_square()?;
    let id = DMatrix::<C64>::identity(n, n);
    let mut stacked = DMatrix::<C64>::zeros(first.len() * n * n, n * n);
    for (k, (a, b)) in first.iter().zip(second).enumerate() {
        if a.require_square()? != n || b.require_square()? != n {
            return Err(Error::DimensionMismatch(
                "intertwiner inputs must share one square dimension".into(),
            ));
        }
        let block = a.as_dmatrix().transpose().kronecker(&id) - id.kronecker(b.as_dmatrix());
        stacked
            .view_mut((k * n * n, 0), (n * n, n * n))
            .copy_from(&block);
    }
    let (kernel, sigmas) = null_space_scaled(&stacked, rel_tol, 1.0);
    let matrices = kernel
        .iter()
        .map(|v| {
            ComplexMatrix::from_dmatrix(DMatrix::from_iterator(n, n, v.iter().copied()))
                .expect("kernel vectors are finite")
        })
        .collect();
    Ok((matrices, sigmas))
}

/// Unitary intertwiner between two irreducible discrete Weyl systems, with
/// the singular values of the stacked (or reduced) kernel map, ascending.
///
/// Errors when the kernel dimension is 0 (inequivalent or invalid inputs)
/// or at least 2 (reducible inputs).
pub fn find_intertwiner_with_spectrum(
    r1: &DiscreteWeylSystem,
    r2: &DiscreteWeylSystem,
    tol: f64,
) -> Result<(ComplexMatrix, Vec<f64>)> {
    if r1.modulus != r2.modulus {
        return Err(Error::ModulusMismatch {
            left: r1.modulus,
            right: r2.modulus,
        });
    }
    let n = r1.modulus;
    let (w0, sigmas) = if n <= DENSE_LIMIT {
        let (kernel, sigmas) = stacked_kernel(
            &[r1.u_matrix.clone(), r1.v_matrix.clone()],
            &[r2.u_matrix.clone(), r2.v_matrix.clone()],
            tol,
        )?;
        match kernel.len() {
            1 => (kernel.into_iter().next().expect("one kernel vector"), sigmas),
            found => return Err(Error::IntertwinerDimension { found }),
        }
    } else {
        reduced_kernel(r1, r2, tol)?
    };
    let w = normalize_to_unitary(&w0, tol)?;
    let res_u = (&(&w * &r1.u_matrix) - &(&r2.u_matrix * &w)).operator_norm()?;
    let res_v = (&(&w * &r1.v_matrix) - &(&r2.v_matrix * &w)).operator_norm()?;
    if res_u.max(res_v) > tol.max(1e-8) * 10.0 {
        return Err(Error::Numerical(format!(
            "intertwiner residual {:.3e} above tolerance",
            res_u.max(res_v)
        )));
    }
    Ok((w, sigmas))
}

pub fn find_intertwiner(
    r1: &DiscreteWeylSystem,
    r2: &DiscreteWeylSystem,
    tol: f64,
) -> Result<ComplexMatrix> {
    find_intertwiner_with_spectrum(r1, r2, tol).map(|(w, _)| w)
}

/// Large-modulus path: diagonalize both clock operators, match their
/// spectra (each eigenvalue must be simple and matched exactly once), and
/// solve the shift equation on the surviving `n` entries of `W`.
fn reduced_kernel(
    r1: &DiscreteWeylSystem,
    r2: &DiscreteWeylSystem,
    tol: f64,
) -> Result<(ComplexMatrix, Vec<f64>)> {
    let n = r1.modulus;
    let (vals1, q1) = r1.u_matrix.unitary_eigen()?;
    let (vals2, q2) = r2.u_matrix.unitary_eigen()?;
    // smallest spacing of n-th roots of unity
    let spacing = 2.0 * (std::f64::consts::PI / n as f64).sin();
    let match_tol = 0.4 * spacing;

    // sigma(j): the target eigenline carrying the same eigenvalue
    let mut sigma = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for j in 0..n {
        let mut found = None;
        for i in 0..n {
            if !used[i] && (vals1[j] - vals2[i]).norm() < match_tol {
                if found.is_some() {
                    return Err(Error::Numerical(
                        "degenerate clock spectrum in the reduced intertwiner path".into(),
                    ));
                }
                found = Some(i);
            }
        }
        match found {
            Some(i) => {
                sigma[j] = i;
                used[i] = true;
            }
            None => return Err(Error::IntertwinerDimension { found: 0 }),
        }
    }

    let v1r = q1.as_dmatrix().adjoint() * r1.v_matrix.as_dmatrix() * q1.as_dmatrix();
    let v2r = q2.as_dmatrix().adjoint() * r2.v_matrix.as_dmatrix() * q2.as_dmatrix();

    // rows indexed by equation entries (i, c), unknowns w_0..w_{n-1}
    let mut system = DMatrix::<C64>::zeros(n * n, n);
    for c in 0..n {
        for j in 0..n {
            let row = sigma[j] * n + c;
            system[(row, j)] += v1r[(j, c)];
        }
        for i in 0..n {
            let row = i * n + c;
            system[(row, c)] -= v2r[(i, sigma[c])];
        }
    }
    let (kernel, sigmas) = null_space_scaled(&system, tol, 1.0);
    match kernel.len() {
        1 => {
            let w = &kernel[0];
            let mut reduced = DMatrix::<C64>::zeros(n, n);
            for j in 0..n {
                reduced[(sigma[j], j)] = w[j];
            }
            let full = q2.as_dmatrix() * reduced * q1.as_dmatrix().adjoint();
            Ok((ComplexMatrix::from_dmatrix(full)?, sigmas))
        }
        found => Err(Error::IntertwinerDimension { found }),
    }
}

/// Unitary intertwiner between two lists of operators generating
/// *-representations of the same algebra (`W A_i = B_i W` for all `i`).
/// Unlike the Weyl case the kernel may have dimension above one when the
/// representations are reducible; a seeded random kernel combination is
/// then polar-decomposed to a unitary.
pub fn find_intertwiner_general(
    first: &[ComplexMatrix],
    second: &[ComplexMatrix],
    tol: f64,
    seed: u64,
) -> Result<ComplexMatrix> {
    if first.is_empty() || first.len() != second.len() {
        return Err(Error::InvalidArgument(
            "need equally many source and target operators".into(),
        ));
    }
    let n = first[0].require_square()?;
    let (kernel, _) = stacked_kernel(first, second, tol)?;
    if kernel.is_empty() {
        return Err(Error::IntertwinerDimension { found: 0 });
    }
    let mut rng = crate::rng::seeded(seed);
    let mut w = ComplexMatrix::zeros(n, n);
    for k in &kernel {
        w = &w + &k.scale(crate::rng::complex_normal(&mut rng));
    }
    // polar part: W (W* W)^{-1/2} is a unitary intertwiner when W is
    // invertible, which a random kernel combination almost surely is
    let gram = ComplexMatrix::from_dmatrix(w.as_dmatrix().adjoint() * w.as_dmatrix())?;
    let eig = gram.hermitian_eigen()?;
    if eig.values[0] <= 1e-12 * eig.values[n - 1].max(1e-300) {
        return Err(Error::Numerical(
            "kernel combination is singular; retry with a different seed".into(),
        ));
    }
    let inv_sqrt = gram.hermitian_map(|l| 1.0 / l.max(1e-300).sqrt())?;
    let unitary = &w * &inv_sqrt;
    unitary.require_unitary(1e-6)?;
    let mut worst: f64 = 0.0;
    for (a, b) in first.iter().zip(second) {
        worst = worst.max((&(&unitary * a) - &(b * &unitary)).operator_norm()?);
    }
    if worst > tol.max(1e-8) * 100.0 {
        return Err(Error::Numerical(format!(
            "general intertwiner residual {worst:.3e} above tolerance"
        )));
    }
    Ok(fix_phase(&unitary))
}
