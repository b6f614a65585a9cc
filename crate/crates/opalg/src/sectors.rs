//! Superselection structure: block decomposition of the ambient space under
//! a *-algebra, superselected-charge detection, and unobservability of
//! relative phases across blocks.
//!
//! Splitting works by eigendecomposing a random hermitian element of the
//! center (isotypic blocks) or of the commutant (irreducible blocks) and
//! recursing inside each eigenblock until the relevant auxiliary algebra
//! collapses to scalars.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::algebra::StarAlgebra;
use crate::error::{Error, Result};
use crate::matrix::{C64, CVector, ComplexMatrix};
use crate::rng;

/// Relative eigenvalue gap below which eigenspaces are merged when
/// splitting along a random central/commutant element.
const SPLIT_MERGE_GAP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionKind {
    /// Split along the center: blocks carry inequivalent isotypic pieces.
    Isotypic,
    /// Split along the commutant: blocks carry irreducible restrictions.
    Irreducible,
}

impl fmt::Display for DecompositionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionKind::Isotypic => write!(f, "isotypic"),
            DecompositionKind::Irreducible => write!(f, "irreducible"),
        }
    }
}

/// A unitary change of basis making every algebra element block-diagonal,
/// with the `(offset, size)` block layout in the new basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectorDecomposition {
    pub basis_change: ComplexMatrix,
    pub blocks: Vec<(usize, usize)>,
    pub kind: DecompositionKind,
}

impl SectorDecomposition {
    /// Conjugates a matrix into the decomposition basis.
    pub fn conjugate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let u = self.basis_change.as_dmatrix();
        ComplexMatrix::from_dmatrix(u.adjoint() * m.as_dmatrix() * u)
            .expect("conjugation preserves finiteness")
    }

    /// Worst off-block Frobenius mass over the conjugated algebra basis.
    pub fn off_block_residual(&self, alg: &StarAlgebra) -> f64 {
        let mut worst: f64 = 0.0;
        for b in alg.basis() {
            let c = self.conjugate(b);
            let mut off = 0.0;
            for i in 0..c.rows() {
                for j in 0..c.cols() {
                    if self.block_of(i) != self.block_of(j) {
                        off += c[(i, j)].norm_sqr();
                    }
                }
            }
            worst = worst.max(off.sqrt());
        }
        worst
    }

    fn block_of(&self, index: usize) -> usize {
        for (k, &(off, size)) in self.blocks.iter().enumerate() {
            if index >= off && index < off + size {
                return k;
            }
        }
        usize::MAX
    }

    pub fn validate(&self, alg: &StarAlgebra) -> Result<()> {
        let n = alg.ambient_dim();
        if self.basis_change.rows() != n || self.basis_change.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "basis change is {}x{}, ambient dimension is {}",
                self.basis_change.rows(),
                self.basis_change.cols(),
                n
            )));
        }
        self.basis_change.require_unitary(1e-8)?;
        let covered: usize = self.blocks.iter().map(|&(_, s)| s).sum();
        if covered != n {
            return Err(Error::InvalidArgument(format!(
                "blocks cover {covered} dimensions, ambient is {n}"
            )));
        }
        let residual = self.off_block_residual(alg);
        if residual > alg.tol() {
            return Err(Error::Numerical(format!(
                "conjugated basis is not block-diagonal (off-block mass {residual:.3e})"
            )));
        }
        Ok(())
    }
}

/// Decomposes the ambient space into invariant blocks of the algebra.
/// A single block is valid output (trivial decomposition).
pub fn decompose(
    alg: &StarAlgebra,
    kind: DecompositionKind,
    seed: u64,
) -> Result<SectorDecomposition> {
    let n = alg.ambient_dim();
    let mut rng = rng::seeded(seed);
    let (u, sizes) = split(alg, kind, &mut rng, 0)?;

    // canonical ordering: by the original coordinate each block mostly
    // lives on, so a pre-blocked layout is recovered as laid out
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for &s in &sizes {
        offsets.push(acc);
        acc += s;
    }
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    let support = |b: usize| -> usize {
        let mut best = (0usize, -1.0f64);
        for i in 0..n {
            let mut w = 0.0;
            for c in offsets[b]..offsets[b] + sizes[b] {
                w += u[(i, c)].norm_sqr();
            }
            if w > best.1 {
                best = (i, w);
            }
        }
        best.0
    };
    let keys: Vec<usize> = (0..sizes.len()).map(support).collect();
    order.sort_by_key(|&b| (keys[b], b));

    let mut basis_change = DMatrix::<C64>::zeros(n, n);
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut dst = 0;
    for &b in &order {
        for c in 0..sizes[b] {
            basis_change.set_column(dst + c, &u.as_dmatrix().column(offsets[b] + c));
        }
        blocks.push((dst, sizes[b]));
        dst += sizes[b];
    }

    let dec = SectorDecomposition {
        basis_change: ComplexMatrix::from_dmatrix(basis_change)?,
        blocks,
        kind,
    };
    let residual = dec.off_block_residual(alg);
    if residual > alg.tol() {
        return Err(Error::Numerical(format!(
            "decomposition failed to block-diagonalize (off-block mass {residual:.3e})"
        )));
    }
    Ok(dec)
}

/// Recursive eigenblock splitting; returns a local unitary and block sizes.
fn split(
    alg: &StarAlgebra,
    kind: DecompositionKind,
    rng: &mut impl Rng,
    depth: usize,
) -> Result<(ComplexMatrix, Vec<usize>)> {
    let n = alg.ambient_dim();
    if depth > n {
        return Err(Error::Numerical(
            "sector recursion exceeded the ambient dimension".into(),
        ));
    }
    let aux = match kind {
        DecompositionKind::Isotypic => alg.center(),
        DecompositionKind::Irreducible => alg.commutant(),
    };
    if aux.dim() <= 1 {
        return Ok((ComplexMatrix::identity(n), vec![n]));
    }

    // random hermitian splitting element; redraw on accidental degeneracy
    let mut clusters = Vec::new();
    let mut vectors = ComplexMatrix::identity(n);
    for _attempt in 0..8 {
        let h = aux.random_hermitian_element(rng);
        let eig = h.hermitian_eigen()?;
        let c = eig.clusters(SPLIT_MERGE_GAP);
        if c.len() > 1 {
            clusters = c;
            vectors = eig.vectors;
            break;
        }
    }
    if clusters.len() <= 1 {
        // the auxiliary algebra is non-scalar, so a splitting element
        // exists; eight failures in a row means numerically degenerate input
        return Err(Error::Numerical(
            "failed to find a splitting element in the auxiliary algebra".into(),
        ));
    }

    let mut u = DMatrix::<C64>::zeros(n, n);
    let mut sizes = Vec::new();
    let mut dst = 0;
    for cluster in clusters {
        let k = cluster.len();
        let q = vectors.as_dmatrix().columns(cluster[0], k).into_owned();
        // restriction of the algebra to this block
        let compressed: Vec<ComplexMatrix> = alg
            .basis()
            .iter()
            .map(|b| {
                ComplexMatrix::from_dmatrix(q.adjoint() * b.as_dmatrix() * &q)
                    .expect("compression preserves finiteness")
            })
            .collect();
        let restricted = StarAlgebra::from_spanning_set(k, &compressed, alg.tol())?;
        let (local_u, local_sizes) = split(&restricted, kind, rng, depth + 1)?;
        let rotated = q * local_u.as_dmatrix();
        for c in 0..k {
            u.set_column(dst + c, &rotated.column(c));
        }
        dst += k;
        sizes.extend(local_sizes);
    }
    Ok((ComplexMatrix::from_dmatrix(u)?, sizes))
}

/// True iff `q` commutes with every basis element of the algebra within the
/// algebra tolerance (a superselected charge).
pub fn is_superselected(q: &ComplexMatrix, alg: &StarAlgebra) -> Result<bool> {
    let n = q.require_square()?;
    if n != alg.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "charge is {n}x{n}, ambient dimension is {}",
            alg.ambient_dim()
        )));
    }
    let scale = 1.0 + q.operator_norm()?;
    for b in alg.basis() {
        if q.commutator(b)?.operator_norm()? >= alg.tol() * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Phase sweep of expectations over superpositions across two blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseObservabilityReport {
    /// Largest spread of any basis-element expectation over the phase grid.
    pub max_variation: f64,
    /// Largest deviation from the incoherent mixture
    /// `|c1|^2 <psi1|B|psi1> + |c2|^2 <psi2|B|psi2>`.
    pub max_mixture_deviation: f64,
    pub phases: Vec<f64>,
    pub elements_checked: usize,
}

impl fmt::Display for PhaseObservabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "phase sweep over {} angles, {} elements: variation {:.3e}, mixture deviation {:.3e}",
            self.phases.len(),
            self.elements_checked,
            self.max_variation,
            self.max_mixture_deviation
        )
    }
}

/// Sweeps `psi(phi) = c1 psi1 + c2 e^{i phi} psi2` over the given phases and
/// measures how much any algebra expectation varies, and how far it strays
/// from the incoherent mixture. Vectors are given in the decomposition
/// basis and must be unit and supported in the designated blocks.
#[allow(clippy::too_many_arguments)]
pub fn phase_observability(
    alg: &StarAlgebra,
    dec: &SectorDecomposition,
    block1: usize,
    psi1: &CVector,
    block2: usize,
    psi2: &CVector,
    c1: C64,
    c2: C64,
    phases: &[f64],
) -> Result<PhaseObservabilityReport> {
    if block1 == block2 {
        return Err(Error::InvalidArgument(
            "superposition blocks must be distinct".into(),
        ));
    }
    if block1 >= dec.blocks.len() || block2 >= dec.blocks.len() {
        return Err(Error::InvalidArgument(format!(
            "block index out of range (decomposition has {} blocks)",
            dec.blocks.len()
        )));
    }
    let weight = c1.norm_sqr() + c2.norm_sqr();
    if (weight - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "|c1|^2 + |c2|^2 = {weight}, expected 1"
        )));
    }
    let n = alg.ambient_dim();
    for (psi, block) in [(psi1, block1), (psi2, block2)] {
        if psi.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs ambient dimension {n}",
                psi.len()
            )));
        }
        if (psi.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument("superposed vectors must be unit".into()));
        }
        let (off, size) = dec.blocks[block];
        let outside: f64 = psi
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < off || *i >= off + size)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        if outside.sqrt() > alg.tol().max(1e-10) * 10.0 {
            return Err(Error::InvalidArgument(format!(
                "vector leaks {:.3e} outside its designated block",
                outside.sqrt()
            )));
        }
    }
    if phases.is_empty() {
        return Err(Error::InvalidArgument("phase grid is empty".into()));
    }

    let conjugated: Vec<ComplexMatrix> = alg.basis().iter().map(|b| dec.conjugate(b)).collect();
    let mut max_variation: f64 = 0.0;
    let mut max_mixture_deviation: f64 = 0.0;
    for b in &conjugated {
        let e1 = psi1.dotc(&b.apply(psi1));
        let e2 = psi2.dotc(&b.apply(psi2));
        let mixture = e1 * C64::new(c1.norm_sqr(), 0.0) + e2 * C64::new(c2.norm_sqr(), 0.0);
        let values: Vec<C64> = phases
            .iter()
            .map(|&phi| {
                let psi = psi1 * c1 + psi2 * (c2 * C64::from_polar(1.0, phi));
                psi.dotc(&b.apply(&psi))
            })
            .collect();
        for (k, a) in values.iter().enumerate() {
            max_mixture_deviation = max_mixture_deviation.max((a - mixture).norm());
            for b2 in &values[k + 1..] {
                max_variation = max_variation.max((a - b2).norm());
            }
        }
    }
    Ok(PhaseObservabilityReport {
        max_variation,
        max_mixture_deviation,
        phases: phases.to_vec(),
        elements_checked: conjugated.len(),
    })
}

/// Evenly spaced phase grid on `[0, 2 pi)`, including 0.
pub fn phase_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| std::f64::consts::TAU * k as f64 / count.max(1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::pauli;

    const TOL: f64 = 1e-10;

    fn full_2x2() -> StarAlgebra {
        StarAlgebra::generate(2, &[pauli::x(), pauli::z()], TOL).unwrap()
    }

    fn diagonal_2() -> StarAlgebra {
        StarAlgebra::generate(2, &[pauli::z()], TOL).unwrap()
    }

    fn block_m2_m1() -> StarAlgebra {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let x3 = ComplexMatrix::from_rows(3, 3, &[zero, one, zero, one, zero, zero, zero, zero, zero]).unwrap();
        let z3 = ComplexMatrix::from_rows(3, 3, &[one, zero, zero, zero, -one, zero, zero, zero, zero]).unwrap();
        StarAlgebra::generate(3, &[x3, z3], TOL).unwrap()
    }

    #[test]
    fn full_algebra_is_a_single_block() {
        for kind in [DecompositionKind::Isotypic, DecompositionKind::Irreducible] {
            let dec = decompose(&full_2x2(), kind, 1).unwrap();
            assert_eq!(dec.blocks, vec![(0, 2)]);
            dec.validate(&full_2x2()).unwrap();
        }
    }

    #[test]
    fn block_algebra_recovers_its_layout() {
        let alg = block_m2_m1();
        let dec = decompose(&alg, DecompositionKind::Irreducible, 3).unwrap();
        assert_eq!(dec.blocks, vec![(0, 2), (2, 1)]);
        assert!(dec.off_block_residual(&alg) < 1e-10);
        dec.validate(&alg).unwrap();
    }

    #[test]
    fn diagonal_algebra_splits_into_lines() {
        let alg = diagonal_2();
        let dec = decompose(&alg, DecompositionKind::Irreducible, 5).unwrap();
        assert_eq!(dec.blocks, vec![(0, 1), (1, 1)]);
        dec.validate(&alg).unwrap();
    }

    #[test]
    fn diagonal_counting_scales_with_dimension() {
        for n in 2..=5usize {
            let gens: Vec<ComplexMatrix> = (0..n)
                .map(|k| {
                    ComplexMatrix::from_fn(n, n, |i, j| {
                        if i == j && i == k {
                            C64::new(1.0, 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    })
                    .unwrap()
                })
                .collect();
            let alg = StarAlgebra::generate(n, &gens, TOL).unwrap();
            let dec = decompose(&alg, DecompositionKind::Irreducible, 7).unwrap();
            assert_eq!(dec.blocks.len(), n);
        }
    }

    #[test]
    fn identity_is_always_superselected() {
        assert!(is_superselected(&ComplexMatrix::identity(2), &full_2x2()).unwrap());
    }

    #[test]
    fn diagonal_charge_commutes_with_diagonal_algebra() {
        assert!(is_superselected(&pauli::z(), &diagonal_2()).unwrap());
    }

    #[test]
    fn off_diagonal_charge_is_not_superselected_in_full_algebra() {
        assert!(!is_superselected(&pauli::x(), &full_2x2()).unwrap());
    }

    #[test]
    fn phases_are_invisible_across_diagonal_sectors() {
        let alg = diagonal_2();
        let dec = decompose(&alg, DecompositionKind::Irreducible, 5).unwrap();
        let e1 = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let e2 = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let report =
            phase_observability(&alg, &dec, 0, &e1, 1, &e2, h, h, &phase_grid(32)).unwrap();
        assert!(report.max_variation < 1e-13, "{report}");
        assert!(report.max_mixture_deviation < 1e-13, "{report}");
    }

    #[test]
    fn single_block_decomposition_is_rejected_for_superposition() {
        let alg = full_2x2();
        let dec = decompose(&alg, DecompositionKind::Irreducible, 1).unwrap();
        let e1 = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let e2 = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!(matches!(
            phase_observability(&alg, &dec, 0, &e1, 0, &e2, h, h, &phase_grid(8)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cross_block_phases_are_invisible_in_block_algebra() {
        let alg = block_m2_m1();
        let dec = decompose(&alg, DecompositionKind::Irreducible, 9).unwrap();
        // a vector inside the 2-dim block, and the 1-dim block line
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi1 = CVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, h), C64::new(0.0, 0.0)]);
        let psi2 = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let c = C64::new(h, 0.0);
        let report =
            phase_observability(&alg, &dec, 0, &psi1, 1, &psi2, c, c, &phase_grid(64)).unwrap();
        assert!(report.max_variation < 1e-12, "{report}");
        assert!(report.max_mixture_deviation < 1e-12, "{report}");
    }

    #[test]
    fn random_block_algebras_hide_cross_sector_phases() {
        // randomly rotated two-block algebras in dims 3..=5: the sweep
        // variation never leaves machine scale
        let mut rng = crate::rng::seeded(71);
        let grid = phase_grid(16);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        for run in 0..100u64 {
            let n = 3 + (run as usize) % 3;
            let split = 1 + (run as usize) % (n - 1);
            let g = crate::rng::unitary(&mut rng, n);
            // full matrix units in each diagonal block, conjugated by g
            let mut gens = Vec::new();
            for (off, size) in [(0, split), (split, n - split)] {
                for i in 0..size {
                    for j in 0..size {
                        let e = ComplexMatrix::from_fn(n, n, |r, c| {
                            if r == off + i && c == off + j {
                                C64::new(1.0, 0.0)
                            } else {
                                C64::new(0.0, 0.0)
                            }
                        })
                        .unwrap();
                        gens.push(&(&g * &e) * &g.adjoint());
                    }
                }
            }
            let alg = StarAlgebra::from_spanning_set(n, &gens, TOL).unwrap();
            let dec = decompose(&alg, DecompositionKind::Irreducible, 500 + run).unwrap();
            assert!(dec.blocks.len() >= 2, "run {run}: {:?}", dec.blocks);
            // random unit vectors inside the first two blocks
            let mut in_block = |b: usize| {
                let (off, size) = dec.blocks[b];
                let mut v = CVector::zeros(n);
                for k in 0..size {
                    v[off + k] = crate::rng::complex_normal(&mut rng);
                }
                &v / C64::new(v.norm(), 0.0)
            };
            let psi1 = in_block(0);
            let psi2 = in_block(1);
            let report =
                phase_observability(&alg, &dec, 0, &psi1, 1, &psi2, h, h, &grid).unwrap();
            assert!(
                report.max_variation < 1e-12,
                "run {run}: variation {:.3e}",
                report.max_variation
            );
        }
    }

    #[test]
    fn leaking_vectors_are_rejected() {
        let alg = block_m2_m1();
        let dec = decompose(&alg, DecompositionKind::Irreducible, 9).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let leak = CVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]);
        let e3 = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let c = C64::new(h, 0.0);
        assert!(phase_observability(&alg, &dec, 0, &leak, 1, &e3, c, c, &phase_grid(8)).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let alg = block_m2_m1();
        let dec = decompose(&alg, DecompositionKind::Irreducible, 3).unwrap();
        let text = serde_json::to_string(&dec).unwrap();
        assert!(text.contains("\"kind\":\"irreducible\""));
        let back: SectorDecomposition = serde_json::from_str(&text).unwrap();
        back.validate(&alg).unwrap();
        assert_eq!(back.blocks, dec.blocks);
    }
}
