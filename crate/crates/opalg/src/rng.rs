//! Seeded pseudo-randomness.
//!
//! Every stochastic operation in the crate draws from a ChaCha8 stream
//! seeded explicitly by the caller, and reports record the generator name
//! together with the seed, so any published number can be regenerated.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{C64, CVector, ComplexMatrix};

/// Name recorded in reports next to the seed.
pub const GENERATOR: &str = "chacha8";

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
        .expect("gaussian entries are finite")
}

pub fn hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ginibre(rng, n, n).hermitian_part()
}

/// Haar-like unitary from the QR factorization of a Ginibre matrix, with
/// the phase convention of positive real diagonal in R.
pub fn unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, n).into_dmatrix();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let col = q.column(k) * (phase.conj());
            q.set_column(k, &col);
        }
    }
    ComplexMatrix::from_dmatrix(q).expect("qr output is finite")
}

pub fn unit_vector(rng: &mut impl Rng, n: usize) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| complex_normal(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / C64::new(norm, 0.0);
        }
    }
}

/// Random full-rank density matrix `G G* / Tr(G G*)`.
pub fn density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, n).into_dmatrix();
    let rho: DMatrix<C64> = &g * g.adjoint();
    let tr = rho.trace();
    ComplexMatrix::from_dmatrix(rho / tr).expect("normalized gram matrix is finite")
}
