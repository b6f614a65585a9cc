//! Superselection sectors: invariant blocks, commuting charges, and the
//! unobservability of relative phases between sectors.
//!
//! ```sh
//! cargo run --example superselection
//! ```

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use opalg::matrix::{pauli, ComplexMatrix};
use opalg::sectors::{
    decompose, is_superselected, phase_grid, phase_observability, DecompositionKind,
};
use opalg::StarAlgebra;

fn main() -> opalg::Result<()> {
    let tol = 1e-10;
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);

    // a 2x2 block plus a 1x1 block inside 3x3 matrices
    let x3 = ComplexMatrix::from_rows(3, 3, &[zero, one, zero, one, zero, zero, zero, zero, zero])?;
    let z3 = ComplexMatrix::from_rows(3, 3, &[one, zero, zero, zero, -one, zero, zero, zero, zero])?;
    let alg = StarAlgebra::generate(3, &[x3.clone(), z3], tol)?;

    let dec = decompose(&alg, DecompositionKind::Irreducible, 1)?;
    println!(
        "irreducible blocks: {:?} (off-block mass {:.3e})",
        dec.blocks,
        dec.off_block_residual(&alg)
    );

    // the projector on the small block commutes with every observable
    let charge = ComplexMatrix::from_rows(3, 3, &[zero, zero, zero, zero, zero, zero, zero, zero, one])?;
    println!("block projector superselected: {}", is_superselected(&charge, &alg)?);
    println!("x inside the big block superselected: {}", is_superselected(&x3, &alg)?);

    // a superposition across the two sectors: no observable sees the phase
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi1 = DVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, h), zero]);
    let psi2 = DVector::from_vec(vec![zero, zero, one]);
    let c = C64::new(h, 0.0);
    let sweep = phase_observability(&alg, &dec, 0, &psi1, 1, &psi2, c, c, &phase_grid(64))?;
    println!("\nacross sectors: {sweep}");

    // contrast: inside a single irreducible space the phase is visible
    let e1 = DVector::from_vec(vec![one, zero]);
    let e2 = DVector::from_vec(vec![zero, one]);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for phi in phase_grid(64) {
        let psi = (e1.clone() + e2.clone() * C64::from_polar(1.0, phi)) * C64::new(h, 0.0);
        let value = psi.dotc(&pauli::x().apply(&psi)).re;
        lo = lo.min(value);
        hi = hi.max(value);
    }
    println!("within one sector, <x> sweeps over a range of {:.6}", hi - lo);
    Ok(())
}
