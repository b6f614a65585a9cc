//! Generate operator algebras from observables and verify the norm laws.
//!
//! ```sh
//! cargo run --example cstar_laws
//! ```

use num_complex::Complex64 as C64;
use opalg::matrix::{pauli, ComplexMatrix};
use opalg::StarAlgebra;

fn main() -> opalg::Result<()> {
    let tol = 1e-10;

    // a single involution closes after one product
    let small = StarAlgebra::generate(2, &[pauli::x()], tol)?;
    println!("<x> generates a {}-dimensional algebra", small.dim());

    // two anticommuting observables generate everything
    let full = StarAlgebra::generate(2, &[pauli::x(), pauli::z()], tol)?;
    println!("<x, z> generates a {}-dimensional algebra", full.dim());

    // norm laws, sampled over random span elements
    let report = full.verify_cstar_laws(200, 1);
    println!("\n{report}");

    // commutants and centers detect block structure
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let x3 = ComplexMatrix::from_rows(3, 3, &[zero, one, zero, one, zero, zero, zero, zero, zero])?;
    let z3 = ComplexMatrix::from_rows(3, 3, &[one, zero, zero, zero, -one, zero, zero, zero, zero])?;
    let block = StarAlgebra::generate(3, &[x3, z3], tol)?;
    println!(
        "\nblock algebra inside 3x3: dim {}, commutant dim {}, center dim {}",
        block.dim(),
        block.commutant().dim(),
        block.center().dim()
    );

    // the double commutant comes back to the algebra span
    let bicommutant = block.commutant().commutant();
    println!(
        "double commutant span defect: {:.3e}",
        block.span_equality_defect(&bicommutant)
    );
    Ok(())
}
