//! Spin-1/2 complementarity: the deviation product of two spin components
//! can vanish, but their deviation sum is bounded away from zero.
//!
//! ```sh
//! cargo run --example spin_complementarity
//! ```

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use opalg::bounds::{
    bounded_product_collapse, certify_complementarity, common_sharp_state,
    minimize_deviation_functional, robertson_bound, ObjectiveKind, OptimizerConfig,
};
use opalg::matrix::pauli;
use opalg::states::deviation;
use opalg::State;

fn main() -> opalg::Result<()> {
    let half = C64::new(0.5, 0.0);
    let s1 = pauli::x().scale(half);
    let s3 = pauli::z().scale(half);
    let cfg = OptimizerConfig::with_seed(1);

    // the commutator bound can vanish even for non-commuting observables
    let up = State::pure(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]))?;
    println!("in the z-eigenstate:");
    println!("  |<[s1, s3]>|/2       = {:.6}", robertson_bound(&up, &s1, &s3)?);
    println!(
        "  D(s1) D(s3)          = {:.6}",
        deviation(&up, &s1)? * deviation(&up, &s3)?
    );

    // over all states the product collapses to zero...
    let product = minimize_deviation_functional(&s1, Some(&s3), ObjectiveKind::Product, &cfg)?;
    println!("\ninf D(s1) D(s3)        = {:.3e}", product.infimum_estimate);
    let collapse = bounded_product_collapse(&s1, &s3, &cfg)?;
    println!("{collapse}");

    // ...while the squared sum stays at hbar^2/4 and the sum at hbar/2
    let squares =
        minimize_deviation_functional(&s1, Some(&s3), ObjectiveKind::SumOfSquares, &cfg)?;
    println!("\ninf D(s1)^2 + D(s3)^2  = {:.9}", squares.infimum_estimate);
    let certificate = certify_complementarity(&s1, &s3, &cfg, None)?;
    println!("{certificate}");

    // commuting pairs admit joint sharp states instead
    println!("\ncommuting contrast:");
    println!("  {}", common_sharp_state(&pauli::z(), &pauli::z(), 1e-9)?);
    println!("  {}", common_sharp_state(&pauli::x(), &pauli::z(), 1e-9)?);
    Ok(())
}
