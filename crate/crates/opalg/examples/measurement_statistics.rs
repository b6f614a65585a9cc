//! Expectations, deviations and simulated measurement statistics.
//!
//! ```sh
//! cargo run --example measurement_statistics
//! ```

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use opalg::matrix::pauli;
use opalg::states::{
    deviation, eigenstate_family, expectation, positivity_report, simulate_measurements,
};
use opalg::State;

fn main() -> opalg::Result<()> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = State::pure(&DVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)]))?;

    println!("state |+>:");
    println!("  <x> = {:.3}", expectation(&plus, &pauli::x())?.re);
    println!("  <z> = {:.3}", expectation(&plus, &pauli::z())?.re);
    println!("  D(z) = {:.3}", deviation(&plus, &pauli::z())?);

    // the empirical mean of repeated measurements converges at rate 1/sqrt(N)
    println!("\nmeasuring z in |+> (true mean 0):");
    for samples in [100, 10_000, 1_000_000] {
        let record = simulate_measurements(&plus, &pauli::z(), samples, 42)?;
        println!(
            "  N = {samples:>8}: empirical mean {:+.5} ({:.1} standard errors)",
            record.empirical_mean,
            record.empirical_mean.abs() * (samples as f64).sqrt()
        );
    }

    // an eigenstate has no spread at all
    let up = State::pure(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]))?;
    let record = simulate_measurements(&up, &pauli::z(), 1000, 7)?;
    println!("\neigenstate of z: all {} outcomes equal {}", record.sample_count, record.outcomes[0]);

    // positivity needs enough states to be visible
    let full_family = eigenstate_family(&pauli::x())?;
    println!("\npositivity of x against its eigenstate family:");
    println!("  {}", positivity_report(&pauli::x(), &full_family)?);
    println!("positivity of x against the maximally mixed state alone:");
    println!("  {}", positivity_report(&pauli::x(), &[State::maximally_mixed(2)])?);
    Ok(())
}
