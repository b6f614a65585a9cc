//! Cyclic representations from states, and faithful direct sums.
//!
//! Every state of an operator algebra induces a concrete Hilbert-space
//! representation with a cyclic vector reproducing its expectations; a
//! separating family of states yields a faithful block-diagonal one.
//!
//! ```sh
//! cargo run --example gns_representations
//! ```

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use opalg::gns::{gns_construct, gns_direct_sum, verify_representation};
use opalg::matrix::pauli;
use opalg::rng;
use opalg::{StarAlgebra, State};

fn main() -> opalg::Result<()> {
    let tol = 1e-10;
    let full = StarAlgebra::generate(2, &[pauli::x(), pauli::z()], tol)?;

    // a pure state reproduces the defining representation
    let up = State::pure(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]))?;
    let pure_rep = gns_construct(&full, &up, tol)?;
    println!("pure state on the full algebra: space dimension {}", pure_rep.space_dim);

    // the tracial state sees the whole algebra: four dimensions
    let tracial = gns_construct(&full, &State::maximally_mixed(2), tol)?;
    println!("tracial state: space dimension {}", tracial.space_dim);
    let report = verify_representation(&tracial, &full, Some(&State::maximally_mixed(2)))?;
    println!("{report}");

    // multiplicative states of abelian algebras act on a line
    let diagonal = StarAlgebra::generate(2, &[pauli::z()], tol)?;
    let line = gns_construct(&diagonal, &up, tol)?;
    println!("\nmultiplicative state on the diagonal algebra: dimension {}", line.space_dim);

    // a full-rank state is faithful on its own, yet one functional cannot
    // separate a four-dimensional algebra
    let mut rng = rng::seeded(5);
    let rho = State::new(rng::density(&mut rng, 2))?;
    let single = gns_direct_sum(&full, &[rho], tol)?;
    println!(
        "\nsingle full-rank state: separating = {}, norm defect {:.3e}",
        single.separating,
        single.norm_preservation_defect(&full)?
    );

    // two eigenstates separate the diagonal algebra and give a faithful sum
    let down = State::pure(&DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]))?;
    let pair = gns_direct_sum(&diagonal, &[up, down], tol)?;
    println!(
        "eigenstate pair on the diagonal algebra: summands {:?}, separating = {}, norm defect {:.3e}",
        pair.summands,
        pair.separating,
        pair.norm_preservation_defect(&diagonal)?
    );
    Ok(())
}
