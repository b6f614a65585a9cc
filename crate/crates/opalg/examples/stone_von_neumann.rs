//! Uniqueness of irreducible discrete Weyl pairs: any unitary conjugate of
//! the clock-and-shift system is connected back to it by an essentially
//! unique unitary intertwiner, recovered numerically from the kernel of the
//! stacked relation map.
//!
//! ```sh
//! cargo run --example stone_von_neumann
//! ```

use opalg::rng;
use opalg::weyl::{
    conjugated_system, find_intertwiner, find_intertwiner_with_spectrum, phase_aligned_distance,
    schrodinger_system, verify_weyl_relations,
};

fn main() -> opalg::Result<()> {
    // the defining relations hold exactly for clock and shift
    let report = verify_weyl_relations(&schrodinger_system(8)?)?;
    println!("modulus 8 clock-and-shift:\n{report}\n");

    let mut rng = rng::seeded(7);
    for n in [2usize, 5, 16, 64] {
        let base = schrodinger_system(n)?;
        let g = rng::unitary(&mut rng, n);
        let rotated = conjugated_system(&base, &g)?;
        let (w, sigmas) = find_intertwiner_with_spectrum(&base, &rotated, 1e-9)?;
        println!(
            "modulus {n:>2}: kernel gap {:.3e} -> {:.3e}, conjugator recovered to {:.3e}",
            sigmas[0],
            sigmas[1],
            phase_aligned_distance(&w, &g)
        );
    }

    // intertwiners compose up to a global phase
    let n = 6;
    let base = schrodinger_system(n)?;
    let g1 = rng::unitary(&mut rng, n);
    let g2 = rng::unitary(&mut rng, n);
    let r1 = conjugated_system(&base, &g1)?;
    let r2 = conjugated_system(&base, &g2)?;
    let w01 = find_intertwiner(&base, &r1, 1e-9)?;
    let w12 = find_intertwiner(&r1, &r2, 1e-9)?;
    let w02 = find_intertwiner(&base, &r2, 1e-9)?;
    println!(
        "\ncomposition defect at modulus {n}: {:.3e}",
        phase_aligned_distance(&(&w12 * &w01), &w02)
    );
    Ok(())
}
