//! The normal-ordered Poisson algebra with central element Z: one algebra,
//! two specializations. Setting Z = 0 gives commuting phase-space
//! polynomials; substituting Z = i hbar gives differential operators.
//!
//! ```sh
//! cargo run --example poisson_quantization
//! ```

use num::rational::BigRational;
use opalg::lambda::{
    dirac_identity_check, jacobi_check, parse, parse_x_polynomial, random_element,
    specialize_classical, specialize_quantum, theorem_check,
};
use opalg::rng;

fn main() -> opalg::Result<()> {
    // the commutator of the canonical pair is the central element
    let z = parse("q1*p1 - p1*q1", 1)?;
    println!("q1*p1 - p1*q1     = {z}");
    println!("{{q1, p1}}          = {}", parse("{q1, p1}", 1)?);

    // normal ordering rewrites products exactly
    println!("(q1*p1)^2         = {}", parse("(q1*p1)^2", 1)?);
    println!("[q1*p1, p1]       = {}", parse("[q1*p1, p1]", 1)?);
    println!("{{q1, p1^2}}        = {}", parse("{q1, p1^2}", 1)?);

    // the commutator equals Z times the bracket, exactly, for any elements
    let mut rng = rng::seeded(1);
    let a = random_element(&mut rng, 2, 4, 3);
    let b = random_element(&mut rng, 2, 4, 3);
    println!("\nrandom a = {a}");
    println!("random b = {b}");
    println!("[a, b] == Z {{a, b}}  : {}", theorem_check(&a, &b)?);
    let c = random_element(&mut rng, 2, 3, 2);
    let d = random_element(&mut rng, 2, 3, 2);
    println!("Dirac identity      : {}", dirac_identity_check(&a, &b, &c, &d)?);
    println!("Jacobi identity     : {}", jacobi_check(&a, &b, &c)?);

    // classical specialization: Z drops, the bracket becomes the formal
    // Poisson bracket
    let bracket = a.lie_bracket(&b)?;
    let classical = specialize_classical(&bracket);
    let oracle = specialize_classical(&a).poisson_bracket(&specialize_classical(&b))?;
    println!("\nclassical {{a, b}}    = {classical}");
    println!("formal derivative route agrees: {}", classical == oracle);

    // quantum specialization: act on a polynomial as differential operators
    let element = parse("[q1, p1]", 1)?;
    let psi = parse_x_polynomial("1 + x + x^2")?;
    let hbar = BigRational::new(1.into(), 2.into());
    let acted = specialize_quantum(&element, &hbar, &psi)?;
    println!("\nwith hbar = 1/2, [q1, p1] acting on (1 + x + x^2) gives {acted}");
    Ok(())
}
