//! Bounded-function complementarity on a truncated oscillator: the
//! variances of the recentered cosines of position and momentum cannot both
//! vanish.
//!
//! ```sh
//! cargo run --release --example weyl_cosine
//! ```

use opalg::bounds::{build_oscillator, weyl_cosine_experiment, OptimizerConfig};

fn main() -> opalg::Result<()> {
    let model = build_oscillator(40, 1.0, 1.0)?;
    println!(
        "truncated oscillator: N = {}, s = {}, hbar = {}",
        model.truncation_dim, model.scale_s, model.hbar
    );
    let q2 = &model.q_matrix * &model.q_matrix;
    println!("ground-state position variance <0|q^2|0> = {:.6}", q2[(0, 0)].re);

    let cfg = OptimizerConfig {
        seed: 11,
        starts: 24,
        ..OptimizerConfig::default()
    };
    let result = weyl_cosine_experiment(&model, &cfg)?;
    println!("\n{result}");
    println!(
        "\nthe infimum stays positive: no state makes both cosines sharp, so\n\
         the algebra generated by the bounded exponentials of q and p cannot\n\
         be commutative"
    );
    Ok(())
}
