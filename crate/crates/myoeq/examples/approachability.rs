//! Blackwell punishment: Player Two steers the running average of the
//! state-indexed vector payoff under every individually rational target and
//! watches the distance decay like 1/sqrt(T).
//!
//! ```bash
//! cargo run --example approachability
//! ```

use myoeq::matrix::approach::{approachability_punish, OpponentPlay};
use myoeq::matrix::{game_value, Mat, StateMatrices};

fn main() -> myoeq::Result<()> {
    let a1 = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]])?;
    let a2 = Mat::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]])?;
    let zero = Mat::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]])?;
    let mats = StateMatrices::new(vec![a1, a2], vec![zero.clone(), zero])?;

    // hold Player One to 0.26 per state, slightly above the interior peak of
    // a*(q); the opponent plays their optimal stationary mix for the uniform
    let y = vec![0.26, 0.26];
    let gv = game_value(&StateMatrices::weighted(&mats.a, &[0.5, 0.5])?)?;
    let out = approachability_punish(
        &y,
        &mats,
        &OpponentPlay::Stationary(gv.row.coords().to_vec()),
        10_000,
        7,
        &[10, 100, 1000, 10_000],
    )?;
    println!("orthant distance along the run:");
    for (t, d) in &out.recorded {
        println!("  after {t:>6} stages: {d:.6}");
    }
    println!("final per-state averages {:?} against target {y:?}", out.averages);
    Ok(())
}
