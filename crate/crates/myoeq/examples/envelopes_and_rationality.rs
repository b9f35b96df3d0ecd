//! Convex/concave envelopes over the prior simplex and the two
//! individual-rationality checks of the repeated game.
//!
//! ```bash
//! cargo run --example envelopes_and_rationality
//! ```

use myoeq::matrix::envelope::{Envelope, EnvelopeKind};
use myoeq::matrix::{a_star, b_star, individually_rational_p1, Mat, StateMatrices};

fn main() -> myoeq::Result<()> {
    let a1 = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]])?;
    let a2 = Mat::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]])?;
    let b = Mat::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]])?;
    let mats = StateMatrices::new(vec![a1, a2], vec![b.clone(), b])?;

    println!("a*(q) and b*(q) on a few priors:");
    for q0 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let q = [q0, 1.0 - q0];
        println!(
            "  q = ({q0:.2}, {:.2}): a* = {:.4}, b* = {:.4}",
            1.0 - q0,
            a_star(&mats, &q)?,
            b_star(&mats, &q)?
        );
    }

    let vex = Envelope::from_fn(2, 100, |q| b_star(&mats, q), EnvelopeKind::Vex)?;
    let cav = Envelope::from_fn(2, 100, |q| a_star(&mats, q), EnvelopeKind::Cav)?;
    println!(
        "at the uniform prior: vex(b*) = {:.4}, cav(a*) = {:.4}",
        vex.eval(&[0.5, 0.5])?,
        cav.eval(&[0.5, 0.5])?
    );

    // which per-state guarantees can Player Two's punishment enforce?
    for y in [vec![0.3, 0.3], vec![0.1, 0.1]] {
        let rep = individually_rational_p1(&y, &mats, 100, 1e-9)?;
        println!(
            "y = {y:?}: individually rational = {} (margin {:.4} at q = {:?})",
            rep.ok, rep.margin, rep.worst_q
        );
    }
    Ok(())
}
