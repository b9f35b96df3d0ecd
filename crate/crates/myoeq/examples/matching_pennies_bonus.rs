//! Matching pennies with a commitment bonus: the canonical game whose
//! aggregate payoffs have no Nash point while each action played with
//! positive probability still earns its player's best per-action payoff at
//! the uniform profile.
//!
//! ```bash
//! cargo run --example matching_pennies_bonus
//! ```

use myoeq::document::{parse_document, GameDocument};
use myoeq::myopic::{nash_gap_scan, solve_myopic, SolverConfig};

const GAME: &str = include_str!("../fixtures/matching_pennies_bonus.game");

fn main() -> myoeq::Result<()> {
    let GameDocument::Myopic(doc) = parse_document(GAME)? else {
        unreachable!()
    };
    let game = doc.compile()?;
    let reports = solve_myopic(&game.family, &SolverConfig::default())?;
    for rep in &reports {
        println!(
            "equilibrium: player one {:?}, player two {:?}",
            rep.profile.block(0).coords(),
            rep.profile.block(1).coords()
        );
        println!("per-action payoffs {:?} (all equal to 1/2)", rep.witness);
        println!("residual {:.3e}", rep.residual);
    }
    let scan = nash_gap_scan(&game.family, 100, 1e-3)?;
    println!(
        "aggregate payoffs: smallest simultaneous best-reply gain on the 1/100 mesh is {:.3}, \
         so no approximate Nash point exists there",
        scan.min_max_gain
    );
    Ok(())
}
