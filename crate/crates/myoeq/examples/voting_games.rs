//! The two one-voter games separating the equilibrium notions: per-action
//! consistency can sit far from the aggregate optimum (even at the opposite
//! vertex), or strictly between the optimum and the boundary.
//!
//! ```bash
//! cargo run --example voting_games
//! ```

use myoeq::document::{parse_document, GameDocument};
use myoeq::myopic::{aggregate_optimum_1p, aggregate_payoffs, solve_myopic, SolverConfig};

fn run(name: &str, source: &str) -> myoeq::Result<()> {
    let GameDocument::Myopic(doc) = parse_document(source)? else {
        unreachable!()
    };
    let game = doc.compile()?;
    let reports = solve_myopic(&game.family, &SolverConfig::default())?;
    println!("{name}:");
    for rep in &reports {
        let agg = aggregate_payoffs(&game.family, &rep.profile)?;
        println!(
            "  consistent intention p = {:.6} with expected utility {:.6}",
            rep.profile.prob(0, 0),
            agg[0]
        );
    }
    let (opt, val) = aggregate_optimum_1p(&game.family, 10_000)?;
    println!(
        "  planner's optimum p = {:.6} with value {:.6}",
        opt.prob(0, 0),
        val
    );
    Ok(())
}

fn main() -> myoeq::Result<()> {
    run("voting game 1", include_str!("../fixtures/voting1.game"))?;
    run("voting game 2", include_str!("../fixtures/voting2.game"))?;
    Ok(())
}
