//! The full weighted-stage pipeline: build the truncated tree, derive
//! continuation payoffs from joint plans of the undiscounted continuation,
//! solve the composite game, and verify the four equilibrium properties.
//!
//! ```bash
//! cargo run --release --example neyman_pipeline
//! ```

use myoeq::document::{parse_document, GameDocument};
use myoeq::neyman::plans::{joint_plan_search, GameData, PlanSearchOptions};
use myoeq::neyman::solve::{solve_neyman, verify_neyman_equilibrium, NeymanConfig};

const GAME: &str = include_str!("../fixtures/neyman_third.game");

fn main() -> myoeq::Result<()> {
    let GameDocument::Neyman(doc) = parse_document(GAME)? else {
        unreachable!()
    };
    let spec = doc.spec()?;
    println!(
        "{} states, {} weighted stage(s), truncated weight ({:.3}, {:.3})",
        spec.states(),
        spec.stages,
        spec.lambda_total(0),
        spec.lambda_total(1)
    );

    // what the continuation game offers at the prior
    let data = GameData::new(spec.mats.clone(), 100)?;
    let plans = joint_plan_search(&spec.p0, &data, &PlanSearchOptions::default())?;
    println!("{} joint plan(s) at the prior; the first gives:", plans.len());
    let pt = plans[0].payoff_point(&spec.mats)?;
    println!("  player one per state {:?}", pt.p1);
    println!("  player two per state {:?}", pt.p2);

    let run = solve_neyman(&spec, &NeymanConfig::default())?;
    println!("composite solved: certificate {:.3e}", run.solution.certificate);
    println!("stage behaviour of player one (per state):");
    for n in 0..run.nt.tree.players() {
        let view = run.nt.tree.behavioural_view(&run.solution.proper.profile, n);
        println!("  player {}: {view:?}", n + 1);
    }
    let ver = verify_neyman_equilibrium(&run)?;
    for d in &ver.details {
        println!("verify: {d}");
    }
    println!("all flags pass: {}", ver.pass);
    Ok(())
}
