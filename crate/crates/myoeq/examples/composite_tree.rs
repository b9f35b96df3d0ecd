//! A truncated game tree whose endpoints carry continuation correspondences
//! instead of terminal payoffs, solved through the vanishing-perturbation
//! scheme.
//!
//! ```bash
//! cargo run --example composite_tree
//! ```

use myoeq::document::{parse_document, GameDocument};
use myoeq::tree::solve::{check_proper_vector, solve_composite, CompositeConfig};

const TREE: &str = include_str!("../fixtures/composite_demo.game");

fn main() -> myoeq::Result<()> {
    let GameDocument::Tree(doc) = parse_document(TREE)? else {
        unreachable!()
    };
    let (tree, cont, g) = doc.compile()?;
    println!("tree: {} vertices, {} endpoints, {} common-knowledge classes",
        tree.num_vertices(),
        tree.endpoints().len(),
        tree.common_knowledge().classes.len());
    for n in 0..tree.players() {
        println!(
            "  player {} has {} pure decision strategies, perfect recall: {}",
            n + 1,
            tree.num_pure_strategies(n),
            tree.check_perfect_recall(n).ok
        );
    }
    let cfg = CompositeConfig::default();
    let sol = solve_composite(&tree, &cont, &g, &cfg)?;
    println!("solution profile (pure-strategy weights):");
    for n in 0..tree.players() {
        let w: Vec<f64> = (0..tree.num_pure_strategies(n))
            .map(|s| sol.proper.profile.prob(n, s))
            .collect();
        println!("  player {}: {w:?}", n + 1);
    }
    println!("deviation certificate {:.3e}", sol.certificate);
    println!("class probabilities {:?}", sol.class_probs);
    let check = check_proper_vector(&tree, &cont, &g, &sol.proper)?;
    println!(
        "re-derivation: value identity {:.1e}, hull membership {:.1e}",
        check.y_identity_error, check.hull_distance
    );
    Ok(())
}
