//! The payoff-expression grammar: parse, pretty-print, evaluate, and the
//! error positions it reports.
//!
//! ```bash
//! cargo run --example payoff_expressions
//! ```

use myoeq::expr::{parse_expression, EvalInput, Scope};
use myoeq::profile::MixedProfile;
use myoeq::simplex::SimplexPoint;

fn main() -> myoeq::Result<()> {
    let scope = Scope::for_players(vec![(
        "one".into(),
        vec!["H".into(), "T".into()],
    )]);
    let src = "max(x[1,H], 1 - x[1,H]) + (2*x[one,T] - 1)/4";
    let parsed = parse_expression(src, &scope)?;
    println!("source:  {src}");
    println!("printed: {}", parsed.ast.pretty());
    for p in [0.2, 0.5, 0.9] {
        let x = MixedProfile::new(vec![SimplexPoint::new(vec![p, 1.0 - p])?]);
        let v = parsed.ast.eval(&EvalInput {
            profile: Some(&x),
            conditional: None,
        })?;
        println!("at p = {p}: {v:.4}");
    }

    // errors carry positions and name the offending token
    for bad in ["x[1,H", "2 ** 3", "x[1,Z]", "1/(x[1,H]-x[1,H])"] {
        match parse_expression(bad, &scope) {
            Err(e) => println!("`{bad}` -> {e}"),
            Ok(parsed) => {
                let x = MixedProfile::new(vec![SimplexPoint::new(vec![0.5, 0.5])?]);
                match parsed.ast.eval(&EvalInput {
                    profile: Some(&x),
                    conditional: None,
                }) {
                    Err(e) => println!("`{bad}` -> {e}"),
                    Ok(v) => println!("`{bad}` -> {v}"),
                }
            }
        }
    }
    Ok(())
}
