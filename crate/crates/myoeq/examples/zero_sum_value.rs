//! Matrix game values by linear programming, with both players' optimal
//! strategies, plus the Nash oracle on a small bimatrix game.
//!
//! ```bash
//! cargo run --example zero_sum_value
//! ```

use myoeq::matrix::nash::nash_bimatrix;
use myoeq::matrix::{game_value, Mat};

fn main() -> myoeq::Result<()> {
    let m = Mat::from_rows(&[vec![3.0, -1.0, 2.0], vec![0.0, 4.0, -2.0]])?;
    let gv = game_value(&m)?;
    println!("zero-sum 2x3 game:");
    println!("  value {:.9} (duality gap {:.1e})", gv.value, gv.duality_gap);
    println!("  row strategy {:?}", gv.row.coords());
    println!("  column strategy {:?}", gv.col.coords());

    // coordination game: three equilibria by support enumeration
    let a = Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]])?;
    let out = nash_bimatrix(&a, &a.clone())?;
    println!("coordination game diag(2,1): {} equilibria", out.equilibria.len());
    for e in &out.equilibria {
        println!(
            "  row {:?} col {:?} payoffs {:?}",
            e.row.coords(),
            e.col.coords(),
            e.payoffs
        );
    }
    Ok(())
}
