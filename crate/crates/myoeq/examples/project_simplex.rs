//! Nearest-point retraction onto the simplex and its face decomposition.
//!
//! ```bash
//! cargo run --example project_simplex
//! ```

use myoeq::simplex::{face_decompose, project_simplex};

fn main() -> myoeq::Result<()> {
    for z in [
        vec![0.0, 0.0, 0.0],
        vec![2.0, 0.0],
        vec![0.9, -0.4, 0.8],
        vec![3.0, 2.9, -1.0, 0.5],
    ] {
        let p = project_simplex(&z)?;
        let d = face_decompose(&z)?;
        println!("z = {z:?}");
        println!("  projection  {:?}", p.coords());
        println!("  face        {:?}", d.support);
        println!("  complement  {:?}", d.y);
        // the defining property: on the face, the complement is maximal
        let top = d.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for &i in &d.support {
            assert!((d.y[i] - top).abs() < 1e-12);
        }
    }
    println!("face maximality verified on every example");
    Ok(())
}
