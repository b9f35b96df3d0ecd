//! The equilibrium graph of a function space is homeomorphic to the space
//! itself: phi maps an element to a graph point in closed form, psi inverts
//! it, and the projection is properly homotopic to the identity.
//!
//! ```bash
//! cargo run --example structure_roundtrip
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use myoeq::profile::MixedProfile;
use myoeq::structure::{FunctionSpace, SpaceElement};

fn main() -> myoeq::Result<()> {
    let space = FunctionSpace::multilinear_bimatrix(2, 2)?;
    let x0 = MixedProfile::barycenter(space.layout());
    println!("space of 2x2 bimatrix payoffs plus constants, dimension {}", space.dim());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..25 {
        let w = SpaceElement::new((0..space.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect())?;
        let pt = space.phi(&w, &x0)?;
        let back = space.psi(&pt, &x0)?;
        worst = worst
            .max(back.coeff_dist(&w))
            .max(space.membership_residual(&pt)?);
    }
    println!("25 random elements: worst round-trip/membership deviation {worst:.3e}");

    // the homotopy grows with the element: a properness probe
    let mut coeffs = vec![0.0; space.dim()];
    coeffs[4] = 1.0;
    let u = SpaceElement::new(coeffs)?;
    print!("minimal homotopy norms over scales 1, 10, 100, 1000:");
    for scale in [1.0, 10.0, 100.0, 1000.0] {
        let w = u.scaled(scale);
        let mut m = f64::INFINITY;
        for k in 0..=10 {
            let h = space.homotopy(&w, k as f64 / 10.0, &x0)?;
            m = m.min(space.sup_norm(&h)?);
        }
        print!(" {m:.2}");
    }
    println!();
    Ok(())
}
