//! The probability simplex and its nearest-point retraction.
//!
//! `project_simplex` is the Euclidean retraction of a real vector onto the
//! simplex, computed by the classical sort-and-threshold method. It is
//! characterized by the face decomposition exposed through `face_decompose`:
//! every vector z splits uniquely as x + y where x is the projection, x is
//! supported on a face, and the complementary part y takes its maximum on
//! that face's support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Layout, MixedProfile};

/// Coordinates below this threshold are treated as off the supporting face.
/// Kept independent of any solver tolerance.
pub const SUPPORT_TOL: f64 = 1e-12;

/// A point of the probability simplex: nonnegative coordinates summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    /// Validating constructor. Coordinates must be finite, nonnegative and
    /// sum to 1 within `1e-9`; the stored vector is not rescaled.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("empty simplex point".into()));
        }
        if !coords.iter().all(|c| c.is_finite() && *c >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "simplex coordinates must be finite and nonnegative, got {coords:?}"
            )));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "simplex coordinates sum to {sum}, expected 1"
            )));
        }
        Ok(SimplexPoint { coords })
    }

    /// Constructor for internally produced points (projections, barycenters)
    /// whose invariant holds by construction.
    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        SimplexPoint { coords }
    }

    /// Uniform point (1/n, ..., 1/n).
    pub fn barycenter(n: usize) -> Self {
        SimplexPoint {
            coords: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass on coordinate `i`.
    pub fn vertex(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; n];
        coords[i] = 1.0;
        SimplexPoint { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coords[i]
    }

    /// Indices with mass above `SUPPORT_TOL`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coords.len())
            .filter(|&i| self.coords[i] > SUPPORT_TOL)
            .collect()
    }

    pub fn dist_inf(&self, other: &SimplexPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Result of splitting z into x + y with x on a face and y maximal there.
#[derive(Clone, Debug, Serialize)]
pub struct FaceDecomposition {
    /// Indices of the supporting face (nonempty).
    pub support: Vec<usize>,
    /// The projection of the input onto the simplex, supported on `support`.
    pub x: SimplexPoint,
    /// Complement `y = z - x`; its coordinates on `support` share the
    /// common maximum over all coordinates.
    pub y: Vec<f64>,
}

fn check_finite(y: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite coordinate {bad}")));
    }
    Ok(())
}

/// Euclidean nearest-point retraction of `y` onto the simplex.
///
/// Sort-and-threshold: with the coordinates sorted decreasingly, the largest
/// prefix whose running mean keeps the shifted coordinates positive fixes the
/// threshold tau, and the projection is `max(y_i - tau, 0)`.
pub fn project_simplex(y: &[f64]) -> Result<SimplexPoint> {
    check_finite(y)?;
    let n = y.len();
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut tau = sorted[0] - 1.0;
    for (k, &u) in sorted.iter().enumerate() {
        prefix += u;
        let t = (prefix - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    let coords: Vec<f64> = y.iter().map(|&v| (v - tau).max(0.0)).collect();
    debug_assert!((coords.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let _ = n;
    Ok(SimplexPoint::new_unchecked(coords))
}

/// Splits `z` as `x + y`: `x` is the projection, `support` its face, and
/// `y = z - x` attains its maximum exactly on that face.
pub fn face_decompose(z: &[f64]) -> Result<FaceDecomposition> {
    let x = project_simplex(z)?;
    let mut coords = x.coords().to_vec();
    // Fold sub-threshold dust into the largest coordinate so "x_i = 0 off the
    // face" holds exactly; the perturbation is below SUPPORT_TOL.
    let mut dust = 0.0;
    for c in coords.iter_mut() {
        if *c > 0.0 && *c <= SUPPORT_TOL {
            dust += *c;
            *c = 0.0;
        }
    }
    if dust > 0.0 {
        let imax = (0..coords.len())
            .max_by(|&a, &b| coords[a].partial_cmp(&coords[b]).unwrap())
            .unwrap();
        coords[imax] += dust;
    }
    let support: Vec<usize> = (0..coords.len()).filter(|&i| coords[i] > 0.0).collect();
    let y: Vec<f64> = z.iter().zip(&coords).map(|(zi, xi)| zi - xi).collect();
    Ok(FaceDecomposition {
        support,
        x: SimplexPoint::new_unchecked(coords),
        y,
    })
}

/// Applies `project_simplex` independently to each player block of `y`.
pub fn product_retract(y: &[f64], layout: &Layout) -> Result<MixedProfile> {
    if y.len() != layout.flat_len() {
        return Err(Error::Dimension(format!(
            "vector has {} coordinates, layout expects {}",
            y.len(),
            layout.flat_len()
        )));
    }
    let mut blocks = Vec::with_capacity(layout.players());
    for n in 0..layout.players() {
        blocks.push(project_simplex(&y[layout.block(n)])?);
    }
    Ok(MixedProfile::new(blocks))
}

/// All points of the simplex in `dim` coordinates whose entries are
/// multiples of `1/m` (the barycentric grid with `m+1` points per edge).
pub fn simplex_grid(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; dim];
    fn rec(dim: usize, left: usize, at: usize, counts: &mut [usize], m: usize, out: &mut Vec<Vec<f64>>) {
        if at == dim - 1 {
            counts[at] = left;
            out.push(counts.iter().map(|&c| c as f64 / m as f64).collect());
            return;
        }
        for c in 0..=left {
            counts[at] = c;
            rec(dim, left - c, at + 1, counts, m, out);
        }
    }
    if dim == 0 {
        return out;
    }
    rec(dim, m, 0, &mut counts, m, &mut out);
    out
}

/// Uniform sample from the simplex (Dirichlet(1,...,1)) via exponentials.
pub fn sample_simplex<R: rand::Rng>(dim: usize, rng: &mut R) -> SimplexPoint {
    let mut v: Vec<f64> = (0..dim)
        .map(|_| -f64::ln(1.0 - rng.gen::<f64>()))
        .collect();
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    SimplexPoint::new_unchecked(v)
}
