//! The homeomorphism between a function space of payoff families and its
//! myopic-equilibrium graph.
//!
//! Over a finite-dimensional space W of continuous payoff families that
//! contains the constants, the graph E = {(w, x) | x myopic for w} is the
//! image of the closed-form map `phi`, with inverse `psi`, and the projection
//! back to W is joined to the identity by the homotopy `H`. All three are
//! direct formulas; no solving is involved.
//!
//! Sup-norms are estimated on a fixed evaluation mesh of the profile space
//! (`norm_mesh_m` subdivisions per block, default 50). Every claim checked
//! against these norms is an inequality robust to mesh underestimation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::myopic::{equilibrium_residual, ConstantFamily, PayoffFamily};
use crate::profile::{Layout, MixedProfile};
use crate::simplex::{product_retract, simplex_grid, SimplexPoint};

/// Default per-block subdivisions of the norm-evaluation mesh.
pub const DEFAULT_NORM_MESH: usize = 50;

/// An element of a function space, stored by basis coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceElement {
    pub coeffs: Vec<f64>,
}

impl SpaceElement {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if !coeffs.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        Ok(SpaceElement { coeffs })
    }

    pub fn zeros(dim: usize) -> Self {
        SpaceElement { coeffs: vec![0.0; dim] }
    }

    pub fn add(&self, other: &SpaceElement) -> SpaceElement {
        SpaceElement {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SpaceElement) -> SpaceElement {
        SpaceElement {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> SpaceElement {
        SpaceElement {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn coeff_dist(&self, other: &SpaceElement) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A point of the graph E: a space element together with a profile that is a
/// myopic equilibrium for it.
#[derive(Clone, Debug, Serialize)]
pub struct GraphPoint {
    pub element: SpaceElement,
    pub profile: MixedProfile,
}

/// A finite-dimensional space of payoff families containing the constants.
pub struct FunctionSpace {
    layout: Layout,
    basis: Vec<Box<dyn PayoffFamily>>,
    rep_mesh: Vec<MixedProfile>,
    norm_mesh: Vec<MixedProfile>,
    /// Column c holds the coefficients representing the constant indicator
    /// family of flat coordinate c.
    const_rep: DMatrix<f64>,
}

impl FunctionSpace {
    /// Builds a space from a basis, verifying linear independence on the
    /// sampling mesh and that all constant coordinate families lie in the
    /// span (coefficient representation residual below 1e-8).
    pub fn new(
        layout: Layout,
        basis: Vec<Box<dyn PayoffFamily>>,
        rep_mesh_m: usize,
        norm_mesh_m: usize,
    ) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::SpaceInvalid("empty basis".into()));
        }
        for b in &basis {
            if *b.layout() != layout {
                return Err(Error::SpaceInvalid("basis layout mismatch".into()));
            }
        }
        let rep_mesh = profile_mesh(&layout, rep_mesh_m);
        let norm_mesh = profile_mesh(&layout, norm_mesh_m);
        let dim = basis.len();
        let flat = layout.flat_len();
        let rows = rep_mesh.len() * flat;
        if rows < dim {
            return Err(Error::SpaceInvalid(
                "sampling mesh too small for the basis dimension".into(),
            ));
        }
        let mut design = DMatrix::zeros(rows, dim);
        for (pi, x) in rep_mesh.iter().enumerate() {
            for (k, b) in basis.iter().enumerate() {
                let vals = b.eval(x)?;
                for (c, v) in vals.iter().enumerate() {
                    design[(pi * flat + c, k)] = *v;
                }
            }
        }
        let svd = design.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin < 1e-10 * smax.max(1.0) {
            return Err(Error::SpaceInvalid(
                "basis is linearly dependent on the sampling mesh".into(),
            ));
        }
        // represent each constant coordinate indicator
        let mut const_rep = DMatrix::zeros(dim, flat);
        for c in 0..flat {
            let mut target = DVector::zeros(rows);
            for pi in 0..rep_mesh.len() {
                target[pi * flat + c] = 1.0;
            }
            let sol = svd
                .solve(&target, 1e-12)
                .map_err(|e| Error::SpaceInvalid(format!("least squares failed: {e}")))?;
            let res = (&design * &sol - &target).norm();
            if res > 1e-8 {
                return Err(Error::SpaceInvalid(format!(
                    "constant coordinate {c} is not in the span (residual {res:.3e})"
                )));
            }
            const_rep.set_column(c, &sol);
        }
        Ok(FunctionSpace {
            layout,
            basis,
            rep_mesh,
            norm_mesh,
            const_rep,
        })
    }

    /// Constants plus caller-supplied families.
    pub fn constants_plus(
        layout: Layout,
        extras: Vec<Box<dyn PayoffFamily>>,
        rep_mesh_m: usize,
        norm_mesh_m: usize,
    ) -> Result<Self> {
        let mut basis: Vec<Box<dyn PayoffFamily>> = Vec::new();
        for c in 0..layout.flat_len() {
            let mut v = vec![0.0; layout.flat_len()];
            v[c] = 1.0;
            basis.push(Box::new(ConstantFamily::new(layout.clone(), v)?));
        }
        basis.extend(extras);
        FunctionSpace::new(layout, basis, rep_mesh_m, norm_mesh_m)
    }

    /// Constants plus the multilinear span of two-player bimatrix payoffs:
    /// for every own coordinate, one family per opponent action (the last
    /// opponent action omitted, its indicator being a constant-shifted
    /// combination of the others).
    pub fn multilinear_bimatrix(rows: usize, cols: usize) -> Result<Self> {
        let layout = Layout::new(&[rows, cols])?;
        let mut extras: Vec<Box<dyn PayoffFamily>> = Vec::new();
        for i in 0..rows {
            for j in 0..cols.saturating_sub(1) {
                extras.push(Box::new(OpponentProbFamily {
                    layout: layout.clone(),
                    player: 0,
                    action: i,
                    opp_action: j,
                }));
            }
        }
        for j in 0..cols {
            for i in 0..rows.saturating_sub(1) {
                extras.push(Box::new(OpponentProbFamily {
                    layout: layout.clone(),
                    player: 1,
                    action: j,
                    opp_action: i,
                }));
            }
        }
        FunctionSpace::constants_plus(layout, extras, 6, DEFAULT_NORM_MESH)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn rep_mesh(&self) -> &[MixedProfile] {
        &self.rep_mesh
    }

    /// Coefficients of a bimatrix game when the space came from
    /// `multilinear_bimatrix`: constants carry the omitted columns, the
    /// multilinear weights read off the matrices.
    pub fn bimatrix_element(
        &self,
        a: &crate::matrix::Mat,
        b: &crate::matrix::Mat,
    ) -> Result<SpaceElement> {
        let rows = self.layout.actions(0);
        let cols = self.layout.actions(1);
        if a.rows() != rows || a.cols() != cols || b.rows() != rows || b.cols() != cols {
            return Err(Error::Dimension("matrix shape does not match the space".into()));
        }
        let flat = self.layout.flat_len();
        let mut coeffs = vec![0.0; self.dim()];
        // (A q)_i = sum_{j<cols-1} (a_ij - a_{i,last}) q_j + a_{i,last}
        let mut at = flat;
        for i in 0..rows {
            let last = a.at(i, cols - 1);
            coeffs[self.layout.flat_index(0, i)] += last;
            for j in 0..cols - 1 {
                coeffs[at] = a.at(i, j) - last;
                at += 1;
            }
        }
        for j in 0..cols {
            let last = b.at(rows - 1, j);
            coeffs[self.layout.flat_index(1, j)] += last;
            for i in 0..rows - 1 {
                coeffs[at] = b.at(i, j) - last;
                at += 1;
            }
        }
        SpaceElement::new(coeffs)
    }

    /// The element as a payoff family (borrowing the space).
    pub fn family<'a>(&'a self, element: &'a SpaceElement) -> ElementFamily<'a> {
        ElementFamily {
            space: self,
            element,
        }
    }

    pub fn eval_element(&self, element: &SpaceElement, x: &MixedProfile) -> Result<Vec<f64>> {
        if element.coeffs.len() != self.dim() {
            return Err(Error::Dimension("element has wrong dimension".into()));
        }
        let mut out = vec![0.0; self.layout.flat_len()];
        let mut tmp = vec![0.0; self.layout.flat_len()];
        for (k, b) in self.basis.iter().enumerate() {
            let w = element.coeffs[k];
            if w == 0.0 {
                continue;
            }
            b.eval_into(x, &mut tmp)?;
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += w * t;
            }
        }
        Ok(out)
    }

    /// Coefficients representing the constant family with vector value `v`.
    pub fn represent_constant(&self, v: &[f64]) -> Result<SpaceElement> {
        if v.len() != self.layout.flat_len() {
            return Err(Error::Dimension("constant vector shape mismatch".into()));
        }
        let vec = DVector::from_column_slice(v);
        let coeffs = &self.const_rep * vec;
        SpaceElement::new(coeffs.iter().cloned().collect())
    }

    /// Mesh estimate of sup_x ||w(x)||_2.
    pub fn sup_norm(&self, element: &SpaceElement) -> Result<f64> {
        let mut best: f64 = 0.0;
        for x in &self.norm_mesh {
            let vals = self.eval_element(element, x)?;
            best = best.max(vals.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        Ok(best)
    }

    /// sup_x ||x||_2 over the profile space; exact since vertices are on the mesh.
    pub fn delta(&self) -> f64 {
        (self.layout.players() as f64).sqrt()
    }

    /// Myopic residual of the point's profile for its element.
    pub fn membership_residual(&self, pt: &GraphPoint) -> Result<f64> {
        let fam = self.family(&pt.element);
        equilibrium_residual(&pt.profile, &fam, 1e-9)
    }

    /// The homeomorphism onto the graph: the profile is the retraction of
    /// w(x0) and the element is w shifted by the constant that makes that
    /// profile an equilibrium.
    pub fn phi(&self, w: &SpaceElement, x0: &MixedProfile) -> Result<GraphPoint> {
        let w_x0 = self.eval_element(w, x0)?;
        let x1 = product_retract(&w_x0, &self.layout)?;
        let w_x1 = self.eval_element(w, &x1)?;
        let shift: Vec<f64> = w_x0
            .iter()
            .zip(&w_x1)
            .zip(&x1.flat())
            .map(|((a, b), c)| a - b - c)
            .collect();
        let element = w.add(&self.represent_constant(&shift)?);
        Ok(GraphPoint { element, profile: x1 })
    }

    /// Inverse of `phi` on the graph.
    pub fn psi(&self, pt: &GraphPoint, x0: &MixedProfile) -> Result<SpaceElement> {
        let res = self.membership_residual(pt)?;
        if res > 1e-6 {
            return Err(Error::InvalidPoint(format!(
                "profile is not a myopic equilibrium of the element (residual {res:.3e})"
            )));
        }
        let w_prime = pt.element.add(&self.represent_constant(&pt.profile.flat())?);
        let at_x0 = self.eval_element(&w_prime, x0)?;
        let at_x = self.eval_element(&w_prime, &pt.profile)?;
        let shift: Vec<f64> = at_x.iter().zip(&at_x0).map(|(a, b)| a - b).collect();
        Ok(w_prime.add(&self.represent_constant(&shift)?))
    }

    /// Homotopy between the identity and the graph projection of `phi`.
    pub fn homotopy(&self, w: &SpaceElement, t: f64, x0: &MixedProfile) -> Result<SpaceElement> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("homotopy time {t} outside [0,1]")));
        }
        let w_x0 = self.eval_element(w, x0)?;
        let x1 = product_retract(&w_x0, &self.layout)?;
        let w_x1 = self.eval_element(w, &x1)?;
        let shift: Vec<f64> = w_x0
            .iter()
            .zip(&w_x1)
            .map(|(a, b)| t * (a - b))
            .collect();
        Ok(w.add(&self.represent_constant(&shift)?))
    }
}

/// Borrowed view of a space element as a payoff family.
pub struct ElementFamily<'a> {
    space: &'a FunctionSpace,
    element: &'a SpaceElement,
}

impl PayoffFamily for ElementFamily<'_> {
    fn layout(&self) -> &Layout {
        &self.space.layout
    }
    fn eval_into(&self, x: &MixedProfile, out: &mut [f64]) -> Result<()> {
        let vals = self.space.eval_element(self.element, x)?;
        out.copy_from_slice(&vals);
        Ok(())
    }
}

/// Basis family: own coordinate (player, action) carries the probability the
/// opponent puts on one action; everything else is zero.
struct OpponentProbFamily {
    layout: Layout,
    player: usize,
    action: usize,
    opp_action: usize,
}

impl PayoffFamily for OpponentProbFamily {
    fn layout(&self) -> &Layout {
        &self.layout
    }
    fn eval_into(&self, x: &MixedProfile, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        let other = 1 - self.player;
        out[self.layout.flat_index(self.player, self.action)] = x.prob(other, self.opp_action);
        Ok(())
    }
}

fn profile_mesh(layout: &Layout, m: usize) -> Vec<MixedProfile> {
    let per_block: Vec<Vec<Vec<f64>>> = layout
        .sizes()
        .iter()
        .map(|&s| simplex_grid(s, m))
        .collect();
    let total: usize = per_block.iter().map(|g| g.len()).product();
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut blocks = Vec::with_capacity(layout.players());
        for g in &per_block {
            let i = rem % g.len();
            rem /= g.len();
            blocks.push(SimplexPoint::new_unchecked(g[i].clone()));
        }
        out.push(MixedProfile::new(blocks));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space_2x2() -> FunctionSpace {
        FunctionSpace::multilinear_bimatrix(2, 2).unwrap()
    }

    fn random_element<R: Rng>(space: &FunctionSpace, rng: &mut R) -> SpaceElement {
        SpaceElement::new((0..space.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
    }

    #[test]
    fn space_dimension_and_constants() {
        let s = space_2x2();
        assert_eq!(s.dim(), 8);
        let c = s.represent_constant(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let x = MixedProfile::barycenter(s.layout());
        let vals = s.eval_element(&c, &x).unwrap();
        for (v, want) in vals.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((v - want).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_dependent_basis() {
        let layout = Layout::new(&[2]).unwrap();
        let dup1 = ConstantFamily::new(layout.clone(), vec![1.0, 0.0]).unwrap();
        let dup2 = ConstantFamily::new(layout.clone(), vec![1.0, 0.0]).unwrap();
        let err =
            FunctionSpace::constants_plus(layout, vec![Box::new(dup1), Box::new(dup2)], 4, 10);
        assert!(err.is_err());
    }

    #[test]
    fn phi_of_constant_element() {
        let s = space_2x2();
        let c = vec![0.3, -0.2, 0.9, 0.1];
        let w = s.represent_constant(&c).unwrap();
        let x0 = MixedProfile::barycenter(s.layout());
        let pt = s.phi(&w, &x0).unwrap();
        // profile is the retraction of the constant
        let want = product_retract(&c, s.layout()).unwrap();
        assert!(pt.profile.dist_inf(&want) < 1e-10);
        // element is w minus the profile as a constant
        let expect = w.sub(&s.represent_constant(&want.flat()).unwrap());
        assert!(pt.element.coeff_dist(&expect) < 1e-9);
    }

    #[test]
    fn phi_of_zero() {
        let s = space_2x2();
        let w = SpaceElement::zeros(s.dim());
        let x0 = MixedProfile::barycenter(s.layout());
        let pt = s.phi(&w, &x0).unwrap();
        assert!(pt.profile.dist_inf(&MixedProfile::barycenter(s.layout())) < 1e-12);
        let vals = s.eval_element(&pt.element, &x0).unwrap();
        for v in vals {
            assert!((v + 0.5).abs() < 1e-10, "constant -barycenter expected");
        }
    }

    #[test]
    fn round_trips_on_random_elements() {
        let s = space_2x2();
        let x0 = MixedProfile::barycenter(s.layout());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let w = random_element(&s, &mut rng);
            let pt = s.phi(&w, &x0).unwrap();
            assert!(s.membership_residual(&pt).unwrap() <= 1e-8);
            let back = s.psi(&pt, &x0).unwrap();
            assert!(back.coeff_dist(&w) < 1e-9, "psi(phi(w)) != w");
            let pt2 = s.phi(&back, &x0).unwrap();
            assert!(pt2.element.coeff_dist(&pt.element) < 1e-8);
            assert!(pt2.profile.dist_inf(&pt.profile) < 1e-8);
        }
    }

    #[test]
    fn psi_rejects_non_equilibrium_points() {
        let s = space_2x2();
        let x0 = MixedProfile::barycenter(s.layout());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = random_element(&s, &mut rng);
        let pt = s.phi(&w, &x0).unwrap();
        // large constant tilt on one coordinate breaks membership
        let broken = GraphPoint {
            element: pt
                .element
                .add(&s.represent_constant(&[5.0, 0.0, 0.0, 0.0]).unwrap()),
            profile: pt.profile.clone(),
        };
        match s.psi(&broken, &x0) {
            Err(Error::InvalidPoint(_)) => {}
            other => panic!("expected invalid-point error, got {other:?}"),
        }
    }

    #[test]
    fn psi_at_x0_collapses_correction() {
        let s = space_2x2();
        let x0 = MixedProfile::barycenter(s.layout());
        // phi of zero has profile exactly x0, collapsing the psi correction
        let w = SpaceElement::zeros(s.dim());
        let pt = s.phi(&w, &x0).unwrap();
        assert!(pt.profile.dist_inf(&x0) < 1e-12);
        let back = s.psi(&pt, &x0).unwrap();
        let expect = pt
            .element
            .add(&s.represent_constant(&x0.flat()).unwrap());
        assert!(back.coeff_dist(&expect) < 1e-10);
    }

    #[test]
    fn homotopy_endpoints_and_domain() {
        let s = space_2x2();
        let x0 = MixedProfile::barycenter(s.layout());
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let w = random_element(&s, &mut rng);
        let h0 = s.homotopy(&w, 0.0, &x0).unwrap();
        assert!(h0.coeff_dist(&w) < 1e-12);
        let h1 = s.homotopy(&w, 1.0, &x0).unwrap();
        // H(w,1) equals the pre-shift graph component: phi element + profile
        let pt = s.phi(&w, &x0).unwrap();
        let expect = pt
            .element
            .add(&s.represent_constant(&pt.profile.flat()).unwrap());
        assert!(h1.coeff_dist(&expect) < 1e-9);
        assert!(s.homotopy(&w, -0.1, &x0).is_err());
        assert!(s.homotopy(&w, 1.1, &x0).is_err());

        // constants are fixed by the homotopy at every t
        let c = s.represent_constant(&[1.0, -1.0, 0.5, 0.0]).unwrap();
        let h = s.homotopy(&c, 1.0, &x0).unwrap();
        assert!(h.coeff_dist(&c) < 1e-10);
    }

    #[test]
    fn properness_probe_grows() {
        let s = space_2x2();
        let x0 = MixedProfile::barycenter(s.layout());
        // fixed nonconstant direction
        let mut coeffs = vec![0.0; s.dim()];
        coeffs[4] = 1.0; // a multilinear basis element
        coeffs[0] = 0.3;
        let u = SpaceElement::new(coeffs).unwrap();
        let mut mins = Vec::new();
        for s_scale in [1.0, 10.0, 100.0, 1000.0] {
            let w = u.scaled(s_scale);
            let mut m = f64::INFINITY;
            for k in 0..=10 {
                let t = k as f64 / 10.0;
                let h = s.homotopy(&w, t, &x0).unwrap();
                m = m.min(s.sup_norm(&h).unwrap());
            }
            mins.push(m);
        }
        for pair in mins.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9, "min norms must be nondecreasing: {mins:?}");
        }
        assert!(mins[3] > mins[0], "norms must grow with the scale: {mins:?}");
    }

    #[test]
    fn remark_bounds_hold_on_samples() {
        let s = space_2x2();
        let x0 = MixedProfile::barycenter(s.layout());
        let delta = s.delta();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..30 {
            let w = random_element(&s, &mut rng);
            let wn = s.sup_norm(&w).unwrap();
            let pt = s.phi(&w, &x0).unwrap();
            let diff = pt.element.sub(&w);
            assert!(s.sup_norm(&diff).unwrap() <= 2.0 * wn + delta + 1e-9);
            let back = s.psi(&pt, &x0).unwrap();
            let en = s.sup_norm(&pt.element).unwrap();
            let diff = back.sub(&pt.element);
            assert!(s.sup_norm(&diff).unwrap() <= 2.0 * en + delta + 1e-9);
        }
    }
}
