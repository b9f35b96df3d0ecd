//! Myopic equilibria of per-action payoff families.
//!
//! A family assigns every (player, action) pair a continuous payoff function
//! of the whole mixed profile. A profile is a myopic equilibrium when every
//! action played with positive probability attains its player's maximum
//! per-action payoff. Equivalently, the profile is a fixed point of
//! `x -> retract(w(x) + x)`, which is what the solver iterates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::lp::{Cmp, LpBuilder};
use crate::matrix::Mat;
use crate::profile::{Layout, MixedProfile};
use crate::simplex::{product_retract, sample_simplex, simplex_grid, SimplexPoint};

/// A family of per-action payoff functions on the profile space.
pub trait PayoffFamily {
    fn layout(&self) -> &Layout;

    /// Writes w^n_i(x) for every flat (player, action) coordinate.
    fn eval_into(&self, x: &MixedProfile, out: &mut [f64]) -> Result<()>;

    fn eval(&self, x: &MixedProfile) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.layout().flat_len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }
}

impl<T: PayoffFamily + ?Sized> PayoffFamily for &T {
    fn layout(&self) -> &Layout {
        (**self).layout()
    }
    fn eval_into(&self, x: &MixedProfile, out: &mut [f64]) -> Result<()> {
        (**self).eval_into(x, out)
    }
}

/// Same payoff vector at every profile.
pub struct ConstantFamily {
    layout: Layout,
    values: Vec<f64>,
}

impl ConstantFamily {
    pub fn new(layout: Layout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.flat_len() {
            return Err(Error::Dimension("constant family shape mismatch".into()));
        }
        Ok(ConstantFamily { layout, values })
    }
}

impl PayoffFamily for ConstantFamily {
    fn layout(&self) -> &Layout {
        &self.layout
    }
    fn eval_into(&self, _x: &MixedProfile, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&self.values);
        Ok(())
    }
}

/// Two-player multilinear family: row actions earn (A q), column actions
/// earn (p^T B). Myopic equilibria of this family are the Nash equilibria of
/// the bimatrix game.
pub struct BimatrixFamily {
    layout: Layout,
    a: Mat,
    b: Mat,
}

impl BimatrixFamily {
    pub fn new(a: Mat, b: Mat) -> Result<Self> {
        if a.rows() != b.rows() || a.cols() != b.cols() {
            return Err(Error::Dimension("payoff matrices must share shape".into()));
        }
        let layout = Layout::new(&[a.rows(), a.cols()])?;
        Ok(BimatrixFamily { layout, a, b })
    }
}

impl PayoffFamily for BimatrixFamily {
    fn layout(&self) -> &Layout {
        &self.layout
    }
    fn eval_into(&self, x: &MixedProfile, out: &mut [f64]) -> Result<()> {
        let p = x.block(0).coords();
        let q = x.block(1).coords();
        let (r, c) = (self.a.rows(), self.a.cols());
        for i in 0..r {
            out[i] = (0..c).map(|j| self.a.at(i, j) * q[j]).sum();
        }
        for j in 0..c {
            out[r + j] = (0..r).map(|i| self.b.at(i, j) * p[i]).sum();
        }
        Ok(())
    }
}

/// Closure-backed family, the escape hatch for composite payoffs and tests.
pub struct FnFamily<F> {
    layout: Layout,
    f: F,
}

impl<F> FnFamily<F>
where
    F: Fn(&MixedProfile, &mut [f64]) -> Result<()>,
{
    pub fn new(layout: Layout, f: F) -> Self {
        FnFamily { layout, f }
    }
}

impl<F> PayoffFamily for FnFamily<F>
where
    F: Fn(&MixedProfile, &mut [f64]) -> Result<()>,
{
    fn layout(&self) -> &Layout {
        &self.layout
    }
    fn eval_into(&self, x: &MixedProfile, out: &mut [f64]) -> Result<()> {
        (self.f)(x, out)
    }
}

/// Residual of the myopic-equilibrium condition given an already evaluated
/// witness vector: the largest shortfall of a supported action from its
/// player's best payoff. Zero exactly at equilibria.
pub fn residual_from_witness(x: &MixedProfile, witness: &[f64], layout: &Layout, support_tol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 0..layout.players() {
        let block = &witness[layout.block(n)];
        let top = block.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (i, &w) in block.iter().enumerate() {
            if x.prob(n, i) > support_tol {
                worst = worst.max(top - w);
            }
        }
    }
    worst
}

/// Myopic-equilibrium residual of `x` for the family `w`.
pub fn equilibrium_residual(
    x: &MixedProfile,
    w: &dyn PayoffFamily,
    support_tol: f64,
) -> Result<f64> {
    let layout = w.layout();
    let max_actions = layout.sizes().iter().cloned().max().unwrap() as f64;
    if !(support_tol > 0.0 && support_tol < 1.0 / max_actions) {
        return Err(Error::InvalidInput(format!(
            "support tolerance {support_tol} outside (0, {})",
            1.0 / max_actions
        )));
    }
    let vals = w.eval(x)?;
    Ok(residual_from_witness(x, &vals, layout, support_tol))
}

/// One step of the fixed-point map `x -> retract(w(x) + x)`.
pub fn best_response_map(x: &MixedProfile, w: &dyn PayoffFamily) -> Result<MixedProfile> {
    let vals = w.eval(x)?;
    let flat = x.flat();
    let shifted: Vec<f64> = vals.iter().zip(&flat).map(|(a, b)| a + b).collect();
    product_retract(&shifted, w.layout())
}

/// Euclidean displacement of the fixed-point map at `x`.
pub fn displacement(x: &MixedProfile, w: &dyn PayoffFamily) -> Result<f64> {
    let t = best_response_map(x, w)?;
    let a = x.flat();
    let b = t.flat();
    Ok(a.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Residual below which a profile counts as solved.
    pub tol: f64,
    /// Probability threshold that marks an action as supported.
    pub support_tol: f64,
    /// Number of random restart points.
    pub restarts: usize,
    /// Damped-iteration budget per start.
    pub max_iters: usize,
    /// Subdivisions per block for the mesh of deterministic starts.
    pub mesh: usize,
    /// Refinement levels of the displacement-minimizing fallback.
    pub mesh_depth: usize,
    pub seed: u64,
    /// c in the step size c/(t+1).
    pub damping: f64,
    /// Distinct equilibria are separated by at least this distance.
    pub dedupe_dist: f64,
    /// Cap on the number of deterministic mesh starts.
    pub max_starts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-7,
            support_tol: 1e-9,
            restarts: 32,
            max_iters: 600,
            mesh: 6,
            mesh_depth: 3,
            seed: 0,
            damping: 1.0,
            dedupe_dist: 1e-4,
            max_starts: 4000,
        }
    }
}

/// A solved profile plus the data needed to re-check it.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub profile: MixedProfile,
    /// The per-action payoff vector at the profile (an element of the
    /// correspondence value in the multi-valued case).
    pub witness: Vec<f64>,
    pub residual: f64,
    /// Convex weights over selections when the witness came from a hull.
    pub hull_weights: Option<Vec<f64>>,
    pub trace: String,
}

/// Finds myopic equilibria of `w`: damped fixed-point iteration from mesh and
/// random starts, a support-targeted Newton polish, and a displacement-
/// refinement fallback. Returns all distinct solutions found.
pub fn solve_myopic(w: &dyn PayoffFamily, cfg: &SolverConfig) -> Result<Vec<SolveReport>> {
    solve_myopic_seeded(w, cfg, &[])
}

/// `solve_myopic` with extra caller-provided start points.
pub fn solve_myopic_seeded(
    w: &dyn PayoffFamily,
    cfg: &SolverConfig,
    extra_starts: &[MixedProfile],
) -> Result<Vec<SolveReport>> {
    let layout = w.layout().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts: Vec<MixedProfile> = Vec::new();
    starts.extend_from_slice(extra_starts);
    starts.push(MixedProfile::barycenter(&layout));
    starts.extend(mesh_starts(&layout, cfg.mesh, cfg.max_starts));
    for _ in 0..cfg.restarts {
        starts.push(random_profile(&layout, &mut rng));
    }

    let mut found: Vec<(MixedProfile, f64)> = Vec::new();
    let mut best_seen: Option<(f64, MixedProfile)> = None;
    let mut endpoints: Vec<MixedProfile> = Vec::new();
    for start in &starts {
        let (x, r) = iterate_from(w, start, cfg)?;
        if r <= cfg.tol {
            found.push((x.clone(), r));
        }
        if best_seen.as_ref().map_or(true, |(br, _)| r < *br) {
            best_seen = Some((r, x.clone()));
        }
        endpoints.push(x);
    }

    if cfg.mesh_depth > 0 {
        // displacement-minimizing refinement: iteration basins can miss
        // fixed points, but every equilibrium is a zero of the displacement,
        // so refine around a spatially diverse set of small-displacement
        // candidates regardless of what the sweep above found
        let mut scored: Vec<(f64, MixedProfile)> = Vec::new();
        for x in endpoints.iter().chain(starts.iter()) {
            scored.push((displacement(x, w)?, x.clone()));
        }
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut pool: Vec<(f64, MixedProfile)> = Vec::new();
        for (d, x) in scored {
            if pool.len() >= 20 {
                break;
            }
            if pool.iter().all(|(_, y)| x.dist_inf(y) > 0.05) {
                pool.push((d, x));
            }
        }
        let mut scale = 0.25;
        for _level in 0..cfg.mesh_depth {
            let mut next: Vec<(f64, MixedProfile)> = Vec::new();
            for (_, x) in &pool {
                next.push((displacement(x, w)?, x.clone()));
                for _ in 0..24 {
                    let y = perturb(x, scale, &mut rng)?;
                    next.push((displacement(&y, w)?, y));
                }
            }
            next.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut thinned: Vec<(f64, MixedProfile)> = Vec::new();
            for (d, x) in next {
                if thinned.len() >= 20 {
                    break;
                }
                if thinned.iter().all(|(_, y)| x.dist_inf(y) > 0.01 * scale) {
                    thinned.push((d, x));
                }
            }
            pool = thinned;
            scale *= 0.5;
        }
        for (_, x) in &pool {
            let (x, r) = iterate_from(w, x, cfg)?;
            if r <= cfg.tol {
                found.push((x, r));
            } else if best_seen.as_ref().map_or(true, |(br, _)| r < *br) {
                best_seen = Some((r, x));
            }
        }
    }

    if found.is_empty() {
        let (best_residual, _) = best_seen.unwrap();
        return Err(Error::BudgetExhausted {
            best_residual,
            detail: "no profile reached the residual tolerance".into(),
        });
    }

    // dedupe, keeping the smallest residual per cluster
    found.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut distinct: Vec<(MixedProfile, f64)> = Vec::new();
    for (x, r) in found {
        if !distinct.iter().any(|(y, _)| x.dist_inf(y) < cfg.dedupe_dist) {
            distinct.push((x, r));
        }
    }
    distinct.sort_by(|a, b| {
        a.0.flat()
            .partial_cmp(&b.0.flat())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut reports = Vec::new();
    for (x, _) in distinct {
        let witness = w.eval(&x)?;
        let residual = residual_from_witness(&x, &witness, &layout, cfg.support_tol);
        reports.push(SolveReport {
            profile: x,
            witness,
            residual,
            hull_weights: None,
            trace: format!(
                "damped fixed-point iteration, seed {}, mesh {}, restarts {}",
                cfg.seed, cfg.mesh, cfg.restarts
            ),
        });
    }
    Ok(reports)
}

fn mesh_starts(layout: &Layout, mesh: usize, cap: usize) -> Vec<MixedProfile> {
    if mesh == 0 {
        return Vec::new();
    }
    let per_block: Vec<Vec<Vec<f64>>> = layout
        .sizes()
        .iter()
        .map(|&s| simplex_grid(s, mesh))
        .collect();
    let total: usize = per_block.iter().map(|g| g.len()).product();
    let stride = (total + cap - 1) / cap;
    let mut out = Vec::new();
    for idx in (0..total).step_by(stride.max(1)) {
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

fn random_profile<R: Rng>(layout: &Layout, rng: &mut R) -> MixedProfile {
    MixedProfile::new(
        layout
            .sizes()
            .iter()
            .map(|&s| sample_simplex(s, rng))
            .collect(),
    )
}

fn perturb<R: Rng>(x: &MixedProfile, scale: f64, rng: &mut R) -> Result<MixedProfile> {
    let layout = x.layout()?;
    let flat: Vec<f64> = x
        .flat()
        .iter()
        .map(|v| v + scale * (rng.gen::<f64>() - 0.5))
        .collect();
    product_retract(&flat, &layout)
}

/// Damped iteration from one start; returns the best point seen, polished.
fn iterate_from(
    w: &dyn PayoffFamily,
    start: &MixedProfile,
    cfg: &SolverConfig,
) -> Result<(MixedProfile, f64)> {
    let layout = w.layout();
    let mut x = start.clone();
    let mut best: Option<(f64, MixedProfile)> = None;
    let mut vals = vec![0.0; layout.flat_len()];
    for t in 0..cfg.max_iters {
        w.eval_into(&x, &mut vals)?;
        let r = residual_from_witness(&x, &vals, layout, cfg.support_tol);
        if best.as_ref().map_or(true, |(br, _)| r < *br) {
            best = Some((r, x.clone()));
        }
        if r <= cfg.tol * 0.1 {
            break;
        }
        let flat = x.flat();
        let shifted: Vec<f64> = vals.iter().zip(&flat).map(|(a, b)| a + b).collect();
        let target = product_retract(&shifted, layout)?;
        let alpha = (cfg.damping / (t as f64 + 1.0)).min(1.0);
        let blended: Vec<f64> = flat
            .iter()
            .zip(&target.flat())
            .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
            .collect();
        x = MixedProfile::from_flat(layout, &blended)?;
    }
    let (r, x) = best.unwrap();
    try_polish(w, x, r, cfg)
}

/// Newton refinement of the per-player tie system on the support detected at
/// threshold `detect`. Exposed for solvers that know the right face and judge
/// the outcome by their own certificate rather than the plain residual.
pub fn refine_support(
    w: &dyn PayoffFamily,
    x: &MixedProfile,
    detect: f64,
    cfg: &SolverConfig,
) -> Result<Option<(MixedProfile, f64)>> {
    support_polish(w, x, detect, cfg)
}

/// Polishes with a ladder of support-detection thresholds: near a boundary
/// equilibrium the iterate may carry stray mass, and only the coarser
/// detections recover the true face.
fn try_polish(
    w: &dyn PayoffFamily,
    x: MixedProfile,
    r: f64,
    cfg: &SolverConfig,
) -> Result<(MixedProfile, f64)> {
    let mut best = (x, r);
    for detect in [1e-6_f64.max(cfg.support_tol), 5e-3, 0.03, 0.1] {
        if let Some((px, pr)) = support_polish(w, &best.0, detect, cfg)? {
            if pr < best.1 {
                best = (px, pr);
            }
        }
        if best.1 <= cfg.tol * 1e-3 {
            break;
        }
    }
    Ok(best)
}

/// Newton refinement on the active support: solve the per-player tie system
/// `w^n_i(x) = t_n` over the supported coordinates, keeping blocks on their
/// mass constraints. The Jacobian is taken by forward differences, so this
/// works for any smooth family; for multilinear ones it lands in one step.
fn support_polish(
    w: &dyn PayoffFamily,
    x0: &MixedProfile,
    detect: f64,
    cfg: &SolverConfig,
) -> Result<Option<(MixedProfile, f64)>> {
    let layout = w.layout().clone();
    let supports: Vec<Vec<usize>> = (0..layout.players())
        .map(|n| {
            (0..layout.actions(n))
                .filter(|&i| x0.prob(n, i) > detect)
                .collect()
        })
        .collect();
    let n_players = layout.players();
    let dim: usize = supports.iter().map(|s| s.len()).sum::<usize>() + n_players;

    // pack: supported coords then one tie level per player
    let mut z = Vec::with_capacity(dim);
    for (n, sup) in supports.iter().enumerate() {
        for &i in sup {
            z.push(x0.prob(n, i));
        }
    }
    let w0 = w.eval(x0)?;
    for n in 0..n_players {
        let top = layout.block(n).map(|c| w0[c]).fold(f64::NEG_INFINITY, f64::max);
        z.push(top);
    }

    let unpack = |z: &[f64]| -> Result<MixedProfile> {
        let mut flat = vec![0.0; layout.flat_len()];
        let mut at = 0;
        for (n, sup) in supports.iter().enumerate() {
            for &i in sup {
                flat[layout.flat_index(n, i)] = z[at];
                at += 1;
            }
        }
        let blocks = (0..n_players)
            .map(|n| SimplexPoint::new_unchecked(flat[layout.block(n)].to_vec()))
            .collect();
        Ok(MixedProfile::new(blocks))
    };

    let residual_fn = |z: &[f64]| -> Result<Vec<f64>> {
        let x = unpack(z)?;
        let vals = w.eval(&x)?;
        let mut f = Vec::with_capacity(dim);
        for (n, sup) in supports.iter().enumerate() {
            let t_n = z[z.len() - n_players + n];
            for &i in sup {
                f.push(vals[layout.flat_index(n, i)] - t_n);
            }
        }
        for (n, sup) in supports.iter().enumerate() {
            let offset: usize = supports[..n].iter().map(|s| s.len()).sum();
            let mass: f64 = (0..sup.len()).map(|k| z[offset + k]).sum();
            f.push(mass - 1.0);
        }
        Ok(f)
    };

    let mut ok = true;
    for _ in 0..12 {
        let f = residual_fn(&z)?;
        let fmax = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if fmax < 1e-13 {
            break;
        }
        let h = 1e-7;
        let mut jac = nalgebra::DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut zz = z.clone();
            zz[col] += h;
            let fh = residual_fn(&zz)?;
            for row in 0..dim {
                jac[(row, col)] = (fh[row] - f[row]) / h;
            }
        }
        let rhs = nalgebra::DVector::from_iterator(dim, f.iter().map(|v| -v));
        match jac.lu().solve(&rhs) {
            Some(step) => {
                for (zi, si) in z.iter_mut().zip(step.iter()) {
                    *zi += si;
                }
            }
            None => {
                ok = false;
                break;
            }
        }
    }
    if !ok {
        return Ok(None);
    }
    // clamp dust, renormalize, validate
    let coords_end = dim - n_players;
    if z[..coords_end].iter().any(|v| *v < -1e-7 || !v.is_finite()) {
        return Ok(None);
    }
    for v in z[..coords_end].iter_mut() {
        *v = v.max(0.0);
    }
    let mut at = 0;
    for sup in &supports {
        let mass: f64 = z[at..at + sup.len()].iter().sum();
        if mass <= 0.0 {
            return Ok(None);
        }
        for v in z[at..at + sup.len()].iter_mut() {
            *v /= mass;
        }
        at += sup.len();
    }
    let x = unpack(&z)?;
    let vals = w.eval(&x)?;
    let r = residual_from_witness(&x, &vals, &layout, cfg.support_tol);
    Ok(Some((x, r)))
}

/// A finitely generated payoff correspondence: the value at x is the convex
/// hull of the selection values.
pub struct PayoffCorrespondence<'a> {
    selections: Vec<&'a dyn PayoffFamily>,
}

impl<'a> PayoffCorrespondence<'a> {
    pub fn new(selections: Vec<&'a dyn PayoffFamily>) -> Result<Self> {
        if selections.is_empty() {
            return Err(Error::InvalidInput("correspondence needs a selection".into()));
        }
        let layout = selections[0].layout();
        if selections.iter().any(|s| s.layout() != layout) {
            return Err(Error::Dimension("selections must share a layout".into()));
        }
        Ok(PayoffCorrespondence { selections })
    }

    pub fn layout(&self) -> &Layout {
        self.selections[0].layout()
    }

    pub fn len(&self) -> usize {
        self.selections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selections.is_empty()
    }

    pub fn eval_all(&self, x: &MixedProfile) -> Result<Vec<Vec<f64>>> {
        self.selections.iter().map(|s| s.eval(x)).collect()
    }
}

struct MixtureFamily<'a, 'b> {
    corr: &'b PayoffCorrespondence<'a>,
    weights: Vec<f64>,
}

impl PayoffFamily for MixtureFamily<'_, '_> {
    fn layout(&self) -> &Layout {
        self.corr.layout()
    }
    fn eval_into(&self, x: &MixedProfile, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        let mut tmp = vec![0.0; out.len()];
        for (sel, &wt) in self.corr.selections.iter().zip(&self.weights) {
            if wt == 0.0 {
                continue;
            }
            sel.eval_into(x, &mut tmp)?;
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += wt * t;
            }
        }
        Ok(())
    }
}

/// Best witness in the hull at a fixed profile: minimizes the supported-action
/// shortfall over convex combinations of the selection values. Returns
/// (residual, weights, witness).
pub fn hull_witness_at(
    corr: &PayoffCorrespondence,
    x: &MixedProfile,
    support_tol: f64,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let layout = corr.layout();
    let vals = corr.eval_all(x)?;
    let m = vals.len();
    let n_players = layout.players();
    // vars: mu_0..mu_{m-1}, t_0..t_{n-1} (free), s
    let n_vars = m + n_players + 1;
    let s_var = n_vars - 1;
    let mut lp = LpBuilder::new(n_vars);
    let mut obj = vec![0.0; n_vars];
    obj[s_var] = 1.0;
    lp.minimize(&obj);
    for n in 0..n_players {
        lp.mark_free(m + n);
    }
    lp.constraint(&(0..m).map(|k| (k, 1.0)).collect::<Vec<_>>(), Cmp::Eq, 1.0);
    for n in 0..n_players {
        for c in layout.block(n) {
            let mut coeffs: Vec<(usize, f64)> = (0..m).map(|k| (k, vals[k][c])).collect();
            coeffs.push((m + n, -1.0));
            lp.constraint(&coeffs, Cmp::Le, 0.0);
        }
        for i in 0..layout.actions(n) {
            if x.prob(n, i) > support_tol {
                let c = layout.flat_index(n, i);
                let mut coeffs: Vec<(usize, f64)> = (0..m).map(|k| (k, -vals[k][c])).collect();
                coeffs.push((m + n, 1.0));
                coeffs.push((s_var, -1.0));
                lp.constraint(&coeffs, Cmp::Le, 0.0);
            }
        }
    }
    let sol = lp.solve()?;
    let mut mu: Vec<f64> = sol.x[..m].iter().map(|v| v.max(0.0)).collect();
    let total: f64 = mu.iter().sum();
    for v in mu.iter_mut() {
        *v /= total;
    }
    let mut witness = vec![0.0; layout.flat_len()];
    for (k, v) in vals.iter().enumerate() {
        for (wit, &val) in witness.iter_mut().zip(v) {
            *wit += mu[k] * val;
        }
    }
    let residual = residual_from_witness(x, &witness, layout, support_tol);
    Ok((residual, mu, witness))
}

/// Myopic equilibrium of a finitely generated correspondence: searches over
/// fixed-weight mixtures (each a continuous single-valued family) and
/// re-optimizes the hull witness at every candidate profile by LP.
pub fn solve_myopic_correspondence(
    corr: &PayoffCorrespondence,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let m = corr.len();
    let mut weight_sets: Vec<Vec<f64>> = simplex_grid(m, 3.min(m + 1));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e3779b97f4a7c15);
    for _ in 0..4 {
        weight_sets.push(sample_simplex(m, &mut rng).coords().to_vec());
    }
    let inner_cfg = SolverConfig {
        restarts: (cfg.restarts / 4).max(4),
        ..cfg.clone()
    };
    let mut best: Option<(f64, MixedProfile, Vec<f64>, Vec<f64>)> = None;
    let consider = |x: &MixedProfile,
                        best: &mut Option<(f64, MixedProfile, Vec<f64>, Vec<f64>)>|
     -> Result<()> {
        let (r, mu, wit) = hull_witness_at(corr, x, cfg.support_tol)?;
        if best.as_ref().map_or(true, |(br, ..)| r < *br) {
            *best = Some((r, x.clone(), mu, wit));
        }
        Ok(())
    };
    for weights in &weight_sets {
        let fam = MixtureFamily {
            corr,
            weights: weights.clone(),
        };
        match solve_myopic(&fam, &inner_cfg) {
            Ok(reports) => {
                for rep in reports.iter().take(4) {
                    consider(&rep.profile, &mut best)?;
                }
            }
            Err(Error::BudgetExhausted { .. }) => continue,
            Err(e) => return Err(e),
        }
        if let Some((r, ..)) = &best {
            if *r <= cfg.tol {
                break;
            }
        }
    }
    // refinement: re-solve with the optimized weights, warm-started
    for _ in 0..2 {
        let Some((r, x, mu, _)) = best.clone() else {
            break;
        };
        if r <= cfg.tol {
            break;
        }
        let fam = MixtureFamily { corr, weights: mu };
        if let Ok(reports) = solve_myopic_seeded(&fam, &inner_cfg, &[x]) {
            for rep in reports.iter().take(4) {
                consider(&rep.profile, &mut best)?;
            }
        }
    }
    let (residual, profile, mu, witness) = best.ok_or_else(|| Error::BudgetExhausted {
        best_residual: f64::INFINITY,
        detail: "correspondence search produced no candidates".into(),
    })?;
    if residual > cfg.tol {
        return Err(Error::BudgetExhausted {
            best_residual: residual,
            detail: "no hull witness met the tolerance".into(),
        });
    }
    Ok(SolveReport {
        profile,
        witness,
        residual,
        hull_weights: Some(mu),
        trace: format!("hull-witness search over {m} selections, seed {}", cfg.seed),
    })
}

/// Canonical aggregate payoff per player: g^n(x) = sum_i x^n_i w^n_i(x).
pub fn aggregate_payoffs(w: &dyn PayoffFamily, x: &MixedProfile) -> Result<Vec<f64>> {
    let vals = w.eval(x)?;
    let layout = w.layout();
    Ok((0..layout.players())
        .map(|n| {
            layout
                .block(n)
                .enumerate()
                .map(|(i, c)| x.prob(n, i) * vals[c])
                .sum()
        })
        .collect())
}

/// Result of scanning a profile mesh for approximate Nash points of the
/// aggregate payoffs.
#[derive(Clone, Debug, Serialize)]
pub struct NashGapScan {
    /// Smallest over the mesh of the larger player's best-reply gain.
    pub min_max_gain: f64,
    pub argmin: MixedProfile,
    /// Whether some mesh profile had both gains at or below the threshold.
    pub any_below: bool,
    pub threshold: f64,
}

/// Scans a two-player mesh: for each mesh profile, each player's best-reply
/// gain over own-mesh replacements of the aggregate payoff.
pub fn nash_gap_scan(w: &dyn PayoffFamily, mesh_m: usize, threshold: f64) -> Result<NashGapScan> {
    let layout = w.layout();
    if layout.players() != 2 {
        return Err(Error::InvalidInput("mesh scan supports exactly two players".into()));
    }
    let grid0 = simplex_grid(layout.actions(0), mesh_m);
    let grid1 = simplex_grid(layout.actions(1), mesh_m);
    let mut g0 = vec![vec![0.0; grid1.len()]; grid0.len()];
    let mut g1 = vec![vec![0.0; grid1.len()]; grid0.len()];
    for (i, a) in grid0.iter().enumerate() {
        for (j, b) in grid1.iter().enumerate() {
            let x = MixedProfile::new(vec![
                SimplexPoint::new_unchecked(a.clone()),
                SimplexPoint::new_unchecked(b.clone()),
            ]);
            let agg = aggregate_payoffs(w, &x)?;
            g0[i][j] = agg[0];
            g1[i][j] = agg[1];
        }
    }
    let col_max0: Vec<f64> = (0..grid1.len())
        .map(|j| (0..grid0.len()).map(|i| g0[i][j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let row_max1: Vec<f64> = (0..grid0.len())
        .map(|i| (0..grid1.len()).map(|j| g1[i][j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut best = (f64::INFINITY, 0, 0);
    let mut any_below = false;
    for i in 0..grid0.len() {
        for j in 0..grid1.len() {
            let gain0 = col_max0[j] - g0[i][j];
            let gain1 = row_max1[i] - g1[i][j];
            let worst = gain0.max(gain1);
            if worst < best.0 {
                best = (worst, i, j);
            }
            if gain0 <= threshold && gain1 <= threshold {
                any_below = true;
            }
        }
    }
    Ok(NashGapScan {
        min_max_gain: best.0,
        argmin: MixedProfile::new(vec![
            SimplexPoint::new_unchecked(grid0[best.1].clone()),
            SimplexPoint::new_unchecked(grid1[best.2].clone()),
        ]),
        any_below,
        threshold,
    })
}

/// Mesh optimum of the aggregate payoff of a one-player family.
pub fn aggregate_optimum_1p(w: &dyn PayoffFamily, mesh_m: usize) -> Result<(MixedProfile, f64)> {
    let layout = w.layout();
    if layout.players() != 1 {
        return Err(Error::InvalidInput("aggregate optimum needs one player".into()));
    }
    let mut best: Option<(f64, MixedProfile)> = None;
    for pt in simplex_grid(layout.actions(0), mesh_m) {
        let x = MixedProfile::new(vec![SimplexPoint::new_unchecked(pt)]);
        let v = aggregate_payoffs(w, &x)?[0];
        if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
            best = Some((v, x));
        }
    }
    let (v, x) = best.unwrap();
    Ok((x, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pennies_bonus_family() -> FnFamily<impl Fn(&MixedProfile, &mut [f64]) -> Result<()>> {
        let layout = Layout::new(&[2, 2]).unwrap();
        FnFamily::new(layout, |x, out| {
            let p = x.prob(0, 0);
            let q = x.prob(1, 0);
            let core = |row: f64| row * (2.0 * q - 1.0); // e_i A q for A = [[1,-1],[-1,1]]
            out[0] = core(1.0) + p.max(1.0 - p);
            out[1] = core(-1.0) + p.max(1.0 - p);
            let core2 = |col: f64| -col * (2.0 * p - 1.0);
            out[2] = core2(1.0) + q.max(1.0 - q);
            out[3] = core2(-1.0) + q.max(1.0 - q);
            Ok(())
        })
    }

    fn voting1_family() -> FnFamily<impl Fn(&MixedProfile, &mut [f64]) -> Result<()>> {
        let layout = Layout::new(&[2]).unwrap();
        FnFamily::new(layout, |x, out| {
            let p = x.prob(0, 0);
            out[0] = 1.0 - 5.0 * p;
            out[1] = -5.0 * p;
            Ok(())
        })
    }

    fn voting2_family() -> FnFamily<impl Fn(&MixedProfile, &mut [f64]) -> Result<()>> {
        let layout = Layout::new(&[2]).unwrap();
        FnFamily::new(layout, |x, out| {
            let p = x.prob(0, 0);
            out[0] = 1.0 - 5.0 * p;
            out[1] = 0.0;
            Ok(())
        })
    }

    fn profile2(p: f64, q: f64) -> MixedProfile {
        MixedProfile::new(vec![
            SimplexPoint::new(vec![p, 1.0 - p]).unwrap(),
            SimplexPoint::new(vec![q, 1.0 - q]).unwrap(),
        ])
    }

    #[test]
    fn residual_examples() {
        let fam = pennies_bonus_family();
        let x = profile2(0.5, 0.5);
        assert!(equilibrium_residual(&x, &fam, 1e-9).unwrap() == 0.0);

        let v1 = voting1_family();
        let trump = MixedProfile::new(vec![SimplexPoint::new(vec![1.0, 0.0]).unwrap()]);
        assert!(equilibrium_residual(&trump, &v1, 1e-9).unwrap() == 0.0);

        let layout = Layout::new(&[3]).unwrap();
        let c = ConstantFamily::new(layout.clone(), vec![4.2; 3]).unwrap();
        let any = MixedProfile::new(vec![SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap()]);
        assert!(equilibrium_residual(&any, &c, 1e-9).unwrap() == 0.0);
    }

    #[test]
    fn support_tol_domain() {
        let fam = voting1_family();
        let x = MixedProfile::new(vec![SimplexPoint::new(vec![1.0, 0.0]).unwrap()]);
        assert!(equilibrium_residual(&x, &fam, 0.0).is_err());
        assert!(equilibrium_residual(&x, &fam, 0.6).is_err());
    }

    #[test]
    fn best_response_examples() {
        let layout = Layout::new(&[2, 3]).unwrap();
        let zero = ConstantFamily::new(layout.clone(), vec![0.0; 5]).unwrap();
        let x = MixedProfile::barycenter(&layout);
        let t = best_response_map(&x, &zero).unwrap();
        assert!(t.dist_inf(&x) < 1e-12);

        // voting game 1 at p = 0: w + x = (1, 1), whose projection is the barycenter
        let v1 = voting1_family();
        let clinton = MixedProfile::new(vec![SimplexPoint::new(vec![0.0, 1.0]).unwrap()]);
        let t = best_response_map(&clinton, &v1).unwrap();
        assert!((t.prob(0, 0) - 0.5).abs() < 1e-12);
        assert!((t.prob(0, 1) - 0.5).abs() < 1e-12);

        // a myopic equilibrium is a fixed point
        let trump = MixedProfile::new(vec![SimplexPoint::new(vec![1.0, 0.0]).unwrap()]);
        let t = best_response_map(&trump, &v1).unwrap();
        assert!(t.dist_inf(&trump) < 1e-12);
    }

    #[test]
    fn fixed_point_equivalence_directions() {
        let fam = pennies_bonus_family();
        let x = profile2(0.5, 0.5);
        // residual zero implies fixed
        assert_eq!(equilibrium_residual(&x, &fam, 1e-9).unwrap(), 0.0);
        assert!(best_response_map(&x, &fam).unwrap().dist_inf(&x) < 1e-12);
        // fixed implies residual zero at zero support threshold
        let layout = Layout::new(&[2]).unwrap();
        let c = ConstantFamily::new(layout.clone(), vec![1.0, 1.0]).unwrap();
        let y = MixedProfile::new(vec![SimplexPoint::new(vec![0.3, 0.7]).unwrap()]);
        assert!(best_response_map(&y, &c).unwrap().dist_inf(&y) < 1e-12);
        let vals = c.eval(&y).unwrap();
        assert_eq!(residual_from_witness(&y, &vals, &layout, 0.0), 0.0);
    }

    #[test]
    fn solves_matching_pennies_bonus() {
        let fam = pennies_bonus_family();
        let cfg = SolverConfig::default();
        let reports = solve_myopic(&fam, &cfg).unwrap();
        assert_eq!(reports.len(), 1, "unique myopic equilibrium expected");
        let rep = &reports[0];
        assert!(rep.residual <= 1e-6);
        assert!(rep.profile.dist_inf(&profile2(0.5, 0.5)) < 1e-6);
        for w in &rep.witness {
            assert!((w - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn solves_voting_games() {
        let cfg = SolverConfig::default();
        let v1 = voting1_family();
        let reports = solve_myopic(&v1, &cfg).unwrap();
        assert_eq!(reports.len(), 1);
        assert!((reports[0].profile.prob(0, 0) - 1.0).abs() < 1e-6);
        let agg = aggregate_payoffs(&v1, &reports[0].profile).unwrap();
        assert!((agg[0] + 4.0).abs() < 1e-6);

        let v2 = voting2_family();
        let reports = solve_myopic(&v2, &cfg).unwrap();
        assert_eq!(reports.len(), 1);
        assert!((reports[0].profile.prob(0, 0) - 0.2).abs() < 1e-6);
    }

    #[test]
    fn shift_invariance_of_residual() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = Mat::new(2, 2, (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
            let b = Mat::new(2, 2, (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
            let base = BimatrixFamily::new(a.clone(), b.clone()).unwrap();
            let c1 = rng.gen_range(-3.0..3.0);
            let c2 = rng.gen_range(-3.0..3.0);
            let layout = Layout::new(&[2, 2]).unwrap();
            let shifted = FnFamily::new(layout, move |x: &MixedProfile, out: &mut [f64]| {
                let inner = BimatrixFamily::new(a.clone(), b.clone()).unwrap();
                inner.eval_into(x, out)?;
                out[0] += c1;
                out[1] += c1;
                out[2] += c2;
                out[3] += c2;
                Ok(())
            });
            let x = profile2(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let r0 = equilibrium_residual(&x, &base, 1e-9).unwrap();
            let r1 = equilibrium_residual(&x, &shifted, 1e-9).unwrap();
            assert!((r0 - r1).abs() < 1e-12);
        }
    }

    #[test]
    fn correspondence_single_selection_degenerates() {
        let v1 = voting1_family();
        let corr = PayoffCorrespondence::new(vec![&v1]).unwrap();
        let cfg = SolverConfig::default();
        let rep = solve_myopic_correspondence(&corr, &cfg).unwrap();
        assert!((rep.profile.prob(0, 0) - 1.0).abs() < 1e-6);
        assert!(rep.residual <= cfg.tol);
        let weights = rep.hull_weights.unwrap();
        assert!((weights[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn correspondence_hull_tie() {
        // two constant selections whose midpoint is constant per block
        let layout = Layout::new(&[2]).unwrap();
        let c1 = ConstantFamily::new(layout.clone(), vec![1.0, 0.0]).unwrap();
        let c2 = ConstantFamily::new(layout.clone(), vec![0.0, 1.0]).unwrap();
        let corr = PayoffCorrespondence::new(vec![&c1, &c2]).unwrap();
        let cfg = SolverConfig::default();
        let rep = solve_myopic_correspondence(&corr, &cfg).unwrap();
        assert!(rep.residual <= 1e-9);
        let weights = rep.hull_weights.unwrap();
        assert!((weights[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn scan_utilities() {
        let v2 = voting2_family();
        let (x, v) = aggregate_optimum_1p(&v2, 1000).unwrap();
        assert!((x.prob(0, 0) - 0.1).abs() < 1e-3);
        assert!((v - 0.05).abs() < 1e-6);

        let fam = pennies_bonus_family();
        let scan = nash_gap_scan(&fam, 100, 1e-3).unwrap();
        assert!(!scan.any_below, "no approximate Nash point should exist");
        assert!(scan.min_max_gain > 1e-3);
    }
}
