//! Cone Collapse: shrink the nonnegative orthant onto the minimal cone that
//! still contains every data point.
//!
//! Each outer iteration
//! 1. tilts every *free* ray (one not colinear with a data point) toward the
//!    normalized data mean,
//! 2. fits every point with NNLS against the current rays and appends the
//!    direction of any point left outside, pruning rays that became conic
//!    combinations of the others after each append,
//! 3. stops once every ray is *frozen*, i.e. colinear with some data point.
//!
//! Points are the columns of the input matrix.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{check_clean, dot, mean_direction, norm2, normalize, DenseMatrix, UnitVector};
use crate::nnls::{solve_multi, solve_single, solve_single_masked, BppConfig};

/// Ordered set of unit-norm nonnegative rays living in a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RayBasis {
    dim: usize,
    rays: Vec<UnitVector>,
}

impl RayBasis {
    pub fn new(dim: usize, rays: Vec<UnitVector>) -> Result<Self> {
        if let Some(bad) = rays.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: (dim, 1), found: (bad.dim(), 1) });
        }
        Ok(RayBasis { dim, rays })
    }

    /// Normalizes every column of `m` into a ray.
    pub fn from_columns(m: &DMatrix<f64>) -> Result<Self> {
        let rays = (0..m.ncols()).map(|j| normalize(m.column(j).as_slice())).collect::<Result<Vec<_>>>()?;
        RayBasis::new(m.nrows(), rays)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn rays(&self) -> &[UnitVector] {
        &self.rays
    }

    /// Rays as the columns of a `dim × len` matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.rays.len(), |i, j| self.rays[j][i])
    }

    /// Index of a ray with cosine `>= 1 - delta_cos` to `v`, if any.
    pub fn find_colinear(&self, v: &[f64], delta_cos: f64) -> Option<usize> {
        let nv = norm2(v);
        if nv == 0.0 {
            return None;
        }
        self.rays.iter().position(|r| dot(r, v) / nv >= 1.0 - delta_cos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseConfig {
    /// Tilt step toward the mean direction, in `(0, 1)`.
    pub eta: f64,
    /// Relative residual above which a point counts as outside the cone, and
    /// below which a ray counts as redundant.
    pub epsilon: f64,
    /// Colinearity slack: `cos ≥ 1 − delta_cos` is treated as `cos = 1`.
    pub delta_cos: f64,
    pub max_outer_iter: usize,
    /// Run a full leave-one-out pruning pass once every ray is frozen.
    pub final_prune: bool,
    /// Every iteration, drop rays lying within `epsilon` of the cone spanned
    /// by the frozen rays. Without it, free rays that are never caught by an
    /// append-triggered prune keep the stopping rule from firing when the
    /// data cone is not full-dimensional.
    pub sweep_prune: bool,
    /// NNLS settings for every cone subproblem. The default dual tolerance
    /// is tighter than the solver default: once free rays bunch up around
    /// the mean, residuals near `epsilon` depend on very small duals.
    pub bpp: BppConfig,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        CollapseConfig {
            eta: 0.25,
            epsilon: 1e-8,
            delta_cos: 1e-10,
            max_outer_iter: 10_000,
            final_prune: true,
            sweep_prune: true,
            bpp: BppConfig { feasibility_tol: 1e-15, ..BppConfig::default() },
        }
    }
}

impl CollapseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidConfig("eta must lie in (0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive"));
        }
        if !(self.delta_cos >= 0.0 && self.delta_cos < 1.0) {
            return Err(Error::InvalidConfig("delta_cos must lie in [0, 1)"));
        }
        self.bpp.validate()
    }
}

/// Per-iteration bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Rays at the end of the iteration.
    pub rays: usize,
    /// Rays that were frozen at the start of the iteration (not tilted).
    pub frozen: usize,
    pub points_added: usize,
    pub rays_pruned: usize,
    /// Smallest cosine between a tilted ray and the mean direction.
    pub min_free_cosine: Option<f64>,
    /// Largest relative NNLS residual of a data point at the iteration's end.
    pub max_relative_residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CollapseTrace {
    pub records: Vec<IterationRecord>,
}

impl CollapseTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.records.iter().map(|r| r.max_relative_residual).fold(0.0, f64::max)
    }
}

/// True iff some column of `points` has cosine `>= 1 - delta_cos` with `u`.
pub fn is_frozen(u: &[f64], points: &DMatrix<f64>, delta_cos: f64) -> bool {
    let nu = norm2(u);
    if nu == 0.0 || u.len() != points.nrows() {
        return false;
    }
    (0..points.ncols()).any(|j| {
        let x = points.column(j);
        let nx = norm2(x.as_slice());
        nx > 0.0 && dot(u, x.as_slice()) / (nu * nx) >= 1.0 - delta_cos
    })
}

/// `((1 − η)u + ημ̂) / ‖(1 − η)u + ημ̂‖₂`
pub fn mean_tilt(u: &[f64], mu_hat: &[f64], eta: f64) -> Result<UnitVector> {
    if u.len() != mu_hat.len() {
        return Err(Error::DimensionMismatch { expected: (mu_hat.len(), 1), found: (u.len(), 1) });
    }
    if u == mu_hat {
        return Ok(UnitVector::from_unit_unchecked(u.to_vec()));
    }
    let blend: Vec<f64> = u.iter().zip(mu_hat).map(|(a, m)| (1.0 - eta) * a + eta * m).collect();
    normalize(&blend)
}

/// Returns the single data direction when every pair of points is colinear.
pub fn c1_shortcut(points: &DMatrix<f64>, delta_cos: f64) -> Option<UnitVector> {
    if points.ncols() == 0 || points.nrows() == 0 {
        return None;
    }
    let units: Vec<UnitVector> =
        (0..points.ncols()).map(|j| normalize(points.column(j).as_slice())).collect::<Result<_>>().ok()?;
    let first = &units[0];
    if units.iter().any(|u| dot(u, first) < 1.0 - delta_cos) {
        return None;
    }
    for (a, ua) in units.iter().enumerate() {
        for ub in &units[a + 1..] {
            if dot(ua, ub) < 1.0 - delta_cos {
                return None;
            }
        }
    }
    Some(first.clone())
}

/// Distance from `target` to the cone of `rays`, via NNLS.
fn cone_distance(rays: &[&[f64]], target: &[f64], bpp: &BppConfig) -> Result<f64> {
    if rays.is_empty() {
        return Ok(norm2(target));
    }
    let d = target.len();
    let c = DMatrix::from_fn(d, rays.len(), |i, j| rays[j][i]);
    let sol = solve_single(&c, target, bpp)?;
    let mut r = target.to_vec();
    for (j, &w) in sol.x.iter().enumerate() {
        if w != 0.0 {
            for (ri, cij) in r.iter_mut().zip(rays[j]) {
                *ri -= cij * w;
            }
        }
    }
    Ok(norm2(&r))
}

/// Working rays with stable ids and cached leave-one-out certificates.
#[derive(Debug, Clone, Default)]
struct RaySet {
    dirs: Vec<Vec<f64>>,
    ids: Vec<u64>,
    certs: Vec<Option<Certificate>>,
    next_id: u64,
}

/// Outcome of a ray's last leave-one-out fit: the residual, and the ids of
/// the rays that carried the fit (used to warm-start the next solve).
#[derive(Debug, Clone)]
struct Certificate {
    residual: Vec<f64>,
    support: Vec<u64>,
}

impl RaySet {
    fn new(dirs: Vec<Vec<f64>>) -> Self {
        let mut set = RaySet::default();
        for d in dirs {
            set.push(d);
        }
        set
    }

    fn len(&self) -> usize {
        self.dirs.len()
    }

    fn push(&mut self, dir: Vec<f64>) {
        self.dirs.push(dir);
        self.ids.push(self.next_id);
        self.certs.push(None);
        self.next_id += 1;
    }

    /// Replaces ray `k`; the new direction counts as a new ray.
    fn replace(&mut self, k: usize, dir: Vec<f64>) {
        self.dirs[k] = dir;
        self.ids[k] = self.next_id;
        self.certs[k] = None;
        self.next_id += 1;
    }

    fn retain(&mut self, keep: &[bool]) {
        let mut k = 0;
        self.dirs.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        let mut k = 0;
        self.ids.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        let mut k = 0;
        self.certs.retain(|_| {
            k += 1;
            keep[k - 1]
        });
    }
}

/// Leave-one-out pruning in place. Rays are scanned in order; after a
/// removal the next test runs against the reduced basis. Returns the number
/// of removed rays.
///
/// A ray's cached residual stays a valid separating certificate for
/// nonnegative unit rays as long as no other ray has a clearly positive
/// inner product with it, so most rays skip the solve when only a few rays
/// changed since the last pass.
fn prune_in_place(rays: &mut RaySet, epsilon: f64, bpp: &BppConfig) -> Result<usize> {
    let q = rays.len();
    if q < 2 {
        return Ok(0);
    }
    let d = rays.dirs[0].len();
    let c = DMatrix::from_fn(d, q, |i, j| rays.dirs[j][i]);
    let gram = c.transpose() * &c;
    let mut alive = vec![true; q];
    let screen = ShareScreen::new(&c, &alive);
    let index: BTreeMap<u64, usize> = rays.ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let mut left = q;
    for k in 0..q {
        if left == 1 {
            break;
        }
        // removals only shrink the cone, so the screen stays valid
        if screen.bound(&rays.dirs[k], k) > epsilon {
            continue;
        }
        let mut warm = Vec::new();
        if let Some(cert) = &rays.certs[k] {
            if certified_distance(&c, &alive, k, &cert.residual) > epsilon {
                continue;
            }
            warm = cert.support.iter().filter_map(|id| index.get(id).copied()).collect();
        }
        alive[k] = false;
        let ctb: Vec<f64> = gram.column(k).iter().copied().collect();
        let u = &rays.dirs[k];
        let sol = solve_single_masked(&c, &gram, &ctb, u, Some(&alive), &warm, bpp)?;
        let mut r = u.clone();
        for (j, &w) in sol.x.iter().enumerate() {
            if w != 0.0 {
                for (ri, cij) in r.iter_mut().zip(c.column(j).iter()) {
                    *ri -= cij * w;
                }
            }
        }
        if norm2(&r) <= epsilon * norm2(u) {
            left -= 1;
        } else {
            alive[k] = true;
            let support = sol.partition.free.iter().map(|&j| rays.ids[j]).collect();
            rays.certs[k] = Some(Certificate { residual: r, support });
        }
    }
    rays.retain(&alive);
    Ok(q - left)
}

/// Lower bound on the distance from column `k` to the cone of the other
/// live columns, from a cached residual `r`. Any point of that cone within
/// distance 1 of the unit column `k` has 1-norm at most `2√d`, which bounds
/// how much slightly positive inner products with `r` can help it.
fn certified_distance(c: &DMatrix<f64>, alive: &[bool], k: usize, r: &[f64]) -> f64 {
    let nr = norm2(r);
    if nr == 0.0 {
        return 0.0;
    }
    let mut slack = 0.0f64;
    for j in 0..c.ncols() {
        if j != k && alive[j] {
            slack = slack.max(c.column(j).iter().zip(r).map(|(a, b)| a * b).sum());
        }
    }
    let uk: f64 = c.column(k).iter().zip(r).map(|(a, b)| a * b).sum();
    let bound = 2.0 * libm::sqrt(c.nrows() as f64);
    (uk - bound * slack) / nr
}

/// Cheap separating hyperplanes for nonnegative columns. For coordinate `i`
/// let `s_j(i) = c_ij / ‖c_j‖₁`. If column `k` has a larger share than every
/// other member, `w = e_i − β·1` with `β` the best other share has
/// `c_j·w ≤ 0` for those members and `c_k·w > 0`, so `c_k·w / ‖w‖` bounds
/// its distance to their cone from below.
struct ShareScreen {
    /// Per coordinate: best and second-best member share, with the owner of
    /// the best.
    top: Vec<(f64, usize, f64)>,
}

impl ShareScreen {
    fn new(c: &DMatrix<f64>, members: &[bool]) -> Self {
        let mut top = vec![(0.0, usize::MAX, 0.0); c.nrows()];
        for (j, col) in c.column_iter().enumerate() {
            if !members[j] {
                continue;
            }
            let l1: f64 = col.iter().sum();
            if l1 <= 0.0 {
                continue;
            }
            for (t, v) in top.iter_mut().zip(col.iter()) {
                let share = v / l1;
                if share > t.0 {
                    *t = (share, j, t.0);
                } else if share > t.2 {
                    t.2 = share;
                }
            }
        }
        ShareScreen { top }
    }

    /// Lower bound on the distance from `u` (column `k`, if it is a member)
    /// to the cone of the other members; `0` when no coordinate separates.
    fn bound(&self, u: &[f64], k: usize) -> f64 {
        let l1: f64 = u.iter().sum();
        let d = u.len() as f64;
        let mut best = 0.0f64;
        for (&(s1, owner, s2), &ui) in self.top.iter().zip(u) {
            let beta = if owner == k { s2 } else { s1 };
            let gap = ui - beta * l1;
            if gap > 0.0 {
                let nw = libm::sqrt((1.0 - beta) * (1.0 - beta) + (d - 1.0) * beta * beta);
                best = best.max(gap / nw);
            }
        }
        best
    }
}

/// Removes every ray that lies within `epsilon` of the cone of the others.
pub fn prune_redundant(basis: &RayBasis, epsilon: f64, bpp: &BppConfig) -> Result<RayBasis> {
    let mut rays = RaySet::new(basis.rays.iter().map(|r| r.to_vec()).collect());
    prune_in_place(&mut rays, epsilon, bpp)?;
    RayBasis::new(basis.dim, rays.dirs.into_iter().map(UnitVector::from_unit_unchecked).collect())
}

/// Outcome of a single outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    Converged,
}

/// Step-wise driver for Cone Collapse. [`collapse`] runs it to completion;
/// tests use it to inspect the basis between iterations.
#[derive(Debug, Clone)]
pub struct Collapser {
    cfg: CollapseConfig,
    points: DMatrix<f64>,
    units: DMatrix<f64>,
    mu_hat: UnitVector,
    rays: RaySet,
    trace: CollapseTrace,
    converged: bool,
}

impl Collapser {
    /// Validates the data and starts from the identity basis.
    pub fn new(points: &DenseMatrix, cfg: CollapseConfig) -> Result<Self> {
        cfg.validate()?;
        check_clean(points)?;
        let d = points.rows();
        let mut units = points.as_dmatrix().clone();
        for mut col in units.column_iter_mut() {
            let n = norm2(col.as_slice());
            col /= n;
        }
        let mu_hat = mean_direction(points)?;
        let mut rays: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        let mut converged = false;
        if let Some(u) = c1_shortcut(points, cfg.delta_cos) {
            rays = vec![u.into_vec()];
            converged = true;
        }
        Ok(Collapser {
            cfg,
            points: points.as_dmatrix().clone(),
            units,
            mu_hat,
            rays: RaySet::new(rays),
            trace: CollapseTrace::default(),
            converged,
        })
    }

    pub fn mean_direction(&self) -> &UnitVector {
        &self.mu_hat
    }

    pub fn rays(&self) -> &[Vec<f64>] {
        &self.rays.dirs
    }

    pub fn trace(&self) -> &CollapseTrace {
        &self.trace
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    fn ray_is_frozen(&self, u: &[f64]) -> bool {
        let thr = 1.0 - self.cfg.delta_cos;
        self.units.column_iter().any(|x| dot(u, x.as_slice()) >= thr)
    }

    fn colinear_ray(&self, unit_point: &[f64]) -> Option<usize> {
        let thr = 1.0 - self.cfg.delta_cos;
        self.rays.dirs.iter().position(|r| dot(r, unit_point) >= thr)
    }

    /// Relative residual of every data point against the current rays.
    /// Points within `epsilon` of a colinear ray are scored by that distance;
    /// the rest go through one multi right-hand-side NNLS solve.
    pub fn relative_residuals(&self) -> Result<Vec<f64>> {
        let n = self.points.ncols();
        let d = self.points.nrows();
        let mut out = vec![0.0; n];
        let mut pending = Vec::new();
        for j in 0..n {
            let x = self.units.column(j);
            let direct = self.colinear_ray(x.as_slice()).map(|k| {
                let u = &self.rays.dirs[k];
                let s = dot(u, x.as_slice());
                let r: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - s * b).collect();
                norm2(&r)
            });
            match direct {
                Some(res) if res <= self.cfg.epsilon => out[j] = res,
                _ => pending.push(j),
            }
        }
        if pending.is_empty() {
            return Ok(out);
        }
        let u = DMatrix::from_fn(d, self.rays.len(), |i, j| self.rays.dirs[j][i]);
        let b = self.units.select_columns(&pending);
        let h = solve_multi(&u, &b, &self.cfg.bpp, None)?.x;
        let fit = &u * &h;
        let rays: Vec<&[f64]> = self.rays.dirs.iter().map(|r| r.as_slice()).collect();
        for (k, &j) in pending.iter().enumerate() {
            let r: Vec<f64> = (0..d).map(|i| b[(i, k)] - fit[(i, k)]).collect();
            out[j] = norm2(&r);
            if out[j] > self.cfg.epsilon {
                // a stalled batch solve only overestimates; confirm alone
                let alone = cone_distance(&rays, b.column(k).as_slice(), &self.cfg.bpp)?;
                out[j] = out[j].min(alone);
            }
        }
        Ok(out)
    }

    /// Drops rays within `epsilon` of the cone of the frozen rays (other
    /// than themselves). Sound: the full leave-one-out test would also
    /// remove them.
    fn sweep(&mut self) -> Result<usize> {
        let frozen: Vec<usize> = (0..self.rays.len()).filter(|&k| self.ray_is_frozen(&self.rays.dirs[k])).collect();
        if frozen.is_empty() {
            return Ok(0);
        }
        let d = self.points.nrows();
        let f = DMatrix::from_fn(d, frozen.len(), |i, j| self.rays.dirs[frozen[j]][i]);
        let gram = f.transpose() * &f;
        let mut alive = vec![true; frozen.len()];
        let screen = ShareScreen::new(&f, &alive);
        let mut remove = vec![false; self.rays.len()];
        let mut left = self.rays.len();
        for k in 0..self.rays.len() {
            if left == 1 {
                break;
            }
            let slot = frozen.iter().position(|&i| i == k);
            let u = &self.rays.dirs[k];
            if screen.bound(u, slot.unwrap_or(usize::MAX)) > self.cfg.epsilon {
                continue;
            }
            if let Some(s) = slot {
                alive[s] = false;
            }
            if !alive.iter().any(|&a| a) {
                if let Some(s) = slot {
                    alive[s] = true;
                }
                continue;
            }
            let ctb: Vec<f64> = f.column_iter().map(|col| dot(col.as_slice(), u)).collect();
            let sol = solve_single_masked(&f, &gram, &ctb, u, Some(&alive), &[], &self.cfg.bpp)?;
            let mut r = u.clone();
            for (j, &w) in sol.x.iter().enumerate() {
                if w != 0.0 {
                    for (ri, fij) in r.iter_mut().zip(f.column(j).iter()) {
                        *ri -= fij * w;
                    }
                }
            }
            if norm2(&r) <= self.cfg.epsilon * norm2(u) {
                remove[k] = true;
                left -= 1;
            } else if let Some(s) = slot {
                alive[s] = true;
            }
        }
        let removed = self.rays.len() - left;
        let keep: Vec<bool> = remove.iter().map(|r| !r).collect();
        self.rays.retain(&keep);
        Ok(removed)
    }

    /// Replaces every group of rays frozen by the same data point with
    /// that point. Such rays can sit up to `delta_cos` apart, too far for
    /// the residual test to see them as duplicates. Returns the number of
    /// rays removed.
    fn merge_shared_freezes(&mut self) -> usize {
        let thr = 1.0 - self.cfg.delta_cos;
        let owner: Vec<Option<usize>> = self
            .rays
            .dirs
            .iter()
            .map(|u| {
                self.units
                    .column_iter()
                    .enumerate()
                    .map(|(i, x)| (dot(u, x.as_slice()), i))
                    .filter(|(c, _)| *c >= thr)
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, i)| i)
            })
            .collect();
        let mut keep = vec![true; owner.len()];
        let mut merged = 0;
        for k in 0..owner.len() {
            let Some(i) = owner[k] else { continue };
            if !keep[k] {
                continue;
            }
            let group: Vec<usize> = (k + 1..owner.len()).filter(|&j| owner[j] == Some(i)).collect();
            if group.is_empty() {
                continue;
            }
            for &j in &group {
                keep[j] = false;
            }
            merged += group.len();
            let x = self.units.column(i).as_slice().to_vec();
            self.rays.replace(k, x);
        }
        if merged > 0 {
            self.rays.retain(&keep);
        }
        merged
    }

    /// Appends outside points until every point is within `epsilon`.
    /// Returns (added, pruned, final max residual).
    fn absorb_outside_points(&mut self) -> Result<(usize, usize, f64)> {
        let n = self.points.ncols();
        let (mut added, mut pruned) = (0, 0);
        for pass in 0..=n {
            let residuals = self.relative_residuals()?;
            let mut pass_added = 0;
            for (i, &res) in residuals.iter().enumerate() {
                if res <= self.cfg.epsilon {
                    continue;
                }
                let x = self.units.column(i).as_slice().to_vec();
                // later passes only add: a snap or removals within epsilon
                // can push another point back out, which could cycle
                if pass == 0 {
                    if let Some(k) = self.colinear_ray(&x) {
                        // snap a nearly colinear ray onto the point
                        self.rays.replace(k, x);
                        pass_added += 1;
                        continue;
                    }
                }
                self.rays.push(x);
                pass_added += 1;
                if pass == 0 {
                    pruned += prune_in_place(&mut self.rays, self.cfg.epsilon, &self.cfg.bpp)?;
                }
            }
            added += pass_added;
            if pass_added == 0 {
                let worst = residuals.iter().copied().fold(0.0, f64::max);
                return Ok((added, pruned, worst));
            }
        }
        let worst = self.relative_residuals()?.into_iter().fold(0.0, f64::max);
        Ok((added, pruned, worst))
    }

    /// Runs one outer iteration.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.converged {
            return Ok(StepOutcome::Converged);
        }
        let iteration = self.trace.records.len();
        if iteration >= self.cfg.max_outer_iter {
            return Err(Error::MaxIterationsExceeded { iterations: self.cfg.max_outer_iter, column: None });
        }

        let mut frozen = 0;
        let mut min_free_cosine: Option<f64> = None;
        for k in 0..self.rays.len() {
            if self.ray_is_frozen(&self.rays.dirs[k]) {
                frozen += 1;
                continue;
            }
            let tilted = mean_tilt(&self.rays.dirs[k], &self.mu_hat, self.cfg.eta)?.into_vec();
            let c = dot(&tilted, &self.mu_hat);
            min_free_cosine = Some(min_free_cosine.map_or(c, |m: f64| m.min(c)));
            self.rays.replace(k, tilted);
        }

        let mut pruned = 0;
        if self.cfg.sweep_prune {
            pruned += self.sweep()?;
        }
        let (mut added, p, mut worst) = self.absorb_outside_points()?;
        pruned += p;

        let mut done = self.rays.dirs.iter().all(|r| self.ray_is_frozen(r));
        if done && self.cfg.final_prune {
            let p = self.merge_shared_freezes() + prune_in_place(&mut self.rays, self.cfg.epsilon, &self.cfg.bpp)?;
            if p > 0 {
                pruned += p;
                let (a, p2, w) = self.absorb_outside_points()?;
                added += a;
                pruned += p2;
                worst = w;
                done = w <= self.cfg.epsilon && self.rays.dirs.iter().all(|r| self.ray_is_frozen(r));
            }
        }

        self.trace.records.push(IterationRecord {
            iteration,
            rays: self.rays.len(),
            frozen,
            points_added: added,
            rays_pruned: pruned,
            min_free_cosine,
            max_relative_residual: worst,
        });
        self.converged = done;
        Ok(if done { StepOutcome::Converged } else { StepOutcome::Continue })
    }

    pub fn basis(&self) -> RayBasis {
        RayBasis {
            dim: self.points.nrows(),
            rays: self.rays.dirs.iter().cloned().map(UnitVector::from_unit_unchecked).collect(),
        }
    }

    pub fn into_parts(self) -> (RayBasis, CollapseTrace) {
        let basis = self.basis();
        (basis, self.trace)
    }
}

/// Recovers the extreme rays of the cone generated by the columns of `points`.
pub fn collapse(points: &DenseMatrix, cfg: &CollapseConfig) -> Result<(RayBasis, CollapseTrace)> {
    let mut state = Collapser::new(points, *cfg)?;
    while state.step()? == StepOutcome::Continue {}
    Ok(state.into_parts())
}
