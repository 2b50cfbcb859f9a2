//! Nonnegative least squares by block principal pivoting.
//!
//! Both solvers keep a free set `F` and an active set `G`, solve the
//! unconstrained least-squares problem on `F`, and exchange infeasible
//! indices between the sets until the KKT conditions
//!
//! ```text
//! y = Cᵀ(Cx − b),  x ≥ 0,  y ≥ 0,  xᵢ yᵢ = 0
//! ```
//!
//! hold. Full block exchanges are attempted first; when the number of
//! infeasible indices stops shrinking for `backup_budget` consecutive rounds
//! the solver falls back to exchanging only the largest infeasible index,
//! which guarantees finite termination.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{norm2, DenseMatrix};

/// Largest problem accepted by [`oracle_nnls`].
pub const ORACLE_MAX_VARIABLES: usize = 14;

/// Cholesky solves are trusted up to this (estimated) condition number of
/// `G_FF`; above it the free-set problem is re-solved on `C_F` directly.
const GRAM_CONDITION_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BppConfig {
    /// An entry counts as infeasible when it is below `-feasibility_tol`.
    pub feasibility_tol: f64,
    /// Iteration cap; `None` means `5q + 100` for `q` unknowns.
    pub max_iter: Option<usize>,
    /// Number of non-improving full exchanges tolerated before the
    /// single-index backup rule kicks in.
    pub backup_budget: usize,
    /// Finish with a Lawson–Hanson active-set solve when pivoting hits the
    /// iteration cap. Pivoting can cycle when `C` lacks full column rank.
    pub active_set_fallback: bool,
}

impl Default for BppConfig {
    fn default() -> Self {
        BppConfig { feasibility_tol: 1e-12, max_iter: None, backup_budget: 3, active_set_fallback: true }
    }
}

impl BppConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.feasibility_tol > 0.0) {
            return Err(Error::InvalidConfig("feasibility_tol must be positive"));
        }
        if self.backup_budget < 1 {
            return Err(Error::InvalidConfig("backup_budget must be at least 1"));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, q: usize) -> usize {
        self.max_iter.unwrap_or(5 * q + 100)
    }
}

/// Disjoint free / active index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPartition {
    pub free: Vec<usize>,
    pub active: Vec<usize>,
}

impl IndexPartition {
    fn from_mask(mask: &[bool]) -> Self {
        let mut free = Vec::new();
        let mut active = Vec::new();
        for (i, &f) in mask.iter().enumerate() {
            if f {
                free.push(i);
            } else {
                active.push(i);
            }
        }
        IndexPartition { free, active }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    /// Dual variables `Cᵀ(Cx − b)`; zero on the free set.
    pub y: Vec<f64>,
    pub partition: IndexPartition,
    pub iterations: usize,
    /// `‖Cx − b‖₂²`
    pub objective: f64,
}

/// Result of a multi right-hand-side solve with the final free sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSolution {
    pub x: DMatrix<f64>,
    pub free_sets: Vec<Vec<usize>>,
    pub iterations: usize,
}

/// Exchange bookkeeping shared by the single and multi solvers.
#[derive(Debug, Clone)]
struct ExchangeRule {
    budget: usize,
    p: usize,
    t: usize,
}

impl ExchangeRule {
    fn new(q: usize, budget: usize) -> Self {
        ExchangeRule { budget, p: budget, t: q + 1 }
    }

    /// Applies one exchange to `free` given the infeasible sets. Returns
    /// `false` when nothing is infeasible.
    fn apply(&mut self, free: &mut [bool], h1: &[usize], h2: &[usize]) -> bool {
        let count = h1.len() + h2.len();
        if count == 0 {
            return false;
        }
        if count < self.t {
            self.t = count;
            self.p = self.budget;
            flip_all(free, h1, h2);
        } else if self.p >= 1 {
            self.p -= 1;
            flip_all(free, h1, h2);
        } else {
            let last = h1.iter().chain(h2).copied().max().unwrap_or(0);
            free[last] = !free[last];
        }
        true
    }
}

fn flip_all(free: &mut [bool], h1: &[usize], h2: &[usize]) {
    for &i in h1 {
        free[i] = false;
    }
    for &i in h2 {
        free[i] = true;
    }
}

/// Indices with `allowed[i] == false` never enter the free set.
fn infeasible(free: &[bool], x: &[f64], y: &[f64], tol: f64, allowed: Option<&[bool]>) -> (Vec<usize>, Vec<usize>) {
    let mut h1 = Vec::new();
    let mut h2 = Vec::new();
    for i in 0..free.len() {
        if free[i] {
            if x[i] < -tol {
                h1.push(i);
            }
        } else if y[i] < -tol && allowed.is_none_or(|a| a[i]) {
            h2.push(i);
        }
    }
    (h1, h2)
}

fn free_indices(free: &[bool]) -> Vec<usize> {
    free.iter().enumerate().filter_map(|(i, &f)| f.then_some(i)).collect()
}

/// Solves `G_FF X = rhs` through Cholesky. If `G_FF` is not numerically
/// positive definite (or is too ill-conditioned for the normal equations to
/// resolve small residuals) the minimum-norm least-squares solution of
/// `C_F X = B` is returned instead.
fn solve_free_block(
    gram: &DMatrix<f64>,
    c: &DMatrix<f64>,
    free: &[usize],
    rhs: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Option<DMatrix<f64>> {
    let gff = gram.select_rows(free).select_columns(free);
    if let Some(chol) = Cholesky::new(gff) {
        let l = chol.l_dirty();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..free.len() {
            let d = l[(i, i)].abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if lo > 0.0 && (hi / lo) * (hi / lo) <= GRAM_CONDITION_LIMIT {
            let sol = chol.solve(rhs);
            if sol.iter().all(|v| v.is_finite()) {
                return Some(sol);
            }
        }
    }
    min_norm_lstsq(&c.select_columns(free), b)
}

/// Minimum-norm least-squares solution through the SVD.
pub(crate) fn min_norm_lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (m, n) = a.shape();
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |acc, &s| acc.max(s));
    let eps = (m.max(n) as f64) * f64::EPSILON * smax;
    let sol = svd.solve(b, eps).ok()?;
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}

fn check_shapes(c: &DMatrix<f64>, b_rows: usize) -> Result<()> {
    if c.nrows() == 0 || c.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if b_rows != c.nrows() {
        return Err(Error::DimensionMismatch { expected: (c.nrows(), 1), found: (b_rows, 1) });
    }
    Ok(())
}

/// Solves `min ‖Cx − b‖₂² s.t. x ≥ 0` for one right-hand side.
pub fn nnls_single(c: &DenseMatrix, b: &[f64], cfg: &BppConfig) -> Result<NnlsSolution> {
    solve_single(c.as_dmatrix(), b, cfg)
}

pub(crate) fn solve_single(c: &DMatrix<f64>, b: &[f64], cfg: &BppConfig) -> Result<NnlsSolution> {
    check_shapes(c, b.len())?;
    let gram = c.transpose() * c;
    let ctb: Vec<f64> = (0..c.ncols()).map(|j| dot_col(c, j, b)).collect();
    solve_single_masked(c, &gram, &ctb, b, None, &[], cfg)
}

/// Single right-hand side with `CᵀC` and `Cᵀb` supplied by the caller.
/// Columns with `allowed[i] == false` are held at zero, which lets callers
/// solve leave-one-out problems without copying `C`. A nonempty
/// `initial_free` warm-starts the pivoting from that free set.
pub(crate) fn solve_single_masked(
    c: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    ctb: &[f64],
    b: &[f64],
    allowed: Option<&[bool]>,
    initial_free: &[usize],
    cfg: &BppConfig,
) -> Result<NnlsSolution> {
    cfg.validate()?;
    check_shapes(c, b.len())?;
    let q = c.ncols();
    let bmat = DMatrix::from_column_slice(b.len(), 1, b);
    let ctb = DMatrix::from_column_slice(q, 1, ctb);

    let mut free = vec![false; q];
    let mut x = vec![0.0; q];
    let mut y: Vec<f64> = ctb.iter().map(|v| -v).collect();
    let mut rule = ExchangeRule::new(q, cfg.backup_budget);
    let cap = cfg.iteration_cap(q);
    let mut iterations = 0;

    let refresh = |free: &[bool], x: &mut Vec<f64>, y: &mut Vec<f64>| -> Result<()> {
        let idx = free_indices(free);
        x.iter_mut().for_each(|v| *v = 0.0);
        if !idx.is_empty() {
            let rhs = ctb.select_rows(&idx);
            let sol = solve_free_block(gram, c, &idx, &rhs, &bmat).ok_or(Error::SingularSubproblem { column: None })?;
            for (k, &i) in idx.iter().enumerate() {
                x[i] = sol[(k, 0)];
            }
        }
        // y_G = C_Gᵀ(C_F x_F − b), y_F = 0
        let r = residual(c, x, b);
        for i in 0..q {
            y[i] = if free[i] { 0.0 } else { dot_col(c, i, &r) };
        }
        Ok(())
    };

    let mut warm = false;
    for &i in initial_free {
        if i < q && allowed.is_none_or(|a| a[i]) {
            free[i] = true;
            warm = true;
        }
    }
    if warm {
        refresh(&free, &mut x, &mut y)?;
    }

    loop {
        let (h1, h2) = infeasible(&free, &x, &y, cfg.feasibility_tol, allowed);
        if !rule.apply(&mut free, &h1, &h2) {
            break;
        }
        iterations += 1;
        if iterations > cap {
            if !cfg.active_set_fallback {
                return Err(Error::MaxIterationsExceeded { iterations: cap, column: None });
            }
            let (xs, fs, extra) =
                lawson_hanson(c, b, cfg.feasibility_tol, allowed).map_err(|e| with_column(e, None))?;
            x = xs;
            free = fs;
            iterations += extra;
            let r = residual(c, &x, b);
            for i in 0..q {
                y[i] = if free[i] { 0.0 } else { dot_col(c, i, &r) };
            }
            break;
        }
        refresh(&free, &mut x, &mut y)?;
    }

    let r = residual(c, &x, b);
    let objective = r.iter().map(|v| v * v).sum();
    Ok(NnlsSolution { x, y, partition: IndexPartition::from_mask(&free), iterations, objective })
}

fn with_column(e: Error, column: Option<usize>) -> Error {
    match e {
        Error::MaxIterationsExceeded { iterations, .. } => Error::MaxIterationsExceeded { iterations, column },
        Error::SingularSubproblem { .. } => Error::SingularSubproblem { column },
        other => other,
    }
}

/// Lawson–Hanson active-set NNLS. Slower than pivoting but terminates for
/// any `C`: a column enters the passive set only when it is not in the span
/// of the current passive columns, so `C_P` keeps full column rank.
/// Returns the solution, the passive mask, and the number of outer steps.
fn lawson_hanson(
    c: &DMatrix<f64>,
    b: &[f64],
    tol: f64,
    allowed: Option<&[bool]>,
) -> Result<(Vec<f64>, Vec<bool>, usize)> {
    let q = c.ncols();
    let bmat = DMatrix::from_column_slice(b.len(), 1, b);
    let mut x = vec![0.0; q];
    let mut passive = vec![false; q];
    let mut blocked = vec![false; q];
    let cap = 3 * q + 100;
    let mut steps = 0;
    loop {
        let r = residual(c, &x, b);
        // w = Cᵀ(b − Cx)
        let mut best: Option<(usize, f64)> = None;
        for i in 0..q {
            if passive[i] || blocked[i] || allowed.is_some_and(|a| !a[i]) {
                continue;
            }
            let w = -dot_col(c, i, &r);
            if w > tol && best.is_none_or(|(_, bw)| w > bw) {
                best = Some((i, w));
            }
        }
        let Some((t, _)) = best else { break };
        steps += 1;
        if steps > cap {
            return Err(Error::MaxIterationsExceeded { iterations: cap, column: None });
        }
        passive[t] = true;
        let mut entered = true;
        loop {
            let idx = free_indices(&passive);
            let z = min_norm_lstsq(&c.select_columns(&idx), &bmat).ok_or(Error::SingularSubproblem { column: None })?;
            if entered {
                // the new column must come in strictly positive
                let pos = idx.iter().position(|&i| i == t).unwrap_or(0);
                if z[(pos, 0)] <= 0.0 {
                    passive[t] = false;
                    blocked[t] = true;
                    break;
                }
                entered = false;
            }
            if z.iter().all(|&v| v > 0.0) {
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z[(k, 0)];
                }
                blocked.iter_mut().for_each(|v| *v = false);
                break;
            }
            let mut alpha = f64::INFINITY;
            let mut hit = idx[0];
            for (k, &i) in idx.iter().enumerate() {
                if z[(k, 0)] <= 0.0 {
                    let a = x[i] / (x[i] - z[(k, 0)]);
                    if a < alpha {
                        alpha = a;
                        hit = i;
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z[(k, 0)] - x[i]);
                if i == hit || x[i] <= 0.0 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if passive.iter().all(|p| !p) {
                break;
            }
        }
    }
    Ok((x, passive, steps))
}

fn residual(c: &DMatrix<f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = b.iter().map(|v| -v).collect();
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (ri, cij) in r.iter_mut().zip(c.column(j).iter()) {
                *ri += cij * xj;
            }
        }
    }
    r
}

fn dot_col(c: &DMatrix<f64>, j: usize, v: &[f64]) -> f64 {
    c.column(j).iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Solves `min ‖CX − B‖_F² s.t. X ≥ 0`, one column of `B` at a time but
/// sharing `CᵀC`, `CᵀB`, and one factorization per group of columns with a
/// common free set. Returns the `q × r` solution.
pub fn nnls_multi(c: &DenseMatrix, b: &DenseMatrix, cfg: &BppConfig) -> Result<DenseMatrix> {
    let sol = solve_multi(c.as_dmatrix(), b.as_dmatrix(), cfg, None)?;
    DenseMatrix::new(sol.x)
}

/// As [`nnls_multi`], starting each column from the supplied free set
/// instead of the empty set. The optimum does not depend on the start.
pub fn nnls_multi_warm(
    c: &DenseMatrix,
    b: &DenseMatrix,
    cfg: &BppConfig,
    initial_free: &[Vec<usize>],
) -> Result<MultiSolution> {
    solve_multi(c.as_dmatrix(), b.as_dmatrix(), cfg, Some(initial_free))
}

pub(crate) fn solve_multi(
    c: &DMatrix<f64>,
    b: &DMatrix<f64>,
    cfg: &BppConfig,
    initial_free: Option<&[Vec<usize>]>,
) -> Result<MultiSolution> {
    cfg.validate()?;
    check_shapes(c, b.nrows())?;
    let q = c.ncols();
    let ncols = b.ncols();
    if let Some(init) = initial_free {
        if init.len() != ncols || init.iter().flatten().any(|&i| i >= q) {
            return Err(Error::DimensionMismatch { expected: (q, ncols), found: (init.len(), ncols) });
        }
    }
    let gram = c.transpose() * c;
    let ctb = c.transpose() * b;
    let cap = cfg.iteration_cap(q);

    let mut x = DMatrix::<f64>::zeros(q, ncols);
    let mut y = -ctb.clone();
    let mut free = vec![vec![false; q]; ncols];
    let mut rules = vec![ExchangeRule::new(q, cfg.backup_budget); ncols];
    let mut done = vec![false; ncols];
    let mut iters = vec![0usize; ncols];

    let mut pending: Vec<usize> = Vec::new();
    if let Some(init) = initial_free {
        for (j, set) in init.iter().enumerate() {
            for &i in set {
                free[j][i] = true;
            }
            if !set.is_empty() {
                pending.push(j);
            }
        }
        solve_groups(&gram, c, b, &ctb, &free, &pending, &mut x, &mut y)?;
    }

    loop {
        pending.clear();
        for j in 0..ncols {
            if done[j] {
                continue;
            }
            let xj: Vec<f64> = x.column(j).iter().copied().collect();
            let yj: Vec<f64> = y.column(j).iter().copied().collect();
            let (h1, h2) = infeasible(&free[j], &xj, &yj, cfg.feasibility_tol, None);
            if rules[j].apply(&mut free[j], &h1, &h2) {
                iters[j] += 1;
                if iters[j] > cap {
                    if !cfg.active_set_fallback {
                        return Err(Error::MaxIterationsExceeded { iterations: cap, column: Some(j) });
                    }
                    let bj: Vec<f64> = b.column(j).iter().copied().collect();
                    let (xs, fs, extra) =
                        lawson_hanson(c, &bj, cfg.feasibility_tol, None).map_err(|e| with_column(e, Some(j)))?;
                    x.column_mut(j).copy_from_slice(&xs);
                    free[j] = fs;
                    iters[j] += extra;
                    done[j] = true;
                    continue;
                }
                pending.push(j);
            } else {
                done[j] = true;
            }
        }
        if pending.is_empty() {
            break;
        }
        solve_groups(&gram, c, b, &ctb, &free, &pending, &mut x, &mut y)?;
    }

    Ok(MultiSolution {
        x,
        free_sets: free.iter().map(|f| free_indices(f)).collect(),
        iterations: iters.iter().copied().max().unwrap_or(0),
    })
}

/// Re-solves every pending column, grouped by identical free sets.
#[allow(clippy::too_many_arguments)]
fn solve_groups(
    gram: &DMatrix<f64>,
    c: &DMatrix<f64>,
    b: &DMatrix<f64>,
    ctb: &DMatrix<f64>,
    free: &[Vec<bool>],
    pending: &[usize],
    x: &mut DMatrix<f64>,
    y: &mut DMatrix<f64>,
) -> Result<()> {
    let q = c.ncols();
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for &j in pending {
        groups.entry(free_indices(&free[j])).or_default().push(j);
    }
    for (fset, cols) in groups {
        let active: Vec<usize> = (0..q).filter(|i| !free[cols[0]][*i]).collect();
        for &j in &cols {
            x.column_mut(j).fill(0.0);
            y.column_mut(j).fill(0.0);
        }
        if fset.is_empty() {
            for &j in &cols {
                for &i in &active {
                    y[(i, j)] = -ctb[(i, j)];
                }
            }
            continue;
        }
        let rhs = ctb.select_rows(&fset).select_columns(&cols);
        let bj = b.select_columns(&cols);
        let sol =
            solve_free_block(gram, c, &fset, &rhs, &bj).ok_or(Error::SingularSubproblem { column: Some(cols[0]) })?;
        // Y_G = G_GF X_F − H_G
        let g_gf = gram.select_rows(&active).select_columns(&fset);
        let yg = &g_gf * &sol;
        for (k, &j) in cols.iter().enumerate() {
            for (a, &i) in fset.iter().enumerate() {
                x[(i, j)] = sol[(a, k)];
            }
            for (a, &i) in active.iter().enumerate() {
                y[(i, j)] = yg[(a, k)] - ctb[(i, j)];
            }
        }
    }
    Ok(())
}

/// `max(‖min(x,0)‖∞, ‖min(y,0)‖∞, maxᵢ |xᵢyᵢ|)` with `y = Cᵀ(Cx − b)`.
pub fn kkt_violation(c: &DenseMatrix, b: &[f64], x: &[f64]) -> Result<f64> {
    check_shapes(c, b.len())?;
    if x.len() != c.ncols() {
        return Err(Error::DimensionMismatch { expected: (c.ncols(), 1), found: (x.len(), 1) });
    }
    let r = residual(c, x, b);
    let mut worst = 0.0f64;
    for (i, &xi) in x.iter().enumerate() {
        let yi = dot_col(c, i, &r);
        worst = worst.max((-xi).max(0.0)).max((-yi).max(0.0)).max((xi * yi).abs());
    }
    Ok(worst)
}

/// Exhaustive NNLS: tries every free set, solves the equality-constrained
/// least-squares problem on it, keeps the feasible candidate with the
/// smallest objective. Exponential in `q`; intended as a test oracle.
pub fn oracle_nnls(c: &DenseMatrix, b: &[f64]) -> Result<NnlsSolution> {
    let c = c.as_dmatrix();
    check_shapes(c, b.len())?;
    let q = c.ncols();
    if q > ORACLE_MAX_VARIABLES {
        return Err(Error::ProblemTooLarge { variables: q, limit: ORACLE_MAX_VARIABLES });
    }
    let bvec = DVector::from_column_slice(b);
    let bmat = DMatrix::from_column_slice(b.len(), 1, b);
    let scale = 1.0 + norm2(b) * c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let x_tol = 1e-10 * scale;
    let y_tol = 1e-9 * scale;

    // (objective, x, mask, dual feasible)
    let mut best: Option<(f64, Vec<f64>, Vec<bool>, bool)> = None;
    for bits in 0u32..(1u32 << q) {
        let mask: Vec<bool> = (0..q).map(|i| bits & (1 << i) != 0).collect();
        let fset = free_indices(&mask);
        let mut x = vec![0.0; q];
        if !fset.is_empty() {
            let Some(sol) = min_norm_lstsq(&c.select_columns(&fset), &bmat) else {
                continue;
            };
            for (k, &i) in fset.iter().enumerate() {
                x[i] = sol[(k, 0)];
            }
        }
        if x.iter().any(|&v| v < -x_tol) {
            continue;
        }
        x.iter_mut().for_each(|v| *v = v.max(0.0));
        let r = c * DVector::from_column_slice(&x) - &bvec;
        let obj = r.norm_squared();
        let dual_ok = (0..q).filter(|&i| !mask[i]).all(|i| c.column(i).dot(&r) >= -y_tol);
        let better = match &best {
            None => true,
            Some((bo, _, _, bd)) => (dual_ok && !bd) || (dual_ok == *bd && obj < *bo),
        };
        if better {
            best = Some((obj, x, mask, dual_ok));
        }
    }
    let (objective, x, mask, _) = best.ok_or(Error::SingularSubproblem { column: None })?;
    let r = residual(c, &x, b);
    let y = (0..q).map(|i| dot_col(c, i, &r)).collect();
    Ok(NnlsSolution { x, y, partition: IndexPartition::from_mask(&mask), iterations: 1 << q, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(rows: usize, cols: usize, row_major: &[f64]) -> DenseMatrix {
        DenseMatrix::from_row_major(rows, cols, row_major).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn identity_feasible() {
        let s = nnls_single(&dm(2, 2, &[1.0, 0.0, 0.0, 1.0]), &[1.0, 2.0], &BppConfig::default()).unwrap();
        assert!(close(&s.x, &[1.0, 2.0], 1e-14));
        assert_eq!(s.partition.free, vec![0, 1]);
    }

    #[test]
    fn identity_all_active() {
        let s = nnls_single(&dm(2, 2, &[1.0, 0.0, 0.0, 1.0]), &[-1.0, -2.0], &BppConfig::default()).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert!(close(&s.y, &[1.0, 2.0], 1e-14));
        assert!(s.partition.free.is_empty());
    }

    #[test]
    fn consistent_overdetermined() {
        let c = dm(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let s = nnls_single(&c, &[1.0, 1.0, 2.0], &BppConfig::default()).unwrap();
        assert!(close(&s.x, &[1.0, 1.0], 1e-12));
        assert!(s.objective < 1e-24);
    }

    #[test]
    fn multi_identity() {
        let c = dm(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let x = nnls_multi(&c, &c, &BppConfig::default()).unwrap();
        assert_eq!(x.as_dmatrix(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn multi_warm_start_agrees() {
        let c = dm(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = dm(3, 2, &[1.0, -1.0, 1.0, 2.0, 2.0, 0.5]);
        let cold = nnls_multi(&c, &b, &BppConfig::default()).unwrap();
        let warm = nnls_multi_warm(&c, &b, &BppConfig::default(), &[vec![0, 1], vec![1]]).unwrap();
        assert!((cold.as_dmatrix() - &warm.x).amax() < 1e-12);
    }

    #[test]
    fn kkt_examples() {
        let c = dm(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(kkt_violation(&c, &[1.0, -1.0], &[1.0, 0.0]).unwrap(), 0.0);
        // x = 0 with Cᵀb positive leaves y = -Cᵀb negative.
        assert_eq!(kkt_violation(&c, &[1.0, 3.0], &[0.0, 0.0]).unwrap(), 3.0);
        assert!(matches!(kkt_violation(&c, &[1.0], &[0.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn oracle_examples() {
        let s = oracle_nnls(&dm(2, 2, &[1.0, 0.0, 0.0, 1.0]), &[-1.0, 2.0]).unwrap();
        assert!(close(&s.x, &[0.0, 2.0], 1e-14));
        let s = oracle_nnls(&dm(2, 1, &[1.0, 1.0]), &[1.0, 3.0]).unwrap();
        assert!(close(&s.x, &[2.0], 1e-14));
        let big = DenseMatrix::new(DMatrix::from_element(2, 15, 1.0)).unwrap();
        assert_eq!(oracle_nnls(&big, &[1.0, 1.0]).unwrap_err(), Error::ProblemTooLarge { variables: 15, limit: 14 });
    }

    #[test]
    fn iteration_cap_is_enforced() {
        let c = dm(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let cfg = BppConfig { max_iter: Some(0), active_set_fallback: false, ..BppConfig::default() };
        assert_eq!(
            nnls_single(&c, &[1.0, 1.0], &cfg).unwrap_err(),
            Error::MaxIterationsExceeded { iterations: 0, column: None }
        );
    }

    #[test]
    fn fallback_solves_after_cap() {
        let c = dm(3, 4, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        let b = [1.0, 2.0, -1.0];
        let cfg = BppConfig { max_iter: Some(0), ..BppConfig::default() };
        let sol = nnls_single(&c, &b, &cfg).unwrap();
        let exact = oracle_nnls(&c, &b).unwrap();
        assert!((sol.objective - exact.objective).abs() < 1e-12);
        assert!(kkt_violation(&c, &b, &sol.x).unwrap() < 1e-12);
        let bm = DenseMatrix::from_columns(&[b.to_vec(), vec![0.5, 0.5, 3.0]]).unwrap();
        let multi = nnls_multi(&c, &bm, &cfg).unwrap();
        for j in 0..2 {
            let bj = bm.col_slice(j);
            assert!(kkt_violation(&c, bj, &multi.column(j).iter().copied().collect::<Vec<_>>()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_falls_back() {
        // two identical columns: normal equations are singular
        let c = dm(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let s = nnls_single(&c, &[2.0, 2.0], &BppConfig::default()).unwrap();
        assert!(s.objective < 1e-20);
        assert!(s.x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn config_validation() {
        let c = dm(1, 1, &[1.0]);
        let cfg = BppConfig { backup_budget: 0, ..BppConfig::default() };
        assert!(matches!(nnls_single(&c, &[1.0], &cfg), Err(Error::InvalidConfig(_))));
    }
}
