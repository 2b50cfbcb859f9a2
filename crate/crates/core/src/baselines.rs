//! Reference NMF methods for purity comparisons: Lee–Seung multiplicative
//! updates, ANLS, ℓ1-sparse ANLS, and ONMF applied directly to `Xᵀ`.
//!
//! MU, ANLS and sparse NMF return `W` with unit columns (the row scales moved
//! into `H`), so the argmax cluster rule compares like with like.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{check_clean, DenseMatrix};
use crate::nnls::{solve_multi, BppConfig};
use crate::onmf::{expect_shape, onmf_fit, stalled, OnmfConfig};
use crate::pipeline::FactorPair;

/// Lower clamp for multiplicative-update denominators.
pub const DIV_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub rank_r: usize,
    pub max_iter: usize,
    pub tol_rel: f64,
    pub seed: u64,
    /// `λ` of the sparse H-step; ignored by the other methods.
    pub l1_weight: f64,
}

impl BaselineConfig {
    pub fn new(rank_r: usize) -> Self {
        BaselineConfig { rank_r, max_iter: 500, tol_rel: 1e-6, seed: 0, l1_weight: 0.1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank_r < 1 {
            return Err(Error::InvalidConfig("rank_r must be at least 1"));
        }
        if !(self.l1_weight >= 0.0) || !self.l1_weight.is_finite() {
            return Err(Error::InvalidConfig("l1_weight must be finite and nonnegative"));
        }
        if !(self.tol_rel >= 0.0) {
            return Err(Error::InvalidConfig("tol_rel must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineFit {
    pub factors: FactorPair,
    /// `‖X − WH‖_F²` at the start and after every iteration.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

fn check_input(x: &DenseMatrix, cfg: &BaselineConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.rank_r > x.rows().min(x.cols()) {
        return Err(Error::InvalidConfig("rank_r exceeds min(rows, cols) of X"));
    }
    check_clean(x)
}

/// Uniform `[0, 1)` starting factors.
fn random_start(m: usize, n: usize, r: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = DMatrix::from_fn(m, r, |_, _| rng.random_range(0.0..1.0));
    let h = DMatrix::from_fn(r, n, |_, _| rng.random_range(0.0..1.0));
    (w, h)
}

fn objective(x: &DMatrix<f64>, w: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    (x - w * h).norm_squared()
}

/// Moves the column norms of `w` into the rows of `h`. Zero columns stay.
fn balance(mut w: DMatrix<f64>, mut h: DMatrix<f64>) -> Result<FactorPair> {
    for k in 0..w.ncols() {
        let n = w.column(k).norm();
        if n > 0.0 {
            w.column_mut(k).unscale_mut(n);
            h.row_mut(k).scale_mut(n);
        }
    }
    FactorPair::new(DenseMatrix::new(w)?, DenseMatrix::new(h)?)
}

fn mu_step(a: &DMatrix<f64>, num: &DMatrix<f64>, den: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * num[(i, j)] / den[(i, j)].max(DIV_GUARD))
}

/// One Lee–Seung round: `W ← W ⊙ XHᵀ / WHHᵀ`, then `H ← H ⊙ WᵀX / WᵀWH`.
pub fn mu_update(x: &DMatrix<f64>, w: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let r = w.ncols();
    expect_shape(h, (r, x.ncols()))?;
    expect_shape(w, (x.nrows(), r))?;
    let ht = h.transpose();
    let w = mu_step(w, &(x * &ht), &(w * (h * &ht)));
    let h = mu_step(h, &w.tr_mul(x), &(w.tr_mul(&w) * h));
    Ok((w, h))
}

/// Multiplicative-update NMF from a seeded uniform start.
pub fn mu_nmf(x: &DenseMatrix, cfg: &BaselineConfig) -> Result<BaselineFit> {
    check_input(x, cfg)?;
    let (w, h) = random_start(x.rows(), x.cols(), cfg.rank_r, cfg.seed);
    mu_nmf_from(x, w, h, cfg)
}

/// Multiplicative-update NMF from the given factors.
pub fn mu_nmf_from(
    x: &DenseMatrix,
    mut w: DMatrix<f64>,
    mut h: DMatrix<f64>,
    cfg: &BaselineConfig,
) -> Result<BaselineFit> {
    let x = x.as_dmatrix();
    let mut history = Vec::with_capacity(cfg.max_iter + 1);
    history.push(objective(x, &w, &h));
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        (w, h) = mu_update(x, &w, &h)?;
        let f = objective(x, &w, &h);
        history.push(f);
        if f == 0.0 || stalled(&history, cfg.tol_rel) {
            break;
        }
    }
    Ok(BaselineFit { factors: balance(w, h)?, objective_history: history, iterations })
}

/// `argmin_{H ≥ 0} ‖X − WH‖_F² + λ Σ_j (Σ_k H_kj)²`, as NNLS on `W` stacked
/// over a row of `√λ`. `λ = 0` is plain NNLS on `W`.
fn h_step(w: &DMatrix<f64>, x: &DMatrix<f64>, l1_weight: f64, bpp: &BppConfig) -> Result<DMatrix<f64>> {
    if l1_weight == 0.0 {
        return Ok(solve_multi(w, x, bpp, None)?.x);
    }
    let (m, r) = w.shape();
    let root = libm::sqrt(l1_weight);
    let c = DMatrix::from_fn(m + 1, r, |i, k| if i < m { w[(i, k)] } else { root });
    let b = DMatrix::from_fn(m + 1, x.ncols(), |i, j| if i < m { x[(i, j)] } else { 0.0 });
    Ok(solve_multi(&c, &b, bpp, None)?.x)
}

fn alternate(x: &DenseMatrix, cfg: &BaselineConfig, l1_weight: f64) -> Result<BaselineFit> {
    check_input(x, cfg)?;
    let x = x.as_dmatrix();
    let xt = x.transpose();
    let bpp = BppConfig::default();
    let (mut w, mut h) = random_start(x.nrows(), x.ncols(), cfg.rank_r, cfg.seed);
    let mut history = Vec::with_capacity(cfg.max_iter + 1);
    history.push(objective(x, &w, &h));
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        h = h_step(&w, x, l1_weight, &bpp)?;
        w = solve_multi(&h.transpose(), &xt, &bpp, None)?.x.transpose();
        let f = objective(x, &w, &h);
        history.push(f);
        if f == 0.0 || stalled(&history, cfg.tol_rel) {
            break;
        }
    }
    Ok(BaselineFit { factors: balance(w, h)?, objective_history: history, iterations })
}

/// Alternating NNLS: `H ← argmin ‖X − WH‖`, then `W ← argmin ‖Xᵀ − HᵀWᵀ‖`.
pub fn anls_nmf(x: &DenseMatrix, cfg: &BaselineConfig) -> Result<BaselineFit> {
    alternate(x, cfg, 0.0)
}

/// ANLS with the H-step penalized by `cfg.l1_weight`. With a zero weight the
/// result is identical to [`anls_nmf`].
pub fn sparse_nmf(x: &DenseMatrix, cfg: &BaselineConfig) -> Result<BaselineFit> {
    alternate(x, cfg, cfg.l1_weight)
}

/// ONMF on `U = Xᵀ`: `Xᵀ ≈ AS` gives `W = Sᵀ`, `H = Aᵀ`.
pub fn onmf_direct(x: &DenseMatrix, cfg: &BaselineConfig) -> Result<BaselineFit> {
    check_input(x, cfg)?;
    let ocfg =
        OnmfConfig { max_iter: cfg.max_iter, tol_rel: cfg.tol_rel, seed: cfg.seed, ..OnmfConfig::new(cfg.rank_r) };
    let fit = onmf_fit(&x.transposed(), &ocfg)?;
    let factors = FactorPair::new(DenseMatrix::new(fit.s.transpose())?, DenseMatrix::new(fit.a.transpose())?)?;
    Ok(BaselineFit { factors, objective_history: fit.objective_history, iterations: fit.iterations })
}
