//! Uni-orthogonal NMF `U ≈ AS` with `A ≥ 0`, `AᵀA ≈ I`, `S ≥ 0`, fitted by
//! multiplicative updates
//!
//! ```text
//! S ← S ⊙ (AᵀU) / ((AᵀA)S)
//! A ← A ⊙ (USᵀ) / (AAᵀUSᵀ)
//! ```
//!
//! followed by column renormalization of `A`.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{check_clean, column_orthogonality_defect, DenseMatrix};

/// Window (in iterations) of the relative-decrease stopping test.
pub const STALL_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnmfConfig {
    pub rank_r: usize,
    pub max_iter: usize,
    /// Renormalize the columns of `A` every this many iterations.
    pub renorm_every: usize,
    /// Lower clamp for every elementwise denominator.
    pub div_guard: f64,
    pub seed: u64,
    /// Defect `‖AᵀA − I‖_F` above which a fit is flagged as not orthogonal.
    pub orth_tol: f64,
    /// Stop once the objective drops by less than this fraction over
    /// [`STALL_WINDOW`] iterations.
    pub tol_rel: f64,
}

impl OnmfConfig {
    pub fn new(rank_r: usize) -> Self {
        OnmfConfig { rank_r, max_iter: 500, renorm_every: 1, div_guard: 1e-12, seed: 0, orth_tol: 1e-2, tol_rel: 1e-6 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank_r < 1 {
            return Err(Error::InvalidConfig("rank_r must be at least 1"));
        }
        if !(self.div_guard > 0.0) {
            return Err(Error::InvalidConfig("div_guard must be positive"));
        }
        if self.renorm_every < 1 {
            return Err(Error::InvalidConfig("renorm_every must be at least 1"));
        }
        if !(self.tol_rel >= 0.0) {
            return Err(Error::InvalidConfig("tol_rel must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnmfFactors {
    /// `n × r`, unit columns.
    pub a: DenseMatrix,
    /// `r × c`
    pub s: DenseMatrix,
    /// `‖U − AS‖_F²` at the start and after every iteration.
    pub objective_history: Vec<f64>,
    /// `‖AᵀA − I‖_F` of the returned `A`.
    pub orthogonality_defect: f64,
    pub iterations: usize,
}

impl OnmfFactors {
    pub fn initial_objective(&self) -> f64 {
        self.objective_history[0]
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective_history.last().unwrap_or(&0.0)
    }

    pub fn is_orthogonal(&self, orth_tol: f64) -> bool {
        self.orthogonality_defect <= orth_tol
    }
}

/// True once the last entry of `history` improves on the entry
/// [`STALL_WINDOW`] steps earlier by less than `tol_rel` relative.
pub(crate) fn stalled(history: &[f64], tol_rel: f64) -> bool {
    let n = history.len();
    if n <= STALL_WINDOW {
        return false;
    }
    let past = history[n - 1 - STALL_WINDOW];
    past > 0.0 && (past - history[n - 1]) / past < tol_rel
}

pub(crate) fn expect_shape(m: &DMatrix<f64>, shape: (usize, usize)) -> Result<()> {
    if m.shape() != shape {
        return Err(Error::DimensionMismatch { expected: shape, found: m.shape() });
    }
    Ok(())
}

fn guarded_ratio(x: &DMatrix<f64>, num: &DMatrix<f64>, den: &DMatrix<f64>, guard: f64) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * num[(i, j)] / den[(i, j)].max(guard))
}

/// `S ⊙ (AᵀU) / max((AᵀA)S, guard)`
pub fn update_s(a: &DMatrix<f64>, s: &DMatrix<f64>, u: &DMatrix<f64>, div_guard: f64) -> Result<DMatrix<f64>> {
    let (n, r) = a.shape();
    expect_shape(s, (r, u.ncols()))?;
    expect_shape(u, (n, s.ncols()))?;
    let num = a.tr_mul(u);
    let den = a.tr_mul(a) * s;
    Ok(guarded_ratio(s, &num, &den, div_guard))
}

/// `A ⊙ (USᵀ) / max(AAᵀUSᵀ, guard)`
pub fn update_a(a: &DMatrix<f64>, s: &DMatrix<f64>, u: &DMatrix<f64>, div_guard: f64) -> Result<DMatrix<f64>> {
    let (n, r) = a.shape();
    expect_shape(s, (r, u.ncols()))?;
    expect_shape(u, (n, s.ncols()))?;
    let ust = u * s.transpose();
    // A (Aᵀ U Sᵀ) avoids forming the n × n product AAᵀ
    let den = a * a.tr_mul(&ust);
    Ok(guarded_ratio(a, &ust, &den, div_guard))
}

/// Scales every column of `a` to unit L2 norm and returns the old norms.
pub fn renormalize(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let mut out = a.clone();
    let mut norms = Vec::with_capacity(a.ncols());
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let n = col.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroColumn { index: j });
        }
        col /= n;
        norms.push(n);
    }
    Ok((out, norms))
}

fn objective(u: &DMatrix<f64>, a: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
    (u - a * s).norm_squared()
}

/// `A = |N(0,1)|` with unit columns, `S = max(AᵀU, 0)`.
pub fn initialize(u: &DMatrix<f64>, rank_r: usize, seed: u64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(u.nrows(), rank_r, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z.abs()
    });
    let (a, _) = renormalize(&a)?;
    let s = a.tr_mul(u).map(|v| v.max(0.0));
    Ok((a, s))
}

/// Fits `U ≈ AS` from the seeded random start.
pub fn onmf_fit(u: &DenseMatrix, cfg: &OnmfConfig) -> Result<OnmfFactors> {
    cfg.validate()?;
    let (n, c) = u.shape();
    if cfg.rank_r > n.min(c) {
        return Err(Error::InvalidConfig("rank_r exceeds min(rows, cols) of U"));
    }
    check_clean(u)?;
    let (a, s) = initialize(u, cfg.rank_r, cfg.seed)?;
    onmf_fit_from(u, a, s, cfg)
}

/// Fits `U ≈ AS` starting from the given factors.
///
/// Renormalization rescales the matching rows of `S` by the old column norms
/// so that the product `AS` is unchanged by it.
pub fn onmf_fit_from(u: &DenseMatrix, a0: DMatrix<f64>, s0: DMatrix<f64>, cfg: &OnmfConfig) -> Result<OnmfFactors> {
    cfg.validate()?;
    let u = u.as_dmatrix();
    expect_shape(&a0, (u.nrows(), cfg.rank_r))?;
    expect_shape(&s0, (cfg.rank_r, u.ncols()))?;
    let mut a = a0;
    let mut s = s0;
    let mut history = Vec::with_capacity(cfg.max_iter + 1);
    history.push(objective(u, &a, &s));
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        s = update_s(&a, &s, u, cfg.div_guard)?;
        a = update_a(&a, &s, u, cfg.div_guard)?;
        if iterations % cfg.renorm_every == 0 {
            let (an, norms) = renormalize(&a)?;
            a = an;
            for (k, nk) in norms.iter().enumerate() {
                s.row_mut(k).scale_mut(*nk);
            }
        }
        let f = objective(u, &a, &s);
        history.push(f);
        if f == 0.0 {
            break;
        }
        if stalled(&history, cfg.tol_rel) {
            break;
        }
    }
    if !(a.iter().chain(s.iter()).all(|v| v.is_finite())) {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    let orthogonality_defect = column_orthogonality_defect(&a);
    Ok(OnmfFactors {
        a: DenseMatrix::new(a)?,
        s: DenseMatrix::new(s)?,
        objective_history: history,
        orthogonality_defect,
        iterations,
    })
}
