//! CC-NMF: Cone Collapse on `Xᵀ`, NNLS coefficients against the recovered
//! rays, then an orthogonal compression of the rays.
//!
//! With `X` of shape `m × n` (features × samples) the collapse runs on the
//! `m` feature rows viewed as points in `ℝⁿ`, giving `U* ∈ ℝ^{n×c}`. Then
//!
//! ```text
//! V* = argmin_{V ≥ 0} ‖Xᵀ − U* V‖_F      (c × m)
//! U* ≈ A S,  AᵀA ≈ I                     (n × r, r × c)
//! W = V*ᵀ Sᵀ,  H = Aᵀ                    (m × r, r × n)
//! ```

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::cone::{collapse, CollapseConfig, CollapseTrace, RayBasis};
use crate::error::{Error, Result};
use crate::matrix::{column_orthogonality_defect, frobenius, DataSet, DenseMatrix};
use crate::nnls::{nnls_multi, BppConfig};
use crate::onmf::{onmf_fit, OnmfConfig, OnmfFactors};

/// A nonnegative factorization `X ≈ WH`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    /// `m × r`
    pub w: DenseMatrix,
    /// `r × n`
    pub h: DenseMatrix,
    /// `‖HHᵀ − I‖_F`
    pub orthogonality_defect: f64,
}

impl FactorPair {
    pub fn new(w: DenseMatrix, h: DenseMatrix) -> Result<Self> {
        if w.cols() != h.rows() {
            return Err(Error::DimensionMismatch { expected: (w.cols(), h.cols()), found: (h.rows(), h.cols()) });
        }
        let orthogonality_defect = column_orthogonality_defect(&h.transpose());
        Ok(FactorPair { w, h, orthogonality_defect })
    }

    pub fn rank(&self) -> usize {
        self.w.cols()
    }

    /// `‖X − WH‖_F / ‖X‖_F`
    pub fn relative_error(&self, x: &DenseMatrix) -> Result<f64> {
        let shape = (self.w.rows(), self.h.cols());
        if x.shape() != shape {
            return Err(Error::DimensionMismatch { expected: shape, found: x.shape() });
        }
        let xn = frobenius(x);
        if xn == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(frobenius(&(x.as_dmatrix() - &*self.w * &*self.h)) / xn)
    }

    /// Cluster label of every sample; see [`assign_clusters`].
    pub fn labels(&self) -> Vec<usize> {
        assign_clusters(&self.h)
    }
}

/// Wall-clock seconds spent in each stage, as measured by the caller's clock.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub collapse: f64,
    pub solve_v: f64,
    pub onmf: f64,
    pub assemble: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.collapse + self.solve_v + self.onmf + self.assemble
    }
}

#[derive(Debug, Clone)]
pub struct CcnmfReport {
    /// Recovered extreme rays `U*` of the feature rows.
    pub basis: RayBasis,
    /// `c × m`
    pub coefficients: DenseMatrix,
    pub onmf: OnmfFactors,
    pub factors: FactorPair,
    /// `‖X − WH‖_F / ‖X‖_F`
    pub reconstruction_error: f64,
    pub trace: CollapseTrace,
    pub timings: StageTimings,
}

impl CcnmfReport {
    pub fn labels(&self) -> Vec<usize> {
        self.factors.labels()
    }
}

/// `V* = argmin_{V ≥ 0} ‖dataᵀ − U* V‖_F`, one column per feature of `data`.
pub fn solve_v(basis: &RayBasis, data: &DenseMatrix, bpp: &BppConfig) -> Result<DenseMatrix> {
    if basis.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if basis.dim() != data.cols() {
        return Err(Error::DimensionMismatch { expected: (data.rows(), basis.dim()), found: data.shape() });
    }
    let u = DenseMatrix::new(basis.to_matrix())?;
    nnls_multi(&u, &data.transposed(), bpp)
}

/// Runs the full pipeline without timing.
pub fn ccnmf(
    data: &DataSet,
    rank_r: usize,
    collapse_cfg: &CollapseConfig,
    onmf_cfg: &OnmfConfig,
) -> Result<CcnmfReport> {
    ccnmf_with_clock(data, rank_r, collapse_cfg, onmf_cfg, || 0.0)
}

/// Runs the full pipeline, reading `clock` (seconds) around every stage.
pub fn ccnmf_with_clock(
    data: &DataSet,
    rank_r: usize,
    collapse_cfg: &CollapseConfig,
    onmf_cfg: &OnmfConfig,
    mut clock: impl FnMut() -> f64,
) -> Result<CcnmfReport> {
    if rank_r < 1 {
        return Err(Error::InvalidConfig("rank_r must be at least 1"));
    }
    collapse_cfg.validate()?;
    onmf_cfg.validate()?;
    let t0 = clock();
    let (basis, trace) = collapse(&data.matrix().transposed(), collapse_cfg)?;
    let elapsed = clock() - t0;
    let mut report = compress_with_clock(data, basis, trace, rank_r, &collapse_cfg.bpp, onmf_cfg, clock)?;
    report.timings.collapse = elapsed;
    Ok(report)
}

/// The stages after Cone Collapse, for a basis `U*` already recovered from
/// the feature rows of `data`.
pub fn compress(
    data: &DataSet,
    basis: RayBasis,
    trace: CollapseTrace,
    rank_r: usize,
    bpp: &BppConfig,
    onmf_cfg: &OnmfConfig,
) -> Result<CcnmfReport> {
    compress_with_clock(data, basis, trace, rank_r, bpp, onmf_cfg, || 0.0)
}

fn compress_with_clock(
    data: &DataSet,
    basis: RayBasis,
    trace: CollapseTrace,
    rank_r: usize,
    bpp: &BppConfig,
    onmf_cfg: &OnmfConfig,
    mut clock: impl FnMut() -> f64,
) -> Result<CcnmfReport> {
    if rank_r < 1 {
        return Err(Error::InvalidConfig("rank_r must be at least 1"));
    }
    if rank_r > basis.len() {
        return Err(Error::RankExceedsCone { rank: rank_r, rays: basis.len() });
    }
    let x = data.matrix();
    let mut timings = StageTimings::default();

    let t1 = clock();
    let v = solve_v(&basis, x, bpp)?;
    let t2 = clock();
    timings.solve_v = t2 - t1;

    let u = DenseMatrix::new(basis.to_matrix())?;
    let onmf = onmf_fit(&u, &OnmfConfig { rank_r, ..*onmf_cfg })?;
    let t3 = clock();
    timings.onmf = t3 - t2;

    let w: DMatrix<f64> = v.transpose() * onmf.s.transpose();
    let h: DMatrix<f64> = onmf.a.transpose();
    let factors = FactorPair::new(DenseMatrix::new(w)?, DenseMatrix::new(h)?)?;
    let reconstruction_error = factors.relative_error(x)?;
    timings.assemble = clock() - t3;

    Ok(CcnmfReport { basis, coefficients: v, onmf, factors, reconstruction_error, trace, timings })
}

/// 1-based argmax over each column of `h`; ties go to the smallest row.
pub fn assign_clusters(h: &DMatrix<f64>) -> Vec<usize> {
    h.column_iter()
        .map(|col| {
            let mut best = 0;
            for (k, v) in col.iter().enumerate() {
                if *v > col[best] {
                    best = k;
                }
            }
            best + 1
        })
        .collect()
}
