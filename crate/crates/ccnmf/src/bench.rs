//! Head-to-head purity comparison of CC-NMF and the baselines on one data
//! set: shared rank `r = C` (number of classes), shared seeds, fixed method
//! order.

use std::fmt::Write as _;
use std::time::Instant;

use ccnmf_core::baselines::{anls_nmf, mu_nmf, onmf_direct, sparse_nmf, BaselineConfig};
use ccnmf_core::cone::{collapse, CollapseConfig, CollapseTrace, RayBasis};
use ccnmf_core::matrix::DataSet;
use ccnmf_core::metrics::purity_of_assignment;
use ccnmf_core::onmf::OnmfConfig;
use ccnmf_core::pipeline::{compress, CcnmfReport, FactorPair};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ccnmf,
    Mu,
    Anls,
    Onmf,
    Sparse,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Ccnmf, Method::Mu, Method::Anls, Method::Onmf, Method::Sparse];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ccnmf => "ccnmf",
            Method::Mu => "mu",
            Method::Anls => "anls",
            Method::Onmf => "onmf",
            Method::Sparse => "sparse",
        }
    }
}

/// Settings shared by every method.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub collapse: CollapseConfig,
    pub max_iter: usize,
    pub tol_rel: f64,
    pub l1_weight: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { collapse: CollapseConfig::default(), max_iter: 500, tol_rel: 1e-6, l1_weight: 0.1 }
    }
}

impl FitOptions {
    pub fn baseline(&self, rank_r: usize, seed: u64) -> BaselineConfig {
        BaselineConfig {
            max_iter: self.max_iter,
            tol_rel: self.tol_rel,
            seed,
            l1_weight: self.l1_weight,
            ..BaselineConfig::new(rank_r)
        }
    }

    pub fn onmf(&self, rank_r: usize, seed: u64) -> OnmfConfig {
        OnmfConfig { max_iter: self.max_iter, tol_rel: self.tol_rel, seed, ..OnmfConfig::new(rank_r) }
    }
}

/// Extreme rays of the feature rows, computed once per data set.
pub fn collapse_features(data: &DataSet, opts: &FitOptions) -> CliResult<(RayBasis, CollapseTrace)> {
    Ok(collapse(&data.matrix().transposed(), &opts.collapse)?)
}

/// One fitted factorization with the per-method details a report needs.
#[derive(Debug, Clone)]
pub enum Fit {
    Ccnmf(Box<CcnmfReport>),
    Baseline { factors: FactorPair, iterations: usize, objective: Vec<f64> },
}

impl Fit {
    pub fn factors(&self) -> &FactorPair {
        match self {
            Fit::Ccnmf(r) => &r.factors,
            Fit::Baseline { factors, .. } => factors,
        }
    }
}

/// Fits one method. `cone` supplies a precomputed collapse for CC-NMF.
pub fn fit(
    data: &DataSet,
    method: Method,
    rank_r: usize,
    seed: u64,
    opts: &FitOptions,
    cone: Option<&(RayBasis, CollapseTrace)>,
) -> CliResult<Fit> {
    let x = data.matrix();
    let cfg = opts.baseline(rank_r, seed);
    let base = match method {
        Method::Ccnmf => {
            let (basis, trace) = match cone {
                Some(c) => c.clone(),
                None => collapse_features(data, opts)?,
            };
            let rep = compress(data, basis, trace, rank_r, &opts.collapse.bpp, &opts.onmf(rank_r, seed))?;
            return Ok(Fit::Ccnmf(Box::new(rep)));
        }
        Method::Mu => mu_nmf(x, &cfg)?,
        Method::Anls => anls_nmf(x, &cfg)?,
        Method::Onmf => onmf_direct(x, &cfg)?,
        Method::Sparse => sparse_nmf(x, &cfg)?,
    };
    Ok(Fit::Baseline { factors: base.factors, iterations: base.iterations, objective: base.objective_history })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRow {
    pub method: Method,
    /// One entry per seed, in seed order.
    pub purity: Vec<f64>,
    pub mean_purity: f64,
    pub min_purity: f64,
    pub mean_relative_error: f64,
    /// Wall-clock seconds per seed; only filled when timing was requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub features: usize,
    pub samples: usize,
    pub classes: usize,
    pub rank: usize,
    pub seeds: Vec<u64>,
    pub cone_rays: usize,
    pub rows: Vec<MethodRow>,
}

impl BenchReport {
    pub fn row(&self, method: Method) -> Option<&MethodRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Defaults to the number of distinct classes.
    pub rank: Option<usize>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub options: FitOptions,
    /// Record wall-clock time per fit. Off by default so that reports are
    /// reproducible byte for byte.
    pub timings: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            rank: None,
            seeds: (0..10).collect(),
            methods: Method::ALL.to_vec(),
            options: FitOptions::default(),
            timings: false,
        }
    }
}

pub fn run_bench(data: &DataSet, cfg: &BenchConfig) -> CliResult<BenchReport> {
    let truth = data.labels().ok_or_else(|| CliError::Usage("bench needs ground-truth labels".into()))?;
    let mut classes = truth.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let rank = cfg.rank.unwrap_or(classes.len());
    if cfg.seeds.is_empty() {
        return Err(CliError::Usage("bench needs at least one seed".into()));
    }
    let cone = if cfg.methods.contains(&Method::Ccnmf) { Some(collapse_features(data, &cfg.options)?) } else { None };
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let mut purity = Vec::with_capacity(cfg.seeds.len());
        let mut seconds = Vec::with_capacity(cfg.seeds.len());
        let mut err_sum = 0.0;
        for &seed in &cfg.seeds {
            let start = Instant::now();
            let f = fit(data, method, rank, seed, &cfg.options, cone.as_ref())?;
            seconds.push(start.elapsed().as_secs_f64());
            let factors = f.factors();
            purity.push(purity_of_assignment(&factors.labels(), truth)?.purity);
            err_sum += factors.relative_error(data.matrix())?;
        }
        let k = purity.len() as f64;
        rows.push(MethodRow {
            method,
            mean_purity: purity.iter().sum::<f64>() / k,
            min_purity: purity.iter().copied().fold(f64::INFINITY, f64::min),
            mean_relative_error: err_sum / k,
            purity,
            seconds: cfg.timings.then_some(seconds),
        });
    }
    Ok(BenchReport {
        features: data.features(),
        samples: data.samples(),
        classes: classes.len(),
        rank,
        seeds: cfg.seeds.clone(),
        cone_rays: cone.map_or(0, |c| c.0.len()),
        rows,
    })
}

/// Fixed-width purity table, one method per line.
pub fn render_table(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} features x {} samples, {} classes, rank {}, {} seeds",
        report.features,
        report.samples,
        report.classes,
        report.rank,
        report.seeds.len()
    );
    let _ = writeln!(out, "{:<8} {:>12} {:>12} {:>12}", "method", "mean purity", "min purity", "rel. error");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{:<8} {:>12.4} {:>12.4} {:>12.4e}",
            row.method.name(),
            row.mean_purity,
            row.min_purity,
            row.mean_relative_error
        );
    }
    out
}
