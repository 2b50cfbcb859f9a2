//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 bad input data, 4 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use ccnmf_core::cone::{collapse, CollapseConfig, CollapseTrace, IterationRecord};
use ccnmf_core::matrix::DataSet;
use ccnmf_core::metrics::purity_of_assignment;
use ccnmf_core::pipeline::assign_clusters;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{fit, render_table, run_bench, BenchConfig, Fit, FitOptions, Method};
use crate::error::{CliError, CliResult};
use crate::io::{labels_to_text, load_matrix, read_matrix, write_matrix, write_text, MatrixFormat, Orientation};
use crate::synth::{gen_clusters, gen_cone, ClusterSpec, SyntheticSpec};

#[derive(Debug, Parser)]
#[command(name = "ccnmf", version, about = "Cone Collapse and cone-aware orthogonal NMF")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic instance: data.csv, data.labels and (cone) rays.csv.
    Gen(GenArgs),
    /// Recover the extreme rays of the samples: rays.csv and collapse.json.
    Collapse(CollapseArgs),
    /// Fit CC-NMF or a baseline: W.csv, H.csv, labels and factorize.json.
    Factorize(FactorizeArgs),
    /// Assign 1-based cluster labels from an H matrix (argmax per column).
    Cluster(ClusterArgs),
    /// Purity of every method over shared seeds: bench.json plus a table.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Points on and inside a cone with known extreme rays.
    Cone,
    /// Conic clusters with disjoint feature blocks.
    Clusters,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "cone")]
    pub kind: GenKind,
    /// Dimension of a cone instance.
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub rays: usize,
    #[arg(long, default_value_t = 5)]
    pub points_per_ray: usize,
    #[arg(long, default_value_t = 50)]
    pub interior: usize,
    #[arg(long, default_value_t = 0.3)]
    pub spread: f64,
    #[arg(long, default_value_t = 20)]
    pub features: usize,
    #[arg(long, default_value_t = 300)]
    pub samples: usize,
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    #[arg(long, default_value_t = 0.05)]
    pub background: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Data matrix (CSV or MatrixMarket).
    pub input: PathBuf,
    /// Input format; inferred from the extension when absent.
    #[arg(long, value_enum)]
    pub format: Option<MatrixFormat>,
    #[arg(long, value_enum, default_value = "cols")]
    pub samples_as: Orientation,
    /// Ground-truth labels, one per sample; defaults to the sibling `.labels` file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> CliResult<DataSet> {
        load_matrix(&self.input, self.format, self.samples_as, self.labels.as_deref())
    }
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    #[arg(long, default_value_t = 0.25)]
    pub eta: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
}

impl ConeArgs {
    fn config(&self) -> CliResult<CollapseConfig> {
        let cfg = CollapseConfig { eta: self.eta, epsilon: self.epsilon, ..CollapseConfig::default() };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct CollapseArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub cone: ConeArgs,
    /// Outer iteration cap.
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Output directory; the report goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub cone: ConeArgs,
    #[arg(long, value_enum, default_value = "ccnmf")]
    pub method: Method,
    #[arg(long)]
    pub rank: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Penalty weight of the sparse baseline.
    #[arg(long, default_value_t = 0.1)]
    pub l1_weight: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// H matrix, one column per sample.
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<MatrixFormat>,
    /// Labels file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub cone: ConeArgs,
    /// Defaults to the number of classes.
    #[arg(long)]
    pub rank: Option<usize>,
    /// First seed; `--seeds` consecutive seeds are used.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0.1)]
    pub l1_weight: f64,
    /// Add wall-clock seconds per fit to the report.
    #[arg(long)]
    pub timings: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command, and returns the
/// process exit code. Errors are printed to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Collapse(a) => cmd_collapse(a),
        Command::Factorize(a) => cmd_factorize(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> CliResult<()> {
    match out {
        Some(dir) => write_text(&dir.join(file), text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(a: &GenArgs) -> CliResult<()> {
    let data = match a.kind {
        GenKind::Cone => {
            let inst = gen_cone(&SyntheticSpec {
                dim: a.dim,
                rays: a.rays,
                points_per_ray: a.points_per_ray,
                interior_points: a.interior,
                spread: a.spread,
                seed: a.seed,
            })?;
            write_matrix(&a.out.join("rays.csv"), &inst.truth.to_matrix(), MatrixFormat::Csv)?;
            inst.data
        }
        GenKind::Clusters => gen_clusters(&ClusterSpec {
            features: a.features,
            samples: a.samples,
            clusters: a.clusters,
            background: a.background,
            seed: a.seed,
        })?,
    };
    write_matrix(&a.out.join("data.csv"), data.matrix(), MatrixFormat::Csv)?;
    if let Some(l) = data.labels() {
        write_text(&a.out.join("data.labels"), &labels_to_text(l))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct TraceRow {
    iteration: usize,
    rays: usize,
    frozen: usize,
    points_added: usize,
    rays_pruned: usize,
    min_free_cosine: Option<f64>,
    max_relative_residual: f64,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        TraceRow {
            iteration: r.iteration,
            rays: r.rays,
            frozen: r.frozen,
            points_added: r.points_added,
            rays_pruned: r.rays_pruned,
            min_free_cosine: r.min_free_cosine,
            max_relative_residual: r.max_relative_residual,
        }
    }
}

fn trace_rows(t: &CollapseTrace) -> Vec<TraceRow> {
    t.records.iter().map(TraceRow::from).collect()
}

#[derive(Debug, Serialize)]
struct CollapseReport {
    command: &'static str,
    dim: usize,
    points: usize,
    eta: f64,
    epsilon: f64,
    rays: usize,
    iterations: usize,
    max_relative_residual: f64,
    trace: Vec<TraceRow>,
}

fn cmd_collapse(a: &CollapseArgs) -> CliResult<()> {
    let data = a.input.load()?;
    let cfg = CollapseConfig { max_outer_iter: a.max_iter, ..a.cone.config()? };
    let (basis, trace) = collapse(data.matrix(), &cfg)?;
    let report = CollapseReport {
        command: "collapse",
        dim: data.features(),
        points: data.samples(),
        eta: cfg.eta,
        epsilon: cfg.epsilon,
        rays: basis.len(),
        iterations: trace.iterations(),
        max_relative_residual: trace.max_relative_residual(),
        trace: trace_rows(&trace),
    };
    if let Some(dir) = &a.out {
        write_matrix(&dir.join("rays.csv"), &basis.to_matrix(), MatrixFormat::Csv)?;
    }
    emit(a.out.as_deref(), "collapse.json", &to_json(&report))
}

#[derive(Debug, Serialize)]
struct FactorizeReport {
    command: &'static str,
    method: Method,
    rank: usize,
    seed: u64,
    features: usize,
    samples: usize,
    iterations: usize,
    initial_objective: f64,
    final_objective: f64,
    reconstruction_error: f64,
    orthogonality_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cone_rays: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collapse_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    purity: Option<f64>,
    labels: Vec<usize>,
}

fn cmd_factorize(a: &FactorizeArgs) -> CliResult<()> {
    let data = a.input.load()?;
    let opts = FitOptions {
        collapse: a.cone.config()?,
        max_iter: a.max_iter,
        l1_weight: a.l1_weight,
        ..FitOptions::default()
    };
    let fitted = fit(&data, a.method, a.rank, a.seed, &opts, None)?;
    let factors = fitted.factors();
    let labels = factors.labels();
    let purity = match data.labels() {
        Some(t) => Some(purity_of_assignment(&labels, t)?.purity),
        None => None,
    };
    let (iterations, objective, cone_rays, collapse_iterations) = match &fitted {
        Fit::Ccnmf(r) => {
            (r.onmf.iterations, r.onmf.objective_history.clone(), Some(r.basis.len()), Some(r.trace.iterations()))
        }
        Fit::Baseline { iterations, objective, .. } => (*iterations, objective.clone(), None, None),
    };
    let report = FactorizeReport {
        command: "factorize",
        method: a.method,
        rank: a.rank,
        seed: a.seed,
        features: data.features(),
        samples: data.samples(),
        iterations,
        initial_objective: objective.first().copied().unwrap_or(0.0),
        final_objective: objective.last().copied().unwrap_or(0.0),
        reconstruction_error: factors.relative_error(data.matrix())?,
        orthogonality_defect: factors.orthogonality_defect,
        cone_rays,
        collapse_iterations,
        purity,
        labels: labels.clone(),
    };
    if let Some(dir) = &a.out {
        write_matrix(&dir.join("W.csv"), &factors.w, MatrixFormat::Csv)?;
        write_matrix(&dir.join("H.csv"), &factors.h, MatrixFormat::Csv)?;
        write_text(&dir.join("labels.txt"), &labels_to_text(&labels))?;
    }
    emit(a.out.as_deref(), "factorize.json", &to_json(&report))
}

fn cmd_cluster(a: &ClusterArgs) -> CliResult<()> {
    let h = read_matrix(&a.input, a.format)?;
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(CliError::Data(ccnmf_core::Error::EmptyMatrix));
    }
    if let Some((i, j)) =
        (0..h.ncols()).flat_map(|j| (0..h.nrows()).map(move |i| (i, j))).find(|&(i, j)| !h[(i, j)].is_finite())
    {
        return Err(CliError::Data(ccnmf_core::Error::NonFinite { row: i, col: j }));
    }
    let text = labels_to_text(&assign_clusters(&h));
    match &a.out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bench(a: &BenchArgs) -> CliResult<()> {
    let data = a.input.load()?;
    if a.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let cfg = BenchConfig {
        rank: a.rank,
        seeds: (a.seed..a.seed + a.seeds).collect(),
        options: FitOptions {
            collapse: a.cone.config()?,
            max_iter: a.max_iter,
            l1_weight: a.l1_weight,
            ..FitOptions::default()
        },
        timings: a.timings,
        ..BenchConfig::default()
    };
    let report = run_bench(&data, &cfg)?;
    print!("{}", render_table(&report));
    if let Some(dir) = &a.out {
        write_text(&dir.join("bench.json"), &to_json(&report))?;
    }
    Ok(())
}
