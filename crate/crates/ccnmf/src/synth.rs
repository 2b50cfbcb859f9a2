//! Seeded synthetic instances with known cone structure.

use ccnmf_core::cone::RayBasis;
use ccnmf_core::matrix::{dot, normalize, DataSet, DenseMatrix, UnitVector};
use ccnmf_core::nnls::{nnls_single, BppConfig};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

/// Residual a ground-truth ray must keep against the cone of the others.
const EXTREMENESS_MARGIN: f64 = 1e-6;
const MAX_ATTEMPTS: usize = 100;

/// Parameters of a synthetic cone instance. Points are the columns of the
/// generated matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub rays: usize,
    pub points_per_ray: usize,
    pub interior_points: usize,
    /// Upper bound of the off-axis entries of each ray; `0` puts the rays on
    /// coordinate axes.
    pub spread: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec { dim: 10, rays: 5, points_per_ray: 5, interior_points: 50, spread: 0.3, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub data: DataSet,
    pub truth: RayBasis,
}

/// Generates a clean instance whose extreme rays are exactly `truth`.
///
/// Each ray has its own dominant coordinate plus off-axis entries drawn from
/// `[0, spread)`. Every ray carries `points_per_ray` colinear samples with
/// random positive scales; interior points are random conic combinations of
/// at least two rays. Labels are the generating ray (argmax weight for
/// interior points).
pub fn gen_cone(spec: &SyntheticSpec) -> CliResult<SyntheticInstance> {
    if spec.rays == 0 || spec.rays > spec.dim {
        return Err(CliError::Usage(format!("ray count {} must lie in 1..={}", spec.rays, spec.dim)));
    }
    if spec.points_per_ray == 0 {
        return Err(CliError::Usage("points_per_ray must be at least 1".into()));
    }
    if spec.interior_points > 0 && spec.rays < 2 {
        return Err(CliError::Usage("interior points need at least two rays".into()));
    }
    if !(spec.spread >= 0.0) {
        return Err(CliError::Usage("spread must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(inst) = try_generate(spec, &mut rng)? {
            return Ok(inst);
        }
    }
    Err(CliError::GenerationFailed(format!("no valid instance after {MAX_ATTEMPTS} attempts")))
}

fn try_generate(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> CliResult<Option<SyntheticInstance>> {
    let d = spec.dim;
    let c = spec.rays;
    let mut axes: Vec<usize> = (0..d).collect();
    axes.shuffle(rng);
    let rays: Vec<Vec<f64>> = (0..c)
        .map(|k| {
            let mut v: Vec<f64> =
                (0..d).map(|_| if spec.spread > 0.0 { rng.random_range(0.0..spec.spread) } else { 0.0 }).collect();
            v[axes[k]] = 1.0;
            normalize(&v).map(|u| u.into_vec())
        })
        .collect::<Result<_, _>>()?;
    if !all_extreme(&rays)? {
        return Ok(None);
    }

    let mut points: Vec<(Vec<f64>, i64)> = Vec::new();
    for (k, ray) in rays.iter().enumerate() {
        for _ in 0..spec.points_per_ray {
            let s = rng.random_range(0.5..2.0);
            points.push((ray.iter().map(|v| v * s).collect(), k as i64));
        }
    }
    for _ in 0..spec.interior_points {
        let support = rng.random_range(2..=c);
        let mut ids: Vec<usize> = (0..c).collect();
        ids.shuffle(rng);
        let mut p = vec![0.0; d];
        let mut best = (0usize, f64::NEG_INFINITY);
        for &k in &ids[..support] {
            let w = rng.random_range(0.1..1.0);
            if w > best.1 {
                best = (k, w);
            }
            for (pi, ri) in p.iter_mut().zip(&rays[k]) {
                *pi += w * ri;
            }
        }
        points.push((p, best.0 as i64));
    }
    points.shuffle(rng);

    let columns: Vec<Vec<f64>> = points.iter().map(|(p, _)| p.clone()).collect();
    let labels: Vec<i64> = points.iter().map(|(_, l)| *l).collect();
    let matrix = DenseMatrix::from_columns(&columns)?;
    let Ok(data) = DataSet::new(matrix, Some(labels)) else {
        return Ok(None);
    };
    // the mean must not sit on a ground-truth ray when there are several
    if c >= 2 {
        let mu = ccnmf_core::matrix::mean_direction(data.matrix())?;
        if rays.iter().any(|r| dot(r, &mu) >= 1.0 - 1e-10) {
            return Ok(None);
        }
    }
    let truth = RayBasis::new(d, rays.into_iter().map(|r| normalize(&r)).collect::<Result<Vec<UnitVector>, _>>()?)?;
    Ok(Some(SyntheticInstance { data, truth }))
}

/// Leave-one-out NNLS residual of every ray exceeds the margin.
pub fn all_extreme(rays: &[Vec<f64>]) -> CliResult<bool> {
    if rays.len() < 2 {
        return Ok(true);
    }
    let d = rays[0].len();
    let bpp = BppConfig::default();
    for k in 0..rays.len() {
        let others: Vec<&Vec<f64>> = rays.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, r)| r).collect();
        let c = DenseMatrix::new(DMatrix::from_fn(d, others.len(), |i, j| others[j][i]))?;
        let sol = nnls_single(&c, &rays[k], &bpp)?;
        if sol.objective.sqrt() <= EXTREMENESS_MARGIN {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Parameters for a clustered features × samples matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    pub features: usize,
    pub samples: usize,
    pub clusters: usize,
    /// Weight of the off-cluster background relative to the cluster block.
    pub background: f64,
    pub seed: u64,
}

/// Samples drawn from narrow cones around `clusters` generators with
/// disjoint feature blocks, plus a small nonnegative background.
pub fn gen_clusters(spec: &ClusterSpec) -> CliResult<DataSet> {
    if spec.clusters == 0 || spec.clusters > spec.features || spec.samples < spec.clusters {
        return Err(CliError::Usage("need 1 <= clusters <= min(features, samples)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.features;
    let block = |f: usize| f * spec.clusters / m;
    let mut labels: Vec<i64> = (0..spec.samples).map(|i| (i % spec.clusters) as i64).collect();
    labels.shuffle(&mut rng);
    let mut columns = Vec::with_capacity(spec.samples);
    for &l in &labels {
        let scale = rng.random_range(0.5..2.0);
        let col: Vec<f64> = (0..m)
            .map(|f| {
                let base = if block(f) == l as usize { rng.random_range(0.5..1.0) } else { 0.0 };
                scale * (base + spec.background * rng.random_range(0.0..1.0))
            })
            .collect();
        columns.push(col);
    }
    Ok(DataSet::new(DenseMatrix::from_columns(&columns)?, Some(labels))?)
}
