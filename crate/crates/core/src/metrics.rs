//! Cluster purity against ground-truth classes.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub predicted: Vec<i64>,
    pub truth: Vec<i64>,
    /// Distinct predicted clusters, ascending; row ids of `contingency`.
    pub clusters: Vec<i64>,
    /// Distinct classes, ascending; column ids of `contingency`.
    pub classes: Vec<i64>,
    /// `contingency[k][l]`: samples in cluster `k` with class `l`.
    pub contingency: Vec<Vec<usize>>,
    pub purity: f64,
}

impl ClusterReport {
    /// `Σ_k max_l n_k^l`
    pub fn matched(&self) -> usize {
        self.contingency.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum()
    }
}

/// Maps arbitrary ids to `0..k` in ascending id order.
fn densify(labels: &[i64]) -> (Vec<i64>, Vec<usize>) {
    let mut ids: BTreeMap<i64, usize> = labels.iter().map(|&l| (l, 0)).collect();
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    let dense = labels.iter().map(|l| ids[l]).collect();
    (ids.into_keys().collect(), dense)
}

/// `(1/n) Σ_k max_l n_k^l` over clusters `k` and classes `l`.
pub fn purity(predicted: &[i64], truth: &[i64]) -> Result<ClusterReport> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch { predicted: predicted.len(), truth: truth.len() });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (clusters, p) = densify(predicted);
    let (classes, t) = densify(truth);
    let mut contingency = vec![vec![0usize; classes.len()]; clusters.len()];
    for (k, l) in p.iter().zip(&t) {
        contingency[*k][*l] += 1;
    }
    let mut report = ClusterReport {
        predicted: predicted.to_vec(),
        truth: truth.to_vec(),
        clusters,
        classes,
        contingency,
        purity: 0.0,
    };
    report.purity = report.matched() as f64 / predicted.len() as f64;
    Ok(report)
}

/// [`purity`] for 1-based cluster labels as returned by the argmax rule.
pub fn purity_of_assignment(predicted: &[usize], truth: &[i64]) -> Result<ClusterReport> {
    let p: Vec<i64> = predicted.iter().map(|&k| k as i64).collect();
    purity(&p, truth)
}
