//! Distance metrics and the majority-vote K-nearest-neighbor classifier.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Distance between feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Tanimoto (Soergel) distance: `sum(max - min) / sum(max)`. Suited to
    /// probabilistic vectors; 0 for identical inputs, bounded by 1.
    Tanimoto,
    /// Plain L2 distance, used as the baseline metric.
    Euclidean,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Metric::Tanimoto => tanimoto_distance(a, b),
            Metric::Euclidean => euclidean_distance(a, b),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Tanimoto => "tanimoto",
            Metric::Euclidean => "euclidean",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanimoto" => Ok(Metric::Tanimoto),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric {other:?} (expected tanimoto or euclidean)"
            ))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn check_dimensions(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// Tanimoto distance `sum_k(max(A_k, B_k) - min(A_k, B_k)) / sum_k max(A_k, B_k)`.
///
/// Defined as 0 when both vectors are all-zero. Requires nonnegative
/// entries; the result lies in [0, 1].
pub fn tanimoto_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dimensions(a, b)?;
    for (index, &value) in a.iter().chain(b.iter()).enumerate() {
        if value < 0.0 || !value.is_finite() {
            return Err(Error::NegativeEntry {
                index: index % a.len(),
                value,
            });
        }
    }
    let mut diff = 0.0;
    let mut max_sum = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        diff += x.max(y) - x.min(y);
        max_sum += x.max(y);
    }
    if max_sum == 0.0 {
        return Ok(0.0);
    }
    Ok(diff / max_sum)
}

/// Standard L2 distance.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dimensions(a, b)?;
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// A labeled feature vector with a stable id used for deterministic
/// tie-breaking.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: u64,
    pub label: String,
    pub features: Vec<f64>,
}

impl Sample {
    pub fn new(id: u64, label: impl Into<String>, features: Vec<f64>) -> Self {
        Self {
            id,
            label: label.into(),
            features,
        }
    }
}

/// KNN parameters: vote size T and the distance metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnConfig {
    pub neighbors: usize,
    pub metric: Metric,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            neighbors: 3,
            metric: Metric::Tanimoto,
        }
    }
}

/// Outcome of classifying one query.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    /// Ids of the T selected neighbors, nearest first.
    pub neighbor_ids: Vec<u64>,
    /// Distances of the selected neighbors, non-decreasing.
    pub neighbor_distances: Vec<f64>,
    /// Vote tally per class, sorted by class name.
    pub vote_counts: Vec<(String, usize)>,
}

/// Majority vote over the T nearest training samples.
///
/// Deterministic regardless of training-set order: distance ties are broken
/// by the smaller sample id; vote ties by the smaller mean distance among
/// the tied classes, then by lexicographic class name.
pub fn knn_classify(train: &[Sample], query: &[f64], cfg: &KnnConfig) -> Result<Prediction> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if cfg.neighbors == 0 || cfg.neighbors > train.len() {
        return Err(Error::NotEnoughTrainingSamples {
            requested: cfg.neighbors,
            available: train.len(),
        });
    }

    let mut ranked: Vec<(f64, u64, usize)> = Vec::with_capacity(train.len());
    for (index, sample) in train.iter().enumerate() {
        let d = cfg.metric.distance(&sample.features, query)?;
        ranked.push((d, sample.id, index));
    }
    ranked.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let selected = &ranked[..cfg.neighbors];

    // Per-class tallies over the selected neighbors, keyed by name so that
    // iteration order is stable.
    let mut votes: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for &(d, _, index) in selected {
        let entry = votes.entry(&train[index].label).or_insert((0, 0.0));
        entry.0 += 1;
        entry.1 += d;
    }
    let winner = votes
        .iter()
        .map(|(name, &(count, dist_sum))| (name, count, dist_sum / count as f64))
        .max_by(|a, b| {
            a.1.cmp(&b.1) // more votes wins
                .then(b.2.total_cmp(&a.2)) // then smaller mean distance
                .then(b.0.cmp(a.0)) // then lexicographically smaller name
        })
        .expect("at least one neighbor")
        .0
        .to_string();

    Ok(Prediction {
        label: winner,
        neighbor_ids: selected.iter().map(|&(_, id, _)| id).collect(),
        neighbor_distances: selected.iter().map(|&(d, _, _)| d).collect(),
        vote_counts: votes
            .into_iter()
            .map(|(name, (count, _))| (name.to_string(), count))
            .collect(),
    })
}
