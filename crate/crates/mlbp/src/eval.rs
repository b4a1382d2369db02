//! Stratified k-fold cross-validation, accuracy reporting, and per-image
//! runtime benchmarking.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::classify::{knn_classify, KnnConfig, Sample};
use crate::error::{Error, Result};
use crate::io::load_image;
use crate::lbp::{extract, NeighborhoodSpec};
use crate::preprocess::PreprocessConfig;
use crate::rng::SplitMix64;

/// Assignment of every sample to one of k folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Fold index per sample, aligned with the input order.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn fold_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (f == fold).then_some(i))
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified fold assignment: per class, sample indices are shuffled with
/// SplitMix64 (see [`crate::rng`]) and dealt round-robin into the k folds,
/// so per-class fold counts differ by at most one. Deterministic in `seed`.
pub fn stratified_kfold(samples: &[Sample], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidFolds(format!("need at least 2 folds, got {k}")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidFolds("empty dataset".into()));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, sample) in samples.iter().enumerate() {
        by_class.entry(&sample.label).or_default().push(i);
    }
    let mut rng = SplitMix64::new(seed);
    let mut assignments = vec![0usize; samples.len()];
    for indices in by_class.values_mut() {
        rng.shuffle(indices);
        for (position, &sample_index) in indices.iter().enumerate() {
            assignments[sample_index] = position % k;
        }
    }
    Ok(FoldPlan { k, assignments })
}

/// Cross-validation outcome: per-fold accuracies, aggregate accuracy,
/// confusion matrix, and an echo of the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_fold_accuracy: Vec<f64>,
    /// Total correct over total samples (sample-weighted fold aggregate).
    pub mean_accuracy: f64,
    /// Class names, sorted; rows/columns of `confusion` use this order.
    pub classes: Vec<String>,
    /// `confusion[actual][predicted]` counts.
    pub confusion: Vec<Vec<usize>>,
    pub knn: KnnConfig,
    pub folds: usize,
    pub seed: u64,
    pub descriptor: Option<NeighborhoodSpec>,
    pub preprocess: Option<PreprocessConfig>,
}

impl EvalReport {
    pub fn total_samples(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    /// Recomputes the aggregate accuracy from the confusion matrix.
    pub fn accuracy_from_confusion(&self) -> f64 {
        let correct: usize = (0..self.classes.len()).map(|i| self.confusion[i][i]).sum();
        correct as f64 / self.total_samples() as f64
    }

    /// Plain-text report: per-fold accuracies, the mean, and the confusion
    /// matrix. Stable output, suitable for byte-identical comparisons.
    pub fn render_table(&self) -> String {
        use std::fmt::Write;

        let mut out = String::new();
        let _ = writeln!(
            out,
            "cross-validation: {} folds, T={}, metric={}, seed={}",
            self.folds, self.knn.neighbors, self.knn.metric, self.seed
        );
        if let Some(spec) = &self.descriptor {
            let _ = writeln!(
                out,
                "descriptor: P={} R={:?} UT={}",
                spec.neighbors(),
                spec.radius(),
                spec.uniformity_threshold()
            );
        }
        for (i, acc) in self.per_fold_accuracy.iter().enumerate() {
            let _ = writeln!(out, "fold {:>2}: accuracy {:.4}", i, acc);
        }
        let _ = writeln!(out, "mean accuracy: {:.4}", self.mean_accuracy);
        let _ = writeln!(out, "confusion (rows = actual, cols = predicted):");
        let width = self
            .classes
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(0)
            .max(6);
        let _ = write!(out, "{:>width$} ", "");
        for class in &self.classes {
            let _ = write!(out, "{class:>width$} ");
        }
        let _ = writeln!(out);
        for (i, class) in self.classes.iter().enumerate() {
            let _ = write!(out, "{class:>width$} ");
            for count in &self.confusion[i] {
                let _ = write!(out, "{count:>width$} ");
            }
            let _ = writeln!(out);
        }
        out
    }
}

/// Runs stratified k-fold cross-validation with the given KNN setup.
pub fn cross_validate(
    samples: &[Sample],
    k: usize,
    cfg: &KnnConfig,
    seed: u64,
) -> Result<EvalReport> {
    let plan = stratified_kfold(samples, k, seed)?;
    let sizes = plan.fold_sizes();
    if let Some(fold) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidFolds(format!(
            "fold {fold} is empty; fewer samples than folds"
        )));
    }
    let smallest_train = samples.len() - sizes.iter().max().copied().unwrap_or(0);
    if cfg.neighbors > smallest_train {
        return Err(Error::InvalidFolds(format!(
            "T={} exceeds the smallest training split ({smallest_train})",
            cfg.neighbors
        )));
    }

    let mut classes: Vec<String> = samples.iter().map(|s| s.label.clone()).collect();
    classes.sort();
    classes.dedup();
    let class_index: BTreeMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), i))
        .collect();

    let mut confusion = vec![vec![0usize; classes.len()]; classes.len()];
    let mut per_fold_accuracy = Vec::with_capacity(k);
    let mut total_correct = 0usize;
    for fold in 0..k {
        let train: Vec<Sample> = samples
            .iter()
            .zip(plan.assignments())
            .filter(|(_, &f)| f != fold)
            .map(|(s, _)| s.clone())
            .collect();
        let mut correct = 0usize;
        let mut tested = 0usize;
        for (sample, _) in samples
            .iter()
            .zip(plan.assignments())
            .filter(|(_, &f)| f == fold)
        {
            let prediction = knn_classify(&train, &sample.features, cfg)?;
            let actual = class_index[sample.label.as_str()];
            let predicted = class_index[prediction.label.as_str()];
            confusion[actual][predicted] += 1;
            tested += 1;
            if predicted == actual {
                correct += 1;
            }
        }
        per_fold_accuracy.push(correct as f64 / tested as f64);
        total_correct += correct;
    }

    Ok(EvalReport {
        per_fold_accuracy,
        mean_accuracy: total_correct as f64 / samples.len() as f64,
        classes,
        confusion,
        knn: *cfg,
        folds: k,
        seed,
        descriptor: None,
        preprocess: None,
    })
}

/// Wall-clock statistics over a list of per-image timings.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingStats {
    pub per_image_ms: Vec<f64>,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub max_ms: f64,
}

impl TimingStats {
    pub fn from_samples(per_image_ms: Vec<f64>) -> Result<Self> {
        if per_image_ms.is_empty() {
            return Err(Error::InvalidParameter("no timing samples".into()));
        }
        let mut sorted = per_image_ms.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median_ms = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Ok(Self {
            mean_ms: per_image_ms.iter().sum::<f64>() / n as f64,
            median_ms,
            max_ms: sorted[n - 1],
            per_image_ms,
        })
    }
}

/// Benchmark outcome: extraction timings and, separately, file decode
/// timings, since the two phases answer different questions.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub extract: TimingStats,
    pub load: TimingStats,
}

/// Times the full `extract` pipeline per image over `repetitions` passes.
/// Disk read + decode is timed separately and reported alongside.
pub fn benchmark_runtime(
    paths: &[PathBuf],
    spec: &NeighborhoodSpec,
    cfg: &PreprocessConfig,
    repetitions: usize,
) -> Result<BenchReport> {
    if paths.is_empty() {
        return Err(Error::InvalidParameter("no images to benchmark".into()));
    }
    if repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be >= 1".into()));
    }
    let mut extract_ms = Vec::with_capacity(paths.len() * repetitions);
    let mut load_ms = Vec::with_capacity(paths.len() * repetitions);
    for _ in 0..repetitions {
        for path in paths {
            let start = Instant::now();
            let img = load_image(Path::new(path))?;
            load_ms.push(start.elapsed().as_secs_f64() * 1e3);

            let start = Instant::now();
            let _features = extract(&img, spec, cfg)?;
            extract_ms.push(start.elapsed().as_secs_f64() * 1e3);
        }
    }
    Ok(BenchReport {
        extract: TimingStats::from_samples(extract_ms)?,
        load: TimingStats::from_samples(load_ms)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Metric;
    use crate::rng::SplitMix64;

    fn cluster_sample(id: u64, label: &str, center: f64, rng: &mut SplitMix64) -> Sample {
        // Probability vectors near (center, 1-center), well inside one class.
        let jitter = (rng.next_f64() - 0.5) * 0.02;
        let a = (center + jitter).clamp(0.0, 1.0);
        Sample::new(id, label, vec![a, 1.0 - a])
    }

    fn two_cluster_dataset(n_per_class: usize, seed: u64) -> Vec<Sample> {
        let mut rng = SplitMix64::new(seed);
        let mut samples = Vec::new();
        for i in 0..n_per_class {
            samples.push(cluster_sample(i as u64, "low", 0.1, &mut rng));
        }
        for i in 0..n_per_class {
            samples.push(cluster_sample(
                (n_per_class + i) as u64,
                "high",
                0.9,
                &mut rng,
            ));
        }
        samples
    }

    #[test]
    fn kfold_balanced_hundred_samples() {
        let samples = two_cluster_dataset(50, 1);
        let plan = stratified_kfold(&samples, 10, 42).unwrap();
        assert_eq!(plan.fold_sizes(), vec![10; 10]);
        for fold in 0..10 {
            let indices = plan.fold_indices(fold);
            let low = indices.iter().filter(|&&i| samples[i].label == "low").count();
            assert_eq!(low, 5, "fold {fold}");
        }
    }

    #[test]
    fn kfold_deterministic_given_seed() {
        let samples = two_cluster_dataset(20, 2);
        let a = stratified_kfold(&samples, 5, 7).unwrap();
        let b = stratified_kfold(&samples, 5, 7).unwrap();
        assert_eq!(a, b);
        let c = stratified_kfold(&samples, 5, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn kfold_round_robin_remainder() {
        let mut rng = SplitMix64::new(3);
        let samples: Vec<Sample> = (0..10)
            .map(|i| cluster_sample(i, "only", 0.5, &mut rng))
            .collect();
        let plan = stratified_kfold(&samples, 3, 42).unwrap();
        let mut sizes = plan.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
    }

    #[test]
    fn kfold_partitions_and_stratifies_across_seeds() {
        let samples = two_cluster_dataset(23, 4);
        for seed in 0..20 {
            let plan = stratified_kfold(&samples, 7, seed).unwrap();
            assert_eq!(plan.assignments().len(), samples.len());
            for class in ["low", "high"] {
                let mut per_fold = vec![0usize; 7];
                for (i, &f) in plan.assignments().iter().enumerate() {
                    if samples[i].label == class {
                        per_fold[f] += 1;
                    }
                }
                let min = per_fold.iter().min().unwrap();
                let max = per_fold.iter().max().unwrap();
                assert!(max - min <= 1, "seed {seed} class {class}: {per_fold:?}");
            }
        }
    }

    #[test]
    fn kfold_rejects_bad_input() {
        let samples = two_cluster_dataset(5, 5);
        assert!(stratified_kfold(&samples, 1, 0).is_err());
        assert!(stratified_kfold(&[], 2, 0).is_err());
    }

    #[test]
    fn cross_validate_separable_clusters_is_perfect() {
        let samples = two_cluster_dataset(50, 6);
        let report = cross_validate(&samples, 10, &KnnConfig::default(), 42).unwrap();
        assert_eq!(report.mean_accuracy, 1.0);
        assert!(report.per_fold_accuracy.iter().all(|&a| a == 1.0));
        assert_eq!(report.total_samples(), 100);
    }

    #[test]
    fn cross_validate_degenerate_identical_vectors_is_deterministic() {
        // Every sample shares one feature vector; with T=1 the prediction is
        // decided purely by the tie rules, identically on every run.
        let samples: Vec<Sample> = (0..12)
            .map(|i| {
                let label = if i < 6 { "a" } else { "b" };
                Sample::new(i, label, vec![0.5, 0.5])
            })
            .collect();
        let cfg = KnnConfig {
            neighbors: 1,
            metric: Metric::Tanimoto,
        };
        let first = cross_validate(&samples, 3, &cfg, 9).unwrap();
        let second = cross_validate(&samples, 3, &cfg, 9).unwrap();
        assert_eq!(first, second);
        // All distances tie at 0, so the smallest id (always label "a" for
        // seed-independent reasons: id 0 sorts first) wins every vote.
        assert_eq!(first.confusion[0][0] + first.confusion[1][0], 12);
    }

    #[test]
    fn cross_validate_confusion_totals_match() {
        let samples = two_cluster_dataset(15, 8);
        let report = cross_validate(&samples, 5, &KnnConfig::default(), 1).unwrap();
        assert_eq!(report.total_samples(), 30);
        assert!((report.accuracy_from_confusion() - report.mean_accuracy).abs() < 1e-12);
    }

    #[test]
    fn cross_validate_is_deterministic() {
        let samples = two_cluster_dataset(20, 10);
        let a = cross_validate(&samples, 4, &KnnConfig::default(), 99).unwrap();
        let b = cross_validate(&samples, 4, &KnnConfig::default(), 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.render_table(), b.render_table());
    }

    #[test]
    fn cross_validate_rejects_oversized_t() {
        let samples = two_cluster_dataset(3, 11);
        let cfg = KnnConfig {
            neighbors: 6,
            metric: Metric::Tanimoto,
        };
        assert!(matches!(
            cross_validate(&samples, 2, &cfg, 0),
            Err(Error::InvalidFolds(_))
        ));
    }

    #[test]
    fn timing_stats_basics() {
        let stats = TimingStats::from_samples(vec![3.0, 1.0, 2.0, 10.0]).unwrap();
        assert_eq!(stats.mean_ms, 4.0);
        assert_eq!(stats.median_ms, 2.5);
        assert_eq!(stats.max_ms, 10.0);
        assert!(TimingStats::from_samples(vec![]).is_err());
        let one = TimingStats::from_samples(vec![5.0]).unwrap();
        assert_eq!(one.median_ms, 5.0);
    }

    #[test]
    fn benchmark_counts_and_bounds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let img = crate::synth::uniform_noise(32, 1234);
        crate::io::write_pgm(&path, &img).unwrap();

        let report = benchmark_runtime(
            &[path],
            &NeighborhoodSpec::default(),
            &PreprocessConfig::default(),
            5,
        )
        .unwrap();
        assert_eq!(report.extract.per_image_ms.len(), 5);
        assert_eq!(report.load.per_image_ms.len(), 5);
        let min = report
            .extract
            .per_image_ms
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(report.extract.mean_ms >= min);
        assert!(report.extract.mean_ms <= report.extract.max_ms);
    }

    #[test]
    fn benchmark_rejects_missing_image() {
        let err = benchmark_runtime(
            &[PathBuf::from("/nonexistent/x.pgm")],
            &NeighborhoodSpec::default(),
            &PreprocessConfig::default(),
            1,
        );
        match err {
            Err(Error::Io { path, .. }) => assert!(path.to_string_lossy().contains("x.pgm")),
            other => panic!("expected Io error, got {other:?}"),
        }
    }
}
