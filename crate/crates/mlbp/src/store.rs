//! Dataset manifests and feature-vector persistence.
//!
//! Both formats are plain CSV, UTF-8, LF or CRLF accepted on read and LF
//! written. A feature store starts with a self-describing comment line
//! (`# mlbp P=8 R=1.0 UT=2 W=128 sigma=1.0 ...`), then the column header
//! `id,label,f0..f{P+1}`, then one row per image.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::classify::Sample;
use crate::error::{Error, Result};
use crate::lbp::NeighborhoodSpec;
use crate::preprocess::PreprocessConfig;

/// Ordered list of (image path, class label) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
}

/// Reads a `path,label` CSV. Relative paths are resolved against the
/// manifest's own directory.
pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut lines = text.lines().enumerate();

    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r').trim() == "path,label" => {}
        Some((_, header)) => {
            return Err(Error::Manifest {
                path: path.to_path_buf(),
                line: 1,
                detail: format!("expected header `path,label`, got {header:?}"),
            })
        }
        None => {
            return Err(Error::Manifest {
                path: path.to_path_buf(),
                line: 1,
                detail: "empty file".into(),
            })
        }
    }

    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, raw) in lines {
        let line_no = index + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (image, label) = line.split_once(',').ok_or_else(|| Error::Manifest {
            path: path.to_path_buf(),
            line: line_no,
            detail: "expected two comma-separated fields".into(),
        })?;
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::Manifest {
                path: path.to_path_buf(),
                line: line_no,
                detail: "empty label".into(),
            });
        }
        let image = image.trim();
        if !seen.insert(image.to_string()) {
            return Err(Error::Manifest {
                path: path.to_path_buf(),
                line: line_no,
                detail: format!("duplicate path {image:?}"),
            });
        }
        let resolved = if Path::new(image).is_absolute() {
            PathBuf::from(image)
        } else {
            base.join(image)
        };
        entries.push(ManifestEntry {
            path: resolved,
            label: label.to_string(),
        });
    }
    Ok(Manifest { entries })
}

const IMAGE_EXTENSIONS: [&str; 2] = ["pgm", "png"];

/// Scans a class-per-directory tree: each immediate subdirectory of `root`
/// is a class, containing image files. Only one level is scanned, ordering
/// is lexicographic by class then filename. Empty class directories produce
/// warnings, not errors.
pub fn scan_directory(root: &Path) -> Result<(Manifest, Vec<String>)> {
    let read_dir = |dir: &Path| -> Result<Vec<PathBuf>> {
        let mut items: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|source| Error::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        items.sort();
        Ok(items)
    };

    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    let mut found_class_dir = false;
    for class_dir in read_dir(root)? {
        if !class_dir.is_dir() {
            continue;
        }
        found_class_dir = true;
        let label = class_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut count = 0;
        for file in read_dir(&class_dir)? {
            let is_image = file.is_file()
                && file
                    .extension()
                    .map(|e| {
                        let e = e.to_string_lossy().to_lowercase();
                        IMAGE_EXTENSIONS.contains(&e.as_str())
                    })
                    .unwrap_or(false);
            if is_image {
                entries.push(ManifestEntry {
                    path: file,
                    label: label.clone(),
                });
                count += 1;
            }
        }
        if count == 0 {
            warnings.push(format!("class directory {class_dir:?} has no images"));
        }
    }
    if !found_class_dir {
        return Err(Error::Manifest {
            path: root.to_path_buf(),
            line: 0,
            detail: "no class subdirectories found".into(),
        });
    }
    Ok((Manifest { entries }, warnings))
}

/// Extracted feature vectors together with the configuration that produced
/// them, so a store can reject mismatched readers.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    pub spec: NeighborhoodSpec,
    pub prep: PreprocessConfig,
    pub rows: Vec<StoreRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoreRow {
    pub id: u64,
    pub label: String,
    pub features: Vec<f64>,
}

impl FeatureStore {
    pub fn new(spec: NeighborhoodSpec, prep: PreprocessConfig) -> Self {
        Self {
            spec,
            prep,
            rows: Vec::new(),
        }
    }

    /// Rows as classifier samples.
    pub fn samples(&self) -> Vec<Sample> {
        self.rows
            .iter()
            .map(|r| Sample::new(r.id, r.label.clone(), r.features.clone()))
            .collect()
    }
}

/// Serializes a store, writing to a temp file in the target directory and
/// renaming over the destination so readers never see a partial file.
pub fn write_features(path: &Path, store: &FeatureStore) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(
        text,
        "# mlbp P={} R={:?} UT={} W={} sigma={:?} kradius={} smooth={}",
        store.spec.neighbors(),
        store.spec.radius(),
        store.spec.uniformity_threshold(),
        store.prep.target_size,
        store.prep.gaussian_sigma,
        store.prep.kernel_radius,
        store.prep.smoothing_enabled as u8,
    );
    let _ = write!(text, "id,label");
    for i in 0..store.spec.feature_len() {
        let _ = write!(text, ",f{i}");
    }
    text.push('\n');
    for row in &store.rows {
        if row.features.len() != store.spec.feature_len() {
            return Err(Error::DimensionMismatch {
                expected: store.spec.feature_len(),
                got: row.features.len(),
            });
        }
        let _ = write!(text, "{},{}", row.id, row.label);
        for v in &row.features {
            let _ = write!(text, ",{v}");
        }
        text.push('\n');
    }

    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = parent
        .unwrap_or(Path::new("."))
        .join(format!(
            ".{}.tmp-{}",
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "store".into()),
            std::process::id()
        ));
    fs::write(&tmp, text).map_err(|source| Error::Io {
        path: tmp.clone(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_header_field(fields: &HeaderFields, key: &str, path: &Path) -> Result<String> {
    fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.clone())
        .ok_or_else(|| Error::Store {
            path: path.to_path_buf(),
            line: 1,
            detail: format!("header missing {key}="),
        })
}

type HeaderFields = Vec<(String, String)>;

/// Reads a feature store. When `requested` is given, the file is rejected
/// unless its stored neighborhood spec matches it exactly.
pub fn read_features(path: &Path, requested: Option<&NeighborhoodSpec>) -> Result<FeatureStore> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| Error::Store {
        path: path.to_path_buf(),
        line: 1,
        detail: "empty file".into(),
    })?;
    let header = header.trim_end_matches('\r');
    let rest = header.strip_prefix("# mlbp ").ok_or_else(|| Error::Store {
        path: path.to_path_buf(),
        line: 1,
        detail: "missing `# mlbp ...` header".into(),
    })?;
    let fields: HeaderFields = rest
        .split_whitespace()
        .filter_map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
        })
        .collect();
    let parse_num = |key: &str| -> Result<f64> {
        parse_header_field(&fields, key, path)?
            .parse()
            .map_err(|_| Error::Store {
                path: path.to_path_buf(),
                line: 1,
                detail: format!("invalid {key}= value"),
            })
    };
    let spec = NeighborhoodSpec::new(
        parse_num("P")? as usize,
        parse_num("R")?,
        parse_num("UT")? as u32,
    )?;
    let prep = PreprocessConfig {
        target_size: parse_num("W")? as usize,
        gaussian_sigma: parse_num("sigma")?,
        kernel_radius: parse_num("kradius").unwrap_or(2.0) as usize,
        smoothing_enabled: parse_num("smooth").unwrap_or(1.0) != 0.0,
    };
    if let Some(want) = requested {
        if want != &spec {
            return Err(Error::SpecMismatch(format!(
                "store has P={} R={:?} UT={}, requested P={} R={:?} UT={}",
                spec.neighbors(),
                spec.radius(),
                spec.uniformity_threshold(),
                want.neighbors(),
                want.radius(),
                want.uniformity_threshold()
            )));
        }
    }

    let expected_cols = 2 + spec.feature_len();
    match lines.next() {
        Some((_, columns))
            if columns.trim_end_matches('\r').starts_with("id,label") =>
        {
            let n = columns.trim_end_matches('\r').split(',').count();
            if n != expected_cols {
                return Err(Error::Store {
                    path: path.to_path_buf(),
                    line: 2,
                    detail: format!("expected {expected_cols} columns, header has {n}"),
                });
            }
        }
        _ => {
            return Err(Error::Store {
                path: path.to_path_buf(),
                line: 2,
                detail: "missing `id,label,f0..` column header".into(),
            })
        }
    }

    let mut rows = Vec::new();
    for (index, raw) in lines {
        let line_no = index + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            return Err(Error::Store {
                path: path.to_path_buf(),
                line: line_no,
                detail: format!("expected {expected_cols} fields, got {}", fields.len()),
            });
        }
        let id: u64 = fields[0].parse().map_err(|_| Error::Store {
            path: path.to_path_buf(),
            line: line_no,
            detail: format!("invalid id {:?}", fields[0]),
        })?;
        let label = fields[1].to_string();
        if label.is_empty() {
            return Err(Error::Store {
                path: path.to_path_buf(),
                line: line_no,
                detail: "empty label".into(),
            });
        }
        let mut features = Vec::with_capacity(spec.feature_len());
        for field in &fields[2..] {
            let v: f64 = field.parse().map_err(|_| Error::Store {
                path: path.to_path_buf(),
                line: line_no,
                detail: format!("invalid feature value {field:?}"),
            })?;
            features.push(v);
        }
        let sum: f64 = features.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Store {
                path: path.to_path_buf(),
                line: line_no,
                detail: format!("features sum to {sum}, expected 1"),
            });
        }
        rows.push(StoreRow {
            id,
            label,
            features,
        });
    }
    Ok(FeatureStore { spec, prep, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample_store() -> FeatureStore {
        let mut store = FeatureStore::new(
            NeighborhoodSpec::default(),
            PreprocessConfig::default(),
        );
        // 10-dim probabilistic rows with awkward decimals.
        let mut f0 = vec![0.0; 10];
        f0[8] = 1.0;
        let mut f1 = vec![0.1; 10];
        f1[9] = 0.1;
        let mut f2 = vec![1.0 / 3.0, 1.0 / 7.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let partial: f64 = f2.iter().sum();
        f2[9] = 1.0 - partial;
        store.rows.push(StoreRow {
            id: 0,
            label: "male".into(),
            features: f0,
        });
        store.rows.push(StoreRow {
            id: 1,
            label: "female".into(),
            features: f1,
        });
        store.rows.push(StoreRow {
            id: 2,
            label: "male".into(),
            features: f2,
        });
        store
    }

    #[test]
    fn manifest_round_trip_basics() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        fs::write(&path, "path,label\na.png,male\nb.png,female\n").unwrap();
        let manifest = read_manifest(&path).unwrap();
        assert_eq!(manifest.entries.len(), 2);
        assert_eq!(manifest.entries[0].path, dir.path().join("a.png"));
        assert_eq!(manifest.entries[1].label, "female");
    }

    #[test]
    fn manifest_accepts_crlf() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("crlf.csv");
        fs::write(&path, "path,label\r\na.png,male\r\nb.png,female\r\n").unwrap();
        let manifest = read_manifest(&path).unwrap();
        assert_eq!(manifest.entries.len(), 2);
        assert_eq!(manifest.entries[0].label, "male");
    }

    #[test]
    fn manifest_rejects_duplicate_path_with_line_number() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("dup.csv");
        fs::write(&path, "path,label\na.png,male\na.png,female\n").unwrap();
        match read_manifest(&path) {
            Err(Error::Manifest { line, detail, .. }) => {
                assert_eq!(line, 3);
                assert!(detail.contains("duplicate"));
            }
            other => panic!("expected manifest error, got {other:?}"),
        }
    }

    #[test]
    fn manifest_rejects_missing_header_and_empty_label() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a.png,male\n").unwrap();
        assert!(matches!(
            read_manifest(&path),
            Err(Error::Manifest { line: 1, .. })
        ));
        fs::write(&path, "path,label\na.png,\n").unwrap();
        assert!(matches!(
            read_manifest(&path),
            Err(Error::Manifest { line: 2, .. })
        ));
    }

    #[test]
    fn scan_finds_class_directories_deterministically() {
        let dir = tempdir().unwrap();
        for (class, names) in [("male", vec!["c.pgm", "a.pgm", "b.pgm"]), ("female", vec!["y.png", "x.png"])] {
            let class_dir = dir.path().join(class);
            fs::create_dir(&class_dir).unwrap();
            for name in names {
                fs::write(class_dir.join(name), b"stub").unwrap();
            }
        }
        // nested directories are ignored
        fs::create_dir_all(dir.path().join("male/nested")).unwrap();
        fs::write(dir.path().join("male/nested/deep.png"), b"stub").unwrap();
        // non-image files are ignored
        fs::write(dir.path().join("female/notes.txt"), b"stub").unwrap();

        let (manifest, warnings) = scan_directory(dir.path()).unwrap();
        let labels: Vec<&str> = manifest.entries.iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, vec!["female", "female", "male", "male", "male"]);
        let files: Vec<String> = manifest
            .entries
            .iter()
            .map(|e| e.path.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(files, vec!["x.png", "y.png", "a.pgm", "b.pgm", "c.pgm"]);
        assert!(warnings.is_empty());

        let (again, _) = scan_directory(dir.path()).unwrap();
        assert_eq!(manifest, again);
    }

    #[test]
    fn scan_warns_on_empty_class_and_rejects_flat_dirs() {
        let dir = tempdir().unwrap();
        fs::create_dir(dir.path().join("empty_class")).unwrap();
        let (manifest, warnings) = scan_directory(dir.path()).unwrap();
        assert!(manifest.entries.is_empty());
        assert_eq!(warnings.len(), 1);

        let flat = tempdir().unwrap();
        fs::write(flat.path().join("loose.png"), b"stub").unwrap();
        assert!(scan_directory(flat.path()).is_err());
    }

    #[test]
    fn store_round_trip_preserves_values() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let store = sample_store();
        write_features(&path, &store).unwrap();
        let back = read_features(&path, None).unwrap();
        assert_eq!(back.rows.len(), 3);
        for (a, b) in store.rows.iter().zip(&back.rows) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.label, b.label);
            for (x, y) in a.features.iter().zip(&b.features) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert_eq!(back.spec, store.spec);
        assert_eq!(back.prep, store.prep);
    }

    #[test]
    fn store_file_is_plain_csv() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.csv");
        write_features(&path, &sample_store()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# mlbp P=8 R=1.0 UT=2 W=128 sigma=1.0"));
        assert_eq!(
            lines.next().unwrap(),
            "id,label,f0,f1,f2,f3,f4,f5,f6,f7,f8,f9"
        );
        assert!(lines.next().unwrap().starts_with("0,male,"));
    }

    #[test]
    fn store_rejects_wrong_arity_with_row_number() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.csv");
        write_features(&path, &sample_store()).unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("3,male,0.5,0.5\n");
        fs::write(&path, text).unwrap();
        match read_features(&path, None) {
            Err(Error::Store { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected store error, got {other:?}"),
        }
    }

    #[test]
    fn store_rejects_spec_mismatch() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.csv");
        write_features(&path, &sample_store()).unwrap();
        let requested = NeighborhoodSpec::with_default_threshold(16, 2.0).unwrap();
        assert!(matches!(
            read_features(&path, Some(&requested)),
            Err(Error::SpecMismatch(_))
        ));
        let matching = NeighborhoodSpec::default();
        assert!(read_features(&path, Some(&matching)).is_ok());
    }

    #[test]
    fn store_rejects_non_probabilistic_row() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let mut store = sample_store();
        store.rows[0].features = vec![0.5; 10];
        write_features(&path, &store).unwrap();
        assert!(matches!(
            read_features(&path, None),
            Err(Error::Store { line: 3, .. })
        ));
    }

    #[test]
    fn write_rejects_wrong_dimension() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let mut store = sample_store();
        store.rows[1].features.pop();
        assert!(matches!(
            write_features(&path, &store),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
