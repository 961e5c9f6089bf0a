//! Corrupted-corpus generation and its manifest.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::codec::{encode_image_png, load_image};
use super::layout::{validate_frame_id, SplitName, SplitSpec};
use crate::corruptions::{apply_with, CorruptionKind, CorruptionSpec, Severity, SeverityTable};
use crate::error::{Error, Result};
use crate::imaging::PRNG_ALGORITHM;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE_NAME: &str = "manifest.json";

/// One `(frame, kind, severity)` output. Exactly one of `digest` and
/// `error` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub frame_id: String,
    /// Source file name relative to the source directory.
    pub source: String,
    pub kind: CorruptionKind,
    pub severity: Severity,
    pub seed: u64,
    /// Output path relative to the corpus directory.
    pub output: String,
    /// Lowercase hex SHA-256 of the written PNG bytes.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Everything needed to regenerate a corpus from its source frames.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub corpus_id: String,
    pub split: SplitName,
    pub global_seed: u64,
    pub prng_algorithm: String,
    pub kinds: Vec<CorruptionKind>,
    pub severities: Vec<Severity>,
    /// Severity registry text exactly as used.
    pub registry_toml: String,
    /// Sorted by frame id, then kind, then severity.
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn failures(&self) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(|r| r.error.is_some())
    }

    pub fn failed_count(&self) -> usize {
        self.failures().count()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: DatasetManifest = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if m.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "manifest schema_version {} is not supported (expected {MANIFEST_SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Inputs of [`build_corpus`].
#[derive(Clone, Debug)]
pub struct CorpusRequest {
    pub corpus_id: String,
    pub split: SplitSpec,
    pub source_dir: PathBuf,
    pub out_dir: PathBuf,
    pub kinds: Vec<CorruptionKind>,
    pub severities: Vec<Severity>,
    pub global_seed: u64,
    /// Severity registry text; parsed and embedded in the manifest.
    pub registry_toml: String,
    /// Worker threads; 0 picks the rayon default.
    pub workers: usize,
}

pub fn output_relpath(frame_id: &str, kind: CorruptionKind, severity: Severity) -> String {
    format!("{}/{}/{frame_id}.png", kind.name(), severity)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn dedup_sorted<T: Ord + Copy>(items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort();
    v.dedup();
    v
}

/// Writes `out/{kind}/{severity}/{frame_id}.png` for every requested cell
/// and `out/manifest.json`.
///
/// Frames are processed in parallel on a pool of `workers` threads; each
/// output depends only on its derived seed, so digests do not depend on
/// scheduling. Frames that fail to load or corrupt are recorded with an
/// error and the rest of the corpus is still written.
pub fn build_corpus(req: &CorpusRequest) -> Result<DatasetManifest> {
    let table = SeverityTable::from_toml(&req.registry_toml)?;
    let kinds = dedup_sorted(&req.kinds);
    let severities = dedup_sorted(&req.severities);
    if kinds.is_empty() || severities.is_empty() {
        return Err(Error::invalid("corpus needs at least one kind and one severity"));
    }
    for id in &req.split.frame_ids {
        validate_frame_id(id)?;
    }
    std::fs::create_dir_all(&req.out_dir).map_err(|e| Error::io(&req.out_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(req.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let mut ids = req.split.frame_ids.clone();
    ids.sort();
    let per_frame: Vec<Vec<ManifestRecord>> = pool.install(|| {
        ids.par_iter()
            .map(|id| frame_records(req, &table, &kinds, &severities, id))
            .collect()
    });

    let manifest = DatasetManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        corpus_id: req.corpus_id.clone(),
        split: req.split.name,
        global_seed: req.global_seed,
        prng_algorithm: PRNG_ALGORITHM.to_owned(),
        kinds,
        severities,
        registry_toml: req.registry_toml.clone(),
        records: per_frame.into_iter().flatten().collect(),
    };
    manifest.save(&req.out_dir.join(MANIFEST_FILE_NAME))?;
    Ok(manifest)
}

fn frame_records(
    req: &CorpusRequest,
    table: &SeverityTable,
    kinds: &[CorruptionKind],
    severities: &[Severity],
    id: &str,
) -> Vec<ManifestRecord> {
    let source = format!("{id}.png");
    let frame = load_image(&req.source_dir.join(&source));
    let cells: Vec<(CorruptionKind, Severity)> =
        kinds.iter().flat_map(|&k| severities.iter().map(move |&s| (k, s))).collect();
    cells
        .par_iter()
        .map(|&(kind, severity)| {
            let spec = CorruptionSpec::for_frame(req.global_seed, id, kind, severity);
            let output = output_relpath(id, kind, severity);
            let result = frame
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|img| apply_with(&spec, img, table).map_err(|e| e.to_string()))
                .and_then(|out| {
                    let bytes = encode_image_png(&out);
                    write_output(&req.out_dir.join(&output), &bytes).map_err(|e| e.to_string())?;
                    Ok(sha256_hex(&bytes))
                });
            let (digest, error) = match result {
                Ok(d) => (Some(d), None),
                Err(e) => (None, Some(e)),
            };
            ManifestRecord {
                frame_id: id.to_owned(),
                source: source.clone(),
                kind,
                severity,
                seed: spec.seed,
                output,
                digest,
                error,
            }
        })
        .collect()
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Regenerates a corpus from a manifest and the original sources.
pub fn rebuild_from_manifest(
    manifest: &DatasetManifest,
    source_dir: &Path,
    out_dir: &Path,
    workers: usize,
) -> Result<DatasetManifest> {
    let mut ids: Vec<String> = manifest.records.iter().map(|r| r.frame_id.clone()).collect();
    ids.dedup();
    let req = CorpusRequest {
        corpus_id: manifest.corpus_id.clone(),
        split: SplitSpec::new(manifest.split, ids)?,
        source_dir: source_dir.to_owned(),
        out_dir: out_dir.to_owned(),
        kinds: manifest.kinds.clone(),
        severities: manifest.severities.clone(),
        global_seed: manifest.global_seed,
        registry_toml: manifest.registry_toml.clone(),
        workers,
    };
    build_corpus(&req)
}

/// Recomputes every listed output's digest; returns the mismatching records.
pub fn verify_corpus(manifest: &DatasetManifest, out_dir: &Path) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for r in &manifest.records {
        let Some(want) = &r.digest else { continue };
        let path = out_dir.join(&r.output);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if &sha256_hex(&bytes) != want {
            bad.push(r.output.clone());
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corruptions::DEFAULT_REGISTRY_TOML;
    use crate::dataset::codec::save_image;
    use crate::imaging::Image;

    fn request(src: &Path, out: &Path, ids: &[&str]) -> CorpusRequest {
        CorpusRequest {
            corpus_id: "unit".into(),
            split: SplitSpec::new(SplitName::Test, ids.iter().map(|s| s.to_string()).collect()).unwrap(),
            source_dir: src.to_owned(),
            out_dir: out.to_owned(),
            kinds: vec![CorruptionKind::GaussianNoise],
            severities: vec![Severity::new(3).unwrap()],
            global_seed: 42,
            registry_toml: DEFAULT_REGISTRY_TOML.to_owned(),
            workers: 1,
        }
    }

    #[test]
    fn single_cell_corpus_and_rerun() {
        let src = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        save_image(&Image::gray(16, 12, 0.5), &src.path().join("a.png")).unwrap();
        let req = request(src.path(), out.path(), &["a"]);
        let m = build_corpus(&req).unwrap();
        assert_eq!(m.records.len(), 1);
        assert_eq!(m.records[0].output, "gaussian_noise/3/a.png");
        assert!(out.path().join("gaussian_noise/3/a.png").is_file());
        assert_eq!(m.registry_toml, DEFAULT_REGISTRY_TOML);
        let again = build_corpus(&req).unwrap();
        assert_eq!(again, m);
        assert!(verify_corpus(&m, out.path()).unwrap().is_empty());
        let loaded = DatasetManifest::load(&out.path().join(MANIFEST_FILE_NAME)).unwrap();
        assert_eq!(loaded, m);
    }

    #[test]
    fn missing_source_is_marked_failed() {
        let src = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        save_image(&Image::gray(8, 8, 0.5), &src.path().join("a.png")).unwrap();
        let m = build_corpus(&request(src.path(), out.path(), &["a", "b"])).unwrap();
        assert_eq!(m.failed_count(), 1);
        let failed = m.failures().next().unwrap();
        assert_eq!(failed.frame_id, "b");
        assert!(failed.digest.is_none());
    }
}
