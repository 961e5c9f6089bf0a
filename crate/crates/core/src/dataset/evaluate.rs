//! Scoring a directory of predictions against ground truth.
//!
//! Predictions live at `pred_dir/{kind}/{severity}/<name>` and, optionally,
//! `pred_dir/clean/<name>`, where `<name>` follows a [`NamingRule`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::codec::{load_depth, DepthEncoding, DEFAULT_DEPTH_SCALE};
use super::layout::{discover_predictions, list_files, NamingRule};
use crate::corruptions::{CorruptionKind, Severity};
use crate::error::{Error, Result};
use crate::metrics::{aggregate_cell, compute_metrics, DepthMap, EvalOptions, MetricVector};
use crate::robustness::{CellRecord, CleanRecord, FrameRecord, GridFile, GRID_SCHEMA_VERSION};

pub const CLEAN_DIR: &str = "clean";

#[derive(Clone, Debug)]
pub struct EvaluateRequest {
    pub model: String,
    pub gt_dir: PathBuf,
    pub pred_dir: PathBuf,
    /// Kinds to score; empty means every kind with a directory.
    pub kinds: Vec<CorruptionKind>,
    /// Severities to score; empty means all five.
    pub severities: Vec<Severity>,
    pub options: EvalOptions,
    /// Divisor for 16-bit PNG depth files.
    pub depth_scale: f64,
    pub rule: NamingRule,
    /// Worker threads; 0 picks the rayon default.
    pub workers: usize,
}

impl EvaluateRequest {
    pub fn new(model: impl Into<String>, gt_dir: impl Into<PathBuf>, pred_dir: impl Into<PathBuf>) -> Self {
        Self {
            model: model.into(),
            gt_dir: gt_dir.into(),
            pred_dir: pred_dir.into(),
            kinds: Vec::new(),
            severities: Vec::new(),
            options: EvalOptions::default(),
            depth_scale: DEFAULT_DEPTH_SCALE,
            rule: NamingRule::default(),
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluateOutcome {
    pub grid: GridFile,
    pub warnings: Vec<String>,
}

/// Frame ids of the files in `dir` matching `rule`, sorted.
pub fn frame_ids_in(dir: &Path, rule: &NamingRule) -> Result<Vec<String>> {
    let mut ids: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in list_files(dir)? {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(id) = rule.frame_id(name) {
            if let Some(prev) = ids.insert(id.to_owned(), path.clone()) {
                return Err(Error::Layout(format!(
                    "frame `{id}` matches both {} and {}",
                    prev.display(),
                    path.display()
                )));
            }
        }
    }
    Ok(ids.into_keys().collect())
}

fn load(path: &Path, scale: f64) -> Result<DepthMap> {
    Ok(load_depth(path, DepthEncoding::for_path(path, scale))?.depth)
}

struct CellScore {
    per_frame: Vec<(String, MetricVector)>,
    skipped: Vec<String>,
}

fn score_cell(
    label: &str,
    dir: &Path,
    req: &EvaluateRequest,
    gt: &BTreeMap<String, DepthMap>,
    ids: &[String],
) -> Result<CellScore> {
    let found = discover_predictions(dir, &req.rule, ids)?;
    if !found.is_complete() {
        return Err(Error::Layout(format!(
            "cell {label}: {} of {} predictions found; missing {}",
            found.found.len(),
            ids.len(),
            found.missing.join(", ")
        )));
    }
    let results: Vec<(String, Result<MetricVector>)> = found
        .found
        .par_iter()
        .map(|(id, path)| {
            let r = load(path, req.depth_scale).and_then(|pred| {
                let g = &gt[id];
                if (pred.width(), pred.height()) != (g.width(), g.height()) {
                    return Err(Error::invalid(format!(
                        "{}: prediction is {}x{}, ground truth is {}x{}",
                        path.display(),
                        pred.width(),
                        pred.height(),
                        g.width(),
                        g.height()
                    )));
                }
                compute_metrics(&pred, g, &req.options)
            });
            (id.clone(), r)
        })
        .collect();
    let mut score = CellScore {
        per_frame: Vec::new(),
        skipped: Vec::new(),
    };
    for (id, r) in results {
        match r {
            Ok(m) => score.per_frame.push((id, m)),
            Err(Error::Degenerate(_)) => score.skipped.push(id),
            Err(e) => return Err(e),
        }
    }
    Ok(score)
}

/// Loads ground truth and every prediction cell, then builds a grid file
/// with per-cell means and per-frame rows.
///
/// A cell directory missing any ground-truth frame is an error. Frames whose
/// joint validity mask is empty are skipped with a warning; a cell with no
/// scoreable frame is left out of the grid.
pub fn evaluate_predictions(req: &EvaluateRequest) -> Result<EvaluateOutcome> {
    req.options.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(req.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| evaluate_inner(req))
}

fn evaluate_inner(req: &EvaluateRequest) -> Result<EvaluateOutcome> {
    let ids = frame_ids_in(&req.gt_dir, &req.rule)?;
    if ids.is_empty() {
        return Err(Error::Layout(format!("no ground-truth frames in {}", req.gt_dir.display())));
    }
    let gt_paths = discover_predictions(&req.gt_dir, &req.rule, &ids)?.found;
    let loaded: Vec<(String, Result<DepthMap>)> = gt_paths
        .par_iter()
        .map(|(id, p)| (id.clone(), load(p, req.depth_scale)))
        .collect();
    let mut gt = BTreeMap::new();
    for (id, r) in loaded {
        gt.insert(id, r?);
    }

    let kinds: Vec<CorruptionKind> = if req.kinds.is_empty() {
        CorruptionKind::ALL.to_vec()
    } else {
        let mut k = req.kinds.clone();
        k.sort();
        k.dedup();
        k
    };
    let severities: Vec<Severity> = if req.severities.is_empty() {
        Severity::all().collect()
    } else {
        let mut s = req.severities.clone();
        s.sort();
        s.dedup();
        s
    };

    let mut warnings = Vec::new();
    let mut declared = Vec::new();
    let mut cells = Vec::new();
    let mut frames = Vec::new();
    let skip_note = |label: &str, skipped: &[String], warnings: &mut Vec<String>| {
        for id in skipped {
            warnings.push(format!("{label}: frame `{id}` skipped (empty joint validity mask)"));
        }
    };

    for &kind in &kinds {
        let kind_dir = req.pred_dir.join(kind.name());
        if !kind_dir.is_dir() {
            continue;
        }
        declared.push(kind);
        for &severity in &severities {
            let dir = kind_dir.join(severity.to_string());
            let label = format!("{kind}/{severity}");
            if !dir.is_dir() {
                warnings.push(format!("cell {label}: no prediction directory"));
                continue;
            }
            let score = score_cell(&label, &dir, req, &gt, &ids)?;
            skip_note(&label, &score.skipped, &mut warnings);
            if score.per_frame.is_empty() {
                warnings.push(format!("cell {label}: every frame was skipped"));
                continue;
            }
            let vectors: Vec<MetricVector> = score.per_frame.iter().map(|(_, m)| *m).collect();
            cells.push(CellRecord {
                kind,
                severity,
                frames: vectors.len(),
                skipped: score.skipped.len(),
                metrics: aggregate_cell(&vectors)?,
            });
            frames.extend(score.per_frame.into_iter().map(|(frame_id, metrics)| FrameRecord {
                kind: Some(kind),
                severity: Some(severity),
                frame_id,
                metrics,
            }));
        }
    }

    let clean_dir = req.pred_dir.join(CLEAN_DIR);
    let clean = if clean_dir.is_dir() {
        let score = score_cell(CLEAN_DIR, &clean_dir, req, &gt, &ids)?;
        skip_note(CLEAN_DIR, &score.skipped, &mut warnings);
        let vectors: Vec<MetricVector> = score.per_frame.iter().map(|(_, m)| *m).collect();
        let record = if vectors.is_empty() {
            warnings.push("clean: every frame was skipped".into());
            None
        } else {
            Some(CleanRecord {
                frames: vectors.len(),
                skipped: score.skipped.len(),
                metrics: aggregate_cell(&vectors)?,
            })
        };
        let clean_rows = score.per_frame.into_iter().map(|(frame_id, metrics)| FrameRecord {
            kind: None,
            severity: None,
            frame_id,
            metrics,
        });
        frames.splice(0..0, clean_rows);
        record
    } else {
        None
    };

    if cells.is_empty() && clean.is_none() {
        return Err(Error::Layout(format!(
            "no scoreable prediction cells under {}",
            req.pred_dir.display()
        )));
    }

    Ok(EvaluateOutcome {
        grid: GridFile {
            schema_version: GRID_SCHEMA_VERSION,
            model: req.model.clone(),
            eval_options: req.options,
            kinds: declared,
            cells,
            clean,
            frames,
        },
        warnings,
    })
}
