use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corruptions::{CorruptionKind, Severity};
use crate::error::{Error, Result};
use crate::metrics::{EvalOptions, MetricVector};

/// Aggregated metrics of one model over a set of corruption kinds at all
/// five severities, plus an optional clean (uncorrupted) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationGrid {
    model: String,
    kinds: BTreeSet<CorruptionKind>,
    cells: BTreeMap<(CorruptionKind, Severity), MetricVector>,
    clean: Option<MetricVector>,
}

impl EvaluationGrid {
    /// An empty grid declaring which kinds it must cover.
    pub fn new(model: impl Into<String>, kinds: impl IntoIterator<Item = CorruptionKind>) -> Self {
        Self {
            model: model.into(),
            kinds: kinds.into_iter().collect(),
            cells: BTreeMap::new(),
            clean: None,
        }
    }

    /// A complete grid with every cell produced by `f`.
    pub fn from_fn(
        model: impl Into<String>,
        kinds: impl IntoIterator<Item = CorruptionKind>,
        mut f: impl FnMut(CorruptionKind, Severity) -> MetricVector,
    ) -> Result<Self> {
        let mut grid = Self::new(model, kinds);
        let declared: Vec<_> = grid.kinds.iter().copied().collect();
        for kind in declared {
            for s in Severity::all() {
                grid.insert(kind, s, f(kind, s))?;
            }
        }
        Ok(grid)
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn kinds(&self) -> impl Iterator<Item = CorruptionKind> + '_ {
        self.kinds.iter().copied()
    }

    pub fn kind_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn insert(&mut self, kind: CorruptionKind, severity: Severity, metrics: MetricVector) -> Result<()> {
        if !self.kinds.contains(&kind) {
            return Err(Error::invalid(format!("corruption `{kind}` is not declared in grid `{}`", self.model)));
        }
        metrics.validate()?;
        self.cells.insert((kind, severity), metrics);
        Ok(())
    }

    pub fn set_clean(&mut self, metrics: MetricVector) -> Result<()> {
        metrics.validate()?;
        self.clean = Some(metrics);
        Ok(())
    }

    pub fn clean(&self) -> Option<&MetricVector> {
        self.clean.as_ref()
    }

    pub fn cell(&self, kind: CorruptionKind, severity: Severity) -> Option<&MetricVector> {
        self.cells.get(&(kind, severity))
    }

    pub fn cells(&self) -> impl Iterator<Item = ((CorruptionKind, Severity), &MetricVector)> + '_ {
        self.cells.iter().map(|(k, v)| (*k, v))
    }

    /// Declared `(kind, severity)` pairs with no metrics.
    pub fn missing_cells(&self) -> Vec<(CorruptionKind, Severity)> {
        self.kinds
            .iter()
            .flat_map(|&k| Severity::all().map(move |s| (k, s)))
            .filter(|key| !self.cells.contains_key(key))
            .collect()
    }

    pub fn check_complete(&self) -> Result<()> {
        if self.kinds.is_empty() {
            return Err(Error::invalid(format!("grid `{}` declares no corruption kinds", self.model)));
        }
        let missing = self.missing_cells();
        if missing.is_empty() {
            return Ok(());
        }
        let list: Vec<String> = missing.iter().map(|(k, s)| format!("{k}/{s}")).collect();
        Err(Error::invalid(format!(
            "grid `{}` is missing {} cell(s): {}",
            self.model,
            missing.len(),
            list.join(", ")
        )))
    }

    /// The five severity cells of one kind, if all present.
    pub(crate) fn kind_cells(&self, kind: CorruptionKind) -> Result<Vec<&MetricVector>> {
        Severity::all()
            .map(|s| {
                self.cell(kind, s).ok_or_else(|| {
                    Error::invalid(format!("grid `{}` is missing cell {kind}/{s}", self.model))
                })
            })
            .collect()
    }

    /// Same grid with every cell transformed by `f` (results validated).
    pub fn map_cells(&self, mut f: impl FnMut(CorruptionKind, Severity, &MetricVector) -> MetricVector) -> Result<Self> {
        let mut out = Self::new(self.model.clone(), self.kinds.iter().copied());
        for (&(k, s), v) in &self.cells {
            out.insert(k, s, f(k, s, v))?;
        }
        out.clean = self.clean;
        Ok(out)
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }
}

pub const GRID_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub kind: CorruptionKind,
    pub severity: Severity,
    /// Frames that contributed to the mean.
    pub frames: usize,
    /// Frames dropped because their joint validity mask was empty.
    pub skipped: usize,
    pub metrics: MetricVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleanRecord {
    pub frames: usize,
    pub skipped: usize,
    pub metrics: MetricVector,
}

/// Per-frame metrics; `kind`/`severity` are absent for clean frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kind: Option<CorruptionKind>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub severity: Option<Severity>,
    pub frame_id: String,
    pub metrics: MetricVector,
}

/// On-disk evaluation grid (JSON, `schema_version` 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub schema_version: u32,
    pub model: String,
    pub eval_options: EvalOptions,
    pub kinds: Vec<CorruptionKind>,
    pub cells: Vec<CellRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clean: Option<CleanRecord>,
    #[serde(default)]
    pub frames: Vec<FrameRecord>,
}

impl GridFile {
    /// Document for a grid without per-frame detail.
    pub fn from_grid(grid: &EvaluationGrid, eval_options: EvalOptions) -> Self {
        Self {
            schema_version: GRID_SCHEMA_VERSION,
            model: grid.model.clone(),
            eval_options,
            kinds: grid.kinds.iter().copied().collect(),
            cells: grid
                .cells
                .iter()
                .map(|(&(kind, severity), &metrics)| CellRecord {
                    kind,
                    severity,
                    frames: 0,
                    skipped: 0,
                    metrics,
                })
                .collect(),
            clean: grid.clean.map(|metrics| CleanRecord {
                frames: 0,
                skipped: 0,
                metrics,
            }),
            frames: Vec::new(),
        }
    }

    pub fn to_grid(&self) -> Result<EvaluationGrid> {
        let mut grid = EvaluationGrid::new(self.model.clone(), self.kinds.iter().copied());
        for c in &self.cells {
            if grid.cell(c.kind, c.severity).is_some() {
                return Err(Error::Schema(format!("duplicate cell {}/{}", c.kind, c.severity)));
            }
            grid.insert(c.kind, c.severity, c.metrics)?;
        }
        if let Some(clean) = &self.clean {
            grid.set_clean(clean.metrics)?;
        }
        Ok(grid)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GridFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if file.schema_version != GRID_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "grid schema_version {} is not supported (expected {GRID_SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("grid serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(e: f64, a: f64) -> MetricVector {
        MetricVector::from_array([e, e, e, e, a, a, a])
    }

    #[test]
    fn completeness_lists_missing_cells() {
        let mut g = EvaluationGrid::new("m", [CorruptionKind::Fog]);
        for s in 1..=4 {
            g.insert(CorruptionKind::Fog, Severity::new(s).unwrap(), mv(0.1, 0.9)).unwrap();
        }
        let err = g.check_complete().unwrap_err().to_string();
        assert!(err.contains("fog/5"), "{err}");
        g.insert(CorruptionKind::Fog, Severity::new(5).unwrap(), mv(0.1, 0.9)).unwrap();
        assert!(g.check_complete().is_ok());
    }

    #[test]
    fn undeclared_kind_and_invalid_metrics_rejected() {
        let mut g = EvaluationGrid::new("m", [CorruptionKind::Fog]);
        let s = Severity::new(1).unwrap();
        assert!(g.insert(CorruptionKind::Contrast, s, mv(0.1, 0.9)).is_err());
        assert!(g.insert(CorruptionKind::Fog, s, mv(-0.1, 0.9)).is_err());
        assert!(EvaluationGrid::new("m", []).check_complete().is_err());
    }

    #[test]
    fn grid_file_round_trip() {
        let mut g = EvaluationGrid::from_fn("m", CorruptionKind::ALL, |k, s| {
            mv(0.01 * (k.index() + s.get() as usize) as f64, 0.5)
        })
        .unwrap();
        g.set_clean(mv(0.01, 0.95)).unwrap();
        let file = GridFile::from_grid(&g, EvalOptions::default());
        let back = GridFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_grid().unwrap(), g);
    }

    #[test]
    fn grid_file_rejects_wrong_version() {
        let g = EvaluationGrid::from_fn("m", [CorruptionKind::Fog], |_, _| mv(0.1, 0.9)).unwrap();
        let mut file = GridFile::from_grid(&g, EvalOptions::default());
        file.schema_version = 99;
        assert!(matches!(GridFile::from_json(&file.to_json()), Err(Error::Schema(_))));
    }
}
