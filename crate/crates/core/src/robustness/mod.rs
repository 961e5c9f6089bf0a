//! Composite robustness scores over an [`EvaluationGrid`].
//!
//! **mDERS** divides the mean accuracy by one plus the mean error:
//!
//! ```text
//! mDERS = ((1/n) Σ ā_i) / (1 + (1/m) Σ ē_i)     n = 3 (a1, a2, a3)
//!                                                m = 4 (abs_rel, sq_rel, rmse, rmse_log)
//! ```
//!
//! where `ā_i`, `ē_i` are the means of each metric over the grid's
//! `(corruption, severity)` cells. Error metrics enter in their native
//! units, so `rmse` (mm) usually dominates the denominator.
//!
//! **mCE** compares a model against a baseline, per metric `D`:
//!
//! ```text
//! mCE = (1/C) Σ_c [ Σ_s D_model(s, c) / Σ_s D_baseline(s, c) ] × 100
//! ```

mod grid;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corruptions::CorruptionKind;
use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricVector};

pub use self::grid::{CellRecord, CleanRecord, EvaluationGrid, FrameRecord, GridFile, GRID_SCHEMA_VERSION};

/// How the corruption dimension is collapsed for mDERS.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdersAggregation {
    /// Metric means pooled over every cell, then one score.
    #[default]
    Pooled,
    /// One score per corruption (over its five severities), then their mean.
    MeanOfCorruptions,
}

/// The score formula applied to metric means.
pub fn ders_from_means(means: &MetricVector) -> f64 {
    let acc = Metric::ACCURACIES.iter().map(|&m| means.get(m)).sum::<f64>() / Metric::ACCURACIES.len() as f64;
    let err = Metric::ERRORS.iter().map(|&m| means.get(m)).sum::<f64>() / Metric::ERRORS.len() as f64;
    acc / (1.0 + err)
}

fn mean_of<'a>(cells: impl IntoIterator<Item = &'a MetricVector>) -> MetricVector {
    let mut sum = [0.0f64; 7];
    let mut n = 0usize;
    for c in cells {
        for (s, v) in sum.iter_mut().zip(c.to_array()) {
            *s += v;
        }
        n += 1;
    }
    MetricVector::from_array(sum.map(|s| s / n as f64))
}

/// Pooled mDERS over every cell of a complete grid.
pub fn mders(grid: &EvaluationGrid) -> Result<f64> {
    mders_with(grid, MdersAggregation::Pooled)
}

pub fn mders_with(grid: &EvaluationGrid, aggregation: MdersAggregation) -> Result<f64> {
    grid.check_complete()?;
    match aggregation {
        MdersAggregation::Pooled => Ok(ders_from_means(&mean_of(grid.cells().map(|(_, v)| v)))),
        MdersAggregation::MeanOfCorruptions => {
            let per = ders_per_corruption(grid)?;
            Ok(per.values().sum::<f64>() / per.len() as f64)
        }
    }
}

/// The score restricted to one kind's five severities, for every kind.
pub fn ders_per_corruption(grid: &EvaluationGrid) -> Result<BTreeMap<CorruptionKind, f64>> {
    grid.kinds()
        .map(|k| Ok((k, ders_from_means(&mean_of(grid.kind_cells(k)?)))))
        .collect()
}

/// Variant with each error mean divided by the clean-cell value of the same
/// metric before entering the formula. Not the published score.
pub fn mders_normalized(grid: &EvaluationGrid) -> Result<f64> {
    grid.check_complete()?;
    let clean = grid
        .clean()
        .ok_or_else(|| Error::invalid(format!("grid `{}` has no clean cell", grid.model())))?;
    let mut means = mean_of(grid.cells().map(|(_, v)| v));
    for m in Metric::ERRORS {
        let base = clean.get(m);
        if base <= 0.0 {
            return Err(Error::degenerate(format!("clean `{m}` is zero; cannot normalize")));
        }
        means.set(m, means.get(m) / base);
    }
    Ok(ders_from_means(&means))
}

fn check_same_cells(grid: &EvaluationGrid, baseline: &EvaluationGrid) -> Result<()> {
    grid.check_complete()?;
    baseline.check_complete()?;
    let a: Vec<_> = grid.kinds().collect();
    let b: Vec<_> = baseline.kinds().collect();
    if a != b {
        return Err(Error::invalid(format!(
            "grids `{}` and `{}` cover different corruption sets",
            grid.model(),
            baseline.model()
        )));
    }
    Ok(())
}

/// Per-corruption ratio `Σ_s D_model / Σ_s D_baseline` (not in percent).
pub fn corruption_errors(
    grid: &EvaluationGrid,
    baseline: &EvaluationGrid,
    metric: Metric,
) -> Result<BTreeMap<CorruptionKind, f64>> {
    check_same_cells(grid, baseline)?;
    grid.kinds()
        .map(|k| {
            let num: f64 = grid.kind_cells(k)?.iter().map(|v| v.get(metric)).sum();
            let den: f64 = baseline.kind_cells(k)?.iter().map(|v| v.get(metric)).sum();
            if den == 0.0 {
                return Err(Error::DivisionDegenerate {
                    corruption: k.name().to_string(),
                    metric: metric.name().to_string(),
                });
            }
            Ok((k, num / den))
        })
        .collect()
}

/// mCE of `grid` against `baseline` for one metric, in percent.
pub fn mce(grid: &EvaluationGrid, baseline: &EvaluationGrid, metric: Metric) -> Result<f64> {
    let ratios = corruption_errors(grid, baseline, metric)?;
    Ok(100.0 * ratios.values().sum::<f64>() / ratios.len() as f64)
}

/// mCE for each of the seven metrics.
pub fn mce_all(grid: &EvaluationGrid, baseline: &EvaluationGrid) -> Result<BTreeMap<Metric, f64>> {
    Metric::ALL.iter().map(|&m| Ok((m, mce(grid, baseline, m)?))).collect()
}

/// mCE section of a [`RobustnessReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MceSummary {
    pub baseline: String,
    /// Percent, per metric.
    pub mce: BTreeMap<Metric, f64>,
    /// Percent, per corruption then metric.
    pub corruption_errors: BTreeMap<CorruptionKind, BTreeMap<Metric, f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub model: String,
    pub mders: f64,
    pub mders_mean_of_corruptions: f64,
    pub ders: BTreeMap<CorruptionKind, f64>,
    /// Clean-normalized error variant, when the grid has a clean cell.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mders_normalized_extension: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mce: Option<MceSummary>,
}

pub fn robustness_report(grid: &EvaluationGrid, baseline: Option<&EvaluationGrid>) -> Result<RobustnessReport> {
    let mce = match baseline {
        None => None,
        Some(base) => {
            let mut per_kind: BTreeMap<CorruptionKind, BTreeMap<Metric, f64>> = BTreeMap::new();
            for m in Metric::ALL {
                for (k, r) in corruption_errors(grid, base, m)? {
                    per_kind.entry(k).or_default().insert(m, 100.0 * r);
                }
            }
            Some(MceSummary {
                baseline: base.model().to_string(),
                mce: mce_all(grid, base)?,
                corruption_errors: per_kind,
            })
        }
    };
    let normalized = match grid.clean() {
        Some(_) => mders_normalized(grid).ok(),
        None => None,
    };
    Ok(RobustnessReport {
        model: grid.model().to_string(),
        mders: mders(grid)?,
        mders_mean_of_corruptions: mders_with(grid, MdersAggregation::MeanOfCorruptions)?,
        ders: ders_per_corruption(grid)?,
        mders_normalized_extension: normalized,
        mce,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corruptions::Severity;

    fn uniform(model: &str, e: f64, a: f64) -> EvaluationGrid {
        EvaluationGrid::from_fn(model, CorruptionKind::ALL, |_, _| {
            MetricVector::from_array([e, e, e, e, a, a, a])
        })
        .unwrap()
    }

    #[test]
    fn perfect_model_scores_one() {
        let g = EvaluationGrid::from_fn("p", CorruptionKind::ALL, |_, _| MetricVector::PERFECT).unwrap();
        assert_eq!(mders(&g).unwrap(), 1.0);
    }

    #[test]
    fn closed_form_point_four() {
        let g = uniform("m", 0.25, 0.5);
        assert!((mders(&g).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn incomplete_grid_rejected() {
        let mut g = EvaluationGrid::new("m", [CorruptionKind::Fog]);
        g.insert(CorruptionKind::Fog, Severity::new(1).unwrap(), MetricVector::PERFECT).unwrap();
        let err = mders(&g).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(ref m) if m.contains("fog/2")));
    }

    #[test]
    fn per_corruption_equals_global_on_uniform_grid() {
        let g = uniform("m", 0.3, 0.7);
        let global = mders(&g).unwrap();
        for v in ders_per_corruption(&g).unwrap().values() {
            assert!((v - global).abs() < 1e-15);
        }
        assert!((mders_with(&g, MdersAggregation::MeanOfCorruptions).unwrap() - global).abs() < 1e-15);
    }

    #[test]
    fn per_corruption_monotone() {
        let g = EvaluationGrid::from_fn("m", [CorruptionKind::Fog, CorruptionKind::Contrast], |k, _| {
            if k == CorruptionKind::Fog {
                MetricVector::PERFECT
            } else {
                MetricVector::from_array([0.2, 0.1, 5.0, 0.3, 0.6, 0.8, 0.9])
            }
        })
        .unwrap();
        let d = ders_per_corruption(&g).unwrap();
        assert_eq!(d[&CorruptionKind::Fog], 1.0);
        assert!(d[&CorruptionKind::Contrast] < 1.0);
    }

    #[test]
    fn self_mce_is_hundred_and_half_is_fifty() {
        let base = uniform("base", 0.2, 0.8);
        for v in mce_all(&base, &base).unwrap().values() {
            assert_eq!(*v, 100.0);
        }
        let half = base.map_cells(|_, _, v| MetricVector::from_array(v.to_array().map(|x| x / 2.0))).unwrap();
        for v in mce_all(&half, &base).unwrap().values() {
            assert!((v - 50.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_baseline_sum_names_corruption() {
        let base = EvaluationGrid::from_fn("b", [CorruptionKind::Fog], |_, _| MetricVector::PERFECT).unwrap();
        let model = uniform("m", 0.1, 0.9);
        let model = EvaluationGrid::from_fn("m", [CorruptionKind::Fog], |k, s| *model.cell(k, s).unwrap()).unwrap();
        match mce(&model, &base, Metric::AbsRel) {
            Err(Error::DivisionDegenerate { corruption, metric }) => {
                assert_eq!(corruption, "fog");
                assert_eq!(metric, "abs_rel");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mismatched_kind_sets_rejected() {
        let a = uniform("a", 0.1, 0.9);
        let b = EvaluationGrid::from_fn("b", [CorruptionKind::Fog], |_, _| MetricVector::PERFECT).unwrap();
        assert!(mce(&a, &b, Metric::Rmse).is_err());
    }

    #[test]
    fn normalized_variant_needs_clean_cell() {
        let mut g = uniform("m", 0.2, 0.8);
        assert!(mders_normalized(&g).is_err());
        g.set_clean(MetricVector::from_array([0.1, 0.1, 0.1, 0.1, 0.9, 0.95, 0.99])).unwrap();
        // Each error mean becomes 2.
        assert!((mders_normalized(&g).unwrap() - 0.8 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn report_contains_all_sections() {
        let base = uniform("base", 0.2, 0.8);
        let model = uniform("model", 0.1, 0.9);
        let r = robustness_report(&model, Some(&base)).unwrap();
        assert_eq!(r.ders.len(), 16);
        let mce = r.mce.unwrap();
        assert_eq!(mce.baseline, "base");
        assert!((mce.mce[&Metric::AbsRel] - 50.0).abs() < 1e-9);
        assert!((mce.mce[&Metric::A1] - 112.5).abs() < 1e-9);
        assert_eq!(mce.corruption_errors.len(), 16);
        assert!(r.mders > 0.0 && r.mders <= 1.0);
    }
}
