//! Per-frame depth metrics, median scale alignment, and per-cell
//! aggregation.
//!
//! Over the jointly valid pixels `i` with ground truth `gᵢ` and (optionally
//! scaled and clamped) prediction `dᵢ`:
//!
//! | metric     | definition                                  |
//! |------------|---------------------------------------------|
//! | `abs_rel`  | mean(\|dᵢ − gᵢ\| / gᵢ)                        |
//! | `sq_rel`   | mean((dᵢ − gᵢ)² / gᵢ)                        |
//! | `rmse`     | √mean((dᵢ − gᵢ)²)                            |
//! | `rmse_log` | √mean((ln dᵢ − ln gᵢ)²)                      |
//! | `a_k`      | fraction with max(dᵢ/gᵢ, gᵢ/dᵢ) < 1.25ᵏ       |

mod boxplot;
mod depth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::boxplot::{boxplot_stats, quantile_sorted, BoxplotStats};
pub use self::depth::DepthMap;

/// Base of the threshold-accuracy ratios.
pub const DELTA_BASE: f64 = 1.25;

/// One of the seven reported metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AbsRel,
    SqRel,
    Rmse,
    RmseLog,
    A1,
    A2,
    A3,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::AbsRel,
        Metric::SqRel,
        Metric::Rmse,
        Metric::RmseLog,
        Metric::A1,
        Metric::A2,
        Metric::A3,
    ];
    pub const ERRORS: [Metric; 4] = [Metric::AbsRel, Metric::SqRel, Metric::Rmse, Metric::RmseLog];
    pub const ACCURACIES: [Metric; 3] = [Metric::A1, Metric::A2, Metric::A3];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AbsRel => "abs_rel",
            Metric::SqRel => "sq_rel",
            Metric::Rmse => "rmse",
            Metric::RmseLog => "rmse_log",
            Metric::A1 => "a1",
            Metric::A2 => "a2",
            Metric::A3 => "a3",
        }
    }

    /// Lower is better for error metrics, higher for accuracies.
    pub fn is_error(self) -> bool {
        matches!(self, Metric::AbsRel | Metric::SqRel | Metric::Rmse | Metric::RmseLog)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown metric `{s}`")))
    }
}

/// The seven scores for one prediction/ground-truth pair, or a mean of them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub rmse_log: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl MetricVector {
    /// Scores of a prediction equal to the ground truth.
    pub const PERFECT: MetricVector = MetricVector {
        abs_rel: 0.0,
        sq_rel: 0.0,
        rmse: 0.0,
        rmse_log: 0.0,
        a1: 1.0,
        a2: 1.0,
        a3: 1.0,
    };

    /// Values in [`Metric::ALL`] order.
    pub fn to_array(&self) -> [f64; 7] {
        [self.abs_rel, self.sq_rel, self.rmse, self.rmse_log, self.a1, self.a2, self.a3]
    }

    pub fn from_array(v: [f64; 7]) -> Self {
        Self {
            abs_rel: v[0],
            sq_rel: v[1],
            rmse: v[2],
            rmse_log: v[3],
            a1: v[4],
            a2: v[5],
            a3: v[6],
        }
    }

    pub fn get(&self, metric: Metric) -> f64 {
        self.to_array()[metric as usize]
    }

    pub fn set(&mut self, metric: Metric, value: f64) {
        let mut v = self.to_array();
        v[metric as usize] = value;
        *self = Self::from_array(v);
    }

    /// Checks finiteness, non-negative errors and `0 ≤ a1 ≤ a2 ≤ a3 ≤ 1`.
    pub fn validate(&self) -> Result<()> {
        let v = self.to_array();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("metric vector has non-finite entries"));
        }
        if Metric::ERRORS.iter().any(|&m| self.get(m) < 0.0) {
            return Err(Error::invalid("error metrics must be >= 0"));
        }
        let ok = 0.0 <= self.a1 && self.a1 <= self.a2 && self.a2 <= self.a3 && self.a3 <= 1.0;
        if !ok {
            return Err(Error::invalid(format!(
                "accuracies must satisfy 0 <= a1 <= a2 <= a3 <= 1, got ({}, {}, {})",
                self.a1, self.a2, self.a3
            )));
        }
        Ok(())
    }
}

/// Prediction alignment and depth range used during evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub median_scaling: bool,
    /// `[d_min, d_max]` in millimeters: ground truth outside is masked and
    /// predictions are clamped into it.
    pub clamp: Option<(f64, f64)>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            median_scaling: true,
            clamp: None,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<()> {
        if let Some((lo, hi)) = self.clamp {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("clamp range [{lo}, {hi}] needs d_min < d_max")));
            }
        }
        Ok(())
    }
}

/// Running sums behind [`MetricVector`]; merging partial accumulators gives
/// the same result as a single pass, up to floating-point reassociation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricAccumulator {
    count: u64,
    abs_rel: f64,
    sq_rel: f64,
    sq_err: f64,
    sq_log_err: f64,
    within: [u64; 3],
}

impl MetricAccumulator {
    #[inline]
    pub fn push(&mut self, pred: f64, gt: f64) {
        let diff = pred - gt;
        self.count += 1;
        self.abs_rel += diff.abs() / gt;
        self.sq_rel += diff * diff / gt;
        self.sq_err += diff * diff;
        let log_diff = pred.ln() - gt.ln();
        self.sq_log_err += log_diff * log_diff;
        let ratio = (pred / gt).max(gt / pred);
        let mut threshold = DELTA_BASE;
        for w in &mut self.within {
            if ratio < threshold {
                *w += 1;
            }
            threshold *= DELTA_BASE;
        }
    }

    pub fn merge(&mut self, other: &MetricAccumulator) {
        self.count += other.count;
        self.abs_rel += other.abs_rel;
        self.sq_rel += other.sq_rel;
        self.sq_err += other.sq_err;
        self.sq_log_err += other.sq_log_err;
        for (a, b) in self.within.iter_mut().zip(other.within) {
            *a += b;
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(&self) -> Result<MetricVector> {
        if self.count == 0 {
            return Err(Error::degenerate("no jointly valid pixels"));
        }
        let n = self.count as f64;
        Ok(MetricVector {
            abs_rel: self.abs_rel / n,
            sq_rel: self.sq_rel / n,
            rmse: (self.sq_err / n).sqrt(),
            rmse_log: (self.sq_log_err / n).sqrt(),
            a1: self.within[0] as f64 / n,
            a2: self.within[1] as f64 / n,
            a3: self.within[2] as f64 / n,
        })
    }
}

/// Median of a non-empty slice; even lengths average the two middle values.
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let n = values.len();
    let mid = n / 2;
    let (left, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

fn check_same_dims(pred: &DepthMap, gt: &DepthMap) -> Result<()> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::invalid(format!(
            "prediction is {}x{} but ground truth is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    Ok(())
}

fn joint_mask(pred: &DepthMap, gt: &DepthMap, clamp: Option<(f64, f64)>) -> Vec<usize> {
    (0..gt.len())
        .filter(|&i| {
            pred.is_valid(i)
                && gt.is_valid(i)
                && clamp.map_or(true, |(lo, hi)| (lo..=hi).contains(&gt.values()[i]))
        })
        .collect()
}

fn median_ratio(pred: &DepthMap, gt: &DepthMap, idx: &[usize]) -> Result<f64> {
    if idx.is_empty() {
        return Err(Error::degenerate("median scaling needs at least one jointly valid pixel"));
    }
    let mut g: Vec<f64> = idx.iter().map(|&i| gt.values()[i]).collect();
    let mut p: Vec<f64> = idx.iter().map(|&i| pred.values()[i]).collect();
    let mg = median_in_place(&mut g);
    let mp = median_in_place(&mut p);
    if mp == 0.0 {
        return Err(Error::degenerate("prediction median is zero"));
    }
    Ok(mg / mp)
}

/// Multiplies `pred` by `median(gt) / median(pred)` over the joint mask.
pub fn median_scale(pred: &DepthMap, gt: &DepthMap) -> Result<(DepthMap, f64)> {
    check_same_dims(pred, gt)?;
    let idx = joint_mask(pred, gt, None);
    let scale = median_ratio(pred, gt, &idx)?;
    Ok((pred.scaled(scale), scale))
}

/// The seven metrics for one prediction against its ground truth.
pub fn compute_metrics(pred: &DepthMap, gt: &DepthMap, opts: &EvalOptions) -> Result<MetricVector> {
    opts.validate()?;
    check_same_dims(pred, gt)?;
    let idx = joint_mask(pred, gt, opts.clamp);
    if idx.is_empty() {
        return Err(Error::degenerate("empty joint validity mask"));
    }
    let scale = if opts.median_scaling {
        median_ratio(pred, gt, &idx)?
    } else {
        1.0
    };
    let mut acc = MetricAccumulator::default();
    for &i in &idx {
        let mut d = pred.values()[i] * scale;
        if let Some((lo, hi)) = opts.clamp {
            d = d.clamp(lo, hi);
        }
        if d > 0.0 && d.is_finite() {
            acc.push(d, gt.values()[i]);
        }
    }
    acc.finish()
}

/// Unweighted per-component mean over the frames of one cell.
pub fn aggregate_cell(per_frame: &[MetricVector]) -> Result<MetricVector> {
    if per_frame.is_empty() {
        return Err(Error::degenerate("cannot aggregate an empty list of metric vectors"));
    }
    let mut sum = [0.0f64; 7];
    for v in per_frame {
        for (s, x) in sum.iter_mut().zip(v.to_array()) {
            *s += x;
        }
    }
    let n = per_frame.len() as f64;
    Ok(MetricVector::from_array(sum.map(|s| s / n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(values: Vec<f64>) -> DepthMap {
        let n = values.len();
        DepthMap::new(n, 1, values).unwrap()
    }

    #[test]
    fn perfect_prediction() {
        let gt = map(vec![10.0, 20.0, 35.5, 80.0]);
        for median_scaling in [false, true] {
            let opts = EvalOptions { median_scaling, clamp: None };
            assert_eq!(compute_metrics(&gt, &gt, &opts).unwrap(), MetricVector::PERFECT);
        }
    }

    #[test]
    fn doubled_prediction_closed_form() {
        let gt = map(vec![10.0, 20.0, 35.5, 80.0]);
        let pred = gt.scaled(2.0);
        let opts = EvalOptions { median_scaling: false, clamp: None };
        let m = compute_metrics(&pred, &gt, &opts).unwrap();
        assert_eq!(m.abs_rel, 1.0);
        assert!((m.rmse_log - 2f64.ln()).abs() < 1e-12);
        assert_eq!((m.a1, m.a2, m.a3), (0.0, 0.0, 0.0));
        // 2 > 1.25³ = 1.953125
        assert!(2.0 > DELTA_BASE.powi(3));
    }

    #[test]
    fn median_scale_cases() {
        let gt = map(vec![10.0, 20.0, 30.0, 40.0, 50.0]);
        let (same, s) = median_scale(&gt, &gt).unwrap();
        assert_eq!(s, 1.0);
        assert_eq!(same, gt);
        let (scaled, s) = median_scale(&gt.scaled(3.0), &gt).unwrap();
        assert!((s - 1.0 / 3.0).abs() < 1e-15);
        for (a, b) in scaled.values().iter().zip(gt.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let (scaled, s) = median_scale(&gt.scaled(4.0), &gt).unwrap();
        assert_eq!(s, 0.25);
        assert_eq!(scaled, gt);
    }

    #[test]
    fn empty_mask_is_degenerate() {
        let gt = DepthMap::new(2, 1, vec![0.0, 0.0]).unwrap();
        let pred = map(vec![1.0, 2.0]);
        assert!(matches!(
            compute_metrics(&pred, &gt, &EvalOptions::default()),
            Err(Error::Degenerate(_))
        ));
        assert!(median_scale(&pred, &gt).is_err());
    }

    #[test]
    fn mismatched_dims_rejected() {
        let a = map(vec![1.0, 2.0]);
        let b = map(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            compute_metrics(&a, &b, &EvalOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn clamp_masks_ground_truth_and_clips_prediction() {
        let gt = map(vec![5.0, 50.0, 500.0]);
        let pred = map(vec![5.0, 1000.0, 500.0]);
        let opts = EvalOptions {
            median_scaling: false,
            clamp: Some((1.0, 100.0)),
        };
        let m = compute_metrics(&pred, &gt, &opts).unwrap();
        // gt 500 is masked out, prediction 1000 is clipped to 100.
        assert!((m.abs_rel - 0.5).abs() < 1e-12);
        assert!(EvalOptions { median_scaling: false, clamp: Some((5.0, 1.0)) }.validate().is_err());
    }

    #[test]
    fn aggregate_cell_means() {
        let v = MetricVector::from_array([0.1, 0.2, 3.0, 0.4, 0.5, 0.6, 0.7]);
        assert_eq!(aggregate_cell(&[v]).unwrap(), v);
        assert_eq!(aggregate_cell(&[v, v]).unwrap(), v);
        assert!(aggregate_cell(&[]).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_in_place(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median_in_place(&mut [7.0]), 7.0);
    }

    #[test]
    fn metric_vector_validation() {
        assert!(MetricVector::PERFECT.validate().is_ok());
        let mut bad = MetricVector::PERFECT;
        bad.a1 = 1.0;
        bad.a2 = 0.5;
        assert!(bad.validate().is_err());
        bad = MetricVector::PERFECT;
        bad.rmse = -1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn metric_names_parse() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("delta".parse::<Metric>().is_err());
    }
}
