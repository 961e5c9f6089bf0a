//! Report rendering: robustness tables, box-plot data and a summary.
//!
//! Every output is a pure function of the input grid files, so reruns are
//! byte-identical. Files produced by [`build_report`]:
//!
//! | file | content |
//! |---|---|
//! | `mders.md`, `mders.csv` | mDERS per model, highest marked |
//! | `mce.md`, `mce.csv` | mCE per metric in percent vs the baseline (`*`) |
//! | `corruption_errors.csv` | per-corruption CE in percent |
//! | `ders.csv` | per-corruption score |
//! | `abs_rel_boxplot.csv` | Tukey statistics of per-frame abs_rel per kind |
//! | `abs_rel_frames.csv` | the raw per-frame abs_rel rows |
//! | `summary.txt` | human-readable overview |
//! | `report.json` | all of the above as structured data |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corruptions::CorruptionKind;
use crate::error::{Error, Result};
use crate::metrics::{boxplot_stats, BoxplotStats, Metric};
use crate::robustness::{robustness_report, GridFile, RobustnessReport};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindBoxplot {
    pub model: String,
    pub kind: CorruptionKind,
    pub stats: BoxplotStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline: Option<String>,
    /// Column order of the tables.
    pub models: Vec<String>,
    pub reports: Vec<RobustnessReport>,
    pub abs_rel_boxplots: Vec<KindBoxplot>,
    pub warnings: Vec<String>,
}

/// Named text files making up one report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportFiles {
    pub document: ReportDocument,
    pub files: Vec<(String, String)>,
}

impl ReportFiles {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, content) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Models in table order: the baseline first, then `grids` in input order.
fn ordered<'a>(grids: &'a [GridFile], baseline: Option<&'a GridFile>) -> Result<Vec<&'a GridFile>> {
    let mut out: Vec<&GridFile> = Vec::new();
    if let Some(b) = baseline {
        out.push(b);
    }
    for g in grids {
        if let Some(prev) = out.iter().find(|p| p.model == g.model) {
            if baseline.is_some_and(|b| std::ptr::eq(*prev, b)) && **prev == *g {
                continue;
            }
            return Err(Error::invalid(format!("model name `{}` appears in two different grids", g.model)));
        }
        out.push(g);
    }
    if out.is_empty() {
        return Err(Error::invalid("report needs at least one grid"));
    }
    Ok(out)
}

fn check_schema(models: &[&GridFile], warnings: &mut Vec<String>) -> Result<()> {
    let first = models[0];
    let mut kinds0 = first.kinds.clone();
    kinds0.sort();
    for g in &models[1..] {
        let mut k = g.kinds.clone();
        k.sort();
        if k != kinds0 {
            return Err(Error::invalid(format!(
                "grid schema mismatch: `{}` covers [{}] but `{}` covers [{}]",
                first.model,
                join_kinds(&kinds0),
                g.model,
                join_kinds(&k)
            )));
        }
        if g.eval_options != first.eval_options {
            warnings.push(format!(
                "`{}` was evaluated with different options than `{}`",
                g.model, first.model
            ));
        }
    }
    Ok(())
}

fn join_kinds(kinds: &[CorruptionKind]) -> String {
    kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
}

/// Indices of the extreme value (ties all marked).
fn best_indices(values: &[f64], highest: bool) -> Vec<usize> {
    let best = values.iter().copied().fold(None, |acc: Option<f64>, v| match acc {
        None => Some(v),
        Some(b) => Some(if highest { b.max(v) } else { b.min(v) }),
    });
    match best {
        None => Vec::new(),
        Some(b) => (0..values.len()).filter(|&i| values[i] == b).collect(),
    }
}

fn md_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

fn md_rule(columns: usize) -> String {
    let mut parts = vec![":--".to_string()];
    parts.extend(std::iter::repeat("--:".to_string()).take(columns));
    md_row(&parts)
}

fn bold_if(text: String, marked: bool) -> String {
    if marked {
        format!("**{text}**")
    } else {
        text
    }
}

/// mDERS table: one row, one column per model, highest score bolded.
pub fn mders_markdown(reports: &[RobustnessReport]) -> String {
    let scores: Vec<f64> = reports.iter().map(|r| r.mders).collect();
    let best = best_indices(&scores, true);
    let mut header = vec![String::new()];
    header.extend(reports.iter().map(|r| r.model.clone()));
    let mut row = vec!["mDERS".to_string()];
    row.extend(
        scores
            .iter()
            .enumerate()
            .map(|(i, s)| bold_if(format!("{s:.4}"), best.contains(&i))),
    );
    let mut out = md_row(&header);
    out += &md_rule(reports.len());
    out += &md_row(&row);
    out
}

/// mCE table: metrics as rows, baseline first and starred. In each row the
/// lowest non-baseline value is bolded.
pub fn mce_markdown(reports: &[RobustnessReport], baseline: &str) -> Result<String> {
    let mut header = vec!["Metric".to_string()];
    for r in reports {
        header.push(if r.model == baseline { format!("{}*", r.model) } else { r.model.clone() });
    }
    let mut out = md_row(&header);
    out += &md_rule(reports.len());
    for m in Metric::ALL {
        let values = mce_row(reports, m)?;
        let candidates: Vec<f64> = reports
            .iter()
            .zip(&values)
            .map(|(r, &v)| if r.model == baseline { f64::INFINITY } else { v })
            .collect();
        let best = if candidates.iter().all(|v| v.is_infinite()) {
            Vec::new()
        } else {
            best_indices(&candidates, false)
        };
        let mut row = vec![m.name().to_string()];
        row.extend(
            values
                .iter()
                .enumerate()
                .map(|(i, v)| bold_if(format!("{v:.2}"), best.contains(&i))),
        );
        out += &md_row(&row);
    }
    Ok(out)
}

fn mce_row(reports: &[RobustnessReport], m: Metric) -> Result<Vec<f64>> {
    reports
        .iter()
        .map(|r| {
            r.mce
                .as_ref()
                .and_then(|s| s.mce.get(&m).copied())
                .ok_or_else(|| Error::invalid(format!("model `{}` has no mCE section", r.model)))
        })
        .collect()
}

fn abs_rel_by_kind(grid: &GridFile) -> BTreeMap<CorruptionKind, Vec<f64>> {
    let mut out: BTreeMap<CorruptionKind, Vec<f64>> = BTreeMap::new();
    for f in &grid.frames {
        if let Some(k) = f.kind {
            out.entry(k).or_default().push(f.metrics.abs_rel);
        }
    }
    out
}

/// Renders every report file for `grids`, with an mCE section when a
/// baseline grid is given. The baseline may also appear among `grids`.
pub fn build_report(grids: &[GridFile], baseline: Option<&GridFile>) -> Result<ReportFiles> {
    let models = ordered(grids, baseline)?;
    let mut warnings = Vec::new();
    check_schema(&models, &mut warnings)?;

    let base_grid = baseline.map(GridFile::to_grid).transpose()?;
    let mut reports = Vec::new();
    for g in &models {
        let grid = g.to_grid()?;
        reports.push(robustness_report(&grid, base_grid.as_ref())?);
        let skipped: usize = g.cells.iter().map(|c| c.skipped).sum::<usize>() + g.clean.as_ref().map_or(0, |c| c.skipped);
        if skipped > 0 {
            warnings.push(format!("`{}`: {skipped} frame(s) skipped for empty validity masks", g.model));
        }
    }

    let mut boxplots = Vec::new();
    for g in &models {
        for (kind, values) in abs_rel_by_kind(g) {
            boxplots.push(KindBoxplot {
                model: g.model.clone(),
                kind,
                stats: boxplot_stats(&values)?,
            });
        }
    }

    let document = ReportDocument {
        schema_version: REPORT_SCHEMA_VERSION,
        baseline: baseline.map(|b| b.model.clone()),
        models: models.iter().map(|g| g.model.clone()).collect(),
        reports,
        abs_rel_boxplots: boxplots,
        warnings,
    };

    let mut files = vec![
        ("mders.md".to_string(), mders_markdown(&document.reports)),
        ("mders.csv".to_string(), mders_csv(&document.reports)),
        ("ders.csv".to_string(), ders_csv(&document.reports)),
    ];
    if let Some(b) = &document.baseline {
        files.push(("mce.md".to_string(), mce_markdown(&document.reports, b)?));
        files.push(("mce.csv".to_string(), mce_csv(&document.reports, b)?));
        files.push(("corruption_errors.csv".to_string(), corruption_errors_csv(&document.reports)));
    }
    files.push(("abs_rel_boxplot.csv".to_string(), boxplot_csv(&document.abs_rel_boxplots)));
    files.push(("abs_rel_frames.csv".to_string(), frames_csv(&models)));
    files.push(("summary.txt".to_string(), summary_text(&document, &models)));
    let mut json = serde_json::to_string_pretty(&document).expect("report serializes");
    json.push('\n');
    files.push(("report.json".to_string(), json));
    Ok(ReportFiles { document, files })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn mders_csv(reports: &[RobustnessReport]) -> String {
    let best = best_indices(&reports.iter().map(|r| r.mders).collect::<Vec<_>>(), true);
    let mut out = String::from("model,mders,mders_mean_of_corruptions,mders_normalized_extension,best\n");
    for (i, r) in reports.iter().enumerate() {
        let norm = r.mders_normalized_extension.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{norm},{}",
            csv_field(&r.model),
            r.mders,
            r.mders_mean_of_corruptions,
            best.contains(&i)
        );
    }
    out
}

fn ders_csv(reports: &[RobustnessReport]) -> String {
    let mut out = String::from("model,kind,abbreviation,ders\n");
    for r in reports {
        for (k, v) in &r.ders {
            let _ = writeln!(out, "{},{},{},{v}", csv_field(&r.model), k.name(), k.abbreviation());
        }
    }
    out
}

fn mce_csv(reports: &[RobustnessReport], baseline: &str) -> Result<String> {
    let mut out = String::from("metric,model,mce_percent,is_baseline\n");
    for m in Metric::ALL {
        for (r, v) in reports.iter().zip(mce_row(reports, m)?) {
            let _ = writeln!(out, "{},{},{v},{}", m.name(), csv_field(&r.model), r.model == baseline);
        }
    }
    Ok(out)
}

fn corruption_errors_csv(reports: &[RobustnessReport]) -> String {
    let mut out = String::from("model,kind,metric,ce_percent\n");
    for r in reports {
        let Some(s) = &r.mce else { continue };
        for (k, per_metric) in &s.corruption_errors {
            for (m, v) in per_metric {
                let _ = writeln!(out, "{},{},{},{v}", csv_field(&r.model), k.name(), m.name());
            }
        }
    }
    out
}

fn boxplot_csv(rows: &[KindBoxplot]) -> String {
    let mut out = String::from(
        "model,kind,abbreviation,count,min,q1,median,q3,max,lower_fence,upper_fence,lower_whisker,upper_whisker,outliers\n",
    );
    for b in rows {
        let s = &b.stats;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&b.model),
            b.kind.name(),
            b.kind.abbreviation(),
            s.count,
            s.min,
            s.q1,
            s.median,
            s.q3,
            s.max,
            s.lower_fence,
            s.upper_fence,
            s.lower_whisker,
            s.upper_whisker,
            s.outliers.len()
        );
    }
    out
}

fn frames_csv(models: &[&GridFile]) -> String {
    let mut out = String::from("model,kind,severity,frame_id,abs_rel\n");
    for g in models {
        let mut rows: Vec<_> = g.frames.iter().filter(|f| f.kind.is_some()).collect();
        rows.sort_by(|a, b| (a.kind, a.severity, &a.frame_id).cmp(&(b.kind, b.severity, &b.frame_id)));
        for f in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&g.model),
                f.kind.map(|k| k.name()).unwrap_or_default(),
                f.severity.map(|s| s.to_string()).unwrap_or_default(),
                csv_field(&f.frame_id),
                f.metrics.abs_rel
            );
        }
    }
    out
}

fn summary_text(doc: &ReportDocument, models: &[&GridFile]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "models: {}", doc.models.join(", "));
    let kinds: Vec<CorruptionKind> = models[0].kinds.clone();
    let _ = writeln!(out, "corruptions: {} ({})", kinds.len(), join_kinds(&kinds));
    if let Some(b) = &doc.baseline {
        let _ = writeln!(out, "baseline: {b}");
    }
    out.push('\n');
    let best = best_indices(&doc.reports.iter().map(|r| r.mders).collect::<Vec<_>>(), true);
    for (i, r) in doc.reports.iter().enumerate() {
        let marker = if best.contains(&i) { "  <- most robust" } else { "" };
        let _ = writeln!(out, "{}: mDERS {:.4}{marker}", r.model, r.mders);
        if let Some(s) = &r.mce {
            let errs: Vec<String> = Metric::ERRORS
                .iter()
                .map(|m| format!("{} {:.2}", m.name(), s.mce[m]))
                .collect();
            let _ = writeln!(out, "  mCE (%): {}", errs.join(", "));
        }
        if let Some((k, v)) = r.ders.iter().min_by(|a, b| a.1.total_cmp(b.1)) {
            let _ = writeln!(out, "  weakest corruption: {} ({v:.4})", k.name());
        }
    }
    for g in models {
        let (frames, skipped) = g
            .cells
            .iter()
            .fold((0, 0), |(f, s), c| (f + c.frames, s + c.skipped));
        let _ = writeln!(out, "{}: {} cells, {frames} frame scores, {skipped} skipped", g.model, g.cells.len());
    }
    if !doc.warnings.is_empty() {
        out.push_str("\nwarnings:\n");
        for w in &doc.warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    out
}
