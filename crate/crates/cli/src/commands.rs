use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use scopebench_core::corruptions::DEFAULT_REGISTRY_TOML;
use scopebench_core::dataset::{
    build_corpus, compose_strip, discover_predictions, evaluate_predictions, frame_ids_in, load_depth, load_image,
    render_depth, save_image, CorpusRequest, DepthEncoding, DepthRange, EvaluateRequest, NamingRule, SplitName,
    SplitSpec,
};
use scopebench_core::report::build_report;
use scopebench_core::robustness::GridFile;
use scopebench_core::{CorruptionKind, EvalOptions, Severity};

use crate::args::{Cli, Command, CorruptArgs, DumpArgs, EvaluateArgs, Filters, RenderArgs, ReportArgs};

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or flag values; exit code 2.
    Usage(String),
    /// The command ran and failed; exit code 1.
    Run(String),
}

impl From<scopebench_core::Error> for Failure {
    fn from(e: scopebench_core::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Run(format!("{}: {e}", path.display()))
}

pub fn run(cli: Cli) -> CmdResult {
    match (cli.dump_config, cli.command) {
        (true, None) => dump_config(&DumpArgs { out: None }),
        (false, Some(cmd)) => match cmd {
            Command::Corrupt(a) => corrupt(&a),
            Command::Evaluate(a) => evaluate(&a),
            Command::Report(a) => report(&a),
            Command::RenderDepth(a) => render(&a),
            Command::DumpConfig(a) => dump_config(&a),
        },
        (false, None) => Err(usage("a subcommand is required; see --help")),
        (true, Some(_)) => Err(usage("--dump-config cannot be combined with a subcommand")),
    }
}

fn pair(flag: &str, v: &Option<Vec<f64>>) -> Result<Option<(f64, f64)>, Failure> {
    match v.as_deref() {
        None => Ok(None),
        Some([lo, hi]) => Ok(Some((*lo, *hi))),
        Some(other) => Err(usage(format!("--{flag} takes MIN,MAX, got {} value(s)", other.len()))),
    }
}

fn parse_filters(f: &Filters) -> Result<(Vec<CorruptionKind>, Vec<Severity>), Failure> {
    let kinds = f
        .kinds
        .iter()
        .map(|k| k.trim().parse::<CorruptionKind>().map_err(|e| usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let severities = f
        .severities
        .iter()
        .map(|&s| Severity::new(s).map_err(|e| usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((kinds, severities))
}

fn corrupt(a: &CorruptArgs) -> CmdResult {
    let (mut kinds, mut severities) = parse_filters(&a.filters)?;
    if kinds.is_empty() {
        kinds = CorruptionKind::ALL.to_vec();
    }
    if severities.is_empty() {
        severities = Severity::all().collect();
    }
    let split_name: SplitName = a.split.parse().map_err(|e: scopebench_core::Error| usage(e.to_string()))?;
    let registry_toml = match &a.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?,
        None => DEFAULT_REGISTRY_TOML.to_owned(),
    };
    let split = match &a.frames {
        Some(list) => {
            let text = std::fs::read_to_string(list).map_err(|e| io_failure(list, e))?;
            SplitSpec::from_list(split_name, &text)?
        }
        None => SplitSpec::from_dir(split_name, &a.input)?,
    };
    if split.is_empty() {
        return Err(Failure::Run(format!("no frames found in {}", a.input.display())));
    }
    let corpus_id = a.corpus_id.clone().unwrap_or_else(|| {
        a.out
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("corpus")
            .to_owned()
    });
    let frames = split.len();
    let cells = kinds.len() * severities.len();
    let req = CorpusRequest {
        corpus_id,
        split,
        source_dir: a.input.clone(),
        out_dir: a.out.clone(),
        kinds,
        severities,
        global_seed: a.seed,
        registry_toml,
        workers: a.workers.workers,
    };

    let start = Instant::now();
    let manifest = build_corpus(&req)?;
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "{frames} frames x {cells} cells: {} outputs in {elapsed:.1} s -> {}",
        manifest.records.len() - manifest.failed_count(),
        a.out.display()
    );
    if manifest.failed_count() > 0 {
        let mut msg = format!("{} output(s) failed:", manifest.failed_count());
        for r in manifest.failures() {
            msg.push_str(&format!("\n  {}: {}", r.output, r.error.as_deref().unwrap_or("unknown error")));
        }
        return Err(Failure::Run(msg));
    }
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> CmdResult {
    let (kinds, severities) = parse_filters(&a.filters)?;
    let clamp = pair("clamp", &a.clamp)?;
    let options = EvalOptions {
        median_scaling: !a.no_median_scaling,
        clamp,
    };
    options.validate().map_err(|e| usage(e.to_string()))?;
    if !(a.depth_scale.is_finite() && a.depth_scale > 0.0) {
        return Err(usage(format!("--depth-scale must be positive, got {}", a.depth_scale)));
    }
    let mut req = EvaluateRequest::new(&a.model, &a.gt, &a.pred);
    req.kinds = kinds;
    req.severities = severities;
    req.options = options;
    req.depth_scale = a.depth_scale;
    req.rule = NamingRule::parse(&a.naming).map_err(|e| usage(e.to_string()))?;
    req.workers = a.workers.workers;

    let outcome = evaluate_predictions(&req)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    outcome.grid.save(&a.out)?;
    let scored: usize = outcome.grid.cells.iter().map(|c| c.frames).sum();
    let skipped: usize = outcome.grid.cells.iter().map(|c| c.skipped).sum();
    println!(
        "{}: {} cells, {scored} frame scores, {skipped} skipped -> {}",
        a.model,
        outcome.grid.cells.len(),
        a.out.display()
    );
    Ok(())
}

const REPORT_FORMATS: [&str; 4] = ["md", "csv", "json", "txt"];

fn report(a: &ReportArgs) -> CmdResult {
    for f in &a.formats {
        if !REPORT_FORMATS.contains(&f.as_str()) {
            return Err(usage(format!("unknown format `{f}`; expected one of {}", REPORT_FORMATS.join(", "))));
        }
    }
    let grids = a
        .grids
        .iter()
        .map(|p| GridFile::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    let baseline = a.baseline.as_deref().map(GridFile::load).transpose()?;
    let files = build_report(&grids, baseline.as_ref())?;

    std::fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e))?;
    for (name, content) in &files.files {
        let ext = Path::new(name).extension().and_then(|e| e.to_str()).unwrap_or("");
        if a.formats.iter().any(|f| f == ext) {
            let path = a.out.join(name);
            std::fs::write(&path, content).map_err(|e| io_failure(&path, e))?;
        }
    }
    for w in &files.document.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(summary) = files.get("summary.txt") {
        print!("{summary}");
    }
    Ok(())
}

fn render_range(a: &RenderArgs) -> Result<DepthRange, Failure> {
    match pair("range", &a.range)? {
        Some((lo, hi)) => DepthRange::fixed(lo, hi).map_err(|e| usage(e.to_string())),
        None => Ok(DepthRange::Auto),
    }
}

fn load_any_depth(path: &Path, scale: f64) -> Result<scopebench_core::DepthMap, Failure> {
    let loaded = load_depth(path, DepthEncoding::for_path(path, scale))?;
    if let Some(w) = loaded.warning {
        eprintln!("warning: {w}");
    }
    Ok(loaded.depth)
}

fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("depth").to_owned()
}

fn render(a: &RenderArgs) -> CmdResult {
    let range = render_range(a)?;
    if a.strip {
        return render_strips(a, range);
    }
    if a.depths.is_empty() {
        return Err(usage("render-depth needs depth files, or --strip with --image-dir and --gt-dir"));
    }
    if a.image_dir.is_some() || a.gt_dir.is_some() || !a.pred_dir.is_empty() {
        return Err(usage("--image-dir, --gt-dir and --pred-dir only apply with --strip"));
    }
    for path in &a.depths {
        let d = load_any_depth(path, a.depth_scale)?;
        let img = render_depth(&d, range).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
        save_image(&img, &a.out.join(format!("{}.png", stem(path))))?;
    }
    println!("{} rendering(s) -> {}", a.depths.len(), a.out.display());
    Ok(())
}

fn lookup(dir: &Path, ids: &[String]) -> Result<std::collections::BTreeMap<String, PathBuf>, Failure> {
    let found = discover_predictions(dir, &NamingRule::default(), ids)?;
    if !found.missing.is_empty() {
        return Err(Failure::Run(format!(
            "{}: missing frame(s) {}",
            dir.display(),
            found.missing.join(", ")
        )));
    }
    Ok(found.found)
}

/// One strip per ground-truth frame: `input | gt | pred_1 .. pred_k`. Without
/// `--range`, every depth panel of a strip shares the ground truth's range.
fn render_strips(a: &RenderArgs, range: DepthRange) -> CmdResult {
    let (Some(image_dir), Some(gt_dir)) = (&a.image_dir, &a.gt_dir) else {
        return Err(usage("--strip needs --image-dir and --gt-dir"));
    };
    let ids = frame_ids_in(gt_dir, &NamingRule::default())?;
    if ids.is_empty() {
        return Err(Failure::Run(format!("no depth files in {}", gt_dir.display())));
    }
    let images = lookup(image_dir, &ids)?;
    let gts = lookup(gt_dir, &ids)?;
    let preds = a
        .pred_dir
        .iter()
        .map(|d| lookup(d, &ids))
        .collect::<Result<Vec<_>, _>>()?;

    for id in &ids {
        let gt = load_any_depth(&gts[id], a.depth_scale)?;
        let strip_range = match range {
            DepthRange::Auto => match gt.valid_range() {
                Some((lo, hi)) if lo < hi => DepthRange::Fixed { min: lo, max: hi },
                _ => DepthRange::Auto,
            },
            fixed => fixed,
        };
        let mut panels = vec![load_image(&images[id])?, render_depth(&gt, strip_range)?];
        for p in &preds {
            let d = load_any_depth(&p[id], a.depth_scale)?;
            panels.push(render_depth(&d, strip_range).map_err(|e| Failure::Run(format!("{}: {e}", p[id].display())))?);
        }
        save_image(&compose_strip(&panels)?, &a.out.join(format!("{id}.png")))?;
    }
    println!("{} strip(s) of {} panels -> {}", ids.len(), 2 + preds.len(), a.out.display());
    Ok(())
}

fn dump_config(a: &DumpArgs) -> CmdResult {
    match &a.out {
        Some(path) => std::fs::write(path, DEFAULT_REGISTRY_TOML).map_err(|e| io_failure(path, e)),
        None => std::io::stdout()
            .write_all(DEFAULT_REGISTRY_TOML.as_bytes())
            .map_err(|e| Failure::Run(e.to_string())),
    }
}
