//! Report output pinned against checked-in files.
//!
//! Set `SCOPEBENCH_UPDATE_GOLDEN=1` to rewrite `fixtures/report/expected/`.

use std::path::PathBuf;

use scopebench_core::report::build_report;
use scopebench_core::robustness::GridFile;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/report")
}

fn load(name: &str) -> GridFile {
    GridFile::load(&fixtures().join(format!("grid_{name}.json"))).unwrap()
}

#[test]
fn report_matches_golden_files() {
    let base = load("base");
    let grids = ["alpha", "beta", "gamma"].map(load);
    let report = build_report(&grids, Some(&base)).unwrap();
    let expected = fixtures().join("expected");

    if std::env::var_os("SCOPEBENCH_UPDATE_GOLDEN").is_some() {
        report.write_to(&expected).unwrap();
        return;
    }
    for (name, content) in &report.files {
        let want = std::fs::read_to_string(expected.join(name))
            .unwrap_or_else(|e| panic!("missing golden file {name}: {e}"));
        assert_eq!(content, &want, "{name} differs from its golden copy");
    }
}

#[test]
fn report_is_byte_stable_across_runs() {
    let base = load("base");
    let grids = ["alpha", "beta", "gamma"].map(load);
    let first = build_report(&grids, Some(&base)).unwrap();
    let second = build_report(&grids, Some(&base)).unwrap();
    assert_eq!(first.files, second.files);
}

#[test]
fn table_shapes() {
    let base = load("base");
    let grids = ["alpha", "beta", "gamma"].map(load);
    let report = build_report(&grids, Some(&base)).unwrap();

    let mce: Vec<&str> = report.get("mce.md").unwrap().lines().collect();
    assert_eq!(mce[0], "| Metric | base* | alpha | beta | gamma |");
    assert_eq!(mce.len(), 2 + 7);
    for (line, metric) in mce[2..].iter().zip(["abs_rel", "sq_rel", "rmse", "rmse_log", "a1", "a2", "a3"]) {
        let cols: Vec<&str> = line.trim_matches('|').split('|').map(str::trim).collect();
        assert_eq!(cols[0], metric);
        assert_eq!(cols[1], "100.00");
        assert_eq!(cols.iter().filter(|c| c.starts_with("**")).count(), 1, "{line}");
        for c in &cols[1..] {
            let digits = c.trim_matches('*');
            assert_eq!(digits.split('.').nth(1).map(str::len), Some(2), "{c}");
        }
    }

    let mders: Vec<&str> = report.get("mders.md").unwrap().lines().collect();
    assert_eq!(mders.len(), 3);
    let cols: Vec<&str> = mders[2].trim_matches('|').split('|').map(str::trim).collect();
    assert_eq!(cols[0], "mDERS");
    assert_eq!(cols.iter().filter(|c| c.starts_with("**")).count(), 1);
    assert!(cols[2].starts_with("**"), "the lowest-error model should be marked: {}", mders[2]);
    assert!(cols[1..].iter().all(|c| c.trim_matches('*').split('.').nth(1).map(str::len) == Some(4)));
}
