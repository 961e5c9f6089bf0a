//! Frame lists, splits and prediction discovery.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Val,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Val, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Val => "val",
            SplitName::Test => "test",
        }
    }

    /// Frame count of this split in the SCARED release.
    pub fn scared_size(self) -> usize {
        match self {
            SplitName::Train => 15351,
            SplitName::Val => 1705,
            SplitName::Test => 551,
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitName::Train),
            "val" => Ok(SplitName::Val),
            "test" => Ok(SplitName::Test),
            other => Err(Error::invalid(format!("unknown split `{other}` (train, val, test)"))),
        }
    }
}

/// A named, duplicate-free list of frame ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub name: SplitName,
    pub frame_ids: Vec<String>,
}

impl SplitSpec {
    pub fn new(name: SplitName, frame_ids: Vec<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for id in &frame_ids {
            validate_frame_id(id)?;
            if !seen.insert(id) {
                return Err(Error::Layout(format!("frame `{id}` appears twice in split {name}")));
            }
        }
        Ok(Self { name, frame_ids })
    }

    /// Every `*.png` in `dir`, by sorted file stem.
    pub fn from_dir(name: SplitName, dir: &Path) -> Result<Self> {
        let ids = list_files(dir)?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")))
            .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_owned))
            .collect();
        Self::new(name, ids)
    }

    /// One frame id per non-empty line; `#` starts a comment.
    pub fn from_list(name: SplitName, text: &str) -> Result<Self> {
        let ids = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect();
        Self::new(name, ids)
    }

    pub fn len(&self) -> usize {
        self.frame_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame_ids.is_empty()
    }
}

/// Fails if any frame id occurs in more than one split.
pub fn check_disjoint(splits: &[SplitSpec]) -> Result<()> {
    let mut owner: BTreeMap<&str, SplitName> = BTreeMap::new();
    for split in splits {
        for id in &split.frame_ids {
            if let Some(prev) = owner.insert(id, split.name) {
                if prev != split.name {
                    return Err(Error::Layout(format!(
                        "frame `{id}` is in both {prev} and {} splits",
                        split.name
                    )));
                }
            }
        }
    }
    Ok(())
}

pub(crate) fn validate_frame_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
        return Err(Error::Layout(format!("invalid frame id `{id}`")));
    }
    Ok(())
}

/// Regular files directly inside `dir`, sorted by path.
pub(crate) fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// File-name template containing `{frame}` once, e.g. `{frame}.png`,
/// `{frame}_depth.dmap`, or `{frame}.*` for any extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamingRule {
    prefix: String,
    suffix: String,
    any_extension: bool,
}

impl NamingRule {
    pub fn parse(template: &str) -> Result<Self> {
        let (prefix, rest) = template
            .split_once("{frame}")
            .ok_or_else(|| Error::invalid(format!("naming rule `{template}` lacks {{frame}}")))?;
        if rest.contains("{frame}") || template.contains(['/', '\\']) {
            return Err(Error::invalid(format!("naming rule `{template}` is not a single-file template")));
        }
        let (suffix, any_extension) = match rest.strip_suffix(".*") {
            Some(s) => (s.to_owned(), true),
            None => (rest.to_owned(), false),
        };
        Ok(Self {
            prefix: prefix.to_owned(),
            suffix,
            any_extension,
        })
    }

    /// The frame id encoded in `file_name`, if it matches.
    pub fn frame_id<'a>(&self, file_name: &'a str) -> Option<&'a str> {
        let body = file_name.strip_prefix(self.prefix.as_str())?;
        let body = if self.any_extension {
            let (stem, ext) = body.rsplit_once('.')?;
            if ext.is_empty() {
                return None;
            }
            stem
        } else {
            body
        };
        let id = body.strip_suffix(self.suffix.as_str())?;
        (!id.is_empty()).then_some(id)
    }
}

impl Default for NamingRule {
    fn default() -> Self {
        Self::parse("{frame}.*").expect("valid default rule")
    }
}

/// Result of matching a directory against the expected frames.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Discovery {
    pub found: BTreeMap<String, PathBuf>,
    /// Expected frames without a file, in expected order.
    pub missing: Vec<String>,
    pub warnings: Vec<String>,
}

impl Discovery {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Maps expected frame ids to files in `dir` named by `rule`.
///
/// A missing directory behaves like an empty one. Two files resolving to
/// the same id are a layout error; files for unexpected ids are ignored
/// with a warning.
pub fn discover_predictions(dir: &Path, rule: &NamingRule, expected: &[String]) -> Result<Discovery> {
    let files = if dir.is_dir() { list_files(dir)? } else { Vec::new() };
    let wanted: BTreeSet<&str> = expected.iter().map(String::as_str).collect();
    let mut out = Discovery::default();
    let mut unexpected = Vec::new();
    for path in files {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(id) = rule.frame_id(name) else {
            continue;
        };
        if !wanted.contains(id) {
            unexpected.push(name.to_owned());
            continue;
        }
        if let Some(prev) = out.found.insert(id.to_owned(), path.clone()) {
            return Err(Error::Layout(format!(
                "frame `{id}` matches both {} and {}",
                prev.display(),
                path.display()
            )));
        }
    }
    for id in expected {
        if !out.found.contains_key(id) {
            out.missing.push(id.clone());
            out.warnings.push(format!("{}: no prediction for frame `{id}`", dir.display()));
        }
    }
    if !unexpected.is_empty() {
        out.warnings.push(format!(
            "{}: ignored {} file(s) for unexpected frames: {}",
            dir.display(),
            unexpected.len(),
            unexpected.join(", ")
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i:03}")).collect()
    }

    #[test]
    fn splits_must_be_disjoint() {
        let a = SplitSpec::new(SplitName::Train, vec!["a".into(), "b".into()]).unwrap();
        let b = SplitSpec::new(SplitName::Test, vec!["c".into()]).unwrap();
        assert!(check_disjoint(&[a.clone(), b]).is_ok());
        let c = SplitSpec::new(SplitName::Val, vec!["b".into()]).unwrap();
        assert!(matches!(check_disjoint(&[a, c]), Err(Error::Layout(_))));
        assert!(SplitSpec::new(SplitName::Test, vec!["x".into(), "x".into()]).is_err());
        assert!(SplitSpec::new(SplitName::Test, vec!["a/b".into()]).is_err());
    }

    #[test]
    fn scared_reference_sizes() {
        let sizes: Vec<usize> = SplitName::ALL.iter().map(|s| s.scared_size()).collect();
        assert_eq!(sizes, vec![15351, 1705, 551]);
    }

    #[test]
    fn list_file_parsing() {
        let s = SplitSpec::from_list(SplitName::Val, "# header\nf1\n\n  f2  # note\n").unwrap();
        assert_eq!(s.frame_ids, vec!["f1", "f2"]);
    }

    #[test]
    fn naming_rules() {
        let r = NamingRule::parse("{frame}.png").unwrap();
        assert_eq!(r.frame_id("f001.png"), Some("f001"));
        assert_eq!(r.frame_id("f001.dmap"), None);
        let any = NamingRule::default();
        assert_eq!(any.frame_id("f001.dmap"), Some("f001"));
        assert_eq!(any.frame_id("f001"), None);
        let pre = NamingRule::parse("depth_{frame}_pred.*").unwrap();
        assert_eq!(pre.frame_id("depth_x7_pred.png"), Some("x7"));
        assert!(NamingRule::parse("frame.png").is_err());
        assert!(NamingRule::parse("{frame}/{frame}.png").is_err());
    }

    #[test]
    fn discovery_cases() {
        let dir = tempfile::tempdir().unwrap();
        let expected = ids(3);
        let rule = NamingRule::default();

        let empty = discover_predictions(dir.path(), &rule, &expected).unwrap();
        assert!(empty.found.is_empty());
        assert_eq!(empty.missing, expected);
        assert_eq!(empty.warnings.len(), 3);

        for id in &expected[..2] {
            std::fs::write(dir.path().join(format!("{id}.png")), b"").unwrap();
        }
        let partial = discover_predictions(dir.path(), &rule, &expected).unwrap();
        assert_eq!(partial.found.len(), 2);
        assert_eq!(partial.missing, vec!["f002".to_string()]);
        assert!(partial.warnings[0].contains("f002"));

        std::fs::write(dir.path().join("f002.png"), b"").unwrap();
        let full = discover_predictions(dir.path(), &rule, &expected).unwrap();
        assert!(full.is_complete() && full.warnings.is_empty());

        std::fs::write(dir.path().join("f002.dmap"), b"").unwrap();
        assert!(matches!(
            discover_predictions(dir.path(), &rule, &expected),
            Err(Error::Layout(_))
        ));
    }
}
