use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bundled prefix map for synthetic data.
pub const DEFAULT_CODE_MAP: &str = include_str!("../../data/default_code_map.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKind {
    Comorbidity,
    Functional,
    Dme,
}

impl GroupKind {
    pub const ALL: [GroupKind; 3] = [GroupKind::Comorbidity, GroupKind::Functional, GroupKind::Dme];

    /// Number of groups each kind must define.
    pub fn required_count(self) -> usize {
        match self {
            GroupKind::Comorbidity => 20,
            GroupKind::Functional => 7,
            GroupKind::Dme => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GroupKind::Comorbidity => "comorbidity",
            GroupKind::Functional => "functional",
            GroupKind::Dme => "dme",
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GroupKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown group kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeGroup {
    pub name: String,
    pub kind: GroupKind,
    pub prefixes: Vec<String>,
}

impl CodeGroup {
    pub fn matches(&self, code: &str) -> bool {
        self.prefixes.iter().any(|p| code.starts_with(p.as_str()))
    }

    /// True when any of `codes` starts with one of this group's prefixes.
    pub fn matches_any<'a>(&self, codes: impl IntoIterator<Item = &'a String>) -> bool {
        codes.into_iter().any(|c| self.matches(c))
    }
}

/// Validated mapping from code prefixes to named feature groups.
///
/// Groups keep file order within each kind; feature columns follow it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMap {
    entries: Vec<CodeGroup>,
}

impl CodeMap {
    pub fn new(entries: Vec<CodeGroup>) -> Result<Self> {
        let mut seen = HashSet::new();
        for g in &entries {
            if !seen.insert(g.name.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate group name {:?}",
                    g.name
                )));
            }
            if g.prefixes.is_empty() {
                return Err(Error::Validation(format!(
                    "group {:?} has no prefixes",
                    g.name
                )));
            }
            if g.prefixes.iter().any(|p| p.is_empty()) {
                return Err(Error::Validation(format!(
                    "group {:?} has an empty prefix",
                    g.name
                )));
            }
        }
        for kind in GroupKind::ALL {
            let n = entries.iter().filter(|g| g.kind == kind).count();
            if n != kind.required_count() {
                return Err(Error::Validation(format!(
                    "{kind} kind has {n} groups, expected {}",
                    kind.required_count()
                )));
            }
        }
        Ok(CodeMap { entries })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.splitn(3, ',');
            let (Some(kind), Some(name), Some(prefixes)) =
                (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::Parse(format!(
                    "code map line {}: expected group_kind,group_name,prefixes",
                    lineno + 1
                )));
            };
            let kind: GroupKind = kind.trim().parse().map_err(|e| {
                Error::Parse(format!("code map line {}: {e}", lineno + 1))
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::Parse(format!(
                    "code map line {}: empty group name",
                    lineno + 1
                )));
            }
            let prefixes = prefixes.split(';').map(|p| p.trim().to_string()).collect();
            entries.push(CodeGroup {
                name: name.to_string(),
                kind,
                prefixes,
            });
        }
        CodeMap::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CodeMap::parse(&text)
    }

    pub fn bundled() -> Self {
        CodeMap::parse(DEFAULT_CODE_MAP).expect("bundled code map is valid")
    }

    pub fn groups(&self, kind: GroupKind) -> impl Iterator<Item = &CodeGroup> {
        self.entries.iter().filter(move |g| g.kind == kind)
    }

    pub fn group(&self, name: &str) -> Option<&CodeGroup> {
        self.entries.iter().find(|g| g.name == name)
    }

    pub fn entries(&self) -> &[CodeGroup] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# group_kind,group_name,prefix1;prefix2;...\n");
        for g in &self.entries {
            out.push_str(&format!("{},{},{}\n", g.kind, g.name, g.prefixes.join(";")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_map_has_expected_group_counts() {
        let map = CodeMap::bundled();
        assert_eq!(map.groups(GroupKind::Comorbidity).count(), 20);
        assert_eq!(map.groups(GroupKind::Functional).count(), 7);
        assert_eq!(map.groups(GroupKind::Dme).count(), 4);
    }

    #[test]
    fn missing_group_is_rejected_with_count() {
        let text: String = DEFAULT_CODE_MAP
            .lines()
            .filter(|l| !l.contains(",weight_loss,"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = CodeMap::parse(&text).unwrap_err().to_string();
        assert!(err.contains("comorbidity kind has 19 groups"), "{err}");
    }

    #[test]
    fn duplicate_group_is_rejected() {
        let text = format!("{DEFAULT_CODE_MAP}dme,bed,E9999\n");
        let err = CodeMap::parse(&text).unwrap_err().to_string();
        assert!(err.contains("duplicate group name \"bed\""), "{err}");
    }

    #[test]
    fn empty_prefix_is_rejected() {
        let text = DEFAULT_CODE_MAP.replace("dme,bed,E0250;", "dme,bed,;");
        let err = CodeMap::parse(&text).unwrap_err().to_string();
        assert!(err.contains("empty prefix"), "{err}");
    }

    #[test]
    fn prefix_matching() {
        let map = CodeMap::bundled();
        let chf = map.group("chf").unwrap();
        assert!(chf.matches("42822"));
        assert!(chf.matches("428"));
        assert!(!chf.matches("4282".get(1..).unwrap()));
        assert!(!map.group("copd").unwrap().matches("42822"));
    }

    #[test]
    fn text_round_trip() {
        let map = CodeMap::bundled();
        assert_eq!(CodeMap::parse(&map.to_text()).unwrap(), map);
    }
}
