//! Instance lists for batch runs.
//!
//! One instance per line: `name domain-group file [problem-file]`, paths
//! relative to the manifest. A single file is read in the ground text
//! format; two files are an HDDL domain and problem. `#` starts a comment.

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("manifest line {line}: {msg}")]
pub struct ManifestError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub group: String,
    pub domain: PathBuf,
    pub problem: Option<PathBuf>,
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<Instance>, ManifestError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let words: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        match words.as_slice() {
            [] => {}
            [name, group, domain, rest @ ..] if rest.len() <= 1 => out.push(Instance {
                name: name.to_string(),
                group: group.to_string(),
                domain: base.join(domain),
                problem: rest.first().map(|p| base.join(p)),
            }),
            _ => {
                return Err(ManifestError {
                    line: i + 1,
                    msg: "expected `name group file [problem-file]`".into(),
                })
            }
        }
    }
    if let Some(dup) = out.iter().enumerate().find(|(i, a)| out[..*i].iter().any(|b| b.name == a.name)) {
        return Err(ManifestError {
            line: 0,
            msg: format!("duplicate instance `{}`", dup.1.name),
        });
    }
    Ok(out)
}
