//! Output files: provenance header and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

pub const TOOL: &str = "hoecken";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
}

impl Header {
    pub fn new(config_hash: String) -> Self {
        Self { tool: TOOL, version: VERSION, config_sha256: config_hash }
    }

    pub fn line(&self) -> String {
        format!("{} {} config_sha256={}", self.tool, self.version, self.config_sha256)
    }
}

/// Files produced by one command, written only once all of them exist.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    /// Write every file through a temporary in `dir` and an atomic rename.
    pub fn write_all(&self, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("staging {name}"))?;
            tmp.write_all(contents.as_bytes())?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, path) in staged {
            tmp.persist(&path).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::default();
        out.add("a.csv", "x\n".into());
        out.add("b.csv", "y\n".into());
        let paths = out.write_all(&dir.path().join("sub")).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(fs::read_to_string(&paths[1]).unwrap(), "y\n");
        let leftovers = fs::read_dir(dir.path().join("sub")).unwrap().count();
        assert_eq!(leftovers, 2);
    }

    #[test]
    fn header_line() {
        let h = Header::new("ab".into());
        assert_eq!(h.line(), format!("hoecken {VERSION} config_sha256=ab"));
    }
}
