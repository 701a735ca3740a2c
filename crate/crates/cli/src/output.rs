//! Staged command outputs. Nothing touches the output directory until [`Outputs::commit`], which
//! writes each file through a temporary sibling and a rename; if any write fails, files already
//! written by the same commit are removed again.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::descriptor::RunDescriptor;

#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Serialize)]
struct FileRecord<'a> {
    file: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    descriptor: &'a RunDescriptor,
    outputs: Vec<FileRecord<'a>>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    pub fn add_csv<T: Serialize>(&mut self, name: impl Into<String>, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        self.add(name, w.into_inner().context("flushing CSV")?);
        Ok(())
    }

    /// Writes every staged file plus `<command>.provenance.json` into `dir`.
    pub fn commit(mut self, dir: &Path, command: &str, d: &RunDescriptor) -> Result<Vec<PathBuf>> {
        let records: Vec<FileRecord> = self
            .files
            .iter()
            .map(|(name, bytes)| FileRecord {
                file: name,
                bytes: bytes.len(),
                sha256: hex::encode(Sha256::digest(bytes)),
            })
            .collect();
        let prov = Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: d.seed,
            descriptor: d,
            outputs: records,
        };
        let mut prov_bytes = serde_json::to_vec_pretty(&prov)?;
        prov_bytes.push(b'\n');
        self.files
            .push((format!("{command}.provenance.json"), prov_bytes));

        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(e) = write_atomic(dir, &path, bytes) {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e.context(format!("writing {}", path.display())));
            }
            log::info!("wrote {}", path.display());
            written.push(path);
        }
        Ok(written)
    }
}

fn write_atomic(dir: &Path, path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_files_and_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outputs::default();
        o.add("a.txt", "hello");
        o.add_csv("b.csv", &[(1, 2.5), (2, 3.5)]).unwrap();
        let paths = o
            .commit(dir.path(), "test", &RunDescriptor::default())
            .unwrap();
        assert_eq!(paths.len(), 3);
        assert_eq!(
            std::fs::read_to_string(dir.path().join("a.txt")).unwrap(),
            "hello"
        );
        let prov: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("test.provenance.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(prov["outputs"][0]["file"], "a.txt");
        assert_eq!(
            prov["outputs"][0]["sha256"],
            "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
        );
    }

    #[test]
    fn failed_commit_leaves_nothing_behind() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outputs::default();
        o.add("ok.txt", "x");
        // a directory in the way makes the rename fail
        std::fs::create_dir(dir.path().join("blocked")).unwrap();
        std::fs::write(dir.path().join("blocked/inner"), "y").unwrap();
        o.add("blocked", "z");
        assert!(o
            .commit(dir.path(), "t", &RunDescriptor::default())
            .is_err());
        assert!(!dir.path().join("ok.txt").exists());
        assert!(!dir.path().join("t.provenance.json").exists());
    }
}
