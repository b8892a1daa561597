use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, ErrorRecord};

pub const MANIFEST: &str = "manifest.json";

pub fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A run directory. Every file goes through [`RunDir::write`] so the
/// manifest can list it; the manifest itself is written last.
pub struct RunDir {
    root: PathBuf,
    files: Vec<PathBuf>,
    started: Instant,
}

#[derive(Serialize)]
struct FileEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    config_hash: &'a str,
    versions: Versions,
    wall_time_s: f64,
    files: Vec<FileEntry>,
    exit_status: &'a str,
}

#[derive(Serialize)]
struct Versions {
    msh: &'static str,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        // a stale manifest would vouch for files of an earlier run
        let stale = root.join(MANIFEST);
        if stale.exists() {
            fs::remove_file(stale)?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(
        &mut self,
        rel: impl AsRef<Path>,
        f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let rel = rel.as_ref();
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        if !self.files.iter().any(|p| p == rel) {
            self.files.push(rel.to_path_buf());
        }
        Ok(())
    }

    pub fn write_json(&mut self, rel: impl AsRef<Path>, value: &impl Serialize) -> Result<(), CliError> {
        self.write(rel, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    pub fn write_error(&mut self, err: &CliError) -> Result<(), CliError> {
        let rec: ErrorRecord = err.record();
        self.write_json("error.json", &rec)
    }

    pub fn finish(self, subcommand: &str, config_hash: &str, exit_status: &str) -> Result<(), CliError> {
        let mut files = Vec::new();
        for rel in &self.files {
            let bytes = fs::read(self.root.join(rel))?;
            files.push(FileEntry {
                path: rel.to_string_lossy().replace('\\', "/"),
                bytes: bytes.len() as u64,
                sha256: hex_sha256(&bytes),
            });
        }
        let m = Manifest {
            subcommand,
            config_hash,
            versions: Versions {
                msh: env!("CARGO_PKG_VERSION"),
            },
            wall_time_s: self.started.elapsed().as_secs_f64(),
            files,
            exit_status,
        };
        // write to a temporary name, then rename, so a manifest is never partial
        let tmp = self.root.join(".manifest.json.tmp");
        let mut w = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer_pretty(&mut w, &m).map_err(std::io::Error::from)?;
        writeln!(w)?;
        w.flush()?;
        drop(w);
        fs::rename(tmp, self.root.join(MANIFEST))?;
        Ok(())
    }
}
