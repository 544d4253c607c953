//! Working-directory layout, atomic file writes, and the run manifest.
//!
//! Every command reads and writes well-known file names under a single
//! `--workdir`, so the stages compose without extra plumbing: `ingest`
//! leaves `dataset.jsonl`, `featurize` reads it and leaves the feature
//! CSVs and topic model, and so on. Output files are written to a
//! temporary sibling and renamed into place so a crash never leaves a
//! half-written artifact under its final name. `manifest.json` records,
//! per command, the resolved configuration (plus its digest) and the
//! SHA-256 of every input file, which makes a finished workdir auditable
//! and reruns comparable.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Well-known file names inside a working directory.
#[derive(Debug, Clone)]
pub struct Workdir {
    root: PathBuf,
}

impl Workdir {
    pub fn new(root: PathBuf) -> Workdir {
        Workdir { root }
    }

    /// Create the directory if it does not exist yet.
    pub fn ensure(&self) -> io::Result<()> {
        fs::create_dir_all(&self.root)
    }

    pub fn posts(&self) -> PathBuf {
        self.root.join("Posts.xml")
    }

    pub fn users(&self) -> PathBuf {
        self.root.join("Users.xml")
    }

    pub fn expected_labels(&self) -> PathBuf {
        self.root.join("expected_labels.csv")
    }

    pub fn dataset(&self) -> PathBuf {
        self.root.join("dataset.jsonl")
    }

    pub fn topic_model(&self) -> PathBuf {
        self.root.join("topics.model")
    }

    pub fn features(&self) -> PathBuf {
        self.root.join("features.csv")
    }

    pub fn features_extended(&self) -> PathBuf {
        self.root.join("features_extended.csv")
    }

    pub fn model(&self) -> PathBuf {
        self.root.join("model.json")
    }

    pub fn evaluation(&self) -> PathBuf {
        self.root.join("evaluation.json")
    }

    pub fn predictions(&self) -> PathBuf {
        self.root.join("predictions.csv")
    }

    pub fn summary(&self) -> PathBuf {
        self.root.join("summary.csv")
    }

    pub fn histograms(&self) -> PathBuf {
        self.root.join("histograms.csv")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
}

/// Write `bytes` to a temporary sibling of `path`, then rename it into
/// place. Rename within one directory is atomic on POSIX, so readers see
/// either the old file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp_name = OsString::from(path.as_os_str());
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buffer = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buffer)?;
        if n == 0 {
            break;
        }
        hasher.update(&buffer[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn sha256_str(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// One command's record in the manifest: what it was configured to do,
/// what it read, and what it wrote.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub config: serde_json::Value,
    pub config_sha256: String,
    /// Input path → hex SHA-256 of its bytes at run time.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: BTreeMap<String, ManifestEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("reading manifest: {0}")]
    Io(#[from] io::Error),
    #[error("manifest is not valid JSON (delete it to start over): {0}")]
    Json(#[from] serde_json::Error),
}

/// Upsert a command's entry in `manifest.json`, digesting the given
/// config and input files. The manifest keeps one entry per command, so
/// a rerun of the same stage replaces its previous record.
pub fn record_run<C: Serialize>(
    workdir: &Workdir,
    command: &str,
    config: &C,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<(), ManifestError> {
    let path = workdir.manifest();
    let mut manifest: Manifest = if path.exists() {
        serde_json::from_str(&fs::read_to_string(&path)?)?
    } else {
        Manifest::default()
    };

    let config = serde_json::to_value(config)?;
    let config_sha256 = sha256_str(&config.to_string());
    let mut input_digests = BTreeMap::new();
    for input in inputs {
        input_digests.insert(input.display().to_string(), sha256_file(input)?);
    }
    manifest.entries.insert(
        command.to_string(),
        ManifestEntry {
            config,
            config_sha256,
            inputs: input_digests,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        },
    );

    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(())
}
