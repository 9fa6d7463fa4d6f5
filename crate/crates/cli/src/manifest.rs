//! Run manifests: what was run, with which seeds, and the hash of every
//! output file. Writes go to a temporary directory that is renamed into
//! place, so a failed run never leaves a half-written tree.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::run::{execute, sha256_hex, RunOptions, RunOutput, TOOL_VERSION};
use crate::scenario::WeightsDef;

pub const MANIFEST: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Seeds are text: TOML integers stop at `i64::MAX`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub scenario: String,
    pub scenario_sha256: String,
    pub seed: String,
    pub episode_seeds: Vec<String>,
    pub partition_cells: u32,
    pub weights: WeightsDef,
    pub emit_gnuplot: bool,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn of(out: &RunOutput) -> Self {
        Manifest {
            tool: TOOL_VERSION.into(),
            scenario: out.name.clone(),
            scenario_sha256: out.scenario_sha256.clone(),
            seed: out.effective.seed.to_string(),
            episode_seeds: out
                .episode_seeds
                .iter()
                .map(|s| format!("{s:016x}"))
                .collect(),
            partition_cells: out.effective.partition_cells,
            weights: out.effective.weights,
            emit_gnuplot: out.effective.emit_gnuplot,
            files: out
                .files
                .iter()
                .map(|(p, b)| FileEntry {
                    path: p.clone(),
                    sha256: sha256_hex(b),
                    bytes: b.len() as u64,
                })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serialises")
    }

    pub fn options(&self) -> Result<RunOptions, VerifyError> {
        let seed = self
            .seed
            .parse()
            .map_err(|_| VerifyError::BadManifest(format!("seed `{}`", self.seed)))?;
        Ok(RunOptions {
            seed: Some(seed),
            jobs: None,
            partition_cells: Some(self.partition_cells),
            weights: Some(self.weights),
            emit_gnuplot: self.emit_gnuplot,
        })
    }
}

fn safe_relative(p: &str) -> bool {
    let path = Path::new(p);
    !p.is_empty()
        && path
            .components()
            .all(|c| matches!(c, std::path::Component::Normal(_)))
}

/// Writes the run under `root/<scenario name>`, replacing an older run.
pub fn write_run(out: &RunOutput, root: &Path) -> anyhow::Result<PathBuf> {
    anyhow::ensure!(
        safe_relative(&out.name),
        "scenario name `{}` is not a plain directory name",
        out.name
    );
    fs::create_dir_all(root)?;
    let staging = tempfile::Builder::new()
        .prefix(".staging-")
        .tempdir_in(root)?;
    for (rel, bytes) in &out.files {
        let path = staging.path().join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes)?;
    }
    fs::write(staging.path().join(MANIFEST), Manifest::of(out).to_toml())?;
    let dest = root.join(&out.name);
    if dest.exists() {
        let old = tempfile::Builder::new()
            .prefix(".replaced-")
            .tempdir_in(root)?;
        fs::rename(&dest, old.path().join("run"))?;
    }
    fs::rename(staging.keep(), &dest)?;
    Ok(dest)
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("cannot read manifest: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad manifest: {0}")]
    BadManifest(String),
    #[error("missing files: {}", .0.join(", "))]
    Missing(Vec<String>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    /// Files whose bytes no longer match the manifest.
    pub tampered: Vec<String>,
    /// Files a fresh run produces differently (or not at all).
    pub not_reproduced: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.tampered.is_empty() && self.not_reproduced.is_empty()
    }
}

/// Checks every listed file against its hash, then reruns the recorded
/// scenario and compares the fresh outputs with the manifest.
pub fn verify(manifest_path: &Path) -> Result<VerifyReport, VerifyError> {
    let text = fs::read_to_string(manifest_path)?;
    let m: Manifest = toml::from_str(&text).map_err(|e| VerifyError::BadManifest(e.to_string()))?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    if let Some(bad) = m.files.iter().find(|f| !safe_relative(&f.path)) {
        return Err(VerifyError::BadManifest(format!(
            "unsafe path `{}`",
            bad.path
        )));
    }
    let missing: Vec<String> = m
        .files
        .iter()
        .filter(|f| !dir.join(&f.path).is_file())
        .map(|f| f.path.clone())
        .collect();
    if !missing.is_empty() {
        return Err(VerifyError::Missing(missing));
    }
    let mut report = VerifyReport::default();
    for f in &m.files {
        if sha256_hex(&fs::read(dir.join(&f.path))?) != f.sha256 {
            report.tampered.push(f.path.clone());
        }
    }
    let scenario = fs::read_to_string(dir.join("scenario.toml"))?;
    let fresh = match execute(&scenario, &m.options()?) {
        Ok(o) => Manifest::of(&o),
        Err(e) => return Err(VerifyError::BadManifest(format!("rerun failed: {e}"))),
    };
    let fresh_files: std::collections::BTreeMap<&str, &str> = fresh
        .files
        .iter()
        .map(|f| (f.path.as_str(), f.sha256.as_str()))
        .collect();
    for f in &m.files {
        if fresh_files.get(f.path.as_str()) != Some(&f.sha256.as_str()) {
            report.not_reproduced.push(f.path.clone());
        }
    }
    let listed: std::collections::BTreeSet<&str> =
        m.files.iter().map(|f| f.path.as_str()).collect();
    report.not_reproduced.extend(
        fresh_files
            .keys()
            .filter(|p| !listed.contains(*p))
            .map(|p| p.to_string()),
    );
    Ok(report)
}
