//! Executes a config: output directory, thread pool, files and manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Params, PAPER_SCALE_SAMPLES};
use crate::experiments::{self, OutputFile};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub paper_scale: bool,
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
    /// Overrides the config's `output_path`.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub core_version: &'static str,
    pub experiment: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The config document as given.
    pub config: serde_json::Value,
    pub config_sha256: String,
    /// Parameters actually used, after defaults and `--paper-scale`.
    pub effective_params: Params,
    pub base_seed: Option<u64>,
    pub paper_scale: bool,
    pub threads: usize,
    pub output_dir: String,
    pub output_dir_created: bool,
    pub wall_time_seconds: f64,
    pub files: Vec<FileRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Default output directory when neither the config nor `--out` names one.
pub fn default_output_dir(cfg: &ExperimentConfig) -> PathBuf {
    Path::new("cgdyn-out").join(cfg.experiment.name())
}

/// Parameters after command-line overrides.
pub fn effective_params(cfg: &ExperimentConfig, opts: &RunOptions) -> Params {
    let mut params = cfg.params.clone();
    if opts.paper_scale {
        if let Params::McValidate(p) = &mut params {
            p.n_samples = PAPER_SCALE_SAMPLES;
        }
    }
    params
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
}

/// Runs `cfg` (parsed from `config_text`) and writes its files and manifest.
///
/// The manifest is written even when the experiment fails; the error is then
/// returned after it.
pub fn execute(cfg: &ExperimentConfig, config_text: &str, opts: &RunOptions) -> Result<RunSummary> {
    let start = Instant::now();
    let output_dir = opts
        .out
        .clone()
        .or_else(|| cfg.output_path.clone())
        .unwrap_or_else(|| default_output_dir(cfg));
    let created = !output_dir.exists();
    fs::create_dir_all(&output_dir)
        .with_context(|| format!("creating output directory {}", output_dir.display()))?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = opts.threads {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().context("building worker pool")?;
    let params = effective_params(cfg, opts);
    let outcome = pool.install(|| experiments::run(&params));

    let (files, error) = match outcome {
        Ok(files) => (files, None),
        Err(e) => (Vec::new(), Some(e)),
    };
    let mut records = Vec::new();
    for OutputFile { name, bytes } in &files {
        fs::write(output_dir.join(name), bytes).with_context(|| format!("writing {name}"))?;
        records.push(FileRecord {
            name: name.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
    }

    let manifest = Manifest {
        tool: "cgdyn",
        tool_version: env!("CARGO_PKG_VERSION"),
        core_version: cgdyn_core::VERSION,
        experiment: cfg.experiment.name().to_string(),
        status: if error.is_none() { "ok" } else { "failed" },
        error: error.as_ref().map(|e| format!("{e:#}")),
        config: serde_json::from_str(config_text).context("re-reading config for the manifest")?,
        config_sha256: sha256_hex(config_text.as_bytes()),
        base_seed: params.base_seed(),
        effective_params: params,
        paper_scale: opts.paper_scale,
        threads: pool.current_num_threads(),
        output_dir: output_dir.display().to_string(),
        output_dir_created: created,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        files: records,
    };
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    fs::write(output_dir.join(MANIFEST_NAME), text).context("writing manifest")?;

    match error {
        None => Ok(RunSummary { output_dir, manifest }),
        Some(e) => Err(anyhow!("{e:#}").context(format!(
            "experiment {} failed (manifest written to {})",
            cfg.experiment,
            output_dir.join(MANIFEST_NAME).display()
        ))),
    }
}
