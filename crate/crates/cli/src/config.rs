//! Run configuration: the `[data] [model] [sampler] [output]` file format,
//! command-line overrides, and the `run.json` provenance round-trip.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use evsynth_core::config::{ConfigError, Document, Entry, Section};
use evsynth_core::model::{Effects, Interval, ModelSpec, PriorSpec, Variant};
use evsynth_core::sampler::SamplerConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub reference: Option<String>,
    pub variant: Variant,
    pub alpha: f64,
    pub alphas: Option<Vec<f64>>,
    pub effects: Effects,
    pub design_specific_tau: bool,
    pub priors: PriorSpec,
    pub sampler: SamplerConfig,
    pub out_dir: PathBuf,
    pub write_draws: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: PathBuf::new(),
            reference: None,
            variant: Variant::Pooled,
            alpha: 1.0,
            alphas: None,
            effects: Effects::Random,
            design_specific_tau: false,
            priors: PriorSpec::default(),
            sampler: SamplerConfig::default(),
            out_dir: PathBuf::from("out"),
            write_draws: false,
        }
    }
}

impl RunConfig {
    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            variant: self.variant,
            alpha: self.alpha,
            priors: self.priors,
            effects: self.effects,
            design_specific_tau: self.design_specific_tau,
        }
    }

    /// Load from a config path: the key-value grammar, or a `run.json`
    /// provenance file (detected by content) for byte-identical re-runs.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let config_value = value.get("config").cloned().unwrap_or(value);
            return serde_json::from_value(config_value)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())));
        }
        let doc = Document::parse(&text).map_err(CliError::Config)?;
        RunConfig::from_document(&doc)
    }

    pub fn from_document(doc: &Document) -> Result<RunConfig, CliError> {
        for s in &doc.sections {
            if !matches!(s.name.as_str(), "data" | "model" | "sampler" | "output") {
                return Err(CliError::Input(format!(
                    "line {}: unknown section [{}]",
                    s.line, s.name
                )));
            }
        }
        let mut cfg = RunConfig::default();

        let data = doc
            .section("data")
            .ok_or_else(|| CliError::Input("missing [data] section".into()))?;
        for e in &data.entries {
            match e.key.as_str() {
                "dataset" => cfg.dataset = PathBuf::from(&e.value),
                "reference" => cfg.reference = Some(e.value.clone()),
                _ => return Err(unknown_key(data, e)),
            }
        }
        if cfg.dataset.as_os_str().is_empty() {
            return Err(CliError::Input("missing `dataset` in [data]".into()));
        }

        if let Some(model) = doc.section("model") {
            for e in &model.entries {
                match e.key.as_str() {
                    "variant" => {
                        cfg.variant = e
                            .value
                            .parse()
                            .map_err(|err| CliError::Input(format!("line {}: {err}", e.line)))?
                    }
                    "alpha" => cfg.alpha = e.as_f64()?,
                    "alphas" => cfg.alphas = Some(e.as_f64_list()?),
                    "effects" => {
                        cfg.effects = match e.value.to_ascii_lowercase().as_str() {
                            "random" => Effects::Random,
                            "fixed" => Effects::Fixed,
                            other => {
                                return Err(CliError::Input(format!(
                                    "line {}: unknown effects `{other}`",
                                    e.line
                                )))
                            }
                        }
                    }
                    "design_specific_tau" => cfg.design_specific_tau = e.as_bool()?,
                    "mu_bounds" => cfg.priors.mu = interval(e)?,
                    "d_bounds" => cfg.priors.d = interval(e)?,
                    "tau_bounds" => cfg.priors.tau = interval(e)?,
                    "sigma_bounds" => cfg.priors.sigma = interval(e)?,
                    _ => return Err(unknown_key(model, e)),
                }
            }
        }

        if let Some(sampler) = doc.section("sampler") {
            for e in &sampler.entries {
                match e.key.as_str() {
                    "burn" => cfg.sampler.n_burn = e.as_usize()?,
                    "iters" => cfg.sampler.n_iter = e.as_usize()?,
                    "chains" => cfg.sampler.n_chains = e.as_usize()?,
                    "seed" => cfg.sampler.seed = e.as_u64()?,
                    "thin" => cfg.sampler.thin = e.as_usize()?,
                    "target_accept" => cfg.sampler.target_accept = e.as_f64()?,
                    "reduced_retention" => cfg.sampler.reduced_retention = e.as_bool()?,
                    _ => return Err(unknown_key(sampler, e)),
                }
            }
        }

        if let Some(output) = doc.section("output") {
            for e in &output.entries {
                match e.key.as_str() {
                    "dir" => cfg.out_dir = PathBuf::from(&e.value),
                    "draws" => cfg.write_draws = e.as_bool()?,
                    _ => return Err(unknown_key(output, e)),
                }
            }
        }

        Ok(cfg)
    }

    /// Apply command-line overrides (flags beat file values).
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        alpha: Option<f64>,
        alphas: Option<&str>,
        model: Option<&str>,
        out: Option<&Path>,
    ) -> Result<(), CliError> {
        if let Some(s) = seed {
            self.sampler.seed = s;
        }
        if let Some(a) = alpha {
            self.alpha = a;
        }
        if let Some(list) = alphas {
            let parsed: Result<Vec<f64>, _> =
                list.split(',').map(|s| s.trim().parse::<f64>()).collect();
            self.alphas = Some(parsed.map_err(|_| {
                CliError::Input(format!("--alphas `{list}` is not a comma-separated list of numbers"))
            })?);
        }
        if let Some(m) = model {
            self.variant = m
                .parse()
                .map_err(|err| CliError::Input(format!("--model: {err}")))?;
        }
        if let Some(o) = out {
            self.out_dir = o.to_path_buf();
        }
        Ok(())
    }
}

fn interval(e: &Entry) -> Result<Interval, ConfigError> {
    let (lo, hi) = e.as_interval()?;
    Ok(Interval::new(lo, hi))
}

fn unknown_key(section: &Section, e: &Entry) -> CliError {
    CliError::Config(ConfigError::UnknownKey {
        line: e.line,
        section: section.name.clone(),
        key: e.key.clone(),
    })
}

/// Full provenance written beside every result bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    /// Reference treatment the run resolved to.
    pub reference_resolved: String,
    /// Per-chain seeds derived from the base seed.
    pub chain_seeds: Vec<u64>,
}

impl Provenance {
    pub fn new(command: &str, config: &RunConfig, reference_resolved: &str) -> Provenance {
        Provenance {
            tool: "evsynth".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.clone(),
            reference_resolved: reference_resolved.into(),
            chain_seeds: (0..config.sampler.n_chains)
                .map(|c| evsynth_core::derive_seed(config.sampler.seed, c as u64))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("provenance serializes")
    }
}
