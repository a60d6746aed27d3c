//! Browser bindings: parse a dataset once, then explore it interactively —
//! network diagram, single fits, and down-weighting sweeps, all in-page.
//!
//! Everything is string-in/string-out (CSV, JSON, SVG) so the page needs no
//! framework; see `www/index.html`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use evsynth_core::diagnostics::deviance_report;
use evsynth_core::model::{Effects, ModelSpec, Variant};
use evsynth_core::network::{parse_dataset, validate_network, Network};
use evsynth_core::posterior::{
    alpha_sweep, rank_treatments, reference_summaries, SummaryStats, SweepResult,
};
use evsynth_core::sampler::{run_ensemble, SamplerConfig};
use evsynth_core::svg;

fn js_err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn build_spec(variant: &str, alpha: f64, fixed: bool) -> Result<ModelSpec, String> {
    let variant: Variant = variant.parse().map_err(js_err)?;
    let mut spec = ModelSpec::with_alpha(variant, alpha);
    if fixed {
        spec.effects = Effects::Fixed;
    }
    spec.validate().map_err(js_err)?;
    Ok(spec)
}

fn sampler_config(burn: u32, iters: u32, chains: u32, seed: u64) -> SamplerConfig {
    SamplerConfig::quick(burn as usize, iters as usize, chains as usize, seed)
}

#[derive(Serialize)]
struct FitSummary {
    variant: String,
    alpha: f64,
    treatments: Vec<String>,
    arrr: Vec<SummaryStats>,
    between_sd: Option<SummaryStats>,
    rank_labels: Vec<String>,
    rank_probs: Vec<Vec<f64>>,
    mean_rank: Vec<f64>,
    total_residual_deviance: f64,
    n_arms: usize,
    dic: f64,
    p_d: f64,
    max_rhat: Option<f64>,
}

/// A parsed dataset ready for interactive exploration.
#[wasm_bindgen]
pub struct Engine {
    net: Network,
}

#[wasm_bindgen]
impl Engine {
    /// Parse the CSV dataset (`study_id,design,treatment,relapses,exposure_py`).
    /// The reference treatment defaults to `placebo` when present, else the
    /// first-seen treatment, matching the CLI.
    #[wasm_bindgen(constructor)]
    pub fn new(csv: &str, reference: Option<String>) -> Result<Engine, String> {
        let probe = parse_dataset(csv, None).map_err(js_err)?;
        let reference = reference.unwrap_or_else(|| {
            if probe.treatments.iter().any(|t| t.label == "placebo") {
                "placebo".to_string()
            } else {
                probe.label(1).to_string()
            }
        });
        let net = parse_dataset(csv, Some(&reference)).map_err(js_err)?;
        Ok(Engine { net })
    }

    /// Validation report plus dataset counts, as JSON.
    pub fn validation_json(&self) -> String {
        let report = validate_network(&self.net);
        serde_json::json!({
            "studies": self.net.studies.len(),
            "rct": self.net.n_rct(),
            "rwe": self.net.n_rwe(),
            "treatments": self.net.n_treatments(),
            "reference": self.net.label(1),
            "fit_ready": report.is_fit_ready(),
            "errors": report.errors,
            "warnings": report.warnings,
        })
        .to_string()
    }

    /// Evidence-network diagram as an SVG document.
    pub fn diagram_svg(&self) -> String {
        svg::network_diagram(&self.net)
    }

    /// Fit one model and return summaries, rankings and fit diagnostics
    /// as JSON.
    #[allow(clippy::too_many_arguments)]
    pub fn fit_json(
        &self,
        variant: &str,
        alpha: f64,
        fixed_effects: bool,
        burn: u32,
        iters: u32,
        chains: u32,
        seed: u64,
    ) -> Result<String, String> {
        let spec = build_spec(variant, alpha, fixed_effects)?;
        let cfg = sampler_config(burn, iters, chains, seed);
        let (draws, convergence) = run_ensemble(&self.net, &spec, &cfg).map_err(js_err)?;
        let summaries = reference_summaries(&draws, &self.net).map_err(js_err)?;
        let ranks = rank_treatments(&draws, &self.net, true).map_err(js_err)?;
        let deviance = deviance_report(&draws, &self.net, &spec).map_err(js_err)?;
        let between_sd = draws
            .column("tau")
            .or_else(|| draws.column("sigma"))
            .map(|col| evsynth_core::posterior::summarize(&col))
            .transpose()
            .map_err(js_err)?;
        let out = FitSummary {
            variant: spec.variant.to_string(),
            alpha,
            treatments: summaries.iter().map(|(l, _)| l.clone()).collect(),
            arrr: summaries.iter().map(|(_, s)| *s).collect(),
            between_sd,
            rank_labels: ranks.labels.clone(),
            rank_probs: ranks.probs.clone(),
            mean_rank: ranks.mean_rank.clone(),
            total_residual_deviance: deviance.total,
            n_arms: deviance.arms.len(),
            dic: deviance.dic.dic,
            p_d: deviance.dic.p_d,
            max_rhat: convergence.max_rhat,
        };
        serde_json::to_string(&out).map_err(js_err)
    }

    /// Run a down-weighting sweep and hand back an explorable result.
    pub fn sweep(
        &self,
        variant: &str,
        alphas_csv: &str,
        burn: u32,
        iters: u32,
        chains: u32,
        seed: u64,
    ) -> Result<Sweep, String> {
        let alphas: Vec<f64> = alphas_csv
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| "alphas must be a comma-separated list of numbers".to_string())?;
        let spec = build_spec(variant, 1.0, false)?;
        let cfg = sampler_config(burn, iters, chains, seed);
        let result = alpha_sweep(&self.net, &spec, &alphas, &cfg).map_err(js_err)?;
        Ok(Sweep {
            alphas,
            inner: result,
        })
    }
}

/// Finished sweep: plots and tables are derived on demand.
#[wasm_bindgen]
pub struct Sweep {
    alphas: Vec<f64>,
    inner: SweepResult,
}

#[wasm_bindgen]
impl Sweep {
    /// Non-reference treatment labels, as a JSON array.
    pub fn labels_json(&self) -> String {
        serde_json::to_string(&self.inner.labels).expect("labels serialize")
    }

    pub fn table_csv(&self) -> String {
        self.inner.to_csv()
    }

    pub fn ranks_csv(&self) -> String {
        self.inner.ranks_csv()
    }

    /// Mean line + 95% band across alpha for one treatment.
    pub fn plot_svg(&self, treatment: &str) -> Result<String, String> {
        svg::sweep_plot(&self.inner, treatment)
            .ok_or_else(|| format!("unknown treatment `{treatment}`"))
    }

    /// Mean-rank heatmap over (treatment, alpha).
    pub fn heatmap_svg(&self) -> String {
        svg::rank_heatmap(&self.alphas, &self.inner.ranks)
    }
}

/// A small synthetic dataset for the demo page.
#[wasm_bindgen]
pub fn demo_dataset(seed: u64) -> Result<String, String> {
    let truth = evsynth_core::synth::TruthSpec {
        treatments: vec!["placebo".into(), "drug_a".into(), "drug_b".into()],
        d: vec![-0.6, -0.25],
        tau: 0.08,
        mu: vec![-0.45],
        exposure_py: vec![600.0],
        rwe_bias: vec![0.35, 0.35],
        layout: vec![
            evsynth_core::synth::ComparisonLayout {
                treatments: vec!["placebo".into(), "drug_a".into()],
                n_rct: 3,
                n_rwe: 2,
            },
            evsynth_core::synth::ComparisonLayout {
                treatments: vec!["placebo".into(), "drug_b".into()],
                n_rct: 2,
                n_rwe: 2,
            },
            evsynth_core::synth::ComparisonLayout {
                treatments: vec!["drug_a".into(), "drug_b".into()],
                n_rct: 2,
                n_rwe: 1,
            },
        ],
    };
    let (net, _) = evsynth_core::synth::generate_network(&truth, seed).map_err(js_err)?;
    Ok(net.to_csv())
}
