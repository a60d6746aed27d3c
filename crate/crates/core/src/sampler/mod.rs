//! Adaptive random-walk Metropolis-within-Gibbs sampler.
//!
//! Each free parameter gets a Gaussian random-walk proposal scored against
//! only the posterior terms that depend on it; proposals outside the prior
//! support are rejected outright. Proposal scales adapt toward a target
//! acceptance rate by Robbins–Monro during burn-in and are frozen afterwards,
//! so the post-burn-in kernel leaves the posterior invariant. Identical
//! `(network, spec, config, chain_index)` inputs produce bit-identical draws.

mod convergence;

pub use convergence::{ess, rhat, ConvergenceReport, DiagValue, ParamDiagnostic, RHAT_FLAG_THRESHOLD};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Evaluator, ModelError, ModelSpec, ParamKind, ParamLayout, ParameterState, Variant};
use crate::network::Network;
use crate::util::{derive_seed, par_map};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("model is not identifiable: {0}")]
    NotIdentifiable(String),
    #[error("initialization failed: {0}")]
    InitializationFailed(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Iterations discarded as burn-in (adaptation happens here).
    pub n_burn: usize,
    /// Post-burn-in iterations.
    pub n_iter: usize,
    pub n_chains: usize,
    pub seed: u64,
    pub thin: usize,
    /// Per-coordinate acceptance-rate target for the adaptation.
    pub target_accept: f64,
    /// When true, retain only contrast/SD columns (drops μ and δ).
    #[serde(default)]
    pub reduced_retention: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_burn: 10_000,
            n_iter: 20_000,
            n_chains: 3,
            seed: 0,
            thin: 1,
            target_accept: 0.44,
            reduced_retention: false,
        }
    }
}

impl SamplerConfig {
    pub fn quick(n_burn: usize, n_iter: usize, n_chains: usize, seed: u64) -> Self {
        SamplerConfig {
            n_burn,
            n_iter,
            n_chains,
            seed,
            ..SamplerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.n_burn == 0 || self.n_iter == 0 || self.n_chains == 0 || self.thin == 0 {
            return Err(SamplerError::InvalidConfig(
                "n_burn, n_iter, n_chains and thin must all be positive".into(),
            ));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(SamplerError::InvalidConfig(format!(
                "target_accept must lie in (0, 1), got {}",
                self.target_accept
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub chain_index: usize,
    pub seed: u64,
    pub n_retained: usize,
    /// Post-burn-in acceptance rate per parameter (NaN for point-prior params).
    pub accept_rate: Vec<f64>,
    pub scales_at_freeze: Vec<f64>,
    pub scales_final: Vec<f64>,
    /// Prior quantile used for the overdispersed start (None = default init).
    pub init_quantile: Option<f64>,
}

/// Retained posterior draws with chain provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    /// Column names, stable for a given (network, spec).
    pub names: Vec<String>,
    /// Row-major matrix: `n_rows() × names.len()`, chains stored contiguously.
    pub data: Vec<f64>,
    /// Full log-posterior of each retained state.
    pub log_posterior: Vec<f64>,
    pub chains: Vec<ChainMeta>,
    /// Base seed the chain seeds were derived from.
    pub seed: u64,
    pub thin: usize,
    /// Iterations each chain ran: burn-in + kept.
    pub n_burn: usize,
    pub n_iter: usize,
}

impl Draws {
    pub fn n_params(&self) -> usize {
        self.names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.log_posterior.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_params();
        &self.data[i * p..(i + 1) * p]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some((0..self.n_rows()).map(|i| self.row(i)[j]).collect())
    }

    /// Row range covered by chain `c`.
    pub fn chain_rows(&self, c: usize) -> std::ops::Range<usize> {
        let start: usize = self.chains[..c].iter().map(|m| m.n_retained).sum();
        start..start + self.chains[c].n_retained
    }

    pub fn per_chain_column(&self, j: usize) -> Vec<Vec<f64>> {
        (0..self.chains.len())
            .map(|c| self.chain_rows(c).map(|i| self.row(i)[j]).collect())
            .collect()
    }

    pub fn merge(parts: Vec<Draws>) -> Draws {
        let mut iter = parts.into_iter();
        let mut merged = iter.next().expect("at least one chain");
        for p in iter {
            assert_eq!(merged.names, p.names, "chains share a layout");
            assert_eq!((merged.n_burn, merged.n_iter), (p.n_burn, p.n_iter));
            merged.data.extend_from_slice(&p.data);
            merged.log_posterior.extend_from_slice(&p.log_posterior);
            merged.chains.extend(p.chains);
        }
        merged
    }

    /// Trace CSV: `chain,iter` then one column per parameter.
    pub fn to_trace_csv(&self) -> String {
        let mut out = String::from("chain,iter");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (c, meta) in self.chains.iter().enumerate() {
            for (k, i) in self.chain_rows(c).enumerate() {
                out.push_str(&format!("{},{}", meta.chain_index, (k + 1) * self.thin));
                for v in self.row(i) {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Posterior terms that depend on one parameter.
struct LocalDep {
    lik: Vec<usize>,
    re: Vec<usize>,
    design_level: bool,
}

fn build_deps(eval: &Evaluator, layout: &ParamLayout) -> Vec<LocalDep> {
    let spec = eval.spec;
    let fixed = spec.effects == crate::model::Effects::Fixed;
    let all: Vec<usize> = (0..eval.n_included()).collect();
    layout
        .entries
        .iter()
        .map(|e| match e.kind {
            ParamKind::Mu(p) => LocalDep {
                lik: vec![p],
                re: Vec::new(),
                design_level: false,
            },
            ParamKind::Delta(p, _) => LocalDep {
                lik: vec![p],
                re: vec![p],
                design_level: false,
            },
            ParamKind::Basic(k) => {
                let t = k + 2;
                if spec.variant == Variant::Hier3 {
                    LocalDep {
                        lik: Vec::new(),
                        re: Vec::new(),
                        design_level: true,
                    }
                } else if fixed {
                    LocalDep {
                        lik: eval.studies_with_treatment(t).to_vec(),
                        re: Vec::new(),
                        design_level: false,
                    }
                } else {
                    LocalDep {
                        lik: Vec::new(),
                        re: eval.studies_with_treatment(t).to_vec(),
                        design_level: false,
                    }
                }
            }
            ParamKind::BasicDesign(j, k) => {
                let t = k + 2;
                let re = eval
                    .studies_with_treatment(t)
                    .iter()
                    .copied()
                    .filter(|&p| crate::model::design_index(eval.study(p).design) == j)
                    .collect();
                LocalDep {
                    lik: Vec::new(),
                    re,
                    design_level: true,
                }
            }
            ParamKind::Tau(i) => {
                let re = if spec.n_tau() == 2 {
                    all.iter()
                        .copied()
                        .filter(|&p| crate::model::design_index(eval.study(p).design) == i)
                        .collect()
                } else {
                    all.clone()
                };
                LocalDep {
                    lik: Vec::new(),
                    re,
                    design_level: false,
                }
            }
            ParamKind::Sigma => {
                if spec.variant == Variant::Hier3 {
                    LocalDep {
                        lik: Vec::new(),
                        re: Vec::new(),
                        design_level: true,
                    }
                } else {
                    LocalDep {
                        lik: Vec::new(),
                        re: all.clone(),
                        design_level: false,
                    }
                }
            }
            ParamKind::Split => {
                let direct: Vec<usize> = (0..eval.n_included())
                    .filter(|&p| eval.is_direct(p))
                    .collect();
                if fixed {
                    LocalDep {
                        lik: direct,
                        re: Vec::new(),
                        design_level: false,
                    }
                } else {
                    LocalDep {
                        lik: Vec::new(),
                        re: direct,
                        design_level: false,
                    }
                }
            }
        })
        .collect()
}

fn local_value(eval: &Evaluator, state: &ParameterState, dep: &LocalDep) -> f64 {
    let mut acc = 0.0;
    for &p in &dep.lik {
        acc += eval.study_log_lik(state, p);
    }
    for &p in &dep.re {
        acc += eval.study_re_log_density(state, p);
    }
    if dep.design_level {
        acc += eval.design_level_log_density(state);
    }
    acc
}

/// Every treatment must carry evidence and the included comparison graph must
/// be connected, otherwise some contrast has no data under this variant.
pub fn check_identifiable(eval: &Evaluator) -> Result<(), SamplerError> {
    if eval.n_included() == 0 {
        return Err(SamplerError::NotIdentifiable(
            "no studies are included under this variant".into(),
        ));
    }
    let net = eval.net;
    let t = net.n_treatments();
    let missing: Vec<&str> = (1..=t)
        .filter(|&k| eval.studies_with_treatment(k).is_empty())
        .map(|k| net.label(k))
        .collect();
    if !missing.is_empty() {
        return Err(SamplerError::NotIdentifiable(format!(
            "treatments without evidence under this variant: {}",
            missing.join(", ")
        )));
    }
    // BFS over included-study comparison edges.
    let mut adj = vec![Vec::new(); t + 1];
    for pos in 0..eval.n_included() {
        let arms = &eval.study(pos).arms;
        for i in 0..arms.len() {
            for j in (i + 1)..arms.len() {
                adj[arms[i].treatment].push(arms[j].treatment);
                adj[arms[j].treatment].push(arms[i].treatment);
            }
        }
    }
    let mut seen = vec![false; t + 1];
    let mut queue = vec![1usize];
    seen[1] = true;
    while let Some(u) = queue.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push(v);
            }
        }
    }
    let unreachable: Vec<&str> = (1..=t).filter(|&k| !seen[k]).map(|k| net.label(k)).collect();
    if !unreachable.is_empty() {
        return Err(SamplerError::NotIdentifiable(format!(
            "treatments disconnected from the reference under this variant: {}",
            unreachable.join(", ")
        )));
    }
    Ok(())
}

const INIT_RETRY_QUANTILES: [f64; 8] = [0.5, 0.45, 0.55, 0.4, 0.6, 0.35, 0.65, 0.3];
const LOG_SCALE_MIN: f64 = -18.0;
const LOG_SCALE_MAX: f64 = 5.0;

fn overdispersed_quantile(chain_index: usize) -> Option<f64> {
    if chain_index == 0 {
        None
    } else {
        Some([0.25, 0.75, 0.5][(chain_index - 1) % 3])
    }
}

fn initial_state(
    eval: &Evaluator,
    quantile: Option<f64>,
) -> Result<ParameterState, SamplerError> {
    let first = match quantile {
        Some(q) => eval.init_state(q),
        None => crate::model::default_init(eval),
    };
    if eval.log_posterior(&first).is_finite() {
        return Ok(first);
    }
    for q in INIT_RETRY_QUANTILES {
        let s = eval.init_state(q);
        if eval.log_posterior(&s).is_finite() {
            return Ok(s);
        }
    }
    Err(SamplerError::InitializationFailed(
        "log-posterior is non-finite at every attempted initial point".into(),
    ))
}

/// Run a single chain. Deterministic in `(network, spec, cfg, chain_index)`.
pub fn run_chain(
    net: &Network,
    spec: &ModelSpec,
    cfg: &SamplerConfig,
    chain_index: usize,
) -> Result<Draws, SamplerError> {
    let eval = Evaluator::new(net, spec)?;
    run_chain_with(&eval, cfg, chain_index)
}

/// Single chain against a prepared evaluator (used directly by node splitting).
pub fn run_chain_with(
    eval: &Evaluator,
    cfg: &SamplerConfig,
    chain_index: usize,
) -> Result<Draws, SamplerError> {
    run_chain_from(eval, cfg, chain_index, None)
}

/// Single chain from a caller-supplied starting point (must have a finite
/// log-posterior); `None` uses the chain's deterministic default start.
pub fn run_chain_from(
    eval: &Evaluator,
    cfg: &SamplerConfig,
    chain_index: usize,
    init: Option<ParameterState>,
) -> Result<Draws, SamplerError> {
    cfg.validate()?;
    check_identifiable(eval)?;
    let layout = ParamLayout::new(eval);
    let deps = build_deps(eval, &layout);
    let chain_seed = derive_seed(cfg.seed, chain_index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(chain_seed);

    let init_q = overdispersed_quantile(chain_index);
    let mut state = match init {
        Some(s) => {
            eval.check_dims(&s)?;
            if !eval.log_posterior(&s).is_finite() {
                return Err(SamplerError::InitializationFailed(
                    "supplied initial state has non-finite log-posterior".into(),
                ));
            }
            s
        }
        None => initial_state(eval, init_q)?,
    };

    let n_params = layout.len();
    let mut log_scale: Vec<f64> = layout
        .entries
        .iter()
        .map(|e| (0.25 * e.bounds.width().min(4.0)).max(1e-3).ln())
        .collect();
    let point_prior: Vec<bool> = layout.entries.iter().map(|e| e.bounds.width() == 0.0).collect();

    let retained_cols: Vec<usize> = (0..n_params)
        .filter(|&i| {
            !cfg.reduced_retention
                || matches!(
                    layout.entries[i].kind,
                    ParamKind::Basic(_)
                        | ParamKind::BasicDesign(..)
                        | ParamKind::Tau(_)
                        | ParamKind::Sigma
                        | ParamKind::Split
                )
        })
        .collect();
    let names: Vec<String> = retained_cols
        .iter()
        .map(|&i| layout.entries[i].name.clone())
        .collect();

    let n_retained = cfg.n_iter / cfg.thin;
    let mut data = Vec::with_capacity(n_retained * retained_cols.len());
    let mut lps = Vec::with_capacity(n_retained);
    let mut accepts = vec![0usize; n_params];
    let mut proposals = vec![0usize; n_params];
    let mut scales_at_freeze = Vec::new();

    let total_iters = cfg.n_burn + cfg.n_iter;
    for iter in 0..total_iters {
        let adapting = iter < cfg.n_burn;
        if iter == cfg.n_burn {
            scales_at_freeze = log_scale.iter().map(|ls| ls.exp()).collect();
        }
        let eta = if adapting {
            (iter as f64 + 1.0).powf(-0.6)
        } else {
            0.0
        };
        for i in 0..n_params {
            if point_prior[i] {
                continue;
            }
            let step: f64 = rng.sample(StandardNormal);
            let x = layout.get(&state, i);
            let proposal = x + log_scale[i].exp() * step;
            let mut accepted = false;
            if layout.entries[i].bounds.contains(proposal) {
                let before = local_value(eval, &state, &deps[i]);
                layout.set(&mut state, i, proposal);
                let after = local_value(eval, &state, &deps[i]);
                let log_ratio = after - before;
                if log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp() {
                    accepted = true;
                } else {
                    layout.set(&mut state, i, x);
                }
            }
            if adapting {
                let dir = if accepted { 1.0 - cfg.target_accept } else { -cfg.target_accept };
                log_scale[i] = (log_scale[i] + eta * dir).clamp(LOG_SCALE_MIN, LOG_SCALE_MAX);
            } else {
                proposals[i] += 1;
                if accepted {
                    accepts[i] += 1;
                }
            }
        }
        if !adapting {
            let post_iter = iter - cfg.n_burn + 1;
            if post_iter.is_multiple_of(cfg.thin) {
                for &col in &retained_cols {
                    data.push(layout.get(&state, col));
                }
                let lp = eval.log_posterior(&state);
                debug_assert!(lp.is_finite());
                lps.push(lp);
            }
        }
    }

    let accept_rate: Vec<f64> = (0..n_params)
        .map(|i| {
            if point_prior[i] || proposals[i] == 0 {
                f64::NAN
            } else {
                accepts[i] as f64 / proposals[i] as f64
            }
        })
        .collect();
    let scales_final: Vec<f64> = log_scale.iter().map(|ls| ls.exp()).collect();

    Ok(Draws {
        names,
        data,
        log_posterior: lps,
        chains: vec![ChainMeta {
            chain_index,
            seed: chain_seed,
            n_retained,
            accept_rate,
            scales_at_freeze,
            scales_final,
            init_quantile: init_q,
        }],
        seed: cfg.seed,
        thin: cfg.thin,
        n_burn: cfg.n_burn,
        n_iter: cfg.n_iter,
    })
}

/// Run `cfg.n_chains` chains with derived seeds and overdispersed starts,
/// merge them, and report split-chain convergence diagnostics.
pub fn run_ensemble(
    net: &Network,
    spec: &ModelSpec,
    cfg: &SamplerConfig,
) -> Result<(Draws, ConvergenceReport), SamplerError> {
    let eval = Evaluator::new(net, spec)?;
    run_ensemble_with(&eval, cfg)
}

pub fn run_ensemble_with(
    eval: &Evaluator,
    cfg: &SamplerConfig,
) -> Result<(Draws, ConvergenceReport), SamplerError> {
    cfg.validate()?;
    check_identifiable(eval)?;
    let results: Vec<Result<Draws, SamplerError>> = par_map(
        (0..cfg.n_chains).collect::<Vec<_>>(),
        |c| run_chain_with(eval, cfg, c),
    );
    let mut chains = Vec::with_capacity(cfg.n_chains);
    for r in results {
        chains.push(r?);
    }
    let merged = Draws::merge(chains);
    // split-chain diagnostics work from one chain up (two half-segments),
    // as long as each half has at least two draws
    let report = if cfg.n_iter / cfg.thin >= 4 {
        ConvergenceReport::from_draws(&merged)?
    } else {
        ConvergenceReport {
            params: Vec::new(),
            max_rhat: None,
            flagged: Vec::new(),
        }
    };
    Ok((merged, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Effects, ModelSpec, SplitEdge, Variant};
    use crate::network::parse_dataset;

    const MIXED_CSV: &str = "\
study_id,design,treatment,relapses,exposure_py
S1,rct,placebo,30,100
S1,rct,drug_a,18,100
S2,rct,placebo,28,90
S2,rct,drug_b,20,90
S3,rwe,drug_a,15,120
S3,rwe,drug_b,22,120
S4,rct,placebo,40,150
S4,rct,drug_a,22,140
S4,rct,drug_b,30,150
";

    fn mixed_net() -> Network {
        parse_dataset(MIXED_CSV, None).unwrap()
    }

    // The single-site update must score exactly the terms the full posterior
    // sees: a local before/after difference equals the full-posterior
    // difference for every parameter of every variant.
    #[test]
    fn local_difference_matches_full_difference() {
        use rand::Rng;
        let net = mixed_net();
        let variants = [
            (Variant::RctOnly, Effects::Random),
            (Variant::Pooled, Effects::Random),
            (Variant::Pooled, Effects::Fixed),
            (Variant::PowerPrior, Effects::Random),
            (Variant::Hier2, Effects::Random),
            (Variant::Hier3, Effects::Random),
            (Variant::HierPower, Effects::Random),
        ];
        for (variant, effects) in variants {
            let mut spec = ModelSpec::with_alpha(variant, 0.7);
            spec.effects = effects;
            for split in [None, Some(SplitEdge { base: 1, head: 2 })] {
                if split.is_some() && variant == Variant::Hier3 {
                    continue;
                }
                let eval = Evaluator::with_split(&net, &spec, split).unwrap();
                let layout = ParamLayout::new(&eval);
                let deps = build_deps(&eval, &layout);
                let mut rng = ChaCha8Rng::seed_from_u64(1234);
                let mut state = eval.init_state(0.4);
                for trial in 0..200 {
                    let i = trial % layout.len();
                    let x = layout.get(&state, i);
                    let prop = x + 0.17 * (rng.random::<f64>() - 0.5);
                    if !layout.entries[i].bounds.contains(prop) {
                        continue;
                    }
                    let full_before = eval.log_posterior(&state);
                    let local_before = local_value(&eval, &state, &deps[i]);
                    layout.set(&mut state, i, prop);
                    let full_after = eval.log_posterior(&state);
                    let local_after = local_value(&eval, &state, &deps[i]);
                    let d_full = full_after - full_before;
                    let d_local = local_after - local_before;
                    assert!(
                        (d_full - d_local).abs() < 1e-9,
                        "{variant} {effects:?} split={split:?} param {}: {d_full} vs {d_local}",
                        layout.entries[i].name
                    );
                }
            }
        }
    }

    #[test]
    fn same_seed_gives_identical_draws() {
        let net = mixed_net();
        let spec = ModelSpec::new(Variant::Pooled);
        let cfg = SamplerConfig::quick(200, 300, 1, 42);
        let a = run_chain(&net, &spec, &cfg, 0).unwrap();
        let b = run_chain(&net, &spec, &cfg, 0).unwrap();
        assert_eq!(a, b);
        let c = run_chain(&net, &spec, &cfg, 1).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn point_prior_keeps_d_constant() {
        let net = mixed_net();
        let mut spec = ModelSpec::new(Variant::Pooled);
        spec.priors.d = crate::model::Interval::new(-0.25, -0.25);
        let cfg = SamplerConfig::quick(100, 200, 1, 7);
        let draws = run_chain(&net, &spec, &cfg, 0).unwrap();
        for name in ["d[drug_a]", "d[drug_b]"] {
            let col = draws.column(name).unwrap();
            assert!(col.iter().all(|&v| v == -0.25), "{name} stays at the point");
        }
    }

    #[test]
    fn every_retained_state_has_finite_log_posterior() {
        let net = mixed_net();
        let spec = ModelSpec::with_alpha(Variant::PowerPrior, 0.4);
        let cfg = SamplerConfig::quick(300, 500, 2, 11);
        let (draws, _) = run_ensemble(&net, &spec, &cfg).unwrap();
        assert!(draws.log_posterior.iter().all(|lp| lp.is_finite()));
        assert_eq!(draws.n_rows(), 1000);
    }

    #[test]
    fn scales_frozen_after_burn_in() {
        let net = mixed_net();
        let spec = ModelSpec::new(Variant::Pooled);
        let cfg = SamplerConfig::quick(500, 800, 1, 3);
        let draws = run_chain(&net, &spec, &cfg, 0).unwrap();
        let meta = &draws.chains[0];
        assert_eq!(meta.scales_at_freeze, meta.scales_final);
    }

    #[test]
    fn acceptance_rates_reasonable_after_adaptation() {
        let net = mixed_net();
        for (variant, seed) in [
            (Variant::Pooled, 5u64),
            (Variant::PowerPrior, 6),
            (Variant::Hier2, 7),
            (Variant::Hier3, 8),
        ] {
            let spec = ModelSpec::with_alpha(variant, 0.6);
            let cfg = SamplerConfig::quick(3000, 3000, 1, seed);
            let draws = run_chain(&net, &spec, &cfg, 0).unwrap();
            for (name, rate) in draws.names.iter().zip(&draws.chains[0].accept_rate) {
                assert!(
                    (0.1..=0.8).contains(rate),
                    "{variant} {name} acceptance {rate} outside [0.1, 0.8]"
                );
            }
        }
    }

    #[test]
    fn ensemble_single_chain_equals_run_chain() {
        let net = mixed_net();
        let spec = ModelSpec::new(Variant::Pooled);
        let cfg = SamplerConfig::quick(200, 300, 1, 9);
        let single = run_chain(&net, &spec, &cfg, 0).unwrap();
        let (merged, _) = run_ensemble(&net, &spec, &cfg).unwrap();
        assert_eq!(single, merged);
    }

    #[test]
    fn ensemble_converges_on_easy_model() {
        let net = mixed_net();
        let spec = ModelSpec::new(Variant::Pooled).fixed_effects();
        let cfg = SamplerConfig::quick(2000, 4000, 2, 21);
        let (_, report) = run_ensemble(&net, &spec, &cfg).unwrap();
        assert!(report.max_rhat.unwrap() < RHAT_FLAG_THRESHOLD, "{:?}", report.max_rhat);
        assert!(report.flagged.is_empty());
    }

    // Even chains started exactly on the prior bounds burn in to the
    // posterior the quadrature oracle reports.
    #[test]
    fn chains_started_at_prior_bounds_converge_to_oracle() {
        let net = parse_dataset(
            "study_id,design,treatment,relapses,exposure_py\nS1,rct,placebo,10,20\nS1,rct,drug_a,5,20\n",
            None,
        )
        .unwrap();
        let spec = ModelSpec::new(Variant::Pooled).fixed_effects();
        let oracle = crate::synth::grid_posterior_oracle_with(&net, &spec, 801).unwrap();
        let d_idx = oracle.param("d[drug_a]").unwrap();

        let eval = Evaluator::new(&net, &spec).unwrap();
        let cfg = SamplerConfig::quick(8000, 12_000, 1, 2024);
        let mut merged = Vec::new();
        for (c, q) in [(0usize, 0.0f64), (1, 1.0)] {
            let mut init = eval.state_template();
            init.mu[0] = spec.priors.mu.quantile(q);
            init.d[0] = spec.priors.d.quantile(q);
            let draws = run_chain_from(&eval, &cfg, c, Some(init)).unwrap();
            merged.extend(draws.column("d[drug_a]").unwrap());
        }
        let mean = merged.iter().sum::<f64>() / merged.len() as f64;
        assert!(
            (mean - oracle.mean[d_idx]).abs() < 0.02,
            "posterior mean {mean} vs oracle {}",
            oracle.mean[d_idx]
        );
    }

    #[test]
    fn alpha_zero_rejects_rwe_only_treatment() {
        // drug_c appears only in an RWE study: not identifiable at alpha = 0.
        let csv = "\
study_id,design,treatment,relapses,exposure_py
S1,rct,placebo,30,100
S1,rct,drug_a,18,100
S2,rwe,placebo,25,80
S2,rwe,drug_c,12,80
";
        let net = parse_dataset(csv, None).unwrap();
        let spec = ModelSpec::with_alpha(Variant::PowerPrior, 0.0);
        let cfg = SamplerConfig::quick(50, 50, 1, 1);
        match run_chain(&net, &spec, &cfg, 0) {
            Err(SamplerError::NotIdentifiable(msg)) => assert!(msg.contains("drug_c")),
            other => panic!("expected NotIdentifiable, got {other:?}"),
        }
    }

    #[test]
    fn reduced_retention_drops_nuisance_columns() {
        let net = mixed_net();
        let spec = ModelSpec::new(Variant::Pooled);
        let mut cfg = SamplerConfig::quick(100, 200, 1, 2);
        cfg.reduced_retention = true;
        let draws = run_chain(&net, &spec, &cfg, 0).unwrap();
        assert_eq!(draws.names, vec!["d[drug_a]", "d[drug_b]", "tau"]);
    }

    #[test]
    fn trace_csv_shape() {
        let net = mixed_net();
        let spec = ModelSpec::new(Variant::Pooled);
        let mut cfg = SamplerConfig::quick(50, 100, 2, 2);
        cfg.thin = 2;
        let (draws, _) = run_ensemble(&net, &spec, &cfg).unwrap();
        let csv = draws.to_trace_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 100);
        assert!(lines[0].starts_with("chain,iter,mu[S1]"));
        assert!(lines[1].starts_with("0,2,"));
    }
}
