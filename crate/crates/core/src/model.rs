//! Model variants, priors, and the exact log-posterior the sampler targets.
//!
//! All variants share the Poisson arm likelihood with a log link: relapses
//! `r ~ Poisson(γE)` with `log γ = μ + δ` for non-baseline arms. Contrasts are
//! anchored to a common reference through basic parameters `d_1k`, with
//! `d_bk = d_1k − d_1b` by consistency. Random study effects follow a normal
//! distribution around the contrast means, with multi-arm studies handled by
//! a conditional-normal chain that induces covariance `het²/2` between
//! effects sharing a baseline.
//!
//! Variants differ in which studies enter, how real-world arms are weighted,
//! and where the between-study standard deviation sits:
//!
//! * `RctOnly` — real-world studies excluded entirely.
//! * `Pooled` — every study at face value, one between-study SD τ.
//! * `PowerPrior` — RCT arms at weight 1, RWE arm log-likelihoods multiplied
//!   by α ∈ \[0,1\]; α = 0 excludes RWE studies outright (the analytic limit).
//! * `Hier2` — both designs drawn around shared means with SD σ.
//! * `Hier3` — three levels: effects around per-design means with SD τ,
//!   per-design means shrunk to overall means with SD σ.
//! * `HierPower` — `Hier2` with the RWE variance inflated to σ²/α.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Design, Network};
use crate::util::{ln_factorial, normal_log_pdf};

/// Natural-log density value; `f64::NEG_INFINITY` marks "outside support".
pub type LogDensity = f64;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("node split: {0}")]
    Split(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn quantile(&self, q: f64) -> f64 {
        self.lo + q * self.width()
    }

    fn check(&self, name: &str, nonneg: bool) -> Result<(), ModelError> {
        // lo == hi is a legal point prior: the parameter is pinned.
        // NaN bounds also land here.
        if self.lo > self.hi || self.lo.is_nan() || self.hi.is_nan() {
            return Err(ModelError::InvalidSpec(format!(
                "{name} bounds must satisfy lower ≤ upper, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if nonneg && self.lo < 0.0 {
            return Err(ModelError::InvalidSpec(format!(
                "{name} lower bound must be ≥ 0, got {}",
                self.lo
            )));
        }
        Ok(())
    }
}

/// Uniform prior bounds for every parameter block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub mu: Interval,
    pub d: Interval,
    pub tau: Interval,
    pub sigma: Interval,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            mu: Interval::new(-10.0, 10.0),
            d: Interval::new(-10.0, 10.0),
            tau: Interval::new(0.0, 2.0),
            sigma: Interval::new(0.0, 2.0),
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.mu.check("mu", false)?;
        self.d.check("d", false)?;
        self.tau.check("tau", true)?;
        self.sigma.check("sigma", true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    RctOnly,
    Pooled,
    PowerPrior,
    Hier2,
    Hier3,
    HierPower,
}

impl Variant {
    pub fn uses_alpha(&self) -> bool {
        matches!(self, Variant::PowerPrior | Variant::HierPower)
    }

    pub fn has_sigma(&self) -> bool {
        matches!(self, Variant::Hier2 | Variant::Hier3 | Variant::HierPower)
    }

    pub fn is_hierarchical(&self) -> bool {
        self.has_sigma()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::RctOnly => "rct_only",
            Variant::Pooled => "pooled",
            Variant::PowerPrior => "power_prior",
            Variant::Hier2 => "hier2",
            Variant::Hier3 => "hier3",
            Variant::HierPower => "hier_power",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rct_only" | "rctonly" | "rct" => Ok(Variant::RctOnly),
            "pooled" | "naive" => Ok(Variant::Pooled),
            "power_prior" | "power" => Ok(Variant::PowerPrior),
            "hier2" | "hierarchical" => Ok(Variant::Hier2),
            "hier3" => Ok(Variant::Hier3),
            "hier_power" | "hierpower" => Ok(Variant::HierPower),
            other => Err(ModelError::InvalidSpec(format!("unknown variant `{other}`"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effects {
    Random,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    /// Down-weighting factor for real-world studies; only read by
    /// `PowerPrior` and `HierPower`.
    pub alpha: f64,
    pub priors: PriorSpec,
    pub effects: Effects,
    /// Experimental: separate within-design SDs (τ_rct, τ_rwe) under `Hier3`.
    #[serde(default)]
    pub design_specific_tau: bool,
}

impl ModelSpec {
    pub fn new(variant: Variant) -> Self {
        ModelSpec {
            variant,
            alpha: 1.0,
            priors: PriorSpec::default(),
            effects: Effects::Random,
            design_specific_tau: false,
        }
    }

    pub fn with_alpha(variant: Variant, alpha: f64) -> Self {
        ModelSpec {
            alpha,
            ..ModelSpec::new(variant)
        }
    }

    pub fn fixed_effects(mut self) -> Self {
        self.effects = Effects::Fixed;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.priors.validate()?;
        if !(0.0..=1.0).contains(&self.alpha) || self.alpha.is_nan() {
            return Err(ModelError::InvalidSpec(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.effects == Effects::Fixed && self.variant.is_hierarchical() {
            return Err(ModelError::InvalidSpec(format!(
                "fixed effects are not defined for the {} variant",
                self.variant
            )));
        }
        if self.design_specific_tau && self.variant != Variant::Hier3 {
            return Err(ModelError::InvalidSpec(
                "design_specific_tau applies only to hier3".into(),
            ));
        }
        Ok(())
    }

    /// Are real-world studies part of the model at all?
    pub fn includes_rwe(&self) -> bool {
        match self.variant {
            Variant::RctOnly => false,
            Variant::PowerPrior | Variant::HierPower => self.alpha > 0.0,
            _ => true,
        }
    }

    /// Number of active within-design SDs (entries of `ParameterState::tau`).
    pub fn n_tau(&self) -> usize {
        if self.effects == Effects::Fixed {
            return 0;
        }
        match self.variant {
            Variant::Hier2 | Variant::HierPower => 0,
            Variant::Hier3 if self.design_specific_tau => 2,
            _ => 1,
        }
    }

    pub fn has_sigma(&self) -> bool {
        self.effects == Effects::Random && self.variant.has_sigma()
    }
}

/// One point in parameter space. Dimensions follow the included studies of a
/// given (network, spec) pair; inactive blocks are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterState {
    /// Baseline log-rates, one per included study.
    pub mu: Vec<f64>,
    /// Per-study effects for non-baseline arms (ascending treatment index);
    /// inner vectors empty under fixed effects.
    pub delta: Vec<Vec<f64>>,
    /// Basic parameters d_1k for k = 2..T.
    pub d: Vec<f64>,
    /// Per-design basic parameters (hier3 only): `[rct, rwe]`, each length T−1.
    pub d_design: Vec<Vec<f64>>,
    /// Within-design between-study SDs; length given by `ModelSpec::n_tau`.
    pub tau: Vec<f64>,
    /// Design-level SD (hier2/hier_power effect SD; hier3 shrinkage SD).
    pub sigma: f64,
    /// Direct-evidence parameter when a node-split edge is active.
    pub d_split: Option<f64>,
}

/// Node-split augmentation: separate the direct evidence for `base`→`head`
/// from the network-functional (indirect) estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitEdge {
    pub base: usize,
    pub head: usize,
}

/// Exponentiated arm rate: `γ = exp(μ + δ)`, with δ = 0 on baseline arms.
pub fn arm_rate(mu: f64, delta_or_zero: f64) -> f64 {
    (mu + delta_or_zero).exp()
}

/// Weighted Poisson arm log-likelihood: `α·(r·ln λ − λ − ln r!)` with `λ = γE`.
///
/// α = 0 contributes exactly zero; α = 1 is the plain Poisson log-likelihood.
pub fn arm_log_lik(r: u64, exposure: f64, gamma: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let lambda = gamma * exposure;
    // rejects NaN, zero and infinite rates in one go
    if !(lambda.is_finite() && lambda > 0.0) {
        return f64::NEG_INFINITY;
    }
    alpha * ((r as f64) * lambda.ln() - lambda - ln_factorial(r))
}

/// Consistency contrast `d_bk = d_1k − d_1b`.
pub fn contrast(d_1k: f64, d_1b: f64) -> f64 {
    d_1k - d_1b
}

/// Conditional mean and variance for the n-th effect in a multi-arm study.
///
/// The first effect is unconditional `Normal(d₁, het²)`; for n ≥ 2 the mean
/// picks up `1/n` of the accumulated deviations of earlier effects and the
/// variance shrinks to `(n+1)/(2n)·het²`, which induces marginal variance
/// `het²` and pairwise covariance `het²/2` across the study's effects.
pub fn multi_arm_conditional(
    d: &[f64],
    delta_prev: &[f64],
    het_sd: f64,
    n: usize,
) -> Result<(f64, f64), ModelError> {
    if n == 0 || d.len() < n || delta_prev.len() != n - 1 {
        return Err(ModelError::DimensionMismatch(format!(
            "conditional for effect {n} needs {n} means and {} previous effects, got {} and {}",
            n - 1,
            d.len(),
            delta_prev.len()
        )));
    }
    let nf = n as f64;
    let mut mean = d[n - 1];
    for t in 0..(n - 1) {
        mean += (delta_prev[t] - d[t]) / nf;
    }
    let var = (nf + 1.0) / (2.0 * nf) * het_sd * het_sd;
    Ok((mean, var))
}

/// Uniform log-prior over the active parameter blocks; −∞ outside support.
///
/// Random-effect δ terms belong to the hierarchical likelihood, not here.
pub fn log_prior(state: &ParameterState, spec: &ModelSpec) -> LogDensity {
    let pri = &spec.priors;
    let mut lp = 0.0;
    let mut add = |x: f64, iv: &Interval| {
        if iv.contains(x) {
            if iv.width() > 0.0 {
                lp += -iv.width().ln();
            }
            true
        } else {
            false
        }
    };
    for &m in &state.mu {
        if !add(m, &pri.mu) {
            return f64::NEG_INFINITY;
        }
    }
    for &v in &state.d {
        if !add(v, &pri.d) {
            return f64::NEG_INFINITY;
        }
    }
    for row in &state.d_design {
        for &v in row {
            if !add(v, &pri.d) {
                return f64::NEG_INFINITY;
            }
        }
    }
    if let Some(s) = state.d_split {
        if !add(s, &pri.d) {
            return f64::NEG_INFINITY;
        }
    }
    for &t in &state.tau {
        if !add(t, &pri.tau) {
            return f64::NEG_INFINITY;
        }
    }
    if spec.has_sigma() && !add(state.sigma, &pri.sigma) {
        return f64::NEG_INFINITY;
    }
    lp
}

/// Unnormalized log-posterior of `state` for the given network and variant.
pub fn log_posterior(
    state: &ParameterState,
    net: &Network,
    spec: &ModelSpec,
) -> Result<LogDensity, ModelError> {
    let eval = Evaluator::new(net, spec)?;
    eval.check_dims(state)?;
    Ok(eval.log_posterior(state))
}

const DESIGNS: [Design; 2] = [Design::Rct, Design::Rwe];

pub fn design_index(design: Design) -> usize {
    match design {
        Design::Rct => 0,
        Design::Rwe => 1,
    }
}

/// Prepared log-posterior evaluator for one (network, spec, split) triple.
///
/// Exposes the per-study components so the sampler can score single-site
/// updates without touching unrelated terms.
pub struct Evaluator<'a> {
    pub net: &'a Network,
    pub spec: &'a ModelSpec,
    split: Option<SplitEdge>,
    /// Indices into `net.studies` of the studies the variant includes.
    included: Vec<usize>,
    /// Likelihood weight per included study.
    weights: Vec<f64>,
    /// Whether each included study carries direct evidence for the split edge.
    direct: Vec<bool>,
    /// Included-study positions touching each treatment index (1-based).
    by_treatment: Vec<Vec<usize>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a Network, spec: &'a ModelSpec) -> Result<Self, ModelError> {
        Self::with_split(net, spec, None)
    }

    pub fn with_split(
        net: &'a Network,
        spec: &'a ModelSpec,
        split: Option<SplitEdge>,
    ) -> Result<Self, ModelError> {
        spec.validate()?;
        if split.is_some() && spec.variant == Variant::Hier3 {
            return Err(ModelError::Split(
                "node splitting is not supported for the hier3 variant".into(),
            ));
        }
        if let Some(e) = split {
            let t = net.n_treatments();
            if e.base == e.head || e.base < 1 || e.head < 1 || e.base > t || e.head > t {
                return Err(ModelError::Split(format!(
                    "invalid split edge ({}, {})",
                    e.base, e.head
                )));
            }
        }
        let mut included = Vec::new();
        let mut weights = Vec::new();
        let mut direct = Vec::new();
        for (idx, s) in net.studies.iter().enumerate() {
            if s.design == Design::Rwe && !spec.includes_rwe() {
                continue;
            }
            let w = match (spec.variant, s.design) {
                (Variant::PowerPrior, Design::Rwe) => spec.alpha,
                _ => 1.0,
            };
            included.push(idx);
            weights.push(w);
            direct.push(match split {
                Some(e) => s.contains(e.base) && s.contains(e.head),
                None => false,
            });
        }
        let mut by_treatment = vec![Vec::new(); net.n_treatments() + 1];
        for (pos, &idx) in included.iter().enumerate() {
            for a in &net.studies[idx].arms {
                by_treatment[a.treatment].push(pos);
            }
        }
        Ok(Evaluator {
            net,
            spec,
            split,
            included,
            weights,
            direct,
            by_treatment,
        })
    }

    pub fn included(&self) -> &[usize] {
        &self.included
    }

    pub fn n_included(&self) -> usize {
        self.included.len()
    }

    pub fn split(&self) -> Option<SplitEdge> {
        self.split
    }

    pub fn study(&self, pos: usize) -> &crate::network::Study {
        &self.net.studies[self.included[pos]]
    }

    pub fn study_weight(&self, pos: usize) -> f64 {
        self.weights[pos]
    }

    pub fn is_direct(&self, pos: usize) -> bool {
        self.direct[pos]
    }

    pub fn studies_with_treatment(&self, t: usize) -> &[usize] {
        &self.by_treatment[t]
    }

    fn basic(&self, state: &ParameterState, t: usize) -> f64 {
        if t == 1 {
            0.0
        } else {
            state.d[t - 2]
        }
    }

    fn basic_design(&self, state: &ParameterState, j: usize, t: usize) -> f64 {
        if t == 1 {
            0.0
        } else {
            state.d_design[j][t - 2]
        }
    }

    /// Contrast means for the study's non-baseline arms, in arm order.
    ///
    /// Under hier3 the per-design basics supply the means; for a direct study
    /// of the split edge, the head arm's mean routes through the split
    /// parameter: `d(base→head)` is replaced by `d_split`.
    pub fn study_contrast_means(&self, state: &ParameterState, pos: usize) -> Vec<f64> {
        let s = self.study(pos);
        let b = s.baseline;
        let hier3 = self.spec.variant == Variant::Hier3;
        let j = design_index(s.design);
        let mut means = Vec::with_capacity(s.arms.len() - 1);
        for a in s.non_baseline_arms() {
            let t = a.treatment;
            let mut m = if hier3 {
                self.basic_design(state, j, t) - self.basic_design(state, j, b)
            } else {
                self.basic(state, t) - self.basic(state, b)
            };
            if let Some(e) = self.split {
                if self.direct[pos] && t == e.head {
                    // d_b,head = d_b,base + split
                    m = (self.basic(state, e.base) - self.basic(state, b))
                        + state.d_split.unwrap_or(0.0);
                }
            }
            means.push(m);
        }
        means
    }

    /// Heterogeneity SD applying to the study's random effects.
    pub fn het_sd(&self, state: &ParameterState, pos: usize) -> f64 {
        let design = self.study(pos).design;
        match self.spec.variant {
            Variant::RctOnly | Variant::Pooled | Variant::PowerPrior => state.tau[0],
            Variant::Hier2 => state.sigma,
            Variant::HierPower => match design {
                Design::Rct => state.sigma,
                Design::Rwe => state.sigma / self.spec.alpha.sqrt(),
            },
            Variant::Hier3 => {
                if self.spec.design_specific_tau {
                    state.tau[design_index(design)]
                } else {
                    state.tau[0]
                }
            }
        }
    }

    /// Weighted Poisson log-likelihood of one included study.
    pub fn study_log_lik(&self, state: &ParameterState, pos: usize) -> f64 {
        let s = self.study(pos);
        let w = self.weights[pos];
        let mu = state.mu[pos];
        let fixed = self.spec.effects == Effects::Fixed;
        let means = if fixed {
            self.study_contrast_means(state, pos)
        } else {
            Vec::new()
        };
        let mut acc = 0.0;
        let mut nb = 0;
        for a in &s.arms {
            let effect = if a.treatment == s.baseline {
                0.0
            } else {
                let e = if fixed {
                    means[nb]
                } else {
                    state.delta[pos][nb]
                };
                nb += 1;
                e
            };
            let gamma = arm_rate(mu, effect);
            acc += arm_log_lik(a.relapses, a.exposure_py, gamma, w);
            if acc == f64::NEG_INFINITY {
                return acc;
            }
        }
        acc
    }

    /// Random-effects log-density of one study's δ vector via the
    /// conditional-normal chain.
    pub fn study_re_log_density(&self, state: &ParameterState, pos: usize) -> f64 {
        if self.spec.effects == Effects::Fixed {
            return 0.0;
        }
        let means = self.study_contrast_means(state, pos);
        let het = self.het_sd(state, pos);
        let deltas = &state.delta[pos];
        let mut acc = 0.0;
        for n in 1..=deltas.len() {
            let (m, v) = multi_arm_conditional(&means[..n], &deltas[..n - 1], het, n)
                .expect("dimensions checked at construction");
            acc += normal_log_pdf(deltas[n - 1], m, v);
            if acc == f64::NEG_INFINITY {
                return acc;
            }
        }
        acc
    }

    /// Hier3 design level: per-design basics drawn around the overall basics.
    pub fn design_level_log_density(&self, state: &ParameterState) -> f64 {
        if self.spec.variant != Variant::Hier3 {
            return 0.0;
        }
        let var = state.sigma * state.sigma;
        let mut acc = 0.0;
        for j in 0..DESIGNS.len() {
            for k in 0..state.d.len() {
                acc += normal_log_pdf(state.d_design[j][k], state.d[k], var);
                if acc == f64::NEG_INFINITY {
                    return acc;
                }
            }
        }
        acc
    }

    pub fn log_prior(&self, state: &ParameterState) -> LogDensity {
        log_prior(state, self.spec)
    }

    pub fn log_posterior(&self, state: &ParameterState) -> LogDensity {
        let mut lp = self.log_prior(state);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        for pos in 0..self.included.len() {
            lp += self.study_log_lik(state, pos);
            if lp == f64::NEG_INFINITY {
                return lp;
            }
            lp += self.study_re_log_density(state, pos);
            if lp == f64::NEG_INFINITY {
                return lp;
            }
        }
        lp + self.design_level_log_density(state)
    }

    /// Unweighted total log-likelihood (every included arm at weight 1);
    /// the quantity behind Dbar and the deviance reports.
    pub fn total_log_lik_unweighted(&self, state: &ParameterState) -> f64 {
        let mut acc = 0.0;
        for pos in 0..self.included.len() {
            let s = self.study(pos);
            let mu = state.mu[pos];
            let fixed = self.spec.effects == Effects::Fixed;
            let means = if fixed {
                self.study_contrast_means(state, pos)
            } else {
                Vec::new()
            };
            let mut nb = 0;
            for a in &s.arms {
                let effect = if a.treatment == s.baseline {
                    0.0
                } else {
                    let e = if fixed {
                        means[nb]
                    } else {
                        state.delta[pos][nb]
                    };
                    nb += 1;
                    e
                };
                acc += arm_log_lik(a.relapses, a.exposure_py, arm_rate(mu, effect), 1.0);
            }
        }
        acc
    }

    /// Per-arm Poisson means `λ = γE` in included-study, arm order.
    pub fn arm_lambdas(&self, state: &ParameterState) -> Vec<f64> {
        let fixed = self.spec.effects == Effects::Fixed;
        let mut out = Vec::new();
        for pos in 0..self.included.len() {
            let s = self.study(pos);
            let mu = state.mu[pos];
            let means = if fixed {
                self.study_contrast_means(state, pos)
            } else {
                Vec::new()
            };
            let mut nb = 0;
            for a in &s.arms {
                let effect = if a.treatment == s.baseline {
                    0.0
                } else {
                    let e = if fixed {
                        means[nb]
                    } else {
                        state.delta[pos][nb]
                    };
                    nb += 1;
                    e
                };
                out.push(arm_rate(mu, effect) * a.exposure_py);
            }
        }
        out
    }

    pub fn check_dims(&self, state: &ParameterState) -> Result<(), ModelError> {
        let n = self.included.len();
        let t = self.net.n_treatments();
        if state.mu.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "mu has {} entries, model includes {} studies",
                state.mu.len(),
                n
            )));
        }
        if state.delta.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "delta has {} studies, expected {}",
                state.delta.len(),
                n
            )));
        }
        for (pos, dv) in state.delta.iter().enumerate() {
            let want = if self.spec.effects == Effects::Fixed {
                0
            } else {
                self.study(pos).arms.len() - 1
            };
            if dv.len() != want {
                return Err(ModelError::DimensionMismatch(format!(
                    "delta[{}] has {} effects, expected {}",
                    self.study(pos).id,
                    dv.len(),
                    want
                )));
            }
        }
        if state.d.len() != t - 1 {
            return Err(ModelError::DimensionMismatch(format!(
                "d has {} entries, expected {}",
                state.d.len(),
                t - 1
            )));
        }
        let want_design = if self.spec.variant == Variant::Hier3 { 2 } else { 0 };
        if state.d_design.len() != want_design
            || state.d_design.iter().any(|row| row.len() != t - 1)
        {
            return Err(ModelError::DimensionMismatch(
                "d_design shape does not match the variant".into(),
            ));
        }
        if state.tau.len() != self.spec.n_tau() {
            return Err(ModelError::DimensionMismatch(format!(
                "tau has {} entries, expected {}",
                state.tau.len(),
                self.spec.n_tau()
            )));
        }
        if state.d_split.is_some() != self.split.is_some() {
            return Err(ModelError::DimensionMismatch(
                "d_split presence does not match the split configuration".into(),
            ));
        }
        Ok(())
    }

    /// Zeroed state with the dimensions this evaluator expects.
    pub fn state_template(&self) -> ParameterState {
        let t = self.net.n_treatments();
        let delta = (0..self.included.len())
            .map(|pos| {
                if self.spec.effects == Effects::Fixed {
                    Vec::new()
                } else {
                    vec![0.0; self.study(pos).arms.len() - 1]
                }
            })
            .collect();
        ParameterState {
            mu: vec![0.0; self.included.len()],
            delta,
            d: vec![0.0; t - 1],
            d_design: if self.spec.variant == Variant::Hier3 {
                vec![vec![0.0; t - 1]; 2]
            } else {
                Vec::new()
            },
            tau: vec![0.0; self.spec.n_tau()],
            sigma: 0.0,
            d_split: self.split.map(|_| 0.0),
        }
    }

    /// Deterministic overdispersed start: baselines at crude log rates,
    /// contrast and SD blocks at the requested prior quantile, δ at the
    /// implied contrast means so the random-effects density starts at its peak.
    pub fn init_state(&self, quantile: f64) -> ParameterState {
        let pri = self.spec.priors;
        self.build_init(pri.d.quantile(quantile), |iv| iv.quantile(quantile))
    }

    fn build_init(&self, contrast_val: f64, sd_val: impl Fn(&Interval) -> f64) -> ParameterState {
        let pri = &self.spec.priors;
        let mut state = self.state_template();
        for k in 0..state.d.len() {
            state.d[k] = contrast_val;
        }
        for row in state.d_design.iter_mut() {
            for v in row.iter_mut() {
                *v = contrast_val;
            }
        }
        for v in state.tau.iter_mut() {
            *v = sd_val(&pri.tau);
        }
        if self.spec.has_sigma() {
            state.sigma = sd_val(&pri.sigma);
        }
        if state.d_split.is_some() {
            state.d_split = Some(contrast_val);
        }
        for pos in 0..self.included.len() {
            let s = self.study(pos);
            let base = s
                .arms
                .iter()
                .find(|a| a.treatment == s.baseline)
                .expect("baseline arm exists");
            let crude = ((base.relapses as f64 + 0.5) / base.exposure_py).ln();
            state.mu[pos] = crude.clamp(pri.mu.lo, pri.mu.hi);
        }
        if self.spec.effects == Effects::Random {
            for pos in 0..self.included.len() {
                state.delta[pos] = self.study_contrast_means(&state, pos);
            }
        }
        state
    }
}

/// Default initial state: μ at crude log rates, d at 0, δ at d, SDs at 0.1
/// (each clamped into its prior support).
pub fn default_init(eval: &Evaluator) -> ParameterState {
    let pri = &eval.spec.priors;
    eval.build_init(0.0f64.clamp(pri.d.lo, pri.d.hi), |iv| {
        0.1f64.clamp(iv.lo, iv.hi)
    })
}

// ---------------------------------------------------------------------------
// Flat parameter layout shared by the sampler, the quadrature oracle and the
// draw-matrix column naming.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Baseline log-rate of an included study (by position).
    Mu(usize),
    /// Effect (study position, non-baseline arm position).
    Delta(usize, usize),
    /// Basic parameter d_1k, stored at k−2.
    Basic(usize),
    /// Per-design basic parameter (design, k−2).
    BasicDesign(usize, usize),
    /// Within-design SD (index into `ParameterState::tau`).
    Tau(usize),
    Sigma,
    Split,
}

#[derive(Debug, Clone)]
pub struct ParamEntry {
    pub name: String,
    pub bounds: Interval,
    pub kind: ParamKind,
}

/// Ordered view of the free parameters for one evaluator.
pub struct ParamLayout {
    pub entries: Vec<ParamEntry>,
    template: ParameterState,
}

impl ParamLayout {
    pub fn new(eval: &Evaluator) -> ParamLayout {
        let net = eval.net;
        let spec = eval.spec;
        let pri = &spec.priors;
        let mut entries = Vec::new();
        for pos in 0..eval.n_included() {
            entries.push(ParamEntry {
                name: format!("mu[{}]", eval.study(pos).id),
                bounds: pri.mu,
                kind: ParamKind::Mu(pos),
            });
        }
        if spec.effects == Effects::Random {
            for pos in 0..eval.n_included() {
                let s = eval.study(pos);
                for (j, a) in s.non_baseline_arms().enumerate() {
                    // δ is unbounded: its density is the random-effects term.
                    entries.push(ParamEntry {
                        name: format!("delta[{}:{}]", s.id, net.label(a.treatment)),
                        bounds: Interval::new(f64::NEG_INFINITY, f64::INFINITY),
                        kind: ParamKind::Delta(pos, j),
                    });
                }
            }
        }
        for k in 2..=net.n_treatments() {
            entries.push(ParamEntry {
                name: format!("d[{}]", net.label(k)),
                bounds: pri.d,
                kind: ParamKind::Basic(k - 2),
            });
        }
        if spec.variant == Variant::Hier3 {
            for (j, tag) in ["rct", "rwe"].iter().enumerate() {
                for k in 2..=net.n_treatments() {
                    entries.push(ParamEntry {
                        name: format!("d_{}[{}]", tag, net.label(k)),
                        bounds: pri.d,
                        kind: ParamKind::BasicDesign(j, k - 2),
                    });
                }
            }
        }
        match spec.n_tau() {
            0 => {}
            1 => entries.push(ParamEntry {
                name: "tau".into(),
                bounds: pri.tau,
                kind: ParamKind::Tau(0),
            }),
            _ => {
                for (i, tag) in ["rct", "rwe"].iter().enumerate() {
                    entries.push(ParamEntry {
                        name: format!("tau_{tag}"),
                        bounds: pri.tau,
                        kind: ParamKind::Tau(i),
                    });
                }
            }
        }
        if spec.has_sigma() {
            entries.push(ParamEntry {
                name: "sigma".into(),
                bounds: pri.sigma,
                kind: ParamKind::Sigma,
            });
        }
        if let Some(e) = eval.split() {
            entries.push(ParamEntry {
                name: format!("d_split[{}:{}]", net.label(e.base), net.label(e.head)),
                bounds: pri.d,
                kind: ParamKind::Split,
            });
        }
        ParamLayout {
            entries,
            template: eval.state_template(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn get(&self, state: &ParameterState, i: usize) -> f64 {
        match self.entries[i].kind {
            ParamKind::Mu(p) => state.mu[p],
            ParamKind::Delta(p, j) => state.delta[p][j],
            ParamKind::Basic(k) => state.d[k],
            ParamKind::BasicDesign(j, k) => state.d_design[j][k],
            ParamKind::Tau(i) => state.tau[i],
            ParamKind::Sigma => state.sigma,
            ParamKind::Split => state.d_split.expect("split state"),
        }
    }

    pub fn set(&self, state: &mut ParameterState, i: usize, v: f64) {
        match self.entries[i].kind {
            ParamKind::Mu(p) => state.mu[p] = v,
            ParamKind::Delta(p, j) => state.delta[p][j] = v,
            ParamKind::Basic(k) => state.d[k] = v,
            ParamKind::BasicDesign(j, k) => state.d_design[j][k] = v,
            ParamKind::Tau(i) => state.tau[i] = v,
            ParamKind::Sigma => state.sigma = v,
            ParamKind::Split => state.d_split = Some(v),
        }
    }

    pub fn flatten(&self, state: &ParameterState) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(state, i)).collect()
    }

    pub fn unflatten(&self, xs: &[f64]) -> ParameterState {
        assert_eq!(xs.len(), self.len(), "flat vector length");
        let mut state = self.template.clone();
        for (i, &x) in xs.iter().enumerate() {
            self.set(&mut state, i, x);
        }
        state
    }
}
