//! Ground-truth network generation and a brute-force posterior oracle.
//!
//! `generate_network` runs the count model generatively from a known truth so
//! sampler output can be checked against it; `grid_posterior_oracle` computes
//! posterior moments by deterministic tensor-product quadrature for tiny
//! models, giving the sampler an implementation-independent reference.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, Document};
use crate::model::{multi_arm_conditional, Evaluator, ModelError, ModelSpec, ParamLayout};
use crate::network::{Arm, Design, Network, Study, Treatment};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid truth spec: {0}")]
    Invalid(String),
    #[error("oracle supports at most {max} free parameters, model has {got}")]
    TooManyParameters { max: usize, got: usize },
    #[error("oracle requires bounded parameters, `{0}` is unbounded")]
    UnboundedParameter(String),
    #[error("posterior is non-finite everywhere on the grid")]
    DegeneratePosterior,
}

/// One comparison in the design layout: the arm set plus how many studies of
/// each design compare it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonLayout {
    pub treatments: Vec<String>,
    pub n_rct: usize,
    pub n_rwe: usize,
}

/// Ground truth for a synthetic network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSpec {
    /// Treatment labels; the first is the reference.
    pub treatments: Vec<String>,
    /// True basic parameters d_1k, one per non-reference treatment.
    pub d: Vec<f64>,
    /// True between-study SD.
    pub tau: f64,
    /// Baseline log-rates: one value broadcast to every study, or one per study.
    pub mu: Vec<f64>,
    /// Person-years per arm: one value broadcast, or one per generated arm.
    pub exposure_py: Vec<f64>,
    /// Additive shift applied to RWE basic parameters (per non-reference
    /// treatment, on the log-rate-ratio scale). Empty means no bias.
    pub rwe_bias: Vec<f64>,
    pub layout: Vec<ComparisonLayout>,
}

impl TruthSpec {
    pub fn n_studies(&self) -> usize {
        self.layout.iter().map(|c| c.n_rct + c.n_rwe).sum()
    }

    pub fn n_arms(&self) -> usize {
        self.layout
            .iter()
            .map(|c| (c.n_rct + c.n_rwe) * c.treatments.len())
            .sum()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let t = self.treatments.len();
        if t < 2 {
            return Err(SynthError::Invalid("need at least 2 treatments".into()));
        }
        if self.d.len() != t - 1 {
            return Err(SynthError::Invalid(format!(
                "d has {} entries for {} non-reference treatments",
                self.d.len(),
                t - 1
            )));
        }
        if !self.rwe_bias.is_empty() && self.rwe_bias.len() != t - 1 {
            return Err(SynthError::Invalid(format!(
                "rwe_bias has {} entries, expected {} or none",
                self.rwe_bias.len(),
                t - 1
            )));
        }
        if self.tau < 0.0 {
            return Err(SynthError::Invalid("tau must be ≥ 0".into()));
        }
        if self.layout.is_empty() || self.n_studies() == 0 {
            return Err(SynthError::Invalid("layout generates no studies".into()));
        }
        if self.mu.len() != 1 && self.mu.len() != self.n_studies() {
            return Err(SynthError::Invalid(format!(
                "mu has {} entries, expected 1 or {}",
                self.mu.len(),
                self.n_studies()
            )));
        }
        if self.exposure_py.len() != 1 && self.exposure_py.len() != self.n_arms() {
            return Err(SynthError::Invalid(format!(
                "exposure_py has {} entries, expected 1 or {}",
                self.exposure_py.len(),
                self.n_arms()
            )));
        }
        if self.exposure_py.iter().any(|&e| e <= 0.0 || e.is_nan()) {
            return Err(SynthError::Invalid("exposures must be > 0".into()));
        }
        for c in &self.layout {
            if c.treatments.len() < 2 {
                return Err(SynthError::Invalid(
                    "each comparison needs at least 2 treatments".into(),
                ));
            }
            for label in &c.treatments {
                if !self.treatments.contains(label) {
                    return Err(SynthError::Invalid(format!(
                        "layout mentions unknown treatment `{label}`"
                    )));
                }
            }
        }
        // the generated comparison graph must be connected
        let t_idx = |l: &str| self.treatments.iter().position(|x| x == l).unwrap();
        let mut adj = vec![Vec::new(); t];
        for c in &self.layout {
            if c.n_rct + c.n_rwe == 0 {
                continue;
            }
            for i in 0..c.treatments.len() {
                for j in (i + 1)..c.treatments.len() {
                    let (a, b) = (t_idx(&c.treatments[i]), t_idx(&c.treatments[j]));
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        let mut seen = vec![false; t];
        let mut queue = vec![0usize];
        seen[0] = true;
        while let Some(u) = queue.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(SynthError::Invalid(
                "layout yields a disconnected network".into(),
            ));
        }
        Ok(())
    }

    /// Parse from the key-value configuration grammar:
    ///
    /// ```text
    /// [truth]
    /// treatments = placebo, drug_a, drug_b
    /// d = -0.5, -0.3
    /// tau = 0.1
    /// mu = -0.7
    /// exposure_py = 1000
    /// rwe_bias = 0.5, 0.5
    ///
    /// [layout]
    /// comparison = placebo drug_a rct=3 rwe=1
    /// comparison = placebo drug_b rct=2 rwe=1
    /// ```
    pub fn parse(text: &str) -> Result<TruthSpec, SynthError> {
        let doc = Document::parse(text)?;
        let truth = doc.section("truth").ok_or_else(|| {
            SynthError::Invalid("missing [truth] section".into())
        })?;
        for e in &truth.entries {
            match e.key.as_str() {
                "treatments" | "d" | "tau" | "mu" | "exposure_py" | "rwe_bias" => {}
                other => {
                    return Err(SynthError::Config(ConfigError::UnknownKey {
                        line: e.line,
                        section: "truth".into(),
                        key: other.into(),
                    }))
                }
            }
        }
        let require = |key: &str| -> Result<&crate::config::Entry, SynthError> {
            truth
                .get(key)?
                .ok_or_else(|| SynthError::Config(ConfigError::MissingKey {
                    section: "truth".into(),
                    key: key.into(),
                }))
        };
        let treatments = require("treatments")?.as_str_list()?;
        let d = require("d")?.as_f64_list()?;
        let tau = require("tau")?.as_f64()?;
        let mu = require("mu")?.as_f64_list()?;
        let exposure_py = require("exposure_py")?.as_f64_list()?;
        let rwe_bias = match truth.get("rwe_bias")? {
            Some(e) => e.as_f64_list()?,
            None => Vec::new(),
        };
        let layout_sec = doc.section("layout").ok_or_else(|| {
            SynthError::Invalid("missing [layout] section".into())
        })?;
        let mut layout = Vec::new();
        for e in &layout_sec.entries {
            if e.key != "comparison" {
                return Err(SynthError::Config(ConfigError::UnknownKey {
                    line: e.line,
                    section: "layout".into(),
                    key: e.key.clone(),
                }));
            }
            let mut treats = Vec::new();
            let mut n_rct = 0;
            let mut n_rwe = 0;
            for tok in e.value.split_whitespace() {
                if let Some(n) = tok.strip_prefix("rct=") {
                    n_rct = n.parse().map_err(|_| {
                        SynthError::Invalid(format!("line {}: bad rct count `{n}`", e.line))
                    })?;
                } else if let Some(n) = tok.strip_prefix("rwe=") {
                    n_rwe = n.parse().map_err(|_| {
                        SynthError::Invalid(format!("line {}: bad rwe count `{n}`", e.line))
                    })?;
                } else {
                    treats.push(tok.to_string());
                }
            }
            layout.push(ComparisonLayout {
                treatments: treats,
                n_rct,
                n_rwe,
            });
        }
        let spec = TruthSpec {
            treatments,
            d,
            tau,
            mu,
            exposure_py,
            rwe_bias,
            layout,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Latent values realized while generating one study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedStudy {
    pub id: String,
    pub design: Design,
    pub mu: f64,
    /// (treatment label, realized δ) per non-baseline arm.
    pub effects: Vec<(String, f64)>,
}

/// Draw one study's effects through the conditional-normal chain.
pub fn sample_effect_chain(means: &[f64], het_sd: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut deltas = Vec::with_capacity(means.len());
    for n in 1..=means.len() {
        let (m, v) = multi_arm_conditional(&means[..n], &deltas[..n - 1], het_sd, n)
            .expect("chain dimensions");
        let z: f64 = rng.sample(StandardNormal);
        deltas.push(m + v.sqrt() * z);
    }
    deltas
}

/// Generate a network from a known truth: per study draw δ through the
/// effect chain (RWE effects get the bias shift), set rates by the log link,
/// and draw counts from Poisson(rate·exposure). Byte-reproducible per seed.
pub fn generate_network(
    truth: &TruthSpec,
    seed: u64,
) -> Result<(Network, Vec<RealizedStudy>), SynthError> {
    truth.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_idx = |l: &str| truth.treatments.iter().position(|x| x == l).unwrap() + 1;
    let basic = |t: usize, biased: bool| -> f64 {
        if t == 1 {
            return 0.0;
        }
        let mut v = truth.d[t - 2];
        if biased && !truth.rwe_bias.is_empty() {
            v += truth.rwe_bias[t - 2];
        }
        v
    };

    let treatments: Vec<Treatment> = truth
        .treatments
        .iter()
        .enumerate()
        .map(|(i, label)| Treatment {
            label: label.clone(),
            index: i + 1,
        })
        .collect();

    let mut studies = Vec::with_capacity(truth.n_studies());
    let mut realized = Vec::with_capacity(truth.n_studies());
    let mut study_no = 0usize;
    let mut arm_no = 0usize;
    for comp in &truth.layout {
        let mut arm_indices: Vec<usize> = comp.treatments.iter().map(|l| t_idx(l)).collect();
        arm_indices.sort_unstable();
        let designs = std::iter::repeat_n(Design::Rct, comp.n_rct)
            .chain(std::iter::repeat_n(Design::Rwe, comp.n_rwe));
        for design in designs {
            let id = format!("S{:02}_{design}", study_no + 1);
            let mu = if truth.mu.len() == 1 {
                truth.mu[0]
            } else {
                truth.mu[study_no]
            };
            let baseline = arm_indices[0];
            let biased = design == Design::Rwe;
            let means: Vec<f64> = arm_indices[1..]
                .iter()
                .map(|&t| basic(t, biased) - basic(baseline, biased))
                .collect();
            let deltas = sample_effect_chain(&means, truth.tau, &mut rng);
            let mut arms = Vec::with_capacity(arm_indices.len());
            let mut effects = Vec::new();
            for (pos, &t) in arm_indices.iter().enumerate() {
                let effect = if pos == 0 {
                    0.0
                } else {
                    effects.push((truth.treatments[t - 1].clone(), deltas[pos - 1]));
                    deltas[pos - 1]
                };
                let exposure = if truth.exposure_py.len() == 1 {
                    truth.exposure_py[0]
                } else {
                    truth.exposure_py[arm_no]
                };
                arm_no += 1;
                let lambda = (mu + effect).exp() * exposure;
                let relapses = Poisson::new(lambda)
                    .map_err(|e| SynthError::Invalid(format!("poisson rate {lambda}: {e}")))?
                    .sample(&mut rng) as u64;
                arms.push(Arm {
                    treatment: t,
                    relapses,
                    exposure_py: exposure,
                });
            }
            studies.push(Study {
                id: id.clone(),
                design,
                arms,
                baseline,
            });
            realized.push(RealizedStudy {
                id,
                design,
                mu,
                effects,
            });
            study_no += 1;
        }
    }
    Ok((
        Network {
            studies,
            treatments,
            reference: 1,
        },
        realized,
    ))
}

/// Documented default grid density per axis.
pub const ORACLE_GRID_POINTS: usize = 2001;
const ORACLE_MAX_PARAMS: usize = 3;

/// Posterior moments from the quadrature oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    /// Grid point with the highest log-posterior.
    pub mode: Vec<f64>,
}

impl OracleResult {
    pub fn param(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Tensor-product trapezoid quadrature of the exact unnormalized posterior
/// over the prior box, at the default 2001 points per axis.
///
/// Restricted to models with at most 3 free parameters so the grid stays
/// dense enough to be trusted as a reference.
pub fn grid_posterior_oracle(net: &Network, spec: &ModelSpec) -> Result<OracleResult, SynthError> {
    grid_posterior_oracle_with(net, spec, ORACLE_GRID_POINTS)
}

pub fn grid_posterior_oracle_with(
    net: &Network,
    spec: &ModelSpec,
    points: usize,
) -> Result<OracleResult, SynthError> {
    let eval = Evaluator::new(net, spec)?;
    let layout = ParamLayout::new(&eval);
    let dims = layout.len();
    if dims == 0 {
        return Err(SynthError::Invalid("model has no free parameters".into()));
    }
    if dims > ORACLE_MAX_PARAMS {
        return Err(SynthError::TooManyParameters {
            max: ORACLE_MAX_PARAMS,
            got: dims,
        });
    }
    if points < 2 {
        return Err(SynthError::Invalid("grid needs at least 2 points".into()));
    }

    struct Axis {
        values: Vec<f64>,
        weights: Vec<f64>,
    }
    let mut axes = Vec::with_capacity(dims);
    for e in &layout.entries {
        if !e.bounds.width().is_finite() {
            return Err(SynthError::UnboundedParameter(e.name.clone()));
        }
        if e.bounds.width() == 0.0 {
            axes.push(Axis {
                values: vec![e.bounds.lo],
                weights: vec![1.0],
            });
            continue;
        }
        let n = points;
        let step = e.bounds.width() / (n - 1) as f64;
        let values: Vec<f64> = (0..n).map(|i| e.bounds.lo + step * i as f64).collect();
        let weights: Vec<f64> = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * step } else { step })
            .collect();
        axes.push(Axis { values, weights });
    }

    // Pass 1: max log-posterior for stable exponentiation (also the mode).
    let mut state = eval.state_template();
    let mut idx = vec![0usize; dims];
    let mut max_lp = f64::NEG_INFINITY;
    let mut mode = vec![0.0; dims];
    loop {
        for (d, &i) in idx.iter().enumerate() {
            layout.set(&mut state, d, axes[d].values[i]);
        }
        let lp = eval.log_posterior(&state);
        if lp > max_lp {
            max_lp = lp;
            for (d, &i) in idx.iter().enumerate() {
                mode[d] = axes[d].values[i];
            }
        }
        if !advance(&mut idx, &axes.iter().map(|a| a.values.len()).collect::<Vec<_>>()) {
            break;
        }
    }
    if max_lp == f64::NEG_INFINITY {
        return Err(SynthError::DegeneratePosterior);
    }

    // Pass 2: normalizer and first two moments per dimension.
    let mut z = 0.0;
    let mut m1 = vec![0.0; dims];
    let mut m2 = vec![0.0; dims];
    idx.fill(0);
    loop {
        let mut w = 1.0;
        for (d, &i) in idx.iter().enumerate() {
            layout.set(&mut state, d, axes[d].values[i]);
            w *= axes[d].weights[i];
        }
        let f = (eval.log_posterior(&state) - max_lp).exp() * w;
        if f > 0.0 {
            z += f;
            for (d, &i) in idx.iter().enumerate() {
                let v = axes[d].values[i];
                m1[d] += v * f;
                m2[d] += v * v * f;
            }
        }
        if !advance(&mut idx, &axes.iter().map(|a| a.values.len()).collect::<Vec<_>>()) {
            break;
        }
    }
    let mean: Vec<f64> = m1.iter().map(|v| v / z).collect();
    let sd: Vec<f64> = m2
        .iter()
        .zip(&mean)
        .map(|(s, m)| (s / z - m * m).max(0.0).sqrt())
        .collect();
    Ok(OracleResult {
        names: layout.names(),
        mean,
        sd,
        mode,
    })
}

fn advance(idx: &mut [usize], sizes: &[usize]) -> bool {
    for d in (0..idx.len()).rev() {
        idx[d] += 1;
        if idx[d] < sizes[d] {
            return true;
        }
        idx[d] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variant;

    fn simple_truth() -> TruthSpec {
        TruthSpec {
            treatments: vec!["placebo".into(), "drug_a".into()],
            d: vec![-0.5],
            tau: 0.0,
            mu: vec![-0.7],
            exposure_py: vec![1_000_000.0],
            rwe_bias: vec![],
            layout: vec![ComparisonLayout {
                treatments: vec!["placebo".into(), "drug_a".into()],
                n_rct: 3,
                n_rwe: 0,
            }],
        }
    }

    #[test]
    fn huge_exposure_recovers_truth() {
        let (net, _) = generate_network(&simple_truth(), 42).unwrap();
        assert_eq!(net.studies.len(), 3);
        for s in &net.studies {
            let r0 = s.arms[0].relapses as f64 / s.arms[0].exposure_py;
            let r1 = s.arms[1].relapses as f64 / s.arms[1].exposure_py;
            let crude = (r1 / r0).ln();
            assert!((crude - -0.5).abs() < 0.01, "crude log ratio {crude}");
        }
    }

    #[test]
    fn tau_zero_d_zero_shares_rate() {
        let mut truth = simple_truth();
        truth.d = vec![0.0];
        let (net, realized) = generate_network(&truth, 7).unwrap();
        for r in &realized {
            assert_eq!(r.effects[0].1, 0.0);
        }
        for s in &net.studies {
            let r0 = s.arms[0].relapses as f64 / s.arms[0].exposure_py;
            assert!((r0 - (-0.7_f64).exp()).abs() < 0.01);
        }
    }

    #[test]
    fn rwe_bias_shifts_crude_ratios() {
        let mut truth = simple_truth();
        truth.tau = 0.05;
        truth.exposure_py = vec![20_000.0];
        truth.rwe_bias = vec![0.5];
        truth.layout[0].n_rct = 12;
        truth.layout[0].n_rwe = 12;
        let (net, _) = generate_network(&truth, 3).unwrap();
        let crude = |s: &Study| {
            let r0 = s.arms[0].relapses as f64 / s.arms[0].exposure_py;
            let r1 = s.arms[1].relapses as f64 / s.arms[1].exposure_py;
            (r1 / r0).ln()
        };
        let rct_mean: f64 = net
            .studies
            .iter()
            .filter(|s| s.design == Design::Rct)
            .map(crude)
            .sum::<f64>()
            / 12.0;
        let rwe_mean: f64 = net
            .studies
            .iter()
            .filter(|s| s.design == Design::Rwe)
            .map(crude)
            .sum::<f64>()
            / 12.0;
        assert!(
            rwe_mean > rct_mean + 0.2,
            "rwe {rwe_mean} vs rct {rct_mean}"
        );
    }

    #[test]
    fn generation_is_reproducible() {
        let truth = simple_truth();
        let (a, ra) = generate_network(&truth, 99).unwrap();
        let (b, rb) = generate_network(&truth, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(a.to_csv(), b.to_csv());
        let (c, _) = generate_network(&truth, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn truth_spec_parses_from_config() {
        let text = "\
[truth]
treatments = placebo, drug_a, drug_b
d = -0.5, -0.3
tau = 0.1
mu = -0.7
exposure_py = 1000
rwe_bias = 0.5, 0.5

[layout]
comparison = placebo drug_a rct=3 rwe=1
comparison = placebo drug_b rct=2 rwe=1
";
        let truth = TruthSpec::parse(text).unwrap();
        assert_eq!(truth.n_studies(), 7);
        assert_eq!(truth.n_arms(), 14);
        assert_eq!(truth.rwe_bias, vec![0.5, 0.5]);

        let bad = text.replace("tau = 0.1", "tau = 0.1\nbogus = 1");
        assert!(matches!(
            TruthSpec::parse(&bad),
            Err(SynthError::Config(ConfigError::UnknownKey { .. }))
        ));
    }

    #[test]
    fn disconnected_layout_rejected() {
        let text = "\
[truth]
treatments = a, b, c, d
d = 0, 0, 0
tau = 0
mu = -1
exposure_py = 10

[layout]
comparison = a b rct=1 rwe=0
comparison = c d rct=1 rwe=0
";
        assert!(matches!(
            TruthSpec::parse(text),
            Err(SynthError::Invalid(msg)) if msg.contains("disconnected")
        ));
    }

    fn one_study_net() -> Network {
        crate::network::parse_dataset(
            "study_id,design,treatment,relapses,exposure_py\nS1,rct,placebo,10,20\nS1,rct,drug_a,5,20\n",
            None,
        )
        .unwrap()
    }

    #[test]
    fn oracle_flat_likelihood_gives_prior_moments() {
        // no studies: posterior = prior over d alone
        let net = Network {
            studies: vec![],
            treatments: vec![
                Treatment { label: "placebo".into(), index: 1 },
                Treatment { label: "drug_a".into(), index: 2 },
            ],
            reference: 1,
        };
        let spec = ModelSpec::new(Variant::Pooled).fixed_effects();
        let res = grid_posterior_oracle_with(&net, &spec, 801).unwrap();
        assert_eq!(res.names, vec!["d[drug_a]"]);
        assert!(res.mean[0].abs() < 1e-9);
        // uniform SD = width/√12
        assert!((res.sd[0] - 20.0 / 12.0_f64.sqrt()).abs() < 1e-3, "{}", res.sd[0]);
    }

    #[test]
    fn oracle_mode_matches_mle_on_one_study() {
        let net = one_study_net();
        let spec = ModelSpec::new(Variant::Pooled).fixed_effects();
        let res = grid_posterior_oracle(&net, &spec).unwrap();
        let d_idx = res.param("d[drug_a]").unwrap();
        // analytic MLE of the log rate ratio is ln(5/10) = ln 0.5
        assert!((res.mode[d_idx] - 0.5_f64.ln()).abs() < 0.02);
        let mu_idx = res.param("mu[S1]").unwrap();
        assert!((res.mode[mu_idx] - 0.5_f64.ln()).abs() < 0.02);
    }

    #[test]
    fn oracle_sd_shrinks_with_doubled_data() {
        let net = one_study_net();
        let mut doubled = net.clone();
        for s in doubled.studies.iter_mut() {
            for a in s.arms.iter_mut() {
                a.relapses *= 2;
                a.exposure_py *= 2.0;
            }
        }
        let spec = ModelSpec::new(Variant::Pooled).fixed_effects();
        let base = grid_posterior_oracle_with(&net, &spec, 601).unwrap();
        let twice = grid_posterior_oracle_with(&doubled, &spec, 601).unwrap();
        let j = base.param("d[drug_a]").unwrap();
        let shrink = twice.sd[j] / base.sd[j];
        let expected = 1.0 / 2.0_f64.sqrt();
        assert!(
            (shrink - expected).abs() < 0.1 * expected,
            "shrink {shrink} vs {expected}"
        );
    }

    #[test]
    fn oracle_self_convergence_beyond_default_grid() {
        let net = one_study_net();
        let spec = ModelSpec::new(Variant::Pooled).fixed_effects();
        let coarse = grid_posterior_oracle(&net, &spec).unwrap();
        let fine = grid_posterior_oracle_with(&net, &spec, 3001).unwrap();
        for j in 0..coarse.names.len() {
            assert!((coarse.mean[j] - fine.mean[j]).abs() < 1e-4);
            assert!((coarse.sd[j] - fine.sd[j]).abs() < 1e-4);
        }
    }

    #[test]
    fn oracle_rejects_big_models() {
        let net = crate::network::parse_dataset(
            "study_id,design,treatment,relapses,exposure_py\nS1,rct,placebo,10,20\nS1,rct,a,5,20\nS2,rct,placebo,10,20\nS2,rct,b,5,20\n",
            None,
        )
        .unwrap();
        let spec = ModelSpec::new(Variant::Pooled);
        assert!(matches!(
            grid_posterior_oracle(&net, &spec),
            Err(SynthError::TooManyParameters { .. })
        ));
    }
}
