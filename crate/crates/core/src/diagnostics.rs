//! Model-fit diagnostics: residual deviance, DIC and node-splitting
//! consistency checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Evaluator, ModelError, ModelSpec, ParamLayout, SplitEdge};
use crate::network::Network;
use crate::posterior::{summarize, PosteriorError, SummaryStats};
use crate::sampler::{run_ensemble_with, Draws, SamplerConfig, SamplerError};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Posterior(#[from] PosteriorError),
    #[error("draws are missing parameter column `{0}` (was the run made with reduced retention?)")]
    MissingColumn(String),
    #[error("edge {0}–{1} has no study with both treatments: no direct evidence")]
    NoDirectEvidence(String, String),
    #[error("edge {0}–{1} is not splittable: {2}")]
    NotSplittable(String, String, String),
    #[error("internal error: non-positive fitted mean λ̂")]
    BadLambda,
}

/// Poisson saturated deviance for one arm:
/// `2·[λ̂ − r + r·ln(r/λ̂)]`, with the log term defined as 0 when r = 0.
pub fn arm_deviance(r: u64, lambda: f64) -> f64 {
    let r = r as f64;
    let log_term = if r == 0.0 { 0.0 } else { r * (r / lambda).ln() };
    2.0 * (lambda - r + log_term)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmDeviance {
    pub study_id: String,
    pub design: crate::network::Design,
    pub treatment: String,
    pub relapses: u64,
    /// Posterior mean of the fitted Poisson mean λ̂ = γ̂E.
    pub mean_lambda: f64,
    /// Posterior mean of the arm's residual deviance.
    pub mean_dev: f64,
    /// Likelihood weight the sampler applied to this arm.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DicStats {
    /// Posterior mean of −2·log-likelihood (unweighted).
    pub dbar: f64,
    /// −2·log-likelihood at the posterior means of the parameters.
    pub dhat: f64,
    /// Effective number of parameters, Dbar − Dhat.
    pub p_d: f64,
    /// Dbar + pD.
    pub dic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevianceReport {
    pub arms: Vec<ArmDeviance>,
    /// Unweighted total residual deviance (the headline fit measure).
    pub total: f64,
    /// Total over RCT arms only.
    pub total_rct: f64,
    /// α-weighted total: what the power-prior sampler actually targets.
    pub total_weighted: f64,
    pub dic: DicStats,
}

impl DevianceReport {
    /// Per-arm CSV with trailing TOTAL rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("study_id,treatment,relapses,mean_lambda,mean_dev\n");
        for a in &self.arms {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                a.study_id, a.treatment, a.relapses, a.mean_lambda, a.mean_dev
            ));
        }
        out.push_str(&format!("TOTAL,,,,{}\n", self.total));
        out.push_str(&format!("TOTAL_RCT,,,,{}\n", self.total_rct));
        out.push_str(&format!("TOTAL_WEIGHTED,,,,{}\n", self.total_weighted));
        out.push_str(&format!("DBAR,,,,{}\n", self.dic.dbar));
        out.push_str(&format!("DHAT,,,,{}\n", self.dic.dhat));
        out.push_str(&format!("PD,,,,{}\n", self.dic.p_d));
        out.push_str(&format!("DIC,,,,{}\n", self.dic.dic));
        out
    }
}

fn reconstruct_states(
    draws: &Draws,
    eval: &Evaluator,
) -> Result<(ParamLayout, Vec<usize>), DiagnosticsError> {
    let layout = ParamLayout::new(eval);
    let mut cols = Vec::with_capacity(layout.len());
    for e in &layout.entries {
        let j = draws
            .column_index(&e.name)
            .ok_or_else(|| DiagnosticsError::MissingColumn(e.name.clone()))?;
        cols.push(j);
    }
    Ok((layout, cols))
}

/// Residual deviance and DIC from the draws of a fit.
pub fn deviance_report(
    draws: &Draws,
    net: &Network,
    spec: &ModelSpec,
) -> Result<DevianceReport, DiagnosticsError> {
    let eval = Evaluator::new(net, spec)?;
    let (layout, cols) = reconstruct_states(draws, &eval)?;
    let n = draws.n_rows();

    // arm bookkeeping in evaluator order
    let mut meta: Vec<(String, crate::network::Design, String, u64, f64)> = Vec::new();
    for pos in 0..eval.n_included() {
        let s = eval.study(pos);
        for a in &s.arms {
            meta.push((
                s.id.clone(),
                s.design,
                net.label(a.treatment).to_string(),
                a.relapses,
                eval.study_weight(pos),
            ));
        }
    }

    let mut sum_lambda = vec![0.0; meta.len()];
    let mut sum_dev = vec![0.0; meta.len()];
    let mut sum_neg2ll = 0.0;
    let mut mean_flat = vec![0.0; layout.len()];
    let mut flat = vec![0.0; layout.len()];
    for i in 0..n {
        let row = draws.row(i);
        for (p, &j) in cols.iter().enumerate() {
            flat[p] = row[j];
            mean_flat[p] += row[j];
        }
        let state = layout.unflatten(&flat);
        let lambdas = eval.arm_lambdas(&state);
        for (a, &lambda) in lambdas.iter().enumerate() {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(DiagnosticsError::BadLambda);
            }
            sum_lambda[a] += lambda;
            sum_dev[a] += arm_deviance(meta[a].3, lambda);
        }
        sum_neg2ll += -2.0 * eval.total_log_lik_unweighted(&state);
    }
    let nf = n as f64;
    for v in mean_flat.iter_mut() {
        *v /= nf;
    }
    let plug_in = layout.unflatten(&mean_flat);
    let dhat = -2.0 * eval.total_log_lik_unweighted(&plug_in);
    let dbar = sum_neg2ll / nf;
    let p_d = dbar - dhat;

    let mut arms = Vec::with_capacity(meta.len());
    let (mut total, mut total_rct, mut total_weighted) = (0.0, 0.0, 0.0);
    for (a, (study_id, design, treatment, relapses, weight)) in meta.into_iter().enumerate() {
        let mean_dev = sum_dev[a] / nf;
        total += mean_dev;
        if design == crate::network::Design::Rct {
            total_rct += mean_dev;
        }
        total_weighted += weight * mean_dev;
        arms.push(ArmDeviance {
            study_id,
            design,
            treatment,
            relapses,
            mean_lambda: sum_lambda[a] / nf,
            mean_dev,
            weight,
        });
    }
    Ok(DevianceReport {
        arms,
        total,
        total_rct,
        total_weighted,
        dic: DicStats {
            dbar,
            dhat,
            p_d,
            dic: dbar + p_d,
        },
    })
}

/// Per-arm posterior-mean residual deviance and totals.
pub fn residual_deviance(
    draws: &Draws,
    net: &Network,
    spec: &ModelSpec,
) -> Result<DevianceReport, DiagnosticsError> {
    deviance_report(draws, net, spec)
}

/// (Dbar, Dhat, pD, DIC) for a fit.
pub fn dic(draws: &Draws, net: &Network, spec: &ModelSpec) -> Result<DicStats, DiagnosticsError> {
    Ok(deviance_report(draws, net, spec)?.dic)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSplitResult {
    pub base: String,
    pub head: String,
    pub direct: SummaryStats,
    pub indirect: SummaryStats,
    /// Summary of ω = direct − indirect.
    pub difference: SummaryStats,
    /// Two-sided Bayesian p-value `2·min(P(ω>0), P(ω<0))`, floored at 1/N by
    /// the 1/(2N) tail continuity correction.
    pub p_value: f64,
    pub n_draws: usize,
}

/// Check splittability: the edge needs at least one direct study and an
/// indirect path that survives deleting the direct comparison.
pub fn check_splittable(net: &Network, edge: SplitEdge) -> Result<(), DiagnosticsError> {
    let (b, k) = (edge.base, edge.head);
    let lbl = |t: usize| net.label(t).to_string();
    let has_direct = net
        .studies
        .iter()
        .any(|s| s.contains(b) && s.contains(k));
    if !has_direct {
        return Err(DiagnosticsError::NoDirectEvidence(lbl(b), lbl(k)));
    }
    // connectivity of b..k with the (b, k) comparison edges removed
    let t = net.n_treatments();
    let mut adj = vec![Vec::new(); t + 1];
    for s in &net.studies {
        for i in 0..s.arms.len() {
            for j in (i + 1)..s.arms.len() {
                let (u, v) = (s.arms[i].treatment, s.arms[j].treatment);
                if (u == b && v == k) || (u == k && v == b) {
                    continue;
                }
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    let mut seen = vec![false; t + 1];
    let mut queue = vec![b];
    seen[b] = true;
    while let Some(u) = queue.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push(v);
            }
        }
    }
    if !seen[k] {
        return Err(DiagnosticsError::NotSplittable(
            lbl(b),
            lbl(k),
            "no indirect path remains once the direct comparison is removed".into(),
        ));
    }
    Ok(())
}

/// Fit the split-augmented model and compare direct vs indirect evidence for
/// one comparison.
pub fn node_split(
    net: &Network,
    spec: &ModelSpec,
    edge: SplitEdge,
    cfg: &SamplerConfig,
) -> Result<NodeSplitResult, DiagnosticsError> {
    check_splittable(net, edge)?;
    let eval = Evaluator::with_split(net, spec, Some(edge))?;
    let (draws, _) = run_ensemble_with(&eval, cfg)?;

    let split_name = format!(
        "d_split[{}:{}]",
        net.label(edge.base),
        net.label(edge.head)
    );
    let direct_series = draws
        .column(&split_name)
        .ok_or(DiagnosticsError::MissingColumn(split_name))?;
    let basic = |t: usize| -> Result<Vec<f64>, DiagnosticsError> {
        if t == 1 {
            return Ok(vec![0.0; draws.n_rows()]);
        }
        let name = format!("d[{}]", net.label(t));
        draws
            .column(&name)
            .ok_or(DiagnosticsError::MissingColumn(name))
    };
    let bk = basic(edge.head)?;
    let bb = basic(edge.base)?;
    let indirect_series: Vec<f64> = bk.iter().zip(&bb).map(|(k, b)| k - b).collect();
    let omega: Vec<f64> = direct_series
        .iter()
        .zip(&indirect_series)
        .map(|(d, i)| d - i)
        .collect();

    let n = omega.len();
    let pos = omega.iter().filter(|&&w| w > 0.0).count() as f64 / n as f64;
    let p_value = (2.0 * pos.min(1.0 - pos)).max(1.0 / n as f64).min(1.0);

    Ok(NodeSplitResult {
        base: net.label(edge.base).to_string(),
        head: net.label(edge.head).to_string(),
        direct: summarize(&direct_series)?,
        indirect: summarize(&indirect_series)?,
        difference: summarize(&omega)?,
        p_value,
        n_draws: n,
    })
}
