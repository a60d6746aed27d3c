//! Split-chain R̂ and effective sample size.
//!
//! These replace visual trace inspection for automated runs: split-chain
//! potential scale reduction with the usual between/within variance ratio,
//! and an initial-positive-sequence autocorrelation ESS.

use serde::{Deserialize, Serialize};

use super::{Draws, SamplerError};

/// A diagnostic that may be undefined on constant series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DiagValue {
    Value(f64),
    /// Constant series: the statistic is undefined, not a number.
    Degenerate,
}

impl DiagValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            DiagValue::Value(v) => Some(*v),
            DiagValue::Degenerate => None,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Split-chain potential scale reduction factor.
///
/// Each chain is halved (dropping the middle draw of odd-length chains);
/// the statistic is `sqrt(var_plus / W)` over the resulting segments.
pub fn rhat(per_chain: &[Vec<f64>]) -> Result<DiagValue, SamplerError> {
    let min_len = per_chain.iter().map(Vec::len).min().unwrap_or(0);
    if per_chain.is_empty() || min_len < 4 {
        return Err(SamplerError::InsufficientData(
            "rhat needs chains of length ≥ 4 so each split half has ≥ 2 draws".into(),
        ));
    }
    let mut segments: Vec<&[f64]> = Vec::with_capacity(per_chain.len() * 2);
    let half = min_len / 2;
    for chain in per_chain {
        segments.push(&chain[..half]);
        segments.push(&chain[chain.len() - half..]);
    }
    let seg_means: Vec<f64> = segments.iter().map(|s| mean(s)).collect();
    let seg_vars: Vec<f64> = segments.iter().map(|s| sample_var(s)).collect();
    let w = mean(&seg_vars);
    if w <= 0.0 {
        return Ok(DiagValue::Degenerate);
    }
    let n = half as f64;
    let b = n * sample_var(&seg_means);
    let var_plus = (n - 1.0) / n * w + b / n;
    Ok(DiagValue::Value((var_plus / w).sqrt()))
}

/// Effective sample size via the initial positive autocorrelation sequence.
///
/// `ESS = N / (1 + 2·Σ ρ_k)` with the sum truncated at the first
/// non-positive sample autocorrelation; clamped to at most N.
pub fn ess(series: &[f64]) -> Result<DiagValue, SamplerError> {
    let n = series.len();
    if n < 10 {
        return Err(SamplerError::InsufficientData(
            "ess needs a series of length ≥ 10".into(),
        ));
    }
    let m = mean(series);
    let var: f64 = series.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if var <= 1e-300 {
        return Ok(DiagValue::Degenerate);
    }
    let mut rho_sum = 0.0;
    for k in 1..(n - 1) {
        let cov: f64 = (0..n - k)
            .map(|i| (series[i] - m) * (series[i + k] - m))
            .sum::<f64>()
            / n as f64;
        let rho = cov / var;
        if rho <= 0.0 {
            break;
        }
        rho_sum += rho;
    }
    let ess = n as f64 / (1.0 + 2.0 * rho_sum);
    Ok(DiagValue::Value(ess.min(n as f64)))
}

/// Per-parameter convergence diagnostics for a merged multi-chain run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamDiagnostic {
    pub name: String,
    pub rhat: Option<f64>,
    pub ess: Option<f64>,
    pub degenerate: bool,
    /// True when split-R̂ exceeds 1.05.
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub params: Vec<ParamDiagnostic>,
    pub max_rhat: Option<f64>,
    pub flagged: Vec<String>,
}

pub const RHAT_FLAG_THRESHOLD: f64 = 1.05;

impl ConvergenceReport {
    pub fn from_draws(draws: &Draws) -> Result<ConvergenceReport, SamplerError> {
        let mut params = Vec::with_capacity(draws.names.len());
        let mut max_rhat: Option<f64> = None;
        let mut flagged = Vec::new();
        for (j, name) in draws.names.iter().enumerate() {
            let per_chain = draws.per_chain_column(j);
            let r = rhat(&per_chain)?;
            let total_ess = match r {
                DiagValue::Degenerate => DiagValue::Degenerate,
                DiagValue::Value(_) => {
                    let mut acc = 0.0;
                    let mut any = false;
                    for chain in &per_chain {
                        if let DiagValue::Value(e) = ess(chain)? {
                            acc += e;
                            any = true;
                        }
                    }
                    if any {
                        DiagValue::Value(acc)
                    } else {
                        DiagValue::Degenerate
                    }
                }
            };
            let degenerate = matches!(r, DiagValue::Degenerate);
            let flag = matches!(r, DiagValue::Value(v) if v > RHAT_FLAG_THRESHOLD);
            if let DiagValue::Value(v) = r {
                max_rhat = Some(max_rhat.map_or(v, |m: f64| m.max(v)));
            }
            if flag {
                flagged.push(name.clone());
            }
            params.push(ParamDiagnostic {
                name: name.clone(),
                rhat: r.value(),
                ess: total_ess.value(),
                degenerate,
                flagged: flag,
            });
        }
        Ok(ConvergenceReport {
            params,
            max_rhat,
            flagged,
        })
    }
}
