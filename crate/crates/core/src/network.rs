//! Evidence-network ingestion and validation.
//!
//! A network is a flat arm-level dataset grouped into studies: each arm is a
//! relapse count plus person-years of exposure under one treatment, and each
//! study is tagged as randomized (RCT) or real-world (RWE). Treatments are
//! indexed densely from 1 with index 1 as the common reference.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Expected CSV header, in order.
pub const CSV_HEADER: &str = "study_id,design,treatment,relapses,exposure_py";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    Rct,
    Rwe,
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Design::Rct => write!(f, "rct"),
            Design::Rwe => write!(f, "rwe"),
        }
    }
}

/// A treatment with its dense 1-based index; index 1 is the reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Treatment {
    pub label: String,
    pub index: usize,
}

/// One study arm: event count and person-years under a treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    /// 1-based treatment index into `Network::treatments`.
    pub treatment: usize,
    pub relapses: u64,
    pub exposure_py: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub id: String,
    pub design: Design,
    /// Arms sorted by ascending treatment index.
    pub arms: Vec<Arm>,
    /// Baseline treatment index: the lowest treatment index in the study.
    pub baseline: usize,
}

impl Study {
    pub fn contains(&self, treatment: usize) -> bool {
        self.arms.iter().any(|a| a.treatment == treatment)
    }

    /// Non-baseline arms in ascending treatment order.
    pub fn non_baseline_arms(&self) -> impl Iterator<Item = &Arm> {
        let b = self.baseline;
        self.arms.iter().filter(move |a| a.treatment != b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub studies: Vec<Study>,
    pub treatments: Vec<Treatment>,
    /// Treatment index of the common reference (always 1).
    pub reference: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_fit_ready(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineIssue {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("dataset has no data rows")]
    Empty,
    #[error("bad header: expected `{CSV_HEADER}`, got `{0}`")]
    Header(String),
    #[error("reference treatment `{0}` does not appear in the dataset")]
    UnknownReference(String),
    #[error("{}", format_issues(.0))]
    Rows(Vec<LineIssue>),
}

fn format_issues(issues: &[LineIssue]) -> String {
    let lines: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
    format!(
        "{} dataset error{}:\n{}",
        issues.len(),
        if issues.len() == 1 { "" } else { "s" },
        lines.join("\n")
    )
}

/// Parse a CSV dataset into a [`Network`].
///
/// Rows are grouped by `study_id` in first-appearance order; treatments are
/// indexed in first-appearance order unless `reference` names the label that
/// should take index 1. Row-level problems are collected and reported
/// together, each with its line number.
pub fn parse_dataset(text: &str, reference: Option<&str>) -> Result<Network, NetworkError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();

    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l.trim().to_string(),
            None => return Err(NetworkError::Empty),
        }
    };
    let normalized: String = header.split(',').map(|c| c.trim()).collect::<Vec<_>>().join(",");
    if normalized != CSV_HEADER {
        return Err(NetworkError::Header(header));
    }

    struct RawArm {
        line: usize,
        study: String,
        design: Design,
        treatment: String,
        relapses: u64,
        exposure: f64,
    }

    let mut issues: Vec<LineIssue> = Vec::new();
    let mut raws: Vec<RawArm> = Vec::new();
    // studies with row-level errors: structural checks would only cascade
    let mut tainted: BTreeSet<String> = BTreeSet::new();
    let mut any_row = false;

    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        any_row = true;
        let fields: Vec<&str> = row.split(',').map(|f| f.trim()).collect();
        if fields.len() != 5 {
            if let Some(id) = fields.first() {
                tainted.insert(id.to_string());
            }
            issues.push(LineIssue {
                line,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
            continue;
        }
        let design = match fields[1].to_ascii_lowercase().as_str() {
            "rct" => Design::Rct,
            "rwe" => Design::Rwe,
            other => {
                tainted.insert(fields[0].to_string());
                issues.push(LineIssue {
                    line,
                    message: format!("unknown design `{other}` (expected rct or rwe)"),
                });
                continue;
            }
        };
        let relapses = match fields[3].parse::<u64>() {
            Ok(r) => r,
            Err(_) => {
                tainted.insert(fields[0].to_string());
                issues.push(LineIssue {
                    line,
                    message: format!("relapses `{}` is not a non-negative integer", fields[3]),
                });
                continue;
            }
        };
        let exposure = match fields[4].parse::<f64>() {
            Ok(e) if e > 0.0 && e.is_finite() => e,
            Ok(_) => {
                tainted.insert(fields[0].to_string());
                issues.push(LineIssue {
                    line,
                    message: format!("non-positive exposure, line {line}"),
                });
                continue;
            }
            Err(_) => {
                tainted.insert(fields[0].to_string());
                issues.push(LineIssue {
                    line,
                    message: format!("exposure_py `{}` is not a number", fields[4]),
                });
                continue;
            }
        };
        if fields[0].is_empty() || fields[2].is_empty() {
            issues.push(LineIssue {
                line,
                message: "empty study_id or treatment".into(),
            });
            continue;
        }
        raws.push(RawArm {
            line,
            study: fields[0].to_string(),
            design,
            treatment: fields[2].to_string(),
            relapses,
            exposure,
        });
    }

    if !any_row && issues.is_empty() {
        return Err(NetworkError::Empty);
    }

    // Treatment indexing: reference first when requested, then first appearance.
    let mut labels: Vec<String> = Vec::new();
    if let Some(r) = reference {
        if !raws.iter().any(|a| a.treatment == r) {
            return Err(NetworkError::UnknownReference(r.to_string()));
        }
        labels.push(r.to_string());
    }
    for a in &raws {
        if !labels.iter().any(|l| l == &a.treatment) {
            labels.push(a.treatment.clone());
        }
    }
    let index_of = |label: &str| labels.iter().position(|l| l == label).unwrap() + 1;

    // Group by study in first-appearance order.
    let mut order: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, Vec<&RawArm>> = BTreeMap::new();
    for a in &raws {
        if !grouped.contains_key(&a.study) {
            order.push(a.study.clone());
        }
        grouped.entry(a.study.clone()).or_default().push(a);
    }

    let mut studies: Vec<Study> = Vec::new();
    for id in &order {
        if tainted.contains(id) {
            continue;
        }
        let rows = &grouped[id];
        let first_line = rows[0].line;
        let design = rows[0].design;
        if rows.iter().any(|r| r.design != design) {
            issues.push(LineIssue {
                line: first_line,
                message: format!("study `{id}` mixes rct and rwe design tags"),
            });
            continue;
        }
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut arms: Vec<Arm> = Vec::new();
        let mut dup = false;
        for r in rows {
            let t = index_of(&r.treatment);
            if !seen.insert(t) {
                issues.push(LineIssue {
                    line: r.line,
                    message: format!("duplicate arm for (study `{id}`, treatment `{}`)", r.treatment),
                });
                dup = true;
                continue;
            }
            arms.push(Arm {
                treatment: t,
                relapses: r.relapses,
                exposure_py: r.exposure,
            });
        }
        if dup {
            continue;
        }
        if arms.len() < 2 {
            issues.push(LineIssue {
                line: first_line,
                message: format!("study `{id}` has fewer than 2 arms"),
            });
            continue;
        }
        arms.sort_by_key(|a| a.treatment);
        let baseline = arms[0].treatment;
        studies.push(Study {
            id: id.clone(),
            design,
            arms,
            baseline,
        });
    }

    if !issues.is_empty() {
        return Err(NetworkError::Rows(issues));
    }

    Ok(Network {
        studies,
        treatments: labels
            .into_iter()
            .enumerate()
            .map(|(i, label)| Treatment { label, index: i + 1 })
            .collect(),
        reference: 1,
    })
}

impl Network {
    pub fn n_treatments(&self) -> usize {
        self.treatments.len()
    }

    pub fn treatment(&self, index: usize) -> &Treatment {
        &self.treatments[index - 1]
    }

    pub fn label(&self, index: usize) -> &str {
        &self.treatments[index - 1].label
    }

    pub fn n_rct(&self) -> usize {
        self.studies.iter().filter(|s| s.design == Design::Rct).count()
    }

    pub fn n_rwe(&self) -> usize {
        self.studies.len() - self.n_rct()
    }

    /// Serialize back to the ingestion CSV schema (round-trip stable).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for s in &self.studies {
            for a in &s.arms {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.id,
                    s.design,
                    self.label(a.treatment),
                    a.relapses,
                    a.exposure_py
                ));
            }
        }
        out
    }
}

/// Partition treatments by reachability through within-study comparisons.
///
/// Components are ordered by their smallest treatment index; members sorted.
pub fn connected_components(net: &Network) -> Vec<Vec<usize>> {
    components_of(net, |_| true)
}

fn components_of<F: Fn(&Study) -> bool>(net: &Network, keep: F) -> Vec<Vec<usize>> {
    let t = net.n_treatments();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); t + 1];
    let mut present: BTreeSet<usize> = BTreeSet::new();
    for s in net.studies.iter().filter(|s| keep(s)) {
        for a in &s.arms {
            present.insert(a.treatment);
        }
        for i in 0..s.arms.len() {
            for j in (i + 1)..s.arms.len() {
                adj[s.arms[i].treatment].insert(s.arms[j].treatment);
                adj[s.arms[j].treatment].insert(s.arms[i].treatment);
            }
        }
    }
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut comps = Vec::new();
    for &start in &present {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = vec![start];
        seen.insert(start);
        while let Some(u) = queue.pop() {
            comp.push(u);
            for &v in &adj[u] {
                if seen.insert(v) {
                    queue.push(v);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Validate a parsed network: connectivity errors and only-RWE-support warnings.
pub fn validate_network(net: &Network) -> ValidationReport {
    let mut report = ValidationReport::default();

    let comps = connected_components(net);
    if comps.len() > 1 {
        let listing: Vec<String> = comps
            .iter()
            .map(|c| {
                let labels: Vec<&str> = c.iter().map(|&t| net.label(t)).collect();
                format!("{{{}}}", labels.join(", "))
            })
            .collect();
        report.errors.push(format!(
            "comparison graph is disconnected: components {}",
            listing.join(" | ")
        ));
    }

    // Treatments that vanish when RWE studies are dropped (α → 0).
    let mut rct_supported: BTreeSet<usize> = BTreeSet::new();
    for s in net.studies.iter().filter(|s| s.design == Design::Rct) {
        for a in &s.arms {
            rct_supported.insert(a.treatment);
        }
    }
    for t in &net.treatments {
        let appears = net.studies.iter().any(|s| s.contains(t.index));
        if appears && !rct_supported.contains(&t.index) {
            report.warnings.push(format!(
                "treatment `{}` is supported only by rwe studies: unidentifiable at alpha=0",
                t.label
            ));
        }
    }

    report
}

/// Treatments supported by at least one RCT arm (used by the α→0 warning test).
pub fn rct_only_treatments(net: &Network) -> Vec<usize> {
    let mut rct: BTreeSet<usize> = BTreeSet::new();
    for s in net.studies.iter().filter(|s| s.design == Design::Rct) {
        for a in &s.arms {
            rct.insert(a.treatment);
        }
    }
    rct.into_iter().collect()
}

/// Per-pair direct-comparison counts, keyed by (low index, high index).
pub fn pair_counts(net: &Network) -> BTreeMap<(usize, usize), (usize, usize)> {
    let mut counts: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for s in &net.studies {
        for i in 0..s.arms.len() {
            for j in (i + 1)..s.arms.len() {
                let key = (s.arms[i].treatment, s.arms[j].treatment);
                let e = counts.entry(key).or_default();
                match s.design {
                    Design::Rct => e.0 += 1,
                    Design::Rwe => e.1 += 1,
                }
            }
        }
    }
    counts
}

/// Export the comparison graph as a DOT document.
///
/// Node width scales with total exposure for the treatment; edges carry the
/// per-design multiplicities and a pen width proportional to the total count.
/// Output is deterministic: nodes by index, edges by (low, high) index.
pub fn export_dot(net: &Network) -> String {
    let mut exposure: Vec<f64> = vec![0.0; net.n_treatments() + 1];
    for s in &net.studies {
        for a in &s.arms {
            exposure[a.treatment] += a.exposure_py;
        }
    }
    let max_exp = exposure.iter().cloned().fold(0.0_f64, f64::max).max(1.0);

    let mut out = String::from("graph evidence_network {\n");
    out.push_str("  layout=neato;\n  node [shape=circle, fixedsize=true];\n");
    for t in &net.treatments {
        let w = 0.4 + 1.2 * (exposure[t.index] / max_exp).sqrt();
        out.push_str(&format!(
            "  t{} [label=\"{}\", width={:.3}];\n",
            t.index, t.label, w
        ));
    }
    for ((a, b), (rct, rwe)) in pair_counts(net) {
        let total = rct + rwe;
        if total == 0 {
            continue;
        }
        out.push_str(&format!(
            "  t{} -- t{} [label=\"RCT:{}/RWE:{}\", penwidth={:.1}];\n",
            a,
            b,
            rct,
            rwe,
            total as f64
        ));
    }
    out.push_str("}\n");
    out
}
