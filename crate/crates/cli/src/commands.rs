//! Subcommand implementations. Every command computes fully before writing
//! any file, so failures never leave partial bundles behind.

use std::fs;
use std::path::Path;

use evsynth_core::diagnostics::{deviance_report, node_split};
use evsynth_core::model::SplitEdge;
use evsynth_core::network::{export_dot, parse_dataset, validate_network, Network};
use evsynth_core::posterior::{
    alpha_sweep, arrr_matrix, reference_summaries, summary_csv, DEFAULT_ALPHA_GRID,
};
use evsynth_core::sampler::run_ensemble;
use evsynth_core::svg;
use evsynth_core::synth::{generate_network, TruthSpec};

use crate::config::{Provenance, RunConfig};
use crate::CliError;

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Resolve the reference treatment: explicit config value, else `placebo`
/// when present, else the first-seen treatment.
fn load_network(config: &RunConfig) -> Result<(Network, String), CliError> {
    let text = read_file(&config.dataset)?;
    let probe = parse_dataset(&text, None)?;
    let reference = match &config.reference {
        Some(r) => r.clone(),
        None => {
            if probe.treatments.iter().any(|t| t.label == "placebo") {
                "placebo".to_string()
            } else {
                probe.label(1).to_string()
            }
        }
    };
    let net = parse_dataset(&text, Some(&reference))?;
    Ok((net, reference))
}

pub fn cmd_validate(config_path: &Path, json: bool) -> Result<u8, CliError> {
    let config = RunConfig::load(config_path)?;
    let (net, reference) = load_network(&config)?;
    let report = validate_network(&net);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        println!(
            "{}: {} studies ({} rct, {} rwe), {} treatments, reference `{reference}`",
            config.dataset.display(),
            net.studies.len(),
            net.n_rct(),
            net.n_rwe(),
            net.n_treatments()
        );
        for e in &report.errors {
            println!("error: {e}");
        }
        for w in &report.warnings {
            println!("warning: {w}");
        }
        if report.is_fit_ready() {
            println!("ok: network is fit-ready");
        }
    }
    Ok(if report.is_fit_ready() { 0 } else { 1 })
}

pub fn cmd_fit(
    config_path: &Path,
    seed: Option<u64>,
    alpha: Option<f64>,
    alphas: Option<&str>,
    model: Option<&str>,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let mut config = RunConfig::load(config_path)?;
    config.apply_overrides(seed, alpha, alphas, model, out)?;
    let (net, reference) = load_network(&config)?;
    let report = validate_network(&net);
    if !report.is_fit_ready() {
        return Err(CliError::Analysis(format!(
            "network is not fit-ready: {}",
            report.errors.join("; ")
        )));
    }

    let spec = config.model_spec();
    let (draws, convergence) = run_ensemble(&net, &spec, &config.sampler)?;
    let summaries = reference_summaries(&draws, &net)?;
    let matrix = arrr_matrix(&draws, &net)?;
    let deviance = deviance_report(&draws, &net, &spec)?;
    let provenance = Provenance::new("fit", &config, &reference);

    let dir = &config.out_dir;
    write_file(dir, "summary.csv", &summary_csv(&summaries))?;
    write_file(dir, "matrix.csv", &matrix.to_csv())?;
    write_file(
        dir,
        "convergence.json",
        &serde_json::to_string_pretty(&convergence).expect("report serializes"),
    )?;
    write_file(dir, "deviance.csv", &deviance.to_csv())?;
    if config.write_draws {
        write_file(dir, "draws.csv", &draws.to_trace_csv())?;
    }
    write_file(dir, "run.json", &provenance.to_json())?;
    println!(
        "fit: {} ({} chains × {} draws) → {}",
        spec.variant,
        config.sampler.n_chains,
        config.sampler.n_iter,
        dir.display()
    );
    Ok(0)
}

pub fn cmd_sweep(
    config_path: &Path,
    seed: Option<u64>,
    alphas: Option<&str>,
    model: Option<&str>,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let mut config = RunConfig::load(config_path)?;
    config.apply_overrides(seed, None, alphas, model, out)?;
    let (net, reference) = load_network(&config)?;
    let report = validate_network(&net);
    if !report.is_fit_ready() {
        return Err(CliError::Analysis(format!(
            "network is not fit-ready: {}",
            report.errors.join("; ")
        )));
    }

    let grid = config
        .alphas
        .clone()
        .unwrap_or_else(|| DEFAULT_ALPHA_GRID.to_vec());
    let spec = config.model_spec();
    let sweep = alpha_sweep(&net, &spec, &grid, &config.sampler)?;
    let provenance = Provenance::new("sweep", &config, &reference);

    let dir = &config.out_dir;
    write_file(dir, "sweep.csv", &sweep.to_csv())?;
    write_file(dir, "ranks.csv", &sweep.ranks_csv())?;
    for label in &sweep.labels {
        let plot = svg::sweep_plot(&sweep, label).expect("label comes from the sweep");
        write_file(dir, &format!("sweep_{label}.svg"), &plot)?;
    }
    write_file(dir, "ranks.svg", &svg::rank_heatmap(&grid, &sweep.ranks))?;
    write_file(dir, "run.json", &provenance.to_json())?;
    println!(
        "sweep: {} over {} alphas → {}",
        spec.variant,
        grid.len(),
        dir.display()
    );
    Ok(0)
}

pub fn cmd_nodesplit(
    config_path: &Path,
    edge: &str,
    seed: Option<u64>,
    model: Option<&str>,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let mut config = RunConfig::load(config_path)?;
    config.apply_overrides(seed, None, None, model, out)?;
    let (net, reference) = load_network(&config)?;

    let (base_label, head_label) = edge.split_once(':').ok_or_else(|| {
        CliError::Input(format!("--edge `{edge}` must look like `base:head`"))
    })?;
    let find = |label: &str| -> Result<usize, CliError> {
        net.treatments
            .iter()
            .find(|t| t.label == label)
            .map(|t| t.index)
            .ok_or_else(|| CliError::Input(format!("unknown treatment `{label}`")))
    };
    let split = SplitEdge {
        base: find(base_label.trim())?,
        head: find(head_label.trim())?,
    };

    let spec = config.model_spec();
    let result = node_split(&net, &spec, split, &config.sampler)?;
    let provenance = Provenance::new("nodesplit", &config, &reference);

    let dir = &config.out_dir;
    write_file(
        dir,
        "nodesplit.json",
        &serde_json::to_string_pretty(&result).expect("result serializes"),
    )?;
    write_file(dir, "run.json", &provenance.to_json())?;
    println!(
        "nodesplit {}:{} — direct {:.3}, indirect {:.3}, p = {:.4}",
        result.base, result.head, result.direct.mean, result.indirect.mean, result.p_value
    );
    Ok(0)
}

pub fn cmd_diagram(config_path: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let mut config = RunConfig::load(config_path)?;
    config.apply_overrides(None, None, None, None, out)?;
    let (net, _) = load_network(&config)?;
    let dir = &config.out_dir;
    write_file(dir, "network.dot", &export_dot(&net))?;
    write_file(dir, "network.svg", &svg::network_diagram(&net))?;
    println!("diagram → {}", dir.display());
    Ok(0)
}

pub fn cmd_simulate(config_path: &Path, seed: u64, out: Option<&Path>) -> Result<u8, CliError> {
    let text = read_file(config_path)?;
    let truth = TruthSpec::parse(&text)?;
    let (net, realized) = generate_network(&truth, seed)?;
    let dir = out.unwrap_or(Path::new("out"));
    write_file(dir, "dataset.csv", &net.to_csv())?;
    write_file(
        dir,
        "realized.json",
        &serde_json::to_string_pretty(&realized).expect("realized log serializes"),
    )?;
    println!(
        "simulate: {} studies, seed {seed} → {}",
        net.studies.len(),
        dir.display()
    );
    Ok(0)
}
