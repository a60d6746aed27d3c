//! CLI acceptance: reproducibility of a full fit bundle from its own
//! provenance file, byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn evsynth() -> Command {
    Command::new(env!("CARGO_BIN_EXE_evsynth"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("evsynth-acceptance-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

const DATASET: &str = "\
study_id,design,treatment,relapses,exposure_py
S1,rct,placebo,120,400
S1,rct,drug_a,85,400
S2,rct,placebo,130,420
S2,rct,drug_b,100,410
S3,rwe,placebo,140,430
S3,rwe,drug_a,118,440
S4,rwe,drug_a,90,400
S4,rwe,drug_b,102,400
S5,rct,placebo,125,415
S5,rct,drug_a,88,405
";

// 10. Re-running cmd_fit from the run.json provenance reproduces every
//     output file byte-identically.
#[test]
fn criterion_10_reproducible_from_provenance() {
    let dir = workdir("c10");
    write(&dir, "net.csv", DATASET);
    let config = format!(
        "[data]\ndataset = {}\n\n[model]\nvariant = power_prior\nalpha = 0.4\n\n\
         [sampler]\nburn = 400\niters = 800\nchains = 2\nseed = 314\n\n\
         [output]\ndir = {}\ndraws = yes\n",
        dir.join("net.csv").display(),
        dir.join("first").display()
    );
    let config_path = write(&dir, "run.conf", &config);

    let status = evsynth()
        .args(["fit", "--config"])
        .arg(&config_path)
        .status()
        .unwrap();
    assert!(status.success());

    // stash the first bundle, then re-run purely from run.json
    let first = dir.join("first");
    let stash = dir.join("stash");
    fs::create_dir_all(&stash).unwrap();
    let files = [
        "summary.csv",
        "matrix.csv",
        "convergence.json",
        "deviance.csv",
        "draws.csv",
        "run.json",
    ];
    for f in files {
        fs::copy(first.join(f), stash.join(f)).unwrap();
    }

    let status = evsynth()
        .args(["fit", "--config"])
        .arg(first.join("run.json"))
        .status()
        .unwrap();
    assert!(status.success());

    for f in files {
        let a = fs::read(stash.join(f)).unwrap();
        let b = fs::read(first.join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    println!("ACCEPTANCE C10 reproducibility: PASS — fit bundle byte-identical when re-run from run.json");
}

#[test]
fn validate_exit_codes() {
    let dir = workdir("exitcodes");
    write(&dir, "net.csv", DATASET);
    let config = write(
        &dir,
        "ok.conf",
        &format!("[data]\ndataset = {}\n", dir.join("net.csv").display()),
    );
    let status = evsynth()
        .args(["validate", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // disconnected network → exit 1 with a component listing
    write(
        &dir,
        "disc.csv",
        "study_id,design,treatment,relapses,exposure_py\n\
         S1,rct,a,1,10\nS1,rct,b,1,10\nS2,rct,c,1,10\nS2,rct,d,1,10\n",
    );
    let config = write(
        &dir,
        "disc.conf",
        &format!("[data]\ndataset = {}\n", dir.join("disc.csv").display()),
    );
    let out = evsynth()
        .args(["validate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("disconnected"));
    assert!(text.contains("{a, b}") && text.contains("{c, d}"));

    // missing file → exit 2
    let config = write(&dir, "missing.conf", "[data]\ndataset = nowhere.csv\n");
    let status = evsynth()
        .args(["validate", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn validate_json_output() {
    let dir = workdir("valjson");
    write(&dir, "net.csv", DATASET);
    let config = write(
        &dir,
        "ok.conf",
        &format!("[data]\ndataset = {}\n", dir.join("net.csv").display()),
    );
    let out = evsynth()
        .args(["validate", "--json", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["errors"].as_array().unwrap().is_empty());
}

#[test]
fn fit_rct_only_matches_power_alpha_zero() {
    let dir = workdir("alpha0");
    write(&dir, "net.csv", DATASET);
    let mk = |name: &str, model: &str, alpha: f64, out: &str| {
        write(
            &dir,
            name,
            &format!(
                "[data]\ndataset = {}\n\n[model]\nvariant = {model}\nalpha = {alpha}\n\n\
                 [sampler]\nburn = 300\niters = 600\nchains = 1\nseed = 99\n\n\
                 [output]\ndir = {}\n",
                dir.join("net.csv").display(),
                dir.join(out).display()
            ),
        )
    };
    let rct = mk("rct.conf", "rct_only", 1.0, "rct_out");
    let p0 = mk("p0.conf", "power_prior", 0.0, "p0_out");
    assert!(evsynth().args(["fit", "--config"]).arg(&rct).status().unwrap().success());
    assert!(evsynth().args(["fit", "--config"]).arg(&p0).status().unwrap().success());
    let a = fs::read(dir.join("rct_out/summary.csv")).unwrap();
    let b = fs::read(dir.join("p0_out/summary.csv")).unwrap();
    assert_eq!(a, b, "rct_only and power_prior(alpha=0) summaries differ");

    let pooled = mk("pooled.conf", "pooled", 1.0, "pooled_out");
    let p1 = mk("p1.conf", "power_prior", 1.0, "p1_out");
    assert!(evsynth().args(["fit", "--config"]).arg(&pooled).status().unwrap().success());
    assert!(evsynth().args(["fit", "--config"]).arg(&p1).status().unwrap().success());
    let a = fs::read(dir.join("pooled_out/summary.csv")).unwrap();
    let b = fs::read(dir.join("p1_out/summary.csv")).unwrap();
    assert_eq!(a, b, "pooled and power_prior(alpha=1) summaries differ");
}

#[test]
fn sweep_default_grid_has_eleven_rows_with_monotone_alpha() {
    let dir = workdir("sweep");
    write(&dir, "net.csv", DATASET);
    let config = write(
        &dir,
        "sweep.conf",
        &format!(
            "[data]\ndataset = {}\n\n[model]\nvariant = power_prior\n\n\
             [sampler]\nburn = 150\niters = 300\nchains = 1\nseed = 5\n\n\
             [output]\ndir = {}\n",
            dir.join("net.csv").display(),
            dir.join("sweep_out").display()
        ),
    );
    let status = evsynth()
        .args(["sweep", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert!(status.success());

    let csv = fs::read_to_string(dir.join("sweep_out/sweep.csv")).unwrap();
    let mut alphas: Vec<f64> = Vec::new();
    for line in csv.lines().skip(1) {
        let a: f64 = line.split(',').next().unwrap().parse().unwrap();
        if alphas.last() != Some(&a) {
            alphas.push(a);
        }
    }
    assert_eq!(alphas.len(), 11, "default grid rows");
    assert!(alphas.windows(2).all(|w| w[0] < w[1]), "alpha column monotone");
    assert!((alphas[0] - 0.001).abs() < 1e-12);
    assert_eq!(*alphas.last().unwrap(), 1.0);

    // heatmap carries treatments × grid cells (plus the 11 legend swatches)
    let svg = fs::read_to_string(dir.join("sweep_out/ranks.svg")).unwrap();
    assert_eq!(svg.matches("<rect").count(), 3 * 11 + 11);
    for label in ["drug_a", "drug_b"] {
        assert!(dir.join(format!("sweep_out/sweep_{label}.svg")).exists());
    }
}

#[test]
fn nodesplit_unsplittable_edge_exits_one() {
    let dir = workdir("nodesplit");
    // two treatments only: no indirect path exists
    write(
        &dir,
        "two.csv",
        "study_id,design,treatment,relapses,exposure_py\n\
         S1,rct,placebo,10,50\nS1,rct,drug_a,8,50\n\
         S2,rct,placebo,12,55\nS2,rct,drug_a,9,50\n",
    );
    let config = write(
        &dir,
        "ns.conf",
        &format!(
            "[data]\ndataset = {}\n\n[sampler]\nburn = 100\niters = 200\nchains = 1\nseed = 3\n\n[output]\ndir = {}\n",
            dir.join("two.csv").display(),
            dir.join("ns_out").display()
        ),
    );
    let out = evsynth()
        .args(["nodesplit", "--edge", "placebo:drug_a", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("not splittable"), "stderr: {text}");
}

#[test]
fn simulate_is_reproducible_and_diagram_runs() {
    let dir = workdir("sim");
    let truth = write(
        &dir,
        "truth.conf",
        "[truth]\ntreatments = placebo, drug_a\nd = -0.5\ntau = 0.1\nmu = -0.6\nexposure_py = 500\n\n\
         [layout]\ncomparison = placebo drug_a rct=2 rwe=1\n",
    );
    for out in ["sim1", "sim2"] {
        let status = evsynth()
            .args(["simulate", "--seed", "77", "--config"])
            .arg(&truth)
            .args(["--out"])
            .arg(dir.join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = fs::read(dir.join("sim1/dataset.csv")).unwrap();
    let b = fs::read(dir.join("sim2/dataset.csv")).unwrap();
    assert_eq!(a, b);

    let config = write(
        &dir,
        "diag.conf",
        &format!(
            "[data]\ndataset = {}\n\n[output]\ndir = {}\n",
            dir.join("sim1/dataset.csv").display(),
            dir.join("diag_out").display()
        ),
    );
    let status = evsynth()
        .args(["diagram", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert!(status.success());
    let dot = fs::read_to_string(dir.join("diag_out/network.dot")).unwrap();
    assert!(dot.contains("RCT:2/RWE:1"));
    assert!(dir.join("diag_out/network.svg").exists());
}
