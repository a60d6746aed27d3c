//! Native SVG emitters for the sweep plots, rank heatmap and network diagram.
//!
//! Deliberately dependency-free string builders; CSVs carry the same data for
//! anyone who wants to re-plot elsewhere.

use crate::network::{pair_counts, Network};
use crate::posterior::{RankTable, SweepResult};

const W: f64 = 720.0;
const H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Tick label with enough precision to distinguish a 0.001 grid point.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() < 0.01 {
        format!("{v:.3}")
    } else {
        format!("{v:.2}")
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x_min) / (self.x_max - self.x_min) * (W - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        H - MARGIN_B - (v - self.y_min) / (self.y_max - self.y_min) * (H - MARGIN_T - MARGIN_B)
    }
}

fn svg_open(out: &mut String, title: &str) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\">\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{title}</text>\n",
        W / 2.0
    ));
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = frame.x(frame.x_min);
    let x1 = frame.x(frame.x_max);
    let y0 = frame.y(frame.y_min);
    let y1 = frame.y(frame.y_max);
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(x0),
        fmt(y0),
        fmt(x1),
        fmt(y0)
    ));
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(x0),
        fmt(y0),
        fmt(x0),
        fmt(y1)
    ));
    for i in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
        let fy = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            fmt(frame.x(fx)),
            fmt(y0 + 18.0),
            tick_label(fx)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
            fmt(x0 - 6.0),
            fmt(frame.y(fy) + 4.0),
            tick_label(fy)
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{x_label}</text>\n",
        (x0 + x1) / 2.0,
        H - 14.0
    ));
    out.push_str(&format!(
        "  <text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 {})\">{y_label}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));
}

fn polyline(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Mean line with a shaded 95% band across the alpha grid for one treatment.
pub fn sweep_plot(sweep: &SweepResult, treatment: &str) -> Option<String> {
    let idx = sweep.labels.iter().position(|l| l == treatment)?;
    let alphas: Vec<f64> = sweep.rows.iter().map(|r| r.alpha).collect();
    let means: Vec<f64> = sweep.rows.iter().map(|r| r.arrr[idx].mean).collect();
    let lows: Vec<f64> = sweep.rows.iter().map(|r| r.arrr[idx].q025).collect();
    let highs: Vec<f64> = sweep.rows.iter().map(|r| r.arrr[idx].q975).collect();
    let y_min = lows.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = highs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.08 * (y_max - y_min).max(1e-6);
    let frame = Frame {
        x_min: 0.0,
        x_max: 1.0,
        y_min: y_min - pad,
        y_max: y_max + pad,
    };

    let mut out = String::new();
    svg_open(
        &mut out,
        &format!("Rate ratio vs reference: {treatment} across alpha"),
    );
    let mut band: Vec<(f64, f64)> = alphas
        .iter()
        .zip(&highs)
        .map(|(a, v)| (frame.x(*a), frame.y(*v)))
        .collect();
    band.extend(
        alphas
            .iter()
            .zip(&lows)
            .rev()
            .map(|(a, v)| (frame.x(*a), frame.y(*v))),
    );
    out.push_str(&format!(
        "  <polygon points=\"{}\" fill=\"#4c72b0\" fill-opacity=\"0.25\" stroke=\"none\"/>\n",
        polyline(&band)
    ));
    let line: Vec<(f64, f64)> = alphas
        .iter()
        .zip(&means)
        .map(|(a, v)| (frame.x(*a), frame.y(*v)))
        .collect();
    out.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#4c72b0\" stroke-width=\"2\"/>\n",
        polyline(&line)
    ));
    for (x, y) in &line {
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#4c72b0\"/>\n",
            fmt(*x),
            fmt(*y)
        ));
    }
    // reference line at rate ratio 1 when visible
    if frame.y_min < 1.0 && frame.y_max > 1.0 {
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n",
            fmt(frame.x(0.0)),
            fmt(frame.y(1.0)),
            fmt(frame.x(1.0)),
            fmt(frame.y(1.0))
        ));
    }
    axes(&mut out, &frame, "alpha", "rate ratio vs reference");
    out.push_str("</svg>\n");
    Some(out)
}

/// 11-step ramp from best (dark blue) to worst (dark red); cell colors are
/// picked by linear position of the value between the row-wise min and max.
pub const RANK_RAMP: [&str; 11] = [
    "#313695", "#4575b4", "#74add1", "#abd9e9", "#e0f3f8", "#ffffbf", "#fee090", "#fdae61",
    "#f46d43", "#d73027", "#a50026",
];

fn ramp_color(value: f64, min: f64, max: f64) -> &'static str {
    if max <= min || max.is_nan() || min.is_nan() {
        return RANK_RAMP[0];
    }
    let t = ((value - min) / (max - min)).clamp(0.0, 1.0);
    RANK_RAMP[((t * (RANK_RAMP.len() - 1) as f64).round()) as usize]
}

/// Rank heatmap across an alpha grid: one cell per (treatment, alpha) colored
/// by the treatment's posterior mean rank in that fit.
pub fn rank_heatmap(alphas: &[f64], tables: &[RankTable]) -> String {
    assert_eq!(alphas.len(), tables.len());
    let labels = &tables[0].labels;
    let t = labels.len();
    let n_a = alphas.len();
    let grid_l = 130.0;
    let grid_t = 50.0;
    let cell_w = (W - grid_l - 110.0) / n_a as f64;
    let cell_h = (H - grid_t - 40.0) / t as f64;

    let mut out = String::new();
    svg_open(&mut out, "Posterior mean rank by treatment and alpha");
    for (ti, label) in labels.iter().enumerate() {
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{label}</text>\n",
            fmt(grid_l - 6.0),
            fmt(grid_t + (ti as f64 + 0.65) * cell_h)
        ));
        for (ai, _) in alphas.iter().enumerate() {
            let rank = tables[ai].mean_rank[ti];
            let color = ramp_color(rank, 1.0, t as f64);
            out.push_str(&format!(
                "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{label} alpha={} mean rank {:.2}</title></rect>\n",
                fmt(grid_l + ai as f64 * cell_w),
                fmt(grid_t + ti as f64 * cell_h),
                fmt(cell_w - 1.0),
                fmt(cell_h - 1.0),
                color,
                alphas[ai],
                rank
            ));
        }
    }
    for (ai, a) in alphas.iter().enumerate() {
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
            fmt(grid_l + (ai as f64 + 0.5) * cell_w),
            fmt(grid_t + t as f64 * cell_h + 16.0),
            tick_label(*a)
        ));
    }
    // legend
    let leg_x = W - 95.0;
    for (i, c) in RANK_RAMP.iter().enumerate() {
        out.push_str(&format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"16\" height=\"16\" fill=\"{c}\"/>\n",
            fmt(leg_x),
            fmt(grid_t + i as f64 * 18.0)
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"10\">best</text>\n",
        fmt(leg_x + 20.0),
        fmt(grid_t + 12.0)
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"10\">worst</text>\n",
        fmt(leg_x + 20.0),
        fmt(grid_t + 10.0 * 18.0 + 12.0)
    ));
    out.push_str("</svg>\n");
    out
}

/// Circular-layout network diagram: node area tracks total exposure, edge
/// width tracks the number of direct comparisons, labels carry the RCT/RWE
/// split.
pub fn network_diagram(net: &Network) -> String {
    let t = net.n_treatments();
    let cx = W / 2.0;
    let cy = H / 2.0 + 10.0;
    let radius = (H.min(W) / 2.0) - 90.0;
    let pos = |i: usize| -> (f64, f64) {
        let angle = std::f64::consts::TAU * (i as f64) / (t as f64) - std::f64::consts::FRAC_PI_2;
        (cx + radius * angle.cos(), cy + radius * angle.sin())
    };
    let mut exposure = vec![0.0; t + 1];
    for s in &net.studies {
        for a in &s.arms {
            exposure[a.treatment] += a.exposure_py;
        }
    }
    let max_exp = exposure.iter().cloned().fold(0.0_f64, f64::max).max(1.0);

    let mut out = String::new();
    svg_open(&mut out, "Evidence network");
    for ((a, b), (rct, rwe)) in pair_counts(net) {
        let (x1, y1) = pos(a - 1);
        let (x2, y2) = pos(b - 1);
        let width = 1.0 + 1.5 * ((rct + rwe) as f64);
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888888\" stroke-width=\"{}\"/>\n",
            fmt(x1),
            fmt(y1),
            fmt(x2),
            fmt(y2),
            fmt(width)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\" fill=\"#555555\">RCT:{rct}/RWE:{rwe}</text>\n",
            fmt((x1 + x2) / 2.0),
            fmt((y1 + y2) / 2.0 - 4.0)
        ));
    }
    for trt in &net.treatments {
        let (x, y) = pos(trt.index - 1);
        let r = 10.0 + 22.0 * (exposure[trt.index] / max_exp).sqrt();
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#4c72b0\" fill-opacity=\"0.85\"/>\n",
            fmt(x),
            fmt(y),
            fmt(r)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" fill=\"#111111\">{}</text>\n",
            fmt(x),
            fmt(y - r - 6.0),
            trt.label
        ));
    }
    out.push_str("</svg>\n");
    out
}
