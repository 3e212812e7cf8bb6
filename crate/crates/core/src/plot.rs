//! Self-contained SVG convergence plots.

use std::fmt::Write;

use crate::engine::Trace;
use crate::error::Result;

const W: f64 = 640.0;
const PANEL_H: f64 = 200.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const GAP: f64 = 50.0;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

fn log_points(values: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
    values
        .enumerate()
        .filter(|(_, v)| *v > 0.0 && v.is_finite())
        .map(|(k, v)| (k as f64, v.log10()))
        .collect()
}

fn panel(out: &mut String, top: f64, title: &str, series: &[Series], k_max: f64) {
    let all: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let _ = writeln!(out, r#"<text x="{MARGIN_L}" y="{:.1}" font-size="13">{title}</text>"#, top - 8.0);
    let (x0, x1) = (MARGIN_L, W - MARGIN_R);
    let (y0, y1) = (top, top + PANEL_H);
    let _ = writeln!(
        out,
        r##"<rect x="{x0}" y="{y0}" width="{:.1}" height="{PANEL_H}" fill="none" stroke="#888"/>"##,
        x1 - x0
    );
    if all.is_empty() {
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="12">no positive values</text>"#, x0 + 10.0, y0 + 20.0);
        return;
    }
    let mut lo = all.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let mut hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
    if hi <= lo {
        hi = lo + 1.0;
        lo -= 1.0;
    }
    let kx = if k_max > 0.0 { k_max } else { 1.0 };
    let sx = |k: f64| x0 + (x1 - x0) * k / kx;
    let sy = |v: f64| y1 - (y1 - y0) * (v - lo) / (hi - lo);
    let step = ((hi - lo) / 6.0).ceil().max(1.0);
    let mut tick = lo;
    while tick <= hi {
        let y = sy(tick);
        let _ = writeln!(
            out,
            r##"<line x1="{x0}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#eee"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">1e{tick}</text>"##,
            x0 - 4.0,
            y + 3.0
        );
        tick += step;
    }
    let _ = writeln!(
        out,
        r#"<text x="{x0}" y="{:.1}" font-size="10">0</text><text x="{x1}" y="{:.1}" font-size="10" text-anchor="end">k = {k_max}</text>"#,
        y1 + 14.0,
        y1 + 14.0
    );
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s.points.iter().map(|&(k, v)| format!("{:.2},{:.2}", sx(k), sy(v))).collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            s.color,
            pts.join(" ")
        );
        let ly = y0 + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{ly:.1}" font-size="11" fill="{}" text-anchor="end">{}</text>"#,
            x1 - 6.0,
            s.color,
            s.label
        );
    }
}

/// Three stacked panels: log ‖v_k‖, log φ̂(p_k) and log d(p_k, p_final),
/// the last with the reference line d(p₀, p_final)·ρ^k when `rho` is given.
pub fn trace_svg(trace: &Trace, rho: Option<f64>) -> Result<String> {
    let n = trace.records.len();
    let k_max = n.saturating_sub(1) as f64;
    let height = MARGIN_T + 3.0 * PANEL_H + 2.0 * GAP + 30.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" viewBox="0 0 {W} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let norms = Series {
        label: "|v_k|",
        color: "#1f77b4",
        dashed: false,
        points: log_points(trace.records.iter().map(|r| r.norm_v)),
    };
    panel(&mut out, MARGIN_T, &format!("{} ({}): norm of the direction", trace.problem, trace.rule), &[norms], k_max);

    let phi = Series {
        label: "phi(p_k)",
        color: "#2ca02c",
        dashed: false,
        points: log_points(trace.records.iter().map(|r| r.phi.unwrap_or(f64::NAN))),
    };
    panel(&mut out, MARGIN_T + PANEL_H + GAP, "merit value", &[phi], k_max);

    let mut dist = Vec::with_capacity(n);
    if n > 0 {
        let last = trace.point(n - 1)?;
        for k in 0..n {
            dist.push(trace.point(k)?.dist(&last)?);
        }
    }
    let mut series = vec![Series {
        label: "d(p_k, p_final)",
        color: "#d62728",
        dashed: false,
        points: log_points(dist.iter().copied()),
    }];
    if let (Some(rho), Some(&d0)) = (rho, dist.first()) {
        series.push(Series {
            label: "d_0 rho^k",
            color: "#555",
            dashed: true,
            points: log_points((0..n).map(|k| d0 * rho.powi(k as i32))),
        });
    }
    panel(&mut out, MARGIN_T + 2.0 * (PANEL_H + GAP), "distance to the final iterate", &series, k_max);
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, RunConfig, StepSizeRule};
    use crate::problems::p1;

    #[test]
    fn svg_is_self_contained() {
        let p = p1();
        let tr = run(&p.objective, &p.default_start, &StepSizeRule::Constant { t: 0.5 }, &RunConfig::default()).unwrap();
        let svg = trace_svg(&tr, Some(0.7)).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href"));
        assert_eq!(svg.matches("<polyline").count(), 3);
    }
}
