//! Minimal SVG line charts of accuracy with ±1 std bands.

use super::table::{EvalSplit, ResultsRow, ResultsTable};
use std::collections::BTreeMap;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    TrainingPct,
    Xi,
}

impl XAxis {
    fn label(self) -> &'static str {
        match self {
            XAxis::TrainingPct => "training data (%)",
            XAxis::Xi => "confidence threshold",
        }
    }

    fn value(self, r: &ResultsRow) -> f64 {
        match self {
            XAxis::TrainingPct => r.training_pct as f64,
            XAxis::Xi => r.xi,
        }
    }

    /// ξ when every row shares one training percentage and ξ varies.
    pub fn infer(rows: &[&ResultsRow]) -> Self {
        let pct_fixed = rows.windows(2).all(|w| w[0].training_pct == w[1].training_pct);
        let xi_varies = rows.windows(2).any(|w| w[0].xi != w[1].xi);
        if pct_fixed && xi_varies {
            XAxis::Xi
        } else {
            XAxis::TrainingPct
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One series per (method, noise) among the rows of `split`.
pub fn line_chart(table: &ResultsTable, split: EvalSplit, title: &str) -> String {
    let rows: Vec<&ResultsRow> = table.rows.iter().filter(|r| r.split == split).collect();
    let axis = XAxis::infer(&rows);
    let mut series: BTreeMap<(String, String), Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in &rows {
        series
            .entry((r.method.as_str().to_string(), r.noise.clone()))
            .or_default()
            .push((axis.value(r), r.mean, r.std));
    }
    for points in series.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let xs = rows.iter().map(|r| axis.value(r));
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<path d="M{left} {top} V{bottom} H{right}" stroke="black" fill="none"/>"#);
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{left}" x2="{right}" y1="{0:.1}" y2="{0:.1}" stroke="#ddd"/><text x="{1}" y="{2:.1}" text-anchor="end">{y:.1}</text>"##,
            py(y),
            left - 6.0,
            py(y) + 4.0
        );
    }
    let mut ticks: Vec<f64> = rows.iter().map(|r| axis.value(r)).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in ticks {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{x}</text>"#, px(x), bottom + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, axis.label());
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">accuracy</text>"#,
        HEIGHT / 2.0
    );

    for (i, ((method, noise), points)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let upper = points.iter().map(|&(x, m, sd)| format!("{:.1},{:.1}", px(x), py(m + sd)));
        let lower = points.iter().rev().map(|&(x, m, sd)| format!("{:.1},{:.1}", px(x), py(m - sd)));
        let band: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#, band.join(" "));
        let line: Vec<String> = points.iter().map(|&(x, m, _)| format!("{:.1},{:.1}", px(x), py(m))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        for &(x, m, _) in points {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, px(x), py(m));
        }
        let ly = top + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}">{} ({})</text>"#,
            right - 150.0,
            ly,
            right - 134.0,
            ly + 10.0,
            escape(method),
            escape(noise)
        );
    }
    s.push_str("</svg>\n");
    s
}
