//! Standalone SVG boxplots: one panel per parameter, one box per method.

use std::fmt::Write;

use fatune::analysis::{BoxSummary, Parameter};

const PANEL_WIDTH: f64 = 260.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 40.0;
const BOX_WIDTH: f64 = 36.0;
const TICKS: usize = 5;

fn symbol(param: Parameter) -> &'static str {
    match param {
        Parameter::Theta => "θ",
        Parameter::Beta => "β",
        Parameter::Gamma => "γ",
    }
}

/// Value range covered by all boxes of one panel, padded by 5 %.
fn panel_range(boxes: &[&BoxSummary]) -> (f64, f64) {
    let (lo, hi) = boxes
        .iter()
        .flat_map(|b| b.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.05 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

pub fn render(boxes: &[BoxSummary]) -> String {
    let width = MARGIN_LEFT + Parameter::ALL.len() as f64 * (PANEL_WIDTH + MARGIN_LEFT);
    let height = MARGIN_TOP + PANEL_HEIGHT + MARGIN_BOTTOM;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (k, param) in Parameter::ALL.into_iter().enumerate() {
        let panel: Vec<&BoxSummary> = boxes.iter().filter(|b| b.parameter == param).collect();
        let x0 = MARGIN_LEFT + k as f64 * (PANEL_WIDTH + MARGIN_LEFT);
        let y0 = MARGIN_TOP;
        let (lo, hi) = panel_range(&panel);
        let y = |v: f64| y0 + PANEL_HEIGHT * (1.0 - (v - lo) / (hi - lo));

        let _ = writeln!(svg, r#"<g class="panel" id="panel-{}">"#, param.name());
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            x0 + PANEL_WIDTH / 2.0,
            y0 - 15.0,
            symbol(param)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{PANEL_WIDTH:.2}" height="{PANEL_HEIGHT:.2}" fill="none" stroke="black"/>"#
        );
        for t in 0..TICKS {
            let v = lo + (hi - lo) * t as f64 / (TICKS - 1) as f64;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{yv:.2}" x2="{x0:.2}" y2="{yv:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                y(v) + 4.0,
                format_tick(v),
                yv = y(v),
            );
        }

        let slots = panel.len().max(1) as f64;
        for (i, b) in panel.iter().enumerate() {
            let cx = x0 + PANEL_WIDTH * (i as f64 + 0.5) / slots;
            let _ = writeln!(
                svg,
                r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y0 + PANEL_HEIGHT + 20.0,
                b.method
            );
            let Some(s) = &b.summary else { continue };
            let (left, right) = (cx - BOX_WIDTH / 2.0, cx + BOX_WIDTH / 2.0);
            let _ = writeln!(svg, r#"<g class="box" data-method="{}">"#, b.method);
            let _ = writeln!(
                svg,
                r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
                y(s.upper_whisker),
                y(s.q3)
            );
            let _ = writeln!(
                svg,
                r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
                y(s.q1),
                y(s.lower_whisker)
            );
            for w in [s.lower_whisker, s.upper_whisker] {
                let _ = writeln!(
                    svg,
                    r#"<line x1="{:.2}" y1="{yw:.2}" x2="{:.2}" y2="{yw:.2}" stroke="black"/>"#,
                    cx - BOX_WIDTH / 4.0,
                    cx + BOX_WIDTH / 4.0,
                    yw = y(w)
                );
            }
            let _ = writeln!(
                svg,
                r##"<rect x="{left:.2}" y="{:.2}" width="{BOX_WIDTH:.2}" height="{:.2}" fill="#d9e6f2" stroke="black"/>"##,
                y(s.q3),
                (y(s.q1) - y(s.q3)).max(0.5)
            );
            let _ = writeln!(
                svg,
                r#"<line x1="{left:.2}" y1="{ym:.2}" x2="{right:.2}" y2="{ym:.2}" stroke="black" stroke-width="2"/>"#,
                ym = y(s.median)
            );
            for &o in &s.outliers {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{cx:.2}" cy="{:.2}" r="3" fill="none" stroke="black"/>"#,
                    y(o)
                );
            }
            let _ = writeln!(svg, "</g>");
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}
