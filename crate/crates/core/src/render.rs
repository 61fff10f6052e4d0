//! Deterministic SVG scatterplots of clustered projections.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::points::Points;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 50.0;
const PLOT_TOP: f64 = 20.0;
const PLOT_RIGHT: f64 = 460.0;
const PLOT_BOTTOM: f64 = 440.0;
const LEGEND_X: f64 = 475.0;
const NOISE_FILL: &str = "#9e9e9e";
const RADIUS: f64 = 4.0;
const NOISE_RADIUS: f64 = 2.5;

/// Twelve-color categorical palette, cycled by cluster label.
pub const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78",
];

pub fn label_color(label: i32) -> &'static str {
    if label < 0 {
        NOISE_FILL
    } else {
        PALETTE[label as usize % PALETTE.len()]
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Axis range padded by 5% of the span; a zero span is padded by ±0.5 and an
/// empty set uses [−1, 1].
fn padded(bounds: Option<(f64, f64)>) -> (f64, f64) {
    match bounds {
        None => (-1.0, 1.0),
        Some((lo, hi)) if hi > lo => {
            let m = 0.05 * (hi - lo);
            (lo - m, hi + m)
        }
        Some((lo, _)) => (lo - 0.5, lo + 0.5),
    }
}

/// Scatterplot of the first two coordinates of `y`: one `<circle>` per point
/// colored by label (noise gray and smaller), plus a legend of cluster ids with
/// their annotation terms. Legend swatches are `<rect>`s.
pub fn render_scatter(y: &Points, labels: &[i32], annotations: &BTreeMap<i32, Vec<String>>) -> Vec<u8> {
    assert_eq!(y.len(), labels.len(), "labels must align with points");
    let b = y.bounds();
    let (x0, x1) = padded(b.first().copied());
    let (y0, y1) = padded(b.get(1).copied().or(b.first().map(|_| (0.0, 0.0))));
    let sx = |v: f64| PLOT_LEFT + (v - x0) / (x1 - x0) * (PLOT_RIGHT - PLOT_LEFT);
    let sy = |v: f64| PLOT_BOTTOM - (v - y0) / (y1 - y0) * (PLOT_BOTTOM - PLOT_TOP);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{PLOT_LEFT}" y1="{PLOT_BOTTOM}" x2="{PLOT_RIGHT}" y2="{PLOT_BOTTOM}"/><line x1="{PLOT_LEFT}" y1="{PLOT_TOP}" x2="{PLOT_LEFT}" y2="{PLOT_BOTTOM}"/></g>"#
    )
    .unwrap();
    let tick = |v: f64| format!("{v:.3}");
    writeln!(s, r#"<text x="{PLOT_LEFT}" y="{}" text-anchor="start">{}</text>"#, PLOT_BOTTOM + 15.0, tick(x0)).unwrap();
    writeln!(s, r#"<text x="{PLOT_RIGHT}" y="{}" text-anchor="end">{}</text>"#, PLOT_BOTTOM + 15.0, tick(x1)).unwrap();
    writeln!(s, r#"<text x="{}" y="{PLOT_BOTTOM}" text-anchor="end">{}</text>"#, PLOT_LEFT - 4.0, tick(y0)).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PLOT_LEFT - 4.0, PLOT_TOP + 8.0, tick(y1)).unwrap();

    s.push_str("<g class=\"points\">\n");
    for (row, &l) in y.rows().zip(labels) {
        let px = sx(row[0]);
        let py = sy(row.get(1).copied().unwrap_or(0.0));
        let r = if l < 0 { NOISE_RADIUS } else { RADIUS };
        writeln!(s, r#"<circle cx="{px:.3}" cy="{py:.3}" r="{r}" fill="{}"/>"#, label_color(l)).unwrap();
    }
    s.push_str("</g>\n<g class=\"legend\">\n");

    let mut present: Vec<i32> = labels.to_vec();
    present.sort_unstable();
    present.dedup();
    for (i, &l) in present.iter().enumerate() {
        let top = PLOT_TOP + 18.0 * i as f64;
        let name = if l < 0 {
            "noise".to_string()
        } else {
            match annotations.get(&l) {
                Some(terms) if !terms.is_empty() => format!("{l}: {}", terms.join(", ")),
                _ => l.to_string(),
            }
        };
        writeln!(s, r#"<rect x="{LEGEND_X}" y="{top}" width="10" height="10" fill="{}"/>"#, label_color(l)).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, LEGEND_X + 15.0, top + 9.0, escape(&name)).unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(svg: &[u8], needle: &str) -> usize {
        std::str::from_utf8(svg).unwrap().matches(needle).count()
    }

    #[test]
    fn empty_projection_is_valid() {
        let svg = render_scatter(&Points::zeros(0, 2), &[], &BTreeMap::new());
        let doc = std::str::from_utf8(&svg).unwrap();
        assert!(doc.starts_with("<svg"));
        assert!(doc.trim_end().ends_with("</svg>"));
        assert_eq!(count(&svg, "<circle"), 0);
        assert!(doc.contains("-1.000"));
    }

    #[test]
    fn two_points_two_fills() {
        let y = Points::from_rows(&[[0.0, 0.0], [1.0, 1.0]]);
        let svg = render_scatter(&y, &[0, 1], &BTreeMap::new());
        assert_eq!(count(&svg, "<circle"), 2);
        assert_eq!(count(&svg, PALETTE[0]), 2);
        assert_eq!(count(&svg, PALETTE[1]), 2);
    }

    #[test]
    fn noise_and_legend_terms() {
        let y = Points::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]]);
        let ann = BTreeMap::from([(0, vec!["device".to_string(), "id<x>".to_string()])]);
        let svg = render_scatter(&y, &[0, 0, -1], &ann);
        let doc = std::str::from_utf8(&svg).unwrap();
        assert!(doc.contains(&format!(r#"r="{NOISE_RADIUS}" fill="{NOISE_FILL}""#)));
        assert!(doc.contains("0: device, id&lt;x&gt;"));
        assert!(doc.contains(">noise<"));
        assert_eq!(render_scatter(&y, &[0, 0, -1], &ann), svg);
    }

    #[test]
    fn points_stay_inside_plot() {
        let y = Points::from_rows(&[[-3.0, 7.0], [5.0, -2.0], [0.0, 0.0]]);
        let svg = render_scatter(&y, &[0, 1, 2], &BTreeMap::new());
        let doc = std::str::from_utf8(&svg).unwrap();
        for c in doc.lines().filter(|l| l.starts_with("<circle")) {
            let grab = |k: &str| -> f64 {
                let rest = &c[c.find(k).unwrap() + k.len()..];
                rest[..rest.find('"').unwrap()].parse().unwrap()
            };
            let (cx, cy) = (grab("cx=\""), grab("cy=\""));
            assert!(cx > PLOT_LEFT && cx < PLOT_RIGHT, "{cx}");
            assert!(cy > PLOT_TOP && cy < PLOT_BOTTOM, "{cy}");
        }
    }
}
