//! Minimal static SVG renderings: the reachability bar plot and line plots
//! for elbow curves.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 40.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, y_max: f64, x_label: &str, y_label: &str) {
    let (x0, y0, x1) = (LEFT, H - BOTTOM, W - RIGHT);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{TOP}" x2="{x0}" y2="{y0}" stroke="black"/>"#);
    for t in 0..=4 {
        let v = y_max * t as f64 / 4.0;
        let y = y0 - (y0 - TOP) * t as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            x0 - 4.0,
            y + 4.0,
            v
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        (TOP + y0) / 2.0,
        (TOP + y0) / 2.0,
        escape(y_label)
    );
}

/// Reachability bar plot in processing order. Undefined values are drawn at
/// 1.05 times the largest defined one, in a lighter shade.
pub fn reachability_svg(reach: &[Option<f64>], title: &str) -> String {
    let max = reach.iter().flatten().copied().fold(0.0, f64::max);
    let cap = if max > 0.0 { max * 1.05 } else { 1.0 };
    let mut s = header(title);
    axes(&mut s, cap, "processing order", "reachability distance");
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let bw = plot_w / reach.len().max(1) as f64;
    for (i, r) in reach.iter().enumerate() {
        let (v, fill) = match r {
            Some(v) => (*v, "#3b6ea8"),
            None => (cap, "#b8c7da"),
        };
        let h = plot_h * v / cap;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            LEFT + i as f64 * bw,
            H - BOTTOM - h,
            bw.max(0.5),
            h
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Line plot of `(x, y)` points with markers; `mark` highlights one point.
pub fn line_svg(points: &[(f64, f64)], mark: Option<usize>, title: &str, x_label: &str, y_label: &str) -> String {
    let mut s = header(title);
    let y_max = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    axes(&mut s, y_max, x_label, y_label);
    if points.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let (xmin, xmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let px = |x: f64| LEFT + 12.0 + (W - LEFT - RIGHT - 24.0) * (x - xmin) / span;
    let py = |y: f64| H - BOTTOM - (H - TOP - BOTTOM) * y / y_max;
    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#3b6ea8" stroke-width="2"/>"##,
        path.join(" ")
    );
    for (i, &(x, y)) in points.iter().enumerate() {
        let (r, fill) = if mark == Some(i) { (6.0, "#c0392b") } else { (3.5, "#3b6ea8") };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}"/>"#,
            px(x),
            py(y)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(x),
            H - BOTTOM + 14.0,
            x
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undefined_bars_sit_above_the_maximum() {
        let svg = reachability_svg(&[None, Some(1.0), Some(2.0), None], "r");
        assert_eq!(svg.matches("<rect x=").count(), 4);
        assert_eq!(svg.matches("#b8c7da").count(), 2);
        // the axis tops out at 1.05 * 2
        assert!(svg.contains(">2.100<"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn line_plot_marks_one_point() {
        let svg = line_svg(&[(1.0, 10.0), (2.0, 4.0), (3.0, 3.0)], Some(1), "elbow", "K", "cost");
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("#c0392b").count(), 1);
        assert_eq!(svg, line_svg(&[(1.0, 10.0), (2.0, 4.0), (3.0, 3.0)], Some(1), "elbow", "K", "cost"));
    }
}
