//! Static SVG birth–death scatter plots.

use std::fmt::Write;

use crate::files::PointEntry;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Axis range shared by every dimension so plots are comparable.
pub fn value_range(points: &[PointEntry]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        for v in [p.birth, p.death] {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Renders the dimension-`k` points of a diagram with the diagonal. Points
/// that never die sit on a dashed line labelled `inf` above the plot area.
pub fn render(points: &[PointEntry], k: usize, range: (f64, f64)) -> String {
    let (lo, hi) = range;
    let plot = SIZE - 2.0 * MARGIN;
    let sx = |v: f64| MARGIN + (v - lo) / (hi - lo) * plot;
    let sy = |v: f64| SIZE - MARGIN - (v - lo) / (hi - lo) * plot;
    let inf_y = MARGIN - 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray"/>"#,
        sx(lo),
        sy(lo),
        sx(hi),
        sy(hi)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{inf_y}" x2="{}" y2="{inf_y}" stroke="gray" stroke-dasharray="4 3"/>"#,
        SIZE - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="11" font-family="sans-serif">inf</text>"#,
        SIZE - MARGIN + 4.0,
        inf_y + 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" font-family="sans-serif" text-anchor="middle">H{k}: birth vs death</text>"#,
        SIZE / 2.0,
        MARGIN - 32.0
    );
    for (v, anchor) in [(lo, "start"), (hi, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="10" font-family="sans-serif" text-anchor="{anchor}">{v:.3}</text>"#,
            sx(v),
            SIZE - MARGIN + 14.0
        );
    }
    for p in points.iter().filter(|p| p.dim == k) {
        let y = if p.death.is_finite() { sy(p.death) } else { inf_y };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue" fill-opacity="0.8"/>"#,
            sx(p.birth),
            y
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_one_marker_per_point_of_the_dimension() {
        let pts = vec![
            PointEntry { dim: 0, birth: 0.0, death: 1.0 },
            PointEntry { dim: 0, birth: 0.5, death: f64::INFINITY },
            PointEntry { dim: 1, birth: 0.2, death: 0.4 },
        ];
        let range = value_range(&pts);
        let svg = render(&pts, 0, range);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(render(&pts, 1, range).matches("<circle").count(), 1);
    }
}
