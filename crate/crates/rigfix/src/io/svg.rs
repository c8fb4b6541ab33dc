//! Minimal hand-emitted SVG scatterplot of match vectors (dx, dy), before
//! and after rectification. Fixed 600x600 viewport, symmetric axes in
//! pixels, one circle per match per stage.

use std::fmt::Write as _;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;

fn axis_range(points: &[&[(f64, f64)]]) -> f64 {
    let mut m = 1.0f64;
    for set in points {
        for &(x, y) in *set {
            m = m.max(x.abs()).max(y.abs());
        }
    }
    m * 1.1
}

/// Renders the scatterplot. `before` circles are red, `after` blue.
pub fn scatter_svg(before: &[(f64, f64)], after: &[(f64, f64)]) -> String {
    let range = axis_range(&[before, after]);
    let plot = SIZE - 2.0 * MARGIN;
    let to_px = |v: f64| MARGIN + (v + range) / (2.0 * range) * plot;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"##
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"##
    );
    // Axes through the origin.
    let c = to_px(0.0);
    let _ = writeln!(
        s,
        r##"<line x1="{MARGIN}" y1="{c:.2}" x2="{:.2}" y2="{c:.2}" stroke="#888" stroke-width="1"/>"##,
        SIZE - MARGIN
    );
    let _ = writeln!(
        s,
        r##"<line x1="{c:.2}" y1="{MARGIN}" x2="{c:.2}" y2="{:.2}" stroke="#888" stroke-width="1"/>"##,
        SIZE - MARGIN
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="end">dx [px]</text>"##,
        SIZE - MARGIN,
        c - 6.0
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="start">dy [px]</text>"##,
        c + 6.0,
        MARGIN + 12.0
    );
    let _ = writeln!(
        s,
        r##"<text x="{MARGIN}" y="{:.2}" font-size="12" text-anchor="middle">-{range:.1}</text>"##,
        c + 16.0
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{range:.1}</text>"##,
        SIZE - MARGIN,
        c + 16.0
    );
    // Legend.
    let _ = writeln!(
        s,
        r##"<circle cx="{:.2}" cy="20" r="4" fill="#d62728"/><text x="{:.2}" y="24" font-size="13">before</text>"##,
        MARGIN,
        MARGIN + 10.0
    );
    let _ = writeln!(
        s,
        r##"<circle cx="{:.2}" cy="20" r="4" fill="#1f77b4"/><text x="{:.2}" y="24" font-size="13">after</text>"##,
        MARGIN + 80.0,
        MARGIN + 90.0
    );

    for &(x, y) in before {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#d62728" fill-opacity="0.6"/>"##,
            to_px(x),
            to_px(y)
        );
    }
    for &(x, y) in after {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#1f77b4" fill-opacity="0.6"/>"##,
            to_px(x),
            to_px(y)
        );
    }
    s.push_str("</svg>\n");
    s
}
