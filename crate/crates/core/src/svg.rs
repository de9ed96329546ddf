//! Minimal SVG heatmaps for feature grids.

use std::fmt::Write as _;

use crate::persistence::FeatureGrid;
use crate::spectral::Feature;

const CELL: usize = 32;
const MARGIN: usize = 48;

/// Eight samples of the viridis map, low to high.
const RAMP: [[u8; 3]; 8] = [
    [68, 1, 84],
    [70, 50, 126],
    [54, 92, 141],
    [39, 127, 142],
    [31, 161, 135],
    [74, 193, 109],
    [160, 218, 57],
    [253, 231, 37],
];

/// Color for `t ∈ [0, 1]`, interpolated linearly between ramp stops.
pub fn ramp_color(t: f64) -> [u8; 3] {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let x = t * (RAMP.len() - 1) as f64;
    let i = (x.floor() as usize).min(RAMP.len() - 2);
    let f = x - i as f64;
    let mut out = [0u8; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let (a, b) = (RAMP[i][k] as f64, RAMP[i + 1][k] as f64);
        *slot = (a + (b - a) * f).round() as u8;
    }
    out
}

fn label(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e9 {
        format!("{}", x as i64)
    } else {
        format!("{x:.3}")
    }
}

/// Heatmap of one feature: column `m`, row `n`, cells with `n > m` left blank.
pub fn heatmap(grid: &FeatureGrid, feature: Feature, annotate: bool) -> String {
    let n = grid.stages;
    let values: Vec<f64> = grid
        .cells
        .values()
        .map(|c| c.features.get(feature))
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let side = 2 * MARGIN + n * CELL;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}">"#
    );
    let _ = writeln!(s, r#"<rect width="{side}" height="{side}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="14">{} (p = {})</text>"#,
        MARGIN / 2,
        feature.name(),
        grid.p
    );
    for i in 1..=n {
        let c = MARGIN + (i - 1) * CELL + CELL / 2;
        let _ = writeln!(
            s,
            r#"<text x="{c}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{i}</text>"#,
            MARGIN - 6
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{i}</text>"#,
            MARGIN - 6,
            c + 4
        );
    }
    for cell in grid.cells.values() {
        let v = cell.features.get(feature);
        let [r, g, b] = ramp_color((v - lo) / span);
        let x = MARGIN + (cell.m - 1) * CELL;
        let y = MARGIN + (cell.n - 1) * CELL;
        let _ = writeln!(
            s,
            r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}{b:02x}"><title>({},{}) {}</title></rect>"##,
            cell.n,
            cell.m,
            label(v)
        );
        if annotate {
            let ink = if (v - lo) / span > 0.6 {
                "black"
            } else {
                "white"
            };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="9" text-anchor="middle" fill="{ink}">{}</text>"#,
                x + CELL / 2,
                y + CELL / 2 + 3,
                label(v)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
