use std::fmt::Write as _;
use std::path::Path;

use super::MapSnapshot;
use crate::error::{Error, Result};

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;
const RADIUS: f64 = 7.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];
const UNLABELED: &str = "#b0b0b0";

/// Draws neurons at their output-space positions, scaled to a fixed canvas:
/// edges as lines, neurons as circles filled by majority class. Neurons that
/// won no pattern are drawn hollow.
pub fn render_svg(snapshot: &MapSnapshot) -> String {
    let pos = &snapshot.positions;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for r in pos {
        for k in 0..2 {
            lo[k] = lo[k].min(r[k]);
            hi[k] = hi[k].max(r[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if span > 0.0 {
        (CANVAS - 2.0 * MARGIN) / span
    } else {
        1.0
    };
    // y grows downwards in SVG; flip so the map reads like a plot
    let project = |r: [f64; 2]| {
        (
            MARGIN + (r[0] - lo[0]) * scale,
            CANVAS - MARGIN - (r[1] - lo[1]) * scale,
        )
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="white"/>"#
    );
    let _ = writeln!(out, r##"<g stroke="#555555" stroke-width="1.2">"##);
    for e in &snapshot.edges {
        let (x1, y1) = project(pos[e.a]);
        let (x2, y2) = project(pos[e.b]);
        let _ = writeln!(out, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
    }
    out.push_str("</g>\n<g stroke-width=\"2\">\n");
    for (i, &r) in pos.iter().enumerate() {
        let (x, y) = project(r);
        let color = snapshot
            .labels
            .as_ref()
            .and_then(|l| l.get(i).copied().flatten())
            .map(|c| PALETTE[c as usize % PALETTE.len()])
            .unwrap_or(UNLABELED);
        let dead = snapshot.win_counts.get(i).is_some_and(|&w| w == 0);
        let fill = if dead { "none" } else { color };
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{RADIUS}" fill="{fill}" stroke="{color}"><title>neuron {i}</title></circle>"#
        );
    }
    out.push_str("</g>\n");
    if let Some(names) = &snapshot.class_names {
        for (k, name) in names.iter().enumerate() {
            let y = 14.0 + 16.0 * k as f64;
            let _ = writeln!(
                out,
                r#"<rect x="8" y="{:.1}" width="10" height="10" fill="{}"/><text x="24" y="{:.1}" font-size="12" font-family="sans-serif">{}</text>"#,
                y - 9.0,
                PALETTE[k % PALETTE.len()],
                y,
                escape(name)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_svg(snapshot: &MapSnapshot, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_svg(snapshot)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_lattice, LatticeSpec, Topology};

    #[test]
    fn small_lattice_counts() {
        let map = build_lattice(&LatticeSpec::new(2, 2, Topology::Rectangular).unwrap(), 2).unwrap();
        let mut snap = MapSnapshot::from_map(&map, "som");
        snap.win_counts = vec![3, 0, 1, 1];
        snap.labels = Some(vec![Some(0), None, Some(1), Some(1)]);
        let svg = render_svg(&snap);
        assert_eq!(svg.matches("<circle").count(), 4);
        assert_eq!(svg.matches("<line").count(), 4);
        assert_eq!(svg.matches(r#"fill="none""#).count(), 1);
        assert!(svg.contains(PALETTE[1]));
    }

    #[test]
    fn unwritable_path_errors() {
        let map = build_lattice(&LatticeSpec::new(2, 2, Topology::Rectangular).unwrap(), 2).unwrap();
        let snap = MapSnapshot::from_map(&map, "som");
        assert!(matches!(
            write_svg(&snap, "/nonexistent/dir/x.svg"),
            Err(Error::Io { .. })
        ));
    }
}
