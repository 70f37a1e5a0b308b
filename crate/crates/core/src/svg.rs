//! Deterministic SVG plots of trajectory fields.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::Result;
use crate::quad_diff::{TrajectoryEnd, TrajectoryField};

const WIDTH: f64 = 800.0;
const PADDING: f64 = 0.1;

/// Renders one `<path>` per trajectory, a circle per zero and a square per
/// finite pole. The view box is the bounding box of everything drawn,
/// padded by 10% on each side; the imaginary axis points up.
pub fn render_svg(field: &TrajectoryField) -> String {
    let all = field
        .trajectories
        .iter()
        .flat_map(|t| t.points.iter())
        .chain(field.critical_zeros.iter())
        .chain(field.poles.iter());
    let (mut lo, mut hi) = (
        Complex64::new(f64::INFINITY, f64::INFINITY),
        Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for z in all {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let span = (hi - lo).re.max((hi - lo).im).max(1e-12);
    let pad = PADDING * span;
    let (x0, y0) = (lo.re - pad, -hi.im - pad);
    let (w, h) = (hi.re - lo.re + 2.0 * pad, hi.im - lo.im + 2.0 * pad);
    let height = WIDTH * h / w;
    let glyph = 0.006 * span;
    let stroke = 0.0015 * span;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="{x0:.6} {y0:.6} {w:.6} {h:.6}">"#
    );
    let _ = writeln!(out, r#"<g fill="none" stroke-width="{stroke:.6}">"#);
    for t in &field.trajectories {
        let colour = if t.from_zero.is_some() { "#c0392b" } else { "#2c3e50" };
        let mut d = String::new();
        for (i, p) in t.points.iter().enumerate() {
            let _ = write!(d, "{}{:.6} {:.6}", if i == 0 { "M" } else { " L" }, p.re, -p.im);
        }
        if t.end == TrajectoryEnd::Closed {
            d.push_str(" Z");
        }
        let _ = writeln!(out, r#"<path class="trajectory" stroke="{colour}" d="{d}"/>"#);
    }
    let _ = writeln!(out, "</g>");
    for z in &field.critical_zeros {
        let _ = writeln!(
            out,
            r##"<circle class="zero" cx="{:.6}" cy="{:.6}" r="{glyph:.6}" fill="#27ae60"/>"##,
            z.re, -z.im
        );
    }
    for p in &field.poles {
        let _ = writeln!(
            out,
            r##"<rect class="pole" x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}" fill="#000000"/>"##,
            p.re - glyph,
            -p.im - glyph,
            2.0 * glyph,
            2.0 * glyph
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(field: &TrajectoryField, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(field))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad_diff::{trace_trajectories, QdParams};

    #[test]
    fn well_formed_and_deterministic() {
        let p = QdParams::unit(3, 1.0).unwrap();
        let field = trace_trajectories(&p, 4e-3, 20.0).unwrap();
        let a = render_svg(&field);
        let b = render_svg(&trace_trajectories(&p, 4e-3, 20.0).unwrap());
        assert_eq!(a, b);
        let doc = roxmltree::Document::parse(&a).unwrap();
        let paths = doc.descendants().filter(|n| n.has_tag_name("path")).count();
        assert_eq!(paths, field.trajectories.len());
        let zeros = doc.descendants().filter(|n| n.attribute("class") == Some("zero")).count();
        let poles = doc.descendants().filter(|n| n.attribute("class") == Some("pole")).count();
        assert_eq!((zeros, poles), (3, 4));
    }
}
