//! Deterministic SVG pictures of the non-compact facets of a link.

use std::fmt::Write;

use num_traits::ToPrimitive;

use crate::doubling::PolytopeState;
use crate::geom::Q;
use crate::label::FacetLabel;
use crate::linkgeom::{FacePicture, LinkError};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    min: [f64; 2],
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(outline: &[[Q; 2]]) -> Frame {
        let pts: Vec<[f64; 2]> = outline.iter().map(to_f).collect();
        let min = [0, 1].map(|i| pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min));
        let max = [0, 1].map(|i| pts.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max));
        let span = (max[0] - min[0]).max(max[1] - min[1]).max(1e-9);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        Frame { min, scale, height: (max[1] - min[1]) * scale + 2.0 * MARGIN }
    }

    /// Screen coordinates; the second axis points up.
    fn map(&self, p: [f64; 2]) -> [f64; 2] {
        [MARGIN + (p[0] - self.min[0]) * self.scale, self.height - MARGIN - (p[1] - self.min[1]) * self.scale]
    }
}

fn to_f(p: &[Q; 2]) -> [f64; 2] {
    [p[0].to_f64().unwrap_or(0.0), p[1].to_f64().unwrap_or(0.0)]
}

fn centroid(ps: &[[f64; 2]]) -> [f64; 2] {
    let n = ps.len().max(1) as f64;
    [ps.iter().map(|p| p[0]).sum::<f64>() / n, ps.iter().map(|p| p[1]).sum::<f64>() / n]
}

/// Renders one face picture: tiles with their compact labels inside and the
/// adjacent non-compact facets labelled outside the boundary.
pub fn render_picture(pic: &FacePicture, title: &str) -> String {
    let frame = Frame::new(&pic.outline);
    let width = SIZE;
    let height = frame.height;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        num(width),
        num(height),
        num(width),
        num(height)
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    out.push_str(
        r#"<style>.tile{fill:#f4f4f4;stroke:#555;stroke-width:1}.outline{fill:none;stroke:#000;stroke-width:2}.in{font:11px sans-serif;text-anchor:middle;dominant-baseline:middle}.out{font:12px sans-serif;font-style:italic;text-anchor:middle;dominant-baseline:middle}</style>"#,
    );
    out.push('\n');
    let poly = |ps: &[[Q; 2]]| -> String {
        ps.iter().map(|p| frame.map(to_f(p))).map(|[x, y]| format!("{},{}", num(x), num(y))).collect::<Vec<_>>().join(" ")
    };
    out.push_str("<g class=\"tiles\">\n");
    for t in &pic.tiles {
        let _ = writeln!(out, r#"<polygon class="tile" points="{}"/>"#, poly(&t.polygon));
    }
    out.push_str("</g>\n");
    let _ = writeln!(out, r#"<polygon class="outline" points="{}"/>"#, poly(&pic.outline));
    out.push_str("<g class=\"labels\">\n");
    for t in &pic.tiles {
        let pts: Vec<[f64; 2]> = t.polygon.iter().map(|p| frame.map(to_f(p))).collect();
        let [cx, cy] = centroid(&pts);
        let n = t.labels.len() as f64;
        for (i, l) in t.labels.iter().enumerate() {
            let y = cy + (i as f64 - (n - 1.0) / 2.0) * 13.0;
            let _ = writeln!(out, r#"<text class="in" x="{}" y="{}">{}</text>"#, num(cx), num(y), escape(&l.to_string()));
        }
    }
    out.push_str("</g>\n<g class=\"neighbours\">\n");
    let outline: Vec<[f64; 2]> = pic.outline.iter().map(|p| frame.map(to_f(p))).collect();
    let [ox, oy] = centroid(&outline);
    for e in &pic.edges {
        let a = frame.map(to_f(&e.from));
        let b = frame.map(to_f(&e.to));
        let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let d = [m[0] - ox, m[1] - oy];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt().max(1e-9);
        let p = [m[0] + d[0] / len * 18.0, m[1] + d[1] / len * 18.0];
        let _ = writeln!(out, r#"<text class="out" x="{}" y="{}">{}</text>"#, num(p[0]), num(p[1]), escape(&e.label.to_string()));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// File-system friendly name of a picture, e.g. `P2_1_2.svg`.
pub fn file_name(n: usize, f: &FacetLabel) -> String {
    let s: String = f
        .to_string()
        .chars()
        .filter_map(|c| match c {
            '{' | '}' => None,
            ',' => Some('-'),
            c => Some(c),
        })
        .collect();
    format!("P{n}_{s}.svg")
}

/// Pictures of the requested non-compact facets of `s` (all when `only` is
/// `None`), as `(file name, svg)` pairs in facet order.
pub fn render_state(s: &PolytopeState, only: Option<&FacetLabel>) -> Result<Vec<(String, String)>, LinkError> {
    let classes = s.i3.compact_facet_classes();
    let mut out = Vec::new();
    for facet in s.i3.facets() {
        if only.is_some_and(|o| *o != facet.label) {
            continue;
        }
        let pic = s.i3.face_picture(&facet.label, &classes)?;
        let title = format!("P{} facet {}", s.n(), facet.label);
        out.push((file_name(s.n(), &facet.label), render_picture(&pic, &title)));
    }
    if let Some(o) = only {
        if out.is_empty() {
            return Err(LinkError::UnknownFacet(o.clone()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::diagram_d;
    use crate::doubling::canonical_sequence;

    #[test]
    fn picture_counts_and_determinism() {
        let states = canonical_sequence(&diagram_d()).unwrap();
        let p0 = render_state(&states[0], None).unwrap();
        assert_eq!(p0.len(), 5);
        let triangles = p0.iter().filter(|(_, s)| s.contains("class=\"outline\"") && outline_len(s) == 3).count();
        assert_eq!(triangles, 2);
        assert_eq!(p0.iter().filter(|(_, s)| outline_len(s) == 4).count(), 3);
        assert_eq!(render_state(&states[1], None).unwrap().len(), 6);
        assert_eq!(p0, render_state(&states[0], None).unwrap());
    }

    fn outline_len(svg: &str) -> usize {
        let line = svg.lines().find(|l| l.contains("class=\"outline\"")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        pts.split(' ').count()
    }

    #[test]
    fn p2_face_1_2_shows_its_labels() {
        let states = canonical_sequence(&diagram_d()).unwrap();
        let f: FacetLabel = "1_2".parse().unwrap();
        let pics = render_state(&states[2], Some(&f)).unwrap();
        assert_eq!(pics.len(), 1);
        assert_eq!(pics[0].0, "P2_1_2.svg");
        assert!(pics[0].1.contains(">3_2</text>"));
        assert!(pics[0].1.contains(">7</text>"));
        let missing: FacetLabel = "1_3".parse().unwrap();
        assert!(render_state(&states[2], Some(&missing)).is_err());
    }
}
