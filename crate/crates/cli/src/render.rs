//! SVG drawing of a curve: 40 units per lattice unit, y pointing up.

use std::fmt::Write as _;

use num_traits::ToPrimitive;
use tropcount::curve::{CurveError, TropicalMap};
use tropcount::rational::Q;

pub const UNIT: f64 = 40.0;
const MARGIN: f64 = 20.0;

fn num(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn screen(p: &[Q]) -> (f64, f64) {
    let f = |x: &Q| x.to_f64().unwrap_or(0.0);
    (f(&p[0]) * UNIT, -f(&p[1]) * UNIT)
}

/// Edges as segments, legs as arrows one slope vector long, contracted legs
/// as short dashed stubs.
pub fn svg(map: &TropicalMap, seed: u64) -> Result<String, CurveError> {
    let ty = map.combinatorial_type();
    if !ty.is_tree() {
        return Err(CurveError::NotATree);
    }
    if ty.rank() != 2 {
        return Err(CurveError::SlopeRank("rendering needs rank 2".into()));
    }
    let pos: Vec<(f64, f64)> = map.positions().iter().map(|p| screen(p)).collect();
    let mut segments = Vec::new();
    for e in ty.edges() {
        segments.push(("edge", pos[e.a], pos[e.b]));
    }
    for l in ty.legs() {
        let (x, y) = pos[l.vertex];
        if l.slope.iter().all(|&s| s == 0) {
            segments.push(("contracted", (x, y), (x + UNIT / 3.0, y + UNIT / 3.0)));
        } else {
            let (dx, dy) = (l.slope[0] as f64 * UNIT, -(l.slope[1] as f64) * UNIT);
            segments.push(("leg", (x, y), (x + dx, y + dy)));
        }
    }
    let pts = segments.iter().flat_map(|s| [s.1, s.2]).chain(pos.iter().copied());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for (x, y) in pts {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let (vx, vy) = (x0 - MARGIN, y0 - MARGIN);
    let (w, h) = (x1 - x0 + 2.0 * MARGIN, y1 - y0 + 2.0 * MARGIN);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        num(vx),
        num(vy),
        num(w),
        num(h),
        num(w),
        num(h)
    )
    .unwrap();
    writeln!(s, "<!-- tropcount render seed {seed} -->").unwrap();
    s.push_str(concat!(
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="6" markerHeight="6" "#,
        r#"orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>"#,
        "\n"
    ));
    for (kind, (ax, ay), (bx, by)) in &segments {
        let extra = match *kind {
            "leg" => r#" marker-end="url(#arrow)""#,
            "contracted" => r#" stroke-dasharray="4 3""#,
            _ => "",
        };
        writeln!(
            s,
            r#"<line class="{kind}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="2"{extra}/>"#,
            num(*ax),
            num(*ay),
            num(*bx),
            num(*by)
        )
        .unwrap();
    }
    for (v, (x, y)) in pos.iter().enumerate() {
        writeln!(
            s,
            r#"<circle class="vertex" id="v{v}" cx="{}" cy="{}" r="3"/>"#,
            num(*x),
            num(*y)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_has_one_node_and_three_arrows() {
        let text = "vertex 0 genus 0 at 0 0\nleg 0 marking 1 slope -1 0\nleg 0 marking 2 slope 0 -1\nleg 0 marking 3 slope 1 1\n";
        let map = TropicalMap::parse(text).unwrap();
        let out = svg(&map, 0).unwrap();
        assert_eq!(out.matches("<circle").count(), 1);
        assert_eq!(out.matches("marker-end").count(), 3);
    }

    #[test]
    fn numbers_are_trimmed() {
        assert_eq!(num(40.0), "40");
        assert_eq!(num(-0.00001), "0");
        assert_eq!(num(13.3333333), "13.3333");
    }
}
