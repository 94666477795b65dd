//! Planar primitives: orientation tests, segment intersection, polygon area
//! and convex clipping.

use crate::field_core::Vec2;

/// Twice the signed area of the triangle (a, b, c); positive when counter-clockwise.
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Whether the closed segments [a, b] and [c, d] share a point.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Parameter `t` in (0, 1) where segment a→b crosses the line through c, d,
/// when the crossing lies within [c, d].
pub fn segment_crossing(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> Option<f64> {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let t = (c - a).cross(s) / denom;
    let u = (c - a).cross(r) / denom;
    if t > 0.0 && t < 1.0 && (-1e-12..=1.0 + 1e-12).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Signed shoelace area of a closed polygon.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let m = poly.len();
    let mut twice = 0.0;
    for k in 0..m {
        twice += poly[k].cross(poly[(k + 1) % m]);
    }
    0.5 * twice
}

/// Counter-clockwise regular `sides`-gon inscribed in the circle (centre, radius).
pub fn inscribed_polygon(center: Vec2, radius: f64, sides: usize) -> Vec<Vec2> {
    (0..sides)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / sides as f64;
            center + Vec2::new(t.cos(), t.sin()) * radius
        })
        .collect()
}

/// Sutherland–Hodgman clip of `subject` against the convex counter-clockwise polygon `clip`.
pub fn clip_convex(subject: &[Vec2], clip: &[Vec2]) -> Vec<Vec2> {
    let mut output = subject.to_vec();
    let m = clip.len();
    for k in 0..m {
        if output.is_empty() {
            break;
        }
        let (c0, c1) = (clip[k], clip[(k + 1) % m]);
        let input = std::mem::take(&mut output);
        let inside = |p: Vec2| orient(c0, c1, p) >= 0.0;
        for idx in 0..input.len() {
            let cur = input[idx];
            let prev = input[(idx + input.len() - 1) % input.len()];
            let (cur_in, prev_in) = (inside(cur), inside(prev));
            if cur_in != prev_in {
                let (dp, dc) = (orient(c0, c1, prev), orient(c0, c1, cur));
                let t = dp / (dp - dc);
                output.push(prev.lerp(cur, t));
            }
            if cur_in {
                output.push(cur);
            }
        }
    }
    output
}

/// Area of the intersection of two convex counter-clockwise polygons.
pub fn convex_overlap_area(a: &[Vec2], b: &[Vec2]) -> f64 {
    let clipped = clip_convex(a, b);
    if clipped.len() < 3 {
        0.0
    } else {
        signed_area(&clipped).max(0.0)
    }
}

/// Distance from `p` to the closed axis-aligned box [lo, hi].
pub fn dist_to_box(p: Vec2, lo: Vec2, hi: Vec2) -> f64 {
    let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
    let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
    dx.hypot(dy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_and_touching_segments() {
        let o = Vec2::ZERO;
        assert!(segments_intersect(
            o,
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 0.0)
        ));
        assert!(segments_intersect(
            o,
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 1.0)
        ));
        assert!(!segments_intersect(
            o,
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0)
        ));
        assert!(segments_intersect(
            o,
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(3.0, 0.0)
        ));
    }

    #[test]
    fn inscribed_polygon_area_approaches_disk() {
        let poly = inscribed_polygon(Vec2::new(0.3, -0.2), 2.0, 64);
        let exact = 0.5 * 64.0 * 4.0 * (std::f64::consts::TAU / 64.0).sin();
        assert!((signed_area(&poly) - exact).abs() < 1e-12);
        let ratio = signed_area(&poly) / (std::f64::consts::PI * 4.0);
        assert!(ratio > 0.998 && ratio < 1.0);
    }

    #[test]
    fn clipping_squares() {
        let sq = |x0: f64, y0: f64, s: f64| {
            vec![
                Vec2::new(x0, y0),
                Vec2::new(x0 + s, y0),
                Vec2::new(x0 + s, y0 + s),
                Vec2::new(x0, y0 + s),
            ]
        };
        let a = sq(0.0, 0.0, 2.0);
        assert!((convex_overlap_area(&a, &sq(1.0, 1.0, 2.0)) - 1.0).abs() < 1e-14);
        assert_eq!(convex_overlap_area(&a, &sq(5.0, 5.0, 1.0)), 0.0);
        assert!((convex_overlap_area(&a, &sq(0.5, 0.5, 0.5)) - 0.25).abs() < 1e-14);
    }
}
