use super::{FieldError, Params, Vec2};
use crate::geometry::{segments_intersect, signed_area};

/// A closed simple polygon; the closing edge from the last vertex back to
/// the first is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCurve {
    vertices: Vec<Vec2>,
}

impl PolyCurve {
    /// Validates vertex count, finiteness, simplicity and non-zero area.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, FieldError> {
        let m = vertices.len();
        if m < 3 {
            return Err(FieldError::InvalidCurve(format!(
                "{m} vertices, need at least 3"
            )));
        }
        if let Some(k) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::InvalidCurve(format!(
                "vertex {k} is not finite"
            )));
        }
        for a in 0..m {
            let (p0, p1) = (vertices[a], vertices[(a + 1) % m]);
            if p0 == p1 {
                return Err(FieldError::InvalidCurve(format!("edge {a} is degenerate")));
            }
            for b in (a + 1)..m {
                let adjacent = b == a + 1 || (a == 0 && b == m - 1);
                let (q0, q1) = (vertices[b], vertices[(b + 1) % m]);
                if adjacent {
                    // Adjacent edges may only share their common vertex.
                    let (shared, far_a, far_b) = if b == a + 1 {
                        (p1, p0, q1)
                    } else {
                        (p0, p1, q0)
                    };
                    let back = (far_a - shared).cross(far_b - shared) == 0.0
                        && (far_a - shared).dot(far_b - shared) > 0.0;
                    if back {
                        return Err(FieldError::InvalidCurve(format!(
                            "edges {a} and {b} overlap"
                        )));
                    }
                } else if segments_intersect(p0, p1, q0, q1) {
                    return Err(FieldError::InvalidCurve(format!(
                        "edges {a} and {b} intersect"
                    )));
                }
            }
        }
        if signed_area(&vertices) == 0.0 {
            return Err(FieldError::InvalidCurve("zero signed area".into()));
        }
        Ok(Self { vertices })
    }

    /// Regular polygon with `sides` vertices on the circle, counter-clockwise.
    pub fn circle(center: Vec2, radius: f64, sides: usize) -> Result<Self, FieldError> {
        Self::new(crate::geometry::inscribed_polygon(center, radius, sides))
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Edges (start, end) including the closing edge.
    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let m = self.vertices.len();
        (0..m).map(move |k| (self.vertices[k], self.vertices[(k + 1) % m]))
    }

    /// The same curve traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v }
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Winding number of the curve around `p` (p not on the curve).
    pub fn winding_number(&self, p: Vec2) -> i32 {
        let mut w = 0;
        for (a, b) in self.segments() {
            if a.y <= p.y {
                if b.y > p.y && crate::geometry::orient(a, b, p) > 0.0 {
                    w += 1;
                }
            } else if b.y <= p.y && crate::geometry::orient(a, b, p) < 0.0 {
                w -= 1;
            }
        }
        w
    }

    /// Smallest distance from `p` to the curve.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.segments()
            .map(|(a, b)| {
                let d = b - a;
                let t = ((p - a).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
                p.dist(a.lerp(b, t))
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Dislocation cores: disks of radius λε.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreSet {
    centers: Vec<Vec2>,
    radius: f64,
}

impl CoreSet {
    /// Validates that each centre lies in [−L+ℓ, L−ℓ] × [−L, L].
    pub fn new(centers: Vec<Vec2>, params: &Params) -> Result<Self, FieldError> {
        let x_max = params.half_side - params.band_width;
        for (index, c) in centers.iter().enumerate() {
            if !(c.x.abs() <= x_max && c.y.abs() <= params.half_side) {
                return Err(FieldError::CoreOutsideStrip {
                    index,
                    x: c.x,
                    y: c.y,
                });
            }
        }
        Ok(Self {
            centers,
            radius: params.core_radius(),
        })
    }

    pub fn empty(params: &Params) -> Self {
        Self {
            centers: Vec::new(),
            radius: params.core_radius(),
        }
    }

    pub fn centers(&self) -> &[Vec2] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Core disk radius λε.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Radius of the λε-neighbourhood of a core disk, 2λε.
    pub fn dilated_radius(&self) -> f64 {
        2.0 * self.radius
    }

    /// Whether `p` lies in the closed λε-neighbourhood of the cores.
    pub fn in_dilated(&self, p: Vec2) -> bool {
        let r = self.dilated_radius();
        self.centers.iter().any(|c| c.dist(p) <= r)
    }

    /// Whether some core is within `reach` of the closed box [lo, hi].
    pub fn box_within(&self, lo: Vec2, hi: Vec2, reach: f64) -> bool {
        self.centers
            .iter()
            .any(|c| crate::geometry::dist_to_box(*c, lo, hi) <= reach)
    }
}
