use super::GrainBoundaryError;
use crate::field_core::{segment_integral, Grid2, Mat2, MatrixField, MatrixSampler, Vec2};
use crate::geometry::{convex_overlap_area, orient, segment_crossing};

/// One triangle with its affine map p ↦ gradient·p + offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    /// Node indices in counter-clockwise order.
    pub vertices: [usize; 3],
    pub gradient: Mat2,
    pub offset: Vec2,
}

/// Uniform buckets over the bounding box for point location.
#[derive(Debug, Clone)]
struct BucketIndex {
    lo: Vec2,
    cell: Vec2,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl BucketIndex {
    fn build(lo: Vec2, hi: Vec2, boxes: &[(Vec2, Vec2)]) -> Self {
        let side = ((boxes.len() as f64).sqrt() * 2.0).clamp(1.0, 1024.0) as usize;
        let (nx, ny) = (side, side);
        let cell = Vec2::new((hi.x - lo.x) / nx as f64, (hi.y - lo.y) / ny as f64);
        let mut index = Self {
            lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for (t, (blo, bhi)) in boxes.iter().enumerate() {
            let (i0, j0) = index.bucket_of(*blo);
            let (i1, j1) = index.bucket_of(*bhi);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    index.buckets[j * nx + i].push(t);
                }
            }
        }
        index
    }

    fn bucket_of(&self, p: Vec2) -> (usize, usize) {
        let fx = ((p.x - self.lo.x) / self.cell.x).floor();
        let fy = ((p.y - self.lo.y) / self.cell.y).floor();
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        (clamp(fx, self.nx), clamp(fy, self.ny))
    }

    fn candidates(&self, p: Vec2) -> &[usize] {
        let (i, j) = self.bucket_of(p);
        &self.buckets[j * self.nx + i]
    }

    fn candidates_in_box(&self, lo: Vec2, hi: Vec2) -> Vec<usize> {
        let (i0, j0) = self.bucket_of(lo);
        let (i1, j1) = self.bucket_of(hi);
        let mut out: Vec<usize> = (j0..=j1)
            .flat_map(|j| {
                (i0..=i1).flat_map(move |i| self.buckets[j * self.nx + i].iter().copied())
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A triangulated map with one affine piece per triangle.
#[derive(Debug, Clone)]
pub struct PiecewiseAffineMap {
    nodes: Vec<Vec2>,
    values: Vec<Vec2>,
    triangles: Vec<Triangle>,
    lo: Vec2,
    hi: Vec2,
    index: BucketIndex,
}

impl PiecewiseAffineMap {
    /// Builds the map interpolating `values` at `nodes` linearly on each triangle.
    ///
    /// Triangles are reoriented counter-clockwise; zero-area triangles are rejected.
    pub fn from_vertex_values(
        nodes: Vec<Vec2>,
        values: Vec<Vec2>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, GrainBoundaryError> {
        let mut tris = Vec::with_capacity(triangles.len());
        for (index, mut v) in triangles.into_iter().enumerate() {
            let (p0, p1, p2) = (nodes[v[0]], nodes[v[1]], nodes[v[2]]);
            let o = orient(p0, p1, p2);
            if o == 0.0 || !o.is_finite() {
                return Err(GrainBoundaryError::DegenerateTriangle { index });
            }
            if o < 0.0 {
                v.swap(1, 2);
            }
            let (p0, p1, p2) = (nodes[v[0]], nodes[v[1]], nodes[v[2]]);
            let (q0, q1, q2) = (values[v[0]], values[v[1]], values[v[2]]);
            let domain = Mat2::from_cols(p1 - p0, p2 - p0);
            let image = Mat2::from_cols(q1 - q0, q2 - q0);
            let inv = domain
                .inverse()
                .ok_or(GrainBoundaryError::DegenerateTriangle { index })?;
            let gradient = image * inv;
            let offset = q0 - gradient.mul_vec(p0);
            tris.push(Triangle {
                vertices: v,
                gradient,
                offset,
            });
        }
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &nodes {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let boxes: Vec<(Vec2, Vec2)> = tris
            .iter()
            .map(|t| {
                let ps = t.vertices.map(|k| nodes[k]);
                (
                    Vec2::new(
                        ps[0].x.min(ps[1].x).min(ps[2].x),
                        ps[0].y.min(ps[1].y).min(ps[2].y),
                    ),
                    Vec2::new(
                        ps[0].x.max(ps[1].x).max(ps[2].x),
                        ps[0].y.max(ps[1].y).max(ps[2].y),
                    ),
                )
            })
            .collect();
        let index = BucketIndex::build(lo, hi, &boxes);
        Ok(Self {
            nodes,
            values,
            triangles: tris,
            lo,
            hi,
            index,
        })
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    /// Prescribed value at each node.
    pub fn node_values(&self) -> &[Vec2] {
        &self.values
    }

    /// Bounding box of the domain.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        (self.lo, self.hi)
    }

    /// Corner positions of triangle `t`.
    pub fn corners(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].vertices.map(|k| self.nodes[k])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * orient(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        crate::numeric::pairwise_sum(
            &(0..self.triangles.len())
                .map(|t| self.area(t))
                .collect::<Vec<_>>(),
        )
    }

    fn contains_in(&self, t: usize, p: Vec2, slack: f64) -> bool {
        let [a, b, c] = self.corners(t);
        let scale = slack * (b - a).norm_sq().max((c - a).norm_sq());
        orient(a, b, p) >= -scale && orient(b, c, p) >= -scale && orient(c, a, p) >= -scale
    }

    /// Index of a triangle containing `p`, if any.
    pub fn locate(&self, p: Vec2) -> Option<usize> {
        let cands = self.index.candidates(p);
        cands
            .iter()
            .copied()
            .find(|&t| self.contains_in(t, p, 0.0))
            .or_else(|| {
                cands
                    .iter()
                    .copied()
                    .find(|&t| self.contains_in(t, p, 1e-12))
            })
    }

    pub fn eval(&self, p: Vec2) -> Option<Vec2> {
        self.locate(p).map(|t| {
            let tri = &self.triangles[t];
            tri.gradient.mul_vec(p) + tri.offset
        })
    }

    pub fn gradient_at(&self, p: Vec2) -> Option<Mat2> {
        self.locate(p).map(|t| self.triangles[t].gradient)
    }

    /// Largest disagreement between a triangle's affine map and the
    /// prescribed value at one of its vertices.
    pub fn continuity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for tri in &self.triangles {
            for &k in &tri.vertices {
                let image = tri.gradient.mul_vec(self.nodes[k]) + tri.offset;
                worst = worst.max((image - self.values[k]).norm());
            }
        }
        worst
    }

    /// The map followed by the linear map `q`.
    pub fn post_compose_linear(&self, q: Mat2) -> Self {
        let mut out = self.clone();
        out.values = self.values.iter().map(|v| q.mul_vec(*v)).collect();
        for t in &mut out.triangles {
            t.gradient = q * t.gradient;
            t.offset = q.mul_vec(t.offset);
        }
        out
    }

    /// Gradient sampled at every grid node; nodes outside the mesh get `fallback`.
    pub fn sample_gradient(&self, grid: Grid2, fallback: Mat2) -> MatrixField {
        MatrixField::from_fn(grid, |p| self.gradient_at(p).unwrap_or(fallback))
    }

    /// Mean gradient over the dual cell [x − h/2, x + h/2]² of every grid
    /// node; the part of a cell outside the mesh contributes `fallback`.
    /// The curl of the averaged field is the averaged curl, so it vanishes
    /// wherever the h/2-neighbourhood is free of cores.
    pub fn average_gradient(&self, grid: Grid2, fallback: Mat2) -> MatrixField {
        let half = 0.5 * grid.h();
        MatrixField::from_fn(grid, |p| {
            let (lo, hi) = (p - Vec2::new(half, half), p + Vec2::new(half, half));
            let cell = [lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)];
            let full = 4.0 * half * half;
            let mut acc = Mat2::ZERO;
            let mut covered = 0.0;
            for t in self.index.candidates_in_box(lo, hi) {
                let area = convex_overlap_area(&self.corners(t), &cell);
                if area > 0.0 {
                    acc = acc + self.triangles[t].gradient.scale(area);
                    covered += area;
                }
            }
            (acc + fallback.scale((full - covered).max(0.0))).scale(1.0 / full)
        })
    }

    /// Edge averages of the gradient: column 0 of node (i, j) holds the mean
    /// of ∂ₓu along the edge to (i + 1, j), column 1 the mean of ∂ᵧu along
    /// the edge to (i, j + 1); nodes on the last column or row use the
    /// backward edge. The circulation of the staggered field around every
    /// grid cell equals the exact circulation of the gradient, so it
    /// vanishes on cells free of cores.
    pub fn edge_average_gradient(&self, grid: Grid2) -> MatrixField {
        let field = self.gradient_field();
        let (n, h) = (grid.n(), grid.h());
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n {
            for i in 0..n {
                let p = grid.node(i, j);
                let ex = if i + 1 < n {
                    segment_integral(&field, p, grid.node(i + 1, j))
                } else {
                    segment_integral(&field, grid.node(i - 1, j), p)
                };
                let ey = if j + 1 < n {
                    segment_integral(&field, p, grid.node(i, j + 1))
                } else {
                    segment_integral(&field, grid.node(i, j - 1), p)
                };
                values.push(Mat2::new(ex.x / h, ey.x / h, ex.y / h, ey.y / h));
            }
        }
        MatrixField { grid, values }
    }

    /// Gradient viewed as a matrix field for exact line integrals.
    pub fn gradient_field(&self) -> GradientField<'_> {
        GradientField { map: self }
    }
}

/// The piecewise-constant gradient of a [`PiecewiseAffineMap`].
#[derive(Debug, Clone, Copy)]
pub struct GradientField<'a> {
    map: &'a PiecewiseAffineMap,
}

impl MatrixSampler for GradientField<'_> {
    fn contains(&self, p: Vec2) -> bool {
        let (lo, hi) = self.map.bounds();
        p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y
    }

    fn sample(&self, p: Vec2) -> Mat2 {
        self.map.gradient_at(p).unwrap_or(Mat2::ZERO)
    }

    fn breakpoints(&self, a: Vec2, b: Vec2, out: &mut Vec<f64>) {
        let lo = Vec2::new(a.x.min(b.x), a.y.min(b.y));
        let hi = Vec2::new(a.x.max(b.x), a.y.max(b.y));
        for t in self.map.index.candidates_in_box(lo, hi) {
            let [p0, p1, p2] = self.map.corners(t);
            for (c, d) in [(p0, p1), (p1, p2), (p2, p0)] {
                if let Some(s) = segment_crossing(a, b, c, d) {
                    out.push(s);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::rotation;

    fn square_map(f: impl Fn(Vec2) -> Vec2) -> PiecewiseAffineMap {
        let nodes = vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(0.2, 0.1),
        ];
        let values = nodes.iter().map(|p| f(*p)).collect();
        let tris = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        PiecewiseAffineMap::from_vertex_values(nodes, values, tris).unwrap()
    }

    #[test]
    fn affine_data_is_reproduced_exactly() {
        let a = Mat2::new(1.0, 0.5, -0.25, 2.0);
        let m = square_map(|p| a.mul_vec(p) + Vec2::new(3.0, -1.0));
        assert!(m.continuity_defect() < 1e-14);
        for t in m.triangles() {
            assert!((t.gradient - a).max_abs() < 1e-14);
        }
        assert!((m.total_area() - 4.0).abs() < 1e-14);
        let q = Vec2::new(-0.3, 0.7);
        assert!((m.eval(q).unwrap() - (a.mul_vec(q) + Vec2::new(3.0, -1.0))).norm() < 1e-14);
        assert!(m.eval(Vec2::new(2.0, 0.0)).is_none());
    }

    #[test]
    fn clockwise_input_is_reoriented_and_degenerate_rejected() {
        let nodes = vec![
            Vec2::ZERO,
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
        ];
        let values = nodes.clone();
        let m =
            PiecewiseAffineMap::from_vertex_values(nodes.clone(), values.clone(), vec![[0, 1, 2]])
                .unwrap();
        assert!(m.area(0) > 0.0);
        let err = PiecewiseAffineMap::from_vertex_values(nodes, values, vec![[0, 2, 3]]);
        assert!(matches!(
            err,
            Err(GrainBoundaryError::DegenerateTriangle { index: 0 })
        ));
    }

    #[test]
    fn post_rotation_rotates_gradients() {
        let m = square_map(|p| Vec2::new(p.x * 2.0, p.y + p.x));
        let r = rotation(0.4);
        let rotated = m.post_compose_linear(r);
        for (a, b) in m.triangles().iter().zip(rotated.triangles()) {
            assert!((r * a.gradient - b.gradient).max_abs() < 1e-15);
        }
        assert!(rotated.continuity_defect() < 1e-14);
    }

    #[test]
    fn gradient_field_has_exact_circulation() {
        use crate::field_core::{line_integral, PolyCurve};
        // A continuous piecewise-affine map has a curl-free gradient.
        let m = square_map(|p| Vec2::new(p.x * p.x.abs(), p.y + 0.3 * p.x));
        let c = PolyCurve::circle(Vec2::new(0.1, 0.05), 0.6, 23).unwrap();
        let b = line_integral(&m.gradient_field(), &c).unwrap();
        assert!(b.norm() < 1e-14, "{b:?}");
    }

    #[test]
    fn averaged_gradient_matches_affine_data() {
        let a = Mat2::new(1.0, 0.5, -0.25, 2.0);
        let m = square_map(|p| a.mul_vec(p));
        let f = m.average_gradient(Grid2::new(9, 0.8).unwrap(), Mat2::ZERO);
        assert!(f.values.iter().all(|v| (*v - a).max_abs() < 1e-13));
        // Cells half outside the mesh blend in the fallback.
        let g = m.average_gradient(Grid2::new(3, 1.0).unwrap(), Mat2::ZERO);
        assert!((g.at(1, 1) - a).max_abs() < 1e-13);
        assert!((g.at(0, 1) - a.scale(0.5)).max_abs() < 1e-13);
    }
}
