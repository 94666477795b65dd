use super::{FieldError, Mat2, Vec2};

/// Uniform node grid on [-L, L]² with `n` nodes per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    n: usize,
    half_side: f64,
}

impl Grid2 {
    pub fn new(n: usize, half_side: f64) -> Result<Self, FieldError> {
        if n < 2 {
            return Err(FieldError::GridTooSmall { n, min: 2 });
        }
        if !(half_side.is_finite() && half_side > 0.0) {
            return Err(FieldError::InvalidParams {
                name: "L",
                value: half_side,
                rule: "must be finite and strictly positive",
            });
        }
        Ok(Self { n, half_side })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_side(&self) -> f64 {
        self.half_side
    }

    /// Node spacing 2L/(n−1).
    pub fn h(&self) -> f64 {
        2.0 * self.half_side / (self.n - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of node (i, j); `i` runs along x.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn coord(&self, k: usize) -> f64 {
        -self.half_side + k as f64 * self.h()
    }

    /// Position of node (i, j).
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.coord(i), self.coord(j))
    }

    /// Centre of cell (i, j), spanning nodes i..=i+1 and j..=j+1.
    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        let h = self.h();
        Vec2::new(self.coord(i) + 0.5 * h, self.coord(j) + 0.5 * h)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let l = self.half_side;
        p.x >= -l && p.x <= l && p.y >= -l && p.y <= l
    }

    /// Cell index and local coordinate in [0, 1] along one axis.
    fn locate_axis(&self, t: f64) -> (usize, f64) {
        let s = (t + self.half_side) / self.h();
        let cell = (s.floor().max(0.0) as usize).min(self.n - 2);
        (cell, s - cell as f64)
    }

    /// Bilinear interpolation of per-node values.
    pub fn interpolate<T>(&self, values: &[T], p: Vec2, lerp: impl Fn(&[T; 4], f64, f64) -> T) -> T
    where
        T: Copy,
    {
        let (i, fx) = self.locate_axis(p.x);
        let (j, fy) = self.locate_axis(p.y);
        let corners = [
            values[self.index(i, j)],
            values[self.index(i + 1, j)],
            values[self.index(i, j + 1)],
            values[self.index(i + 1, j + 1)],
        ];
        lerp(&corners, fx, fy)
    }

    /// Parameters in (0, 1) where the segment a→b crosses grid lines.
    pub fn crossings(&self, a: Vec2, b: Vec2, out: &mut Vec<f64>) {
        let h = self.h();
        for (pa, pb) in [(a.x, b.x), (a.y, b.y)] {
            if pa == pb {
                continue;
            }
            let (lo, hi) = if pa < pb { (pa, pb) } else { (pb, pa) };
            let first = ((lo + self.half_side) / h).ceil() as i64;
            let last = ((hi + self.half_side) / h).floor() as i64;
            for k in first.max(0)..=last.min(self.n as i64 - 1) {
                let line = -self.half_side + k as f64 * h;
                let t = (line - pa) / (pb - pa);
                if t > 0.0 && t < 1.0 {
                    out.push(t);
                }
            }
        }
    }
}

/// One scalar per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::FieldSizeMismatch {
                got: values.len(),
                expected: grid.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2, f: impl Fn(Vec2) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n {
            for i in 0..n {
                values.push(f(grid.node(i, j)));
            }
        }
        Self { grid, values }
    }

    pub fn zeros(grid: Grid2) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn sample(&self, p: Vec2) -> f64 {
        self.grid.interpolate(&self.values, p, |c, fx, fy| {
            let bottom = c[0] + fx * (c[1] - c[0]);
            let top = c[2] + fx * (c[3] - c[2]);
            bottom + fy * (top - bottom)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One 2×2 matrix per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    pub grid: Grid2,
    pub values: Vec<Mat2>,
}

impl MatrixField {
    pub fn new(grid: Grid2, values: Vec<Mat2>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::FieldSizeMismatch {
                got: values.len(),
                expected: grid.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2, f: impl Fn(Vec2) -> Mat2) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n {
            for i in 0..n {
                values.push(f(grid.node(i, j)));
            }
        }
        Self { grid, values }
    }

    pub fn constant(grid: Grid2, m: Mat2) -> Self {
        Self {
            grid,
            values: vec![m; grid.len()],
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Mat2 {
        self.values[self.grid.index(i, j)]
    }

    /// Bilinear interpolation of all four entries.
    pub fn sample(&self, p: Vec2) -> Mat2 {
        self.grid.interpolate(&self.values, p, |c, fx, fy| {
            let bottom = c[0] + (c[1] - c[0]).scale(fx);
            let top = c[2] + (c[3] - c[2]).scale(fx);
            bottom + (top - bottom).scale(fy)
        })
    }

    /// Average of the four corner values of cell (i, j).
    pub fn cell_value(&self, i: usize, j: usize) -> Mat2 {
        (self.at(i, j) + self.at(i + 1, j) + self.at(i, j + 1) + self.at(i + 1, j + 1)).scale(0.25)
    }

    /// Entry (row, col) as a scalar field.
    pub fn component(&self, row: usize, col: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|m| m.0[row][col]).collect(),
        }
    }

    /// Assembles a field from its four entry fields.
    pub fn from_components(entries: [[&ScalarField; 2]; 2]) -> Self {
        let grid = entries[0][0].grid;
        let values = (0..grid.len())
            .map(|k| {
                Mat2::new(
                    entries[0][0].values[k],
                    entries[0][1].values[k],
                    entries[1][0].values[k],
                    entries[1][1].values[k],
                )
            })
            .collect();
        Self { grid, values }
    }
}

/// Centred difference of a node field along x (`axis` 0) or y (`axis` 1);
/// first-order one-sided at the grid boundary. Requires n ≥ 3.
pub(crate) fn partial(grid: &Grid2, values: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n();
    let h = grid.h();
    let stride = if axis == 0 { 1 } else { n };
    let mut out = vec![0.0; grid.len()];
    for j in 0..n {
        for i in 0..n {
            let k = if axis == 0 { i } else { j };
            let idx = grid.index(i, j);
            out[idx] = if k == 0 {
                (values[idx + stride] - values[idx]) / h
            } else if k == n - 1 {
                (values[idx] - values[idx - stride]) / h
            } else {
                (values[idx + stride] - values[idx - stride]) / (2.0 * h)
            };
        }
    }
    out
}

/// Finite-difference curl ∂₁A_{i2} − ∂₂A_{i1} of each matrix row.
pub fn curl_fd(field: &MatrixField) -> Result<[ScalarField; 2], FieldError> {
    let grid = field.grid;
    if grid.n() < 3 {
        return Err(FieldError::GridTooSmall {
            n: grid.n(),
            min: 3,
        });
    }
    let row_curl = |row: usize| {
        let second = field.component(row, 1);
        let first = field.component(row, 0);
        let d1 = partial(&grid, &second.values, 0);
        let d2 = partial(&grid, &first.values, 1);
        let values = d1.iter().zip(&d2).map(|(a, b)| a - b).collect();
        ScalarField { grid, values }
    };
    Ok([row_curl(0), row_curl(1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2 {
        Grid2::new(n, 1.0).unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = grid(5);
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.node(0, 0), Vec2::new(-1.0, -1.0));
        assert_eq!(g.node(4, 2), Vec2::new(1.0, 0.0));
        assert!(Grid2::new(1, 1.0).is_err());
    }

    #[test]
    fn curl_of_constant_field_vanishes() {
        let f = MatrixField::constant(grid(9), Mat2::new(1.0, 2.0, 3.0, 4.0));
        let [c1, c2] = curl_fd(&f).unwrap();
        assert_eq!(c1.max_abs(), 0.0);
        assert_eq!(c2.max_abs(), 0.0);
    }

    #[test]
    fn curl_of_linear_rows_is_exact() {
        let f = MatrixField::from_fn(grid(17), |p| Mat2::new(0.0, p.x, -0.5 * p.y, 0.5 * p.x));
        let [c1, c2] = curl_fd(&f).unwrap();
        for v in c1.values.iter().chain(&c2.values) {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curl_rejects_two_node_grid() {
        let f = MatrixField::constant(grid(2), Mat2::IDENTITY);
        assert!(matches!(curl_fd(&f), Err(FieldError::GridTooSmall { .. })));
    }

    #[test]
    fn bilinear_sampling_reproduces_bilinear_functions() {
        let g = grid(7);
        let f = ScalarField::from_fn(g, |p| 1.0 + 2.0 * p.x - p.y + 0.5 * p.x * p.y);
        for p in [
            Vec2::new(0.13, -0.71),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 0.4),
        ] {
            let exact = 1.0 + 2.0 * p.x - p.y + 0.5 * p.x * p.y;
            assert!((f.sample(p) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn crossings_hit_every_grid_line() {
        let g = grid(5);
        let mut out = Vec::new();
        g.crossings(Vec2::new(-0.9, -0.9), Vec2::new(0.9, 0.1), &mut out);
        // x lines at -0.5, 0, 0.5 and y lines at -0.5, 0.
        assert_eq!(out.len(), 5);
    }
}
