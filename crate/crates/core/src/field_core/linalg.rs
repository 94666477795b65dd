use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Counter-clockwise quarter turn (−y, x).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Point at parameter `t` on the segment from `self` to `o`.
    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        Vec2::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// A 2×2 matrix stored row-major; row `i` is the `i`-th component field.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    /// Matrix with the given rows.
    pub fn from_rows(r1: Vec2, r2: Vec2) -> Self {
        Mat2::new(r1.x, r1.y, r2.x, r2.y)
    }

    /// Matrix with the given columns.
    pub fn from_cols(c1: Vec2, c2: Vec2) -> Self {
        Mat2::new(c1.x, c2.x, c1.y, c2.y)
    }

    pub fn row(&self, i: usize) -> Vec2 {
        Vec2::new(self.0[i][0], self.0[i][1])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(
            self.0[1][1] / d,
            -self.0[0][1] / d,
            -self.0[1][0] / d,
            self.0[0][0] / d,
        ))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.0[0][0] * v.x + self.0[0][1] * v.y,
            self.0[1][0] * v.x + self.0[1][1] * v.y,
        )
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let m = self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Counter-clockwise rotation by `angle` radians.
pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Squared Frobenius distance from `m` to SO(2).
///
/// Splits `m` into its conformal part pI + qJ and anti-conformal part
/// rK + sL; the nearest rotation is the normalised conformal part, so the
/// distance is 2(√(p²+q²) − 1)² + 2(r² + s²).
pub fn dist_so2_sq(m: Mat2) -> f64 {
    let [[a, b], [c, d]] = m.0;
    let p = 0.5 * (a + d);
    let q = 0.5 * (c - b);
    let r = 0.5 * (a - d);
    let s = 0.5 * (b + c);
    let radial = p.hypot(q) - 1.0;
    2.0 * (radial * radial + r * r + s * s)
}

/// Frobenius distance from `m` to SO(2).
pub fn dist_so2(m: Mat2) -> f64 {
    dist_so2_sq(m).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Brute-force oracle: minimum over a uniform angle grid of |m − R_θ|.
    fn brute_force_dist(m: Mat2, samples: usize) -> f64 {
        (0..samples)
            .map(|k| (m - rotation(2.0 * PI * k as f64 / samples as f64)).frobenius())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotation(0.0), Mat2::IDENTITY);
        let quarter = rotation(FRAC_PI_2);
        let j = Mat2::new(0.0, -1.0, 1.0, 0.0);
        assert!((quarter - j).max_abs() < 1e-15);
        let back = rotation(0.3) * rotation(-0.3);
        assert!((back - Mat2::IDENTITY).max_abs() < 1e-14);
    }

    #[test]
    fn distance_examples_against_angle_grid() {
        assert_eq!(dist_so2(Mat2::IDENTITY), 0.0);
        let two = Mat2::IDENTITY.scale(2.0);
        let grid = brute_force_dist(two, 1_000_000);
        assert!((dist_so2(two) - grid).abs() < 1e-9);
        assert!((dist_so2(two) - 2f64.sqrt()).abs() < 1e-15);
        let reflection = Mat2::new(1.0, 0.0, 0.0, -1.0);
        let grid = brute_force_dist(reflection, 1_000_000);
        assert!((dist_so2(reflection) - grid).abs() < 1e-9);
        assert!((dist_so2(reflection) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_matrix_is_at_distance_sqrt_two() {
        assert!((dist_so2(Mat2::ZERO) - 2f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rotations_are_orthogonal(theta in -100.0f64..100.0) {
            let r = rotation(theta);
            prop_assert!((r.transpose() * r - Mat2::IDENTITY).max_abs() < 1e-12);
            prop_assert!((r.det() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn distance_is_frame_indifferent(
            a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0,
            theta in -10.0f64..10.0,
        ) {
            let m = Mat2::new(a, b, c, d);
            let left = dist_so2(rotation(theta) * m);
            let right = dist_so2(m * rotation(theta));
            prop_assert!((left - dist_so2(m)).abs() < 1e-10);
            prop_assert!((right - dist_so2(m)).abs() < 1e-10);
        }

        #[test]
        fn distance_matches_angle_grid(
            a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0,
        ) {
            let m = Mat2::new(a, b, c, d);
            let grid = brute_force_dist(m, 20_000);
            prop_assert!(dist_so2(m) <= grid + 1e-12);
            prop_assert!(grid - dist_so2(m) < 1e-6 * (1.0 + m.frobenius()));
        }
    }
}
