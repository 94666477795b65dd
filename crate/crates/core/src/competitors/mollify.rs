use serde::Serialize;

use super::CompetitorError;
use crate::energies::union_disk_area;
use crate::field_core::{curl_fd, CoreSet, Mat2, MatrixField, Params};
use crate::numeric::pairwise_sum;

/// Minimal number of grid cells per mollifier radius λε.
pub const MOLLIFIER_MIN_CELLS: f64 = 8.0;

/// Discrete one-dimensional quartic bump (1 − (s/r)²)² on the taps
/// s = kh with |s| < r, normalized to sum 1. Index `K + k` holds tap `k`.
pub fn quartic_weights(radius: f64, h: f64) -> Vec<f64> {
    let mut k_max = (radius / h).floor() as i64;
    if k_max as f64 * h >= radius {
        k_max -= 1;
    }
    let raw: Vec<f64> = (-k_max..=k_max)
        .map(|k| {
            let t = k as f64 * h / radius;
            (1.0 - t * t).powi(2)
        })
        .collect();
    let total = pairwise_sum(&raw);
    raw.iter().map(|w| w / total).collect()
}

/// Ã = (1 − ζ)A + ζ(A ⋆ ρ_{λε}) with ζ = clamp((2λε − dist(x, S))/(λε), 0, 1)
/// and ρ the tensor-product quartic bump of radius λε. Ã equals A outside
/// B_{2λε}(S) and the mollification on B_{λε}(S).
pub fn mollified_competitor(
    a: &MatrixField,
    cores: &CoreSet,
    params: &Params,
) -> Result<MatrixField, CompetitorError> {
    let grid = a.grid;
    let (n, h) = (grid.n(), grid.h());
    let r = params.core_radius();
    if h > r / MOLLIFIER_MIN_CELLS {
        return Err(CompetitorError::GridTooCoarse {
            h,
            required: r / MOLLIFIER_MIN_CELLS,
        });
    }
    let weights = quartic_weights(r, h);
    let half = (weights.len() / 2) as i64;
    let index_of = |t: f64| ((t + grid.half_side()) / h).round() as i64;
    let mut out = a.values.clone();
    let mut done = vec![false; grid.len()];
    for (index, c) in cores.centers().iter().enumerate() {
        let (lo_i, hi_i) = (index_of(c.x - 2.0 * r) - 1, index_of(c.x + 2.0 * r) + 1);
        let (lo_j, hi_j) = (index_of(c.y - 2.0 * r) - 1, index_of(c.y + 2.0 * r) + 1);
        if lo_i - half < 0 || lo_j - half < 0 || hi_i + half >= n as i64 || hi_j + half >= n as i64
        {
            return Err(CompetitorError::SupportOutsideGrid { index });
        }
        for j in lo_j as usize..=hi_j as usize {
            for i in lo_i as usize..=hi_i as usize {
                let k = grid.index(i, j);
                if done[k] {
                    continue;
                }
                let p = grid.node(i, j);
                let d = cores
                    .centers()
                    .iter()
                    .map(|s| s.dist(p))
                    .fold(f64::INFINITY, f64::min);
                let zeta = ((2.0 * r - d) / r).clamp(0.0, 1.0);
                if zeta == 0.0 {
                    continue;
                }
                done[k] = true;
                let mut avg = Mat2::ZERO;
                for (b, wb) in weights.iter().enumerate() {
                    let jj = (j as i64 + b as i64 - half) as usize;
                    let mut row = Mat2::ZERO;
                    for (q, wq) in weights.iter().enumerate() {
                        let ii = (i as i64 + q as i64 - half) as usize;
                        row = row + a.values[grid.index(ii, jj)].scale(*wq);
                    }
                    avg = avg + row.scale(*wb);
                }
                out[k] = a.values[k].scale(1.0 - zeta) + avg.scale(zeta);
            }
        }
    }
    Ok(MatrixField { grid, values: out })
}

/// Curl diagnostics of a mollified competitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollifiedCurlReport {
    /// Largest |curl| at nodes of B_{3λε}(S).
    pub sup_curl: f64,
    /// sup_curl · λε.
    pub c_hat: f64,
    /// Largest |curl| at nodes outside B_{3λε}(S).
    pub max_outside: f64,
    /// max_outside ≤ curl_tol, checked at every node.
    pub support_ok: bool,
    /// Σ |curl|·h² over nodes of B_{3λε}(S).
    pub total_variation: f64,
    /// μ₂-mass |B_{λε}(S̃)|/(λ²ε) of S̃ = B_{3λε}(S).
    pub mu2_mass: f64,
    /// total_variation / mu2_mass.
    pub tv_ratio: f64,
}

/// Node-exhaustive curl report for `field` against the cores.
pub fn mollified_curl_report(
    field: &MatrixField,
    cores: &CoreSet,
    params: &Params,
    curl_tol: f64,
) -> Result<MollifiedCurlReport, CompetitorError> {
    let grid = field.grid;
    let [c1, c2] = curl_fd(field)?;
    let r = params.core_radius();
    let h2 = grid.h() * grid.h();
    let (mut sup_curl, mut max_outside) = (0.0f64, 0.0f64);
    let mut tv = Vec::new();
    let n = grid.n();
    for j in 0..n {
        for i in 0..n {
            let k = grid.index(i, j);
            let mag = c1.values[k].hypot(c2.values[k]);
            let p = grid.node(i, j);
            if cores.centers().iter().any(|s| s.dist(p) < 3.0 * r) {
                sup_curl = sup_curl.max(mag);
                tv.push(mag * h2);
            } else {
                max_outside = max_outside.max(mag);
            }
        }
    }
    let total_variation = pairwise_sum(&tv);
    let mu2_mass = union_disk_area(cores.centers(), 4.0 * r).0
        / (params.lambda * params.lambda * params.epsilon);
    Ok(MollifiedCurlReport {
        sup_curl,
        c_hat: sup_curl * r,
        max_outside,
        support_ok: max_outside <= curl_tol,
        total_variation,
        mu2_mass,
        tv_ratio: if mu2_mass > 0.0 {
            total_variation / mu2_mass
        } else {
            0.0
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::{Grid2, Vec2};

    fn params(eps: f64) -> Params {
        Params::new(eps, 1.0 / 16.0, 1.0, 1.0, 1.0, 0.2).unwrap()
    }

    fn smooth_gradient(p: Vec2) -> Mat2 {
        // Gradient of (sin x·cosh y, x·y + y³).
        Mat2::new(
            p.x.cos() * p.y.cosh(),
            p.x.sin() * p.y.sinh(),
            p.y,
            p.x + 3.0 * p.y * p.y,
        )
    }

    #[test]
    fn weights_are_symmetric_and_normalized() {
        let w = quartic_weights(0.1, 0.01);
        assert_eq!(w.len(), 19);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for k in 0..w.len() {
            assert_eq!(w[k], w[w.len() - 1 - k]);
        }
    }

    #[test]
    fn affine_fields_are_unchanged() {
        let p = params(1.0 / 16.0);
        let g = Grid2::new(257, 1.0).unwrap();
        let cores = CoreSet::new(vec![Vec2::new(0.0, 0.1), Vec2::new(0.1, -0.4)], &p).unwrap();
        let a = MatrixField::from_fn(g, |x| Mat2::new(1.0 + x.x, 0.5 * x.y, -x.y, 2.0 - x.x));
        let m = mollified_competitor(&a, &cores, &p).unwrap();
        let worst = a
            .values
            .iter()
            .zip(&m.values)
            .fold(0.0f64, |w, (x, y)| w.max((*x - *y).max_abs()));
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn curl_free_fields_stay_curl_free() {
        let p = params(1.0 / 16.0);
        let g = Grid2::new(257, 1.0).unwrap();
        let cores = CoreSet::new(vec![Vec2::new(0.0, 0.0)], &p).unwrap();
        let a = MatrixField::from_fn(g, smooth_gradient);
        let m = mollified_competitor(&a, &cores, &p).unwrap();
        let [c1, c2] = curl_fd(&m).unwrap();
        let worst = c1.max_abs().max(c2.max_abs());
        let [a1, a2] = curl_fd(&a).unwrap();
        // Centred differences of a sampled gradient already carry O(h²) curl.
        let tol = 10.0 * a1.max_abs().max(a2.max_abs()) + 1e-3;
        assert!(worst <= tol, "{worst} > {tol}");
    }

    #[test]
    fn blend_regions_and_sup_bound() {
        let p = params(1.0 / 16.0);
        let g = Grid2::new(257, 1.0).unwrap();
        let core = Vec2::new(0.0, 0.05);
        let cores = CoreSet::new(vec![core], &p).unwrap();
        let a = MatrixField::from_fn(g, |x| {
            let q = x - core;
            let t = q.y.atan2(q.x);
            Mat2::new(1.0 + 0.2 * t.sin(), 0.1 * t.cos(), 0.05 * t, 1.0)
        });
        let m = mollified_competitor(&a, &cores, &p).unwrap();
        let r = p.core_radius();
        let sup_a = a.values.iter().fold(0.0f64, |s, v| s.max(v.max_abs()));
        let sup_m = m.values.iter().fold(0.0f64, |s, v| s.max(v.max_abs()));
        assert!(sup_m <= sup_a + 1e-12);
        let w = quartic_weights(r, g.h());
        let half = w.len() / 2;
        for j in 0..g.n() {
            for i in 0..g.n() {
                let x = g.node(i, j);
                let k = g.index(i, j);
                if x.dist(core) >= 2.0 * r {
                    assert_eq!(m.values[k], a.values[k]);
                } else if x.dist(core) <= r {
                    let mut avg = Mat2::ZERO;
                    for (b, wb) in w.iter().enumerate() {
                        let mut row = Mat2::ZERO;
                        for (q, wq) in w.iter().enumerate() {
                            row = row + a.at(i + q - half, j + b - half).scale(*wq);
                        }
                        avg = avg + row.scale(*wb);
                    }
                    assert_eq!(m.values[k], avg);
                }
            }
        }
    }

    #[test]
    fn coarse_grids_and_edge_cores_are_rejected() {
        let p = params(1.0 / 16.0);
        let coarse = Grid2::new(65, 1.0).unwrap();
        let cores = CoreSet::new(vec![Vec2::ZERO], &p).unwrap();
        let a = MatrixField::constant(coarse, Mat2::IDENTITY);
        assert!(matches!(
            mollified_competitor(&a, &cores, &p),
            Err(CompetitorError::GridTooCoarse { .. })
        ));
        let fine = Grid2::new(257, 1.0).unwrap();
        let edge = CoreSet::new(vec![Vec2::new(0.0, 0.95)], &p).unwrap();
        let a = MatrixField::constant(fine, Mat2::IDENTITY);
        assert_eq!(
            mollified_competitor(&a, &edge, &p),
            Err(CompetitorError::SupportOutsideGrid { index: 0 })
        );
    }
}
