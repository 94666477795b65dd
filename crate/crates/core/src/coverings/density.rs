use std::f64::consts::PI;

use serde::Serialize;

use super::{
    ball_construction_step, merge_overlapping, perimeter_measure, Ball, BallFamily, CoveringError,
};
use crate::energies::{
    build_measures, CoreMeasureNormalization, WeightedPointMeasure, DEFAULT_CURL_TOL_FACTOR,
};
use crate::field_core::{curl_fd, CoreSet, MatrixField, Params, Vec2};
use crate::numeric::pairwise_sum;

/// Atoms per circle of the perimeter measure driving the growth radius.
const PERIMETER_ATOMS: usize = 32;

/// One row of the density trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRecord {
    pub k: usize,
    /// τ_k(B(p, 2R)).
    pub tau_k: f64,
    /// Balls of the k-th family inside the shell B(p, 2R) ∖ B(p, R).
    pub n_k: usize,
    pub sum_radii: f64,
    /// k·τ_k / (μ(B(p, 2R)) + τε·Σ_{i≤k} n_i), or 0 when the numerator vanishes.
    pub c_hat: f64,
}

/// Area of the intersection of two disks.
fn lens_area(a: &Ball, b: &Ball) -> f64 {
    let d = a.center.dist(b.center);
    let (r, s) = (a.radius, b.radius);
    if d >= r + s {
        return 0.0;
    }
    if d <= (r - s).abs() {
        let m = r.min(s);
        return PI * m * m;
    }
    let x = ((d * d + r * r - s * s) / (2.0 * d * r)).clamp(-1.0, 1.0);
    let y = ((d * d + s * s - r * r) / (2.0 * d * s)).clamp(-1.0, 1.0);
    let k = (-d + r + s) * (d + r - s) * (d - r + s) * (d + r + s);
    r * r * x.acos() + s * s * y.acos() - 0.5 * k.max(0.0).sqrt()
}

/// Cell-centred |curl| mass, keeping cells whose averaged curl exceeds
/// `10τε/h` so that discretisation noise along kinks is discarded.
fn curl_measure(a: &MatrixField, params: &Params) -> Result<WeightedPointMeasure, CoveringError> {
    let grid = a.grid;
    let [c1, c2] = curl_fd(a)?;
    let h = grid.h();
    let tol = DEFAULT_CURL_TOL_FACTOR * params.burgers_quantum() / h;
    let cells = grid.n() - 1;
    let mut atoms = Vec::new();
    for j in 0..cells {
        for i in 0..cells {
            let corners = [
                grid.index(i, j),
                grid.index(i + 1, j),
                grid.index(i, j + 1),
                grid.index(i + 1, j + 1),
            ];
            let v1 = 0.25 * corners.iter().map(|&c| c1.values[c]).sum::<f64>();
            let v2 = 0.25 * corners.iter().map(|&c| c2.values[c]).sum::<f64>();
            let m = v1.hypot(v2);
            if m > tol {
                atoms.push((grid.cell_center(i, j), m * h * h));
            }
        }
    }
    Ok(WeightedPointMeasure::new(atoms).expect("curl masses are positive and finite"))
}

fn tau_in(family: &BallFamily, curl: &WeightedPointMeasure, window: &Ball) -> f64 {
    let terms: Vec<f64> = family
        .balls
        .iter()
        .map(|b| {
            let density = curl.mass_in_ball(b.center, b.radius) / (PI * b.radius * b.radius);
            density * lens_area(b, window)
        })
        .collect();
    pairwise_sum(&terms)
}

/// Runs `steps` ball-construction steps starting from the merged core balls
/// B(s, λε) and records τ_k, the shell count, Σ radii and the running Ĉ.
#[allow(clippy::too_many_arguments)]
pub fn density_trace(
    a: &MatrixField,
    cores: &CoreSet,
    params: &Params,
    p: Vec2,
    big_r: f64,
    delta0: f64,
    steps: usize,
) -> Result<Vec<DensityRecord>, CoveringError> {
    if steps < 1 {
        return Err(CoveringError::NoSteps);
    }
    let l = a.grid.half_side();
    if big_r.is_nan() || big_r <= 0.0 || p.x.abs() + 3.0 * big_r > l || p.y.abs() + 3.0 * big_r > l
    {
        return Err(CoveringError::InvalidParameter {
            name: "R",
            value: big_r,
            range: "(0, inf) with B(p, 3R) inside the domain",
        });
    }
    let curl = curl_measure(a, params)?;
    let (_, _, mu) = build_measures(a, cores, params, CoreMeasureNormalization::default());
    let window = Ball {
        center: p,
        radius: 2.0 * big_r,
    };
    let mu_window = mu.mass_in_ball(p, 2.0 * big_r);
    let core_balls: Vec<Ball> = cores
        .centers()
        .iter()
        .map(|&c| Ball {
            center: c,
            radius: params.core_radius(),
        })
        .collect();
    let mut family = BallFamily::disjoint(merge_overlapping(&core_balls).0)?;
    let mut records = Vec::with_capacity(steps + 1);
    let mut n_total = 0usize;
    for k in 0..=steps {
        if k > 0 {
            let mu_perimeter = perimeter_measure(&family, PERIMETER_ATOMS);
            family = ball_construction_step(&family, &mu_perimeter, delta0)?.next;
        }
        let tau_k = tau_in(&family, &curl, &window);
        let n_k = family
            .balls
            .iter()
            .filter(|b| {
                let d = b.center.dist(p);
                d - b.radius >= big_r && d + b.radius <= 2.0 * big_r
            })
            .count();
        n_total += n_k;
        let numerator = k as f64 * tau_k;
        let c_hat = if numerator == 0.0 {
            0.0
        } else {
            numerator / (mu_window + params.burgers_quantum() * n_total as f64)
        };
        records.push(DensityRecord {
            k,
            tau_k,
            n_k,
            sum_radii: family.sum_radii(),
            c_hat,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::{Grid2, Mat2};

    #[test]
    fn lens_area_limits() {
        let a = Ball {
            center: Vec2::ZERO,
            radius: 1.0,
        };
        let far = Ball {
            center: Vec2::new(3.0, 0.0),
            radius: 1.0,
        };
        let inner = Ball {
            center: Vec2::new(0.2, 0.0),
            radius: 0.3,
        };
        assert_eq!(lens_area(&a, &far), 0.0);
        assert!((lens_area(&a, &inner) - PI * 0.09).abs() < 1e-15);
        // Two unit disks at distance 1: 2π/3 − √3/2.
        let half = Ball {
            center: Vec2::new(1.0, 0.0),
            radius: 1.0,
        };
        assert!((lens_area(&a, &half) - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn identity_field_without_cores_has_zero_trace() {
        let params = Params::new(1.0 / 32.0, 1.0 / 16.0, 1.0, 1.0, 1.0, 0.2).unwrap();
        let a = MatrixField::constant(Grid2::new(65, 1.0).unwrap(), Mat2::IDENTITY);
        let recs = density_trace(
            &a,
            &CoreSet::empty(&params),
            &params,
            Vec2::ZERO,
            0.25,
            1.0 / 64.0,
            3,
        )
        .unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs
            .iter()
            .all(|r| r.tau_k == 0.0 && r.c_hat == 0.0 && r.n_k == 0));
    }

    #[test]
    fn rejects_zero_steps_and_large_windows() {
        let params = Params::new(1.0 / 32.0, 1.0 / 16.0, 1.0, 1.0, 1.0, 0.2).unwrap();
        let a = MatrixField::constant(Grid2::new(17, 1.0).unwrap(), Mat2::IDENTITY);
        let s = CoreSet::empty(&params);
        assert_eq!(
            density_trace(&a, &s, &params, Vec2::ZERO, 0.25, 0.1, 0),
            Err(CoveringError::NoSteps)
        );
        assert!(density_trace(&a, &s, &params, Vec2::ZERO, 0.4, 0.1, 1).is_err());
    }
}
