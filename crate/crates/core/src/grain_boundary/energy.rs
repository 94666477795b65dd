use serde::Serialize;

use super::{
    compatible_epsilon, compose_tile, DyadicFrame, GrainBoundaryError, PiecewiseAffineMap,
};
use crate::energies::core_energy;
use crate::field_core::{dist_so2_sq, CoreSet, Params, Vec2};
use crate::geometry::{
    clip_convex, convex_overlap_area, dist_to_box, inscribed_polygon, signed_area,
};
use crate::numeric::pairwise_sum;

/// Sides of the polygon approximating each excised disk.
const DISK_SIDES: usize = 64;

/// Area of `tri` covered by the union of the given convex polygons, by
/// inclusion–exclusion over subsets.
fn covered_area(tri: &[Vec2], disks: &[Vec<Vec2>]) -> f64 {
    let m = disks.len();
    let mut total = 0.0;
    for mask in 1u32..(1u32 << m) {
        let mut region = tri.to_vec();
        for (k, disk) in disks.iter().enumerate() {
            if mask & (1 << k) != 0 {
                region = clip_convex(&region, disk);
                if region.len() < 3 {
                    break;
                }
            }
        }
        let area = if region.len() < 3 {
            0.0
        } else {
            signed_area(&region).max(0.0)
        };
        if mask.count_ones() % 2 == 1 {
            total += area;
        } else {
            total -= area;
        }
    }
    total
}

/// Elastic energy (1/τ) Σ |T ∖ B_{λε}(S)| dist²(∇u|_T, SO(2)) of a
/// piecewise-affine map, with each excised disk of radius 2λε replaced by
/// its inscribed 64-gon.
pub fn gb_elastic_energy(
    u: &PiecewiseAffineMap,
    cores: &CoreSet,
    params: &Params,
) -> Result<f64, GrainBoundaryError> {
    let reach = cores.dilated_radius();
    let mut centers: Vec<Vec2> = cores.centers().to_vec();
    centers.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
    let polygons: Vec<Vec<Vec2>> = centers
        .iter()
        .map(|c| inscribed_polygon(*c, reach, DISK_SIDES))
        .collect();
    let mut terms = Vec::with_capacity(u.triangles().len());
    for (t, tri) in u.triangles().iter().enumerate() {
        let area = u.area(t);
        if area <= 0.0 {
            return Err(GrainBoundaryError::DegenerateTriangle { index: t });
        }
        let density = dist_so2_sq(tri.gradient);
        if density == 0.0 {
            continue;
        }
        let corners = u.corners(t);
        let lo = Vec2::new(
            corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
            corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
        );
        let hi = Vec2::new(
            corners
                .iter()
                .map(|p| p.x)
                .fold(f64::NEG_INFINITY, f64::max),
            corners
                .iter()
                .map(|p| p.y)
                .fold(f64::NEG_INFINITY, f64::max),
        );
        let first = centers.partition_point(|c| c.y < lo.y - reach);
        let near: Vec<Vec<Vec2>> = (first..centers.len())
            .take_while(|&k| centers[k].y <= hi.y + reach)
            .filter(|&k| dist_to_box(centers[k], lo, hi) < reach)
            .map(|k| polygons[k].clone())
            .collect();
        let covered = match near.len() {
            0 => 0.0,
            1 => convex_overlap_area(&corners, &near[0]),
            _ => covered_area(&corners, &near),
        };
        terms.push((area - covered).max(0.0) * density);
    }
    Ok(pairwise_sum(&terms) / params.tau)
}

/// One row of the energy-scaling table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub alpha: f64,
    pub epsilon: f64,
    pub tiles: usize,
    pub e_el: f64,
    pub e_core: f64,
    pub f: f64,
    /// F/(τεαL(|log₂ α| + 1)).
    pub ratio: f64,
}

/// Builds the grain boundary for each angle with the largest compatible
/// ε ≤ `epsilon_max` and tabulates its energies.
pub fn gb_scan(
    alphas: &[f64],
    base: &Params,
    epsilon_max: f64,
) -> Result<Vec<ScanRow>, GrainBoundaryError> {
    if alphas.is_empty() {
        return Err(GrainBoundaryError::EmptyAlphaList);
    }
    alphas
        .iter()
        .map(|&alpha| {
            let epsilon = compatible_epsilon(alpha, base.half_side, base.tau, epsilon_max);
            let params = base.with_epsilon_alpha(epsilon, alpha);
            params.validate()?;
            let frame = DyadicFrame::new(&params)?;
            let (u, cores) = compose_tile(&params)?;
            let e_el = gb_elastic_energy(&u, &cores, &params)?;
            let e_core = core_energy(&cores, &params);
            let f = e_el + e_core;
            let scale =
                params.tau * epsilon * alpha * params.half_side * (alpha.log2().abs() + 1.0);
            Ok(ScanRow {
                alpha,
                epsilon,
                tiles: frame.tiles,
                e_el,
                e_core,
                f,
                ratio: f / scale,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::rotation;
    use crate::grain_boundary::{build_v1, tile_mesh};

    fn params(alpha: f64, eps_max: f64) -> Params {
        let eps = compatible_epsilon(alpha, 1.0, 1.0, eps_max);
        Params::new(eps, alpha, 1.0, 1.0, 1.0, 0.2).unwrap()
    }

    #[test]
    fn global_rotation_has_zero_energy() {
        let p = params(1.0 / 16.0, 1.0 / 32.0);
        let nodes = vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ];
        let r = rotation(p.alpha);
        let values = nodes.iter().map(|q| r.mul_vec(*q)).collect();
        let u = PiecewiseAffineMap::from_vertex_values(nodes, values, vec![[0, 1, 2], [0, 2, 3]])
            .unwrap();
        let cores = CoreSet::new(vec![Vec2::ZERO], &p).unwrap();
        assert!(gb_elastic_energy(&u, &cores, &p).unwrap() < 1e-28);
    }

    #[test]
    fn covered_area_matches_single_disk_and_overlapping_pair() {
        let square = vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ];
        let a = inscribed_polygon(Vec2::new(-0.2, 0.0), 0.5, 64);
        let b = inscribed_polygon(Vec2::new(0.2, 0.0), 0.5, 64);
        let single = covered_area(&square, std::slice::from_ref(&a));
        assert!((single - signed_area(&a)).abs() < 1e-14);
        let both = covered_area(&square, &[a.clone(), b.clone()]);
        let lens = convex_overlap_area(&a, &b);
        assert!((both - (2.0 * signed_area(&a) - lens)).abs() < 1e-13);
    }

    #[test]
    fn energy_is_frame_indifferent() {
        let p = params(1.0 / 16.0, 1.0 / 64.0);
        let (u, cores) = compose_tile(&p).unwrap();
        let e = gb_elastic_energy(&u, &cores, &p).unwrap();
        let e_rot = gb_elastic_energy(&u.post_compose_linear(rotation(0.7)), &cores, &p).unwrap();
        assert!(e > 0.0);
        assert!((e - e_rot).abs() < 1e-10);
    }

    #[test]
    fn single_tile_energy_is_order_epsilon_squared_log() {
        // Energy of one tile outside its core, in units of ε²(|log α| + 1).
        let mut ratios = Vec::new();
        for alpha in [0.125, 1.0 / 32.0, 1.0 / 256.0] {
            let p = params(alpha, 1.0 / 1024.0);
            let v1 = build_v1(&p).unwrap();
            let frame = DyadicFrame::new(&p).unwrap();
            let mesh = tile_mesh(&frame);
            let e: f64 = v1
                .triangles()
                .iter()
                .enumerate()
                .filter(|(t, _)| mesh.ring[*t] >= 2)
                .map(|(t, tri)| v1.area(t) * dist_so2_sq(tri.gradient))
                .sum();
            ratios.push(e / (p.epsilon * p.epsilon * (alpha.ln().abs() + 1.0)));
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 4.0, "{ratios:?}");
    }

    #[test]
    fn energy_scales_linearly_with_epsilon() {
        let alpha = 1.0 / 32.0;
        let f = |eps_max: f64| {
            let p = params(alpha, eps_max);
            let (u, cores) = compose_tile(&p).unwrap();
            let e = gb_elastic_energy(&u, &cores, &p).unwrap() + core_energy(&cores, &p);
            e / p.epsilon
        };
        let (a, b) = (f(1.0 / 256.0), f(1.0 / 512.0));
        assert!((a / b - 1.0).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn scan_rejects_empty_angle_list() {
        let p = params(0.125, 1.0 / 64.0);
        assert_eq!(
            gb_scan(&[], &p, 1.0 / 64.0),
            Err(GrainBoundaryError::EmptyAlphaList)
        );
    }
}
