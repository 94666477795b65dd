//! The energy of a grid-sampled pair (A, S): elastic energy off the cores,
//! core energy, the curl-support condition, and the rescaled measures.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field_core::{curl_fd, dist_so2_sq, CoreSet, Grid2, MatrixField, Params, Vec2};
use crate::numeric::pairwise_sum;

/// Seed of the Monte Carlo union-area estimate.
pub const CORE_MC_SEED: u64 = 0x5eed_c0de;
/// Samples per overlapping cluster in the Monte Carlo union-area estimate.
pub const CORE_MC_SAMPLES: usize = 1_000_000;
/// Default curl tolerance as a multiple of τε/h.
pub const DEFAULT_CURL_TOL_FACTOR: f64 = 10.0;

/// Failures when building measures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("atom {index} has invalid weight {weight}")]
    InvalidWeight { index: usize, weight: f64 },
}

/// A finite sum of weighted Dirac masses.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WeightedPointMeasure {
    atoms: Vec<(Vec2, f64)>,
}

impl WeightedPointMeasure {
    pub fn new(atoms: Vec<(Vec2, f64)>) -> Result<Self, MeasureError> {
        if let Some((index, (_, weight))) = atoms
            .iter()
            .enumerate()
            .find(|(_, (p, w))| !(w.is_finite() && *w >= 0.0 && p.is_finite()))
        {
            return Err(MeasureError::InvalidWeight {
                index,
                weight: *weight,
            });
        }
        Ok(Self { atoms })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[(Vec2, f64)] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.atoms.iter().map(|a| a.1).collect::<Vec<_>>())
    }

    /// Mass of the atoms satisfying `keep`.
    pub fn mass_where(&self, keep: impl Fn(Vec2) -> bool) -> f64 {
        let w: Vec<f64> = self
            .atoms
            .iter()
            .filter(|a| keep(a.0))
            .map(|a| a.1)
            .collect();
        pairwise_sum(&w)
    }

    /// Mass of the open ball B(c, r).
    pub fn mass_in_ball(&self, c: Vec2, r: f64) -> f64 {
        self.mass_where(|p| p.dist(c) < r)
    }

    /// Mass of the half-open annulus {r ≤ |p − c| < 2r}.
    pub fn mass_in_annulus(&self, c: Vec2, r: f64) -> f64 {
        self.mass_where(|p| {
            let d = p.dist(c);
            d >= r && d < 2.0 * r
        })
    }

    /// Every weight multiplied by `factor` ≥ 0.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|(p, w)| (*p, w * factor)).collect(),
        }
    }

    /// Restriction to the atoms satisfying `keep`.
    pub fn restricted(&self, keep: impl Fn(Vec2) -> bool) -> Self {
        Self {
            atoms: self.atoms.iter().copied().filter(|a| keep(a.0)).collect(),
        }
    }

    /// The sum of two measures.
    pub fn plus(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Self { atoms }
    }
}

/// Elastic, core and total energy of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub core: f64,
    /// elastic + core, or +∞ when the curl leaves the cores.
    pub total: f64,
    pub support_violation: bool,
}

/// Normalisation of the core measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CoreMeasureNormalization {
    /// Lebesgue measure on B_{λε}(S) divided by λε.
    #[default]
    PerLambdaEpsilon,
    /// Lebesgue measure on B_{λε}(S) divided by λ²ε.
    PerLambdaSquaredEpsilon,
}

/// Marks every grid cell whose closed square meets a disk of radius 2λε
/// around a core.
pub fn excluded_cells(grid: &Grid2, cores: &CoreSet) -> Vec<bool> {
    let cells = grid.n() - 1;
    let h = grid.h();
    let l = grid.half_side();
    let r = cores.dilated_radius();
    let mut out = vec![false; cells * cells];
    let to_cell = |t: f64| ((t + l) / h).floor();
    for c in cores.centers() {
        let i0 = to_cell(c.x - r).max(0.0) as usize;
        let j0 = to_cell(c.y - r).max(0.0) as usize;
        let i1 = (to_cell(c.x + r).max(0.0) as usize).min(cells - 1);
        let j1 = (to_cell(c.y + r).max(0.0) as usize).min(cells - 1);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let lo = grid.node(i, j);
                let hi = grid.node(i + 1, j + 1);
                if crate::geometry::dist_to_box(*c, lo, hi) <= r {
                    out[j * cells + i] = true;
                }
            }
        }
    }
    out
}

/// Sum over rows of the grid of a per-cell quantity, reduced pairwise.
fn sum_cells(grid: &Grid2, cell: impl Fn(usize, usize) -> f64) -> f64 {
    let cells = grid.n() - 1;
    let rows: Vec<f64> = (0..cells)
        .map(|j| pairwise_sum(&(0..cells).map(|i| cell(i, j)).collect::<Vec<_>>()))
        .collect();
    pairwise_sum(&rows)
}

/// (1/τ) Σ h² dist²(A_cell, SO(2)) over cells disjoint from B_{λε}(S), with
/// A_cell the average of the four corner values.
pub fn elastic_energy(a: &MatrixField, cores: &CoreSet, params: &Params) -> f64 {
    let grid = a.grid;
    let excluded = excluded_cells(&grid, cores);
    let cells = grid.n() - 1;
    let h2 = grid.h() * grid.h();
    sum_cells(&grid, |i, j| {
        if excluded[j * cells + i] {
            0.0
        } else {
            h2 * dist_so2_sq(a.cell_value(i, j))
        }
    }) / params.tau
}

/// How the area of B_{λε}(S) was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum UnionAreaMethod {
    Exact,
    MonteCarlo {
        seed: u64,
        samples_per_cluster: usize,
    },
}

/// Groups disks of radius `r` into clusters of pairwise-overlapping chains.
fn overlap_clusters(centers: &[Vec2], r: f64) -> Vec<Vec<usize>> {
    let n = centers.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| centers[a].x.total_cmp(&centers[b].x));
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if centers[b].x - centers[a].x >= 2.0 * r {
                break;
            }
            if centers[a].dist(centers[b]) < 2.0 * r {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Area of the union of disks of radius 2λε around the cores.
pub fn dilated_core_area(cores: &CoreSet) -> (f64, UnionAreaMethod) {
    union_disk_area(cores.centers(), cores.dilated_radius())
}

/// Area of the union of equal disks of radius `r`: exact for isolated disks,
/// seeded Monte Carlo per overlapping cluster.
pub fn union_disk_area(centers: &[Vec2], r: f64) -> (f64, UnionAreaMethod) {
    let disk = std::f64::consts::PI * r * r;
    let clusters = overlap_clusters(centers, r);
    let mut method = UnionAreaMethod::Exact;
    let mut parts = Vec::with_capacity(clusters.len());
    for (index, cluster) in clusters.iter().enumerate() {
        if cluster.len() == 1 {
            parts.push(disk);
            continue;
        }
        method = UnionAreaMethod::MonteCarlo {
            seed: CORE_MC_SEED,
            samples_per_cluster: CORE_MC_SAMPLES,
        };
        let pts: Vec<Vec2> = cluster.iter().map(|&k| centers[k]).collect();
        let lo = Vec2::new(
            pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - r,
            pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - r,
        );
        let hi = Vec2::new(
            pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + r,
            pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + r,
        );
        let mut rng = crate::numeric::split_rng(CORE_MC_SEED, index as u64);
        let mut hits = 0usize;
        for _ in 0..CORE_MC_SAMPLES {
            let p = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if pts.iter().any(|c| c.dist(p) <= r) {
                hits += 1;
            }
        }
        parts.push((hi.x - lo.x) * (hi.y - lo.y) * hits as f64 / CORE_MC_SAMPLES as f64);
    }
    (pairwise_sum(&parts), method)
}

/// Core energy |B_{λε}(S)|/λ².
pub fn core_energy(cores: &CoreSet, params: &Params) -> f64 {
    dilated_core_area(cores).0 / (params.lambda * params.lambda)
}

/// Energy with the curl-support test; `curl_tol` defaults to 10τε/h.
pub fn total_energy(
    a: &MatrixField,
    cores: &CoreSet,
    params: &Params,
    curl_tol: Option<f64>,
) -> EnergyBreakdown {
    let grid = a.grid;
    let tol = curl_tol.unwrap_or(DEFAULT_CURL_TOL_FACTOR * params.burgers_quantum() / grid.h());
    let elastic = elastic_energy(a, cores, params);
    let core = core_energy(cores, params);
    let support_violation = match curl_fd(a) {
        Ok([c1, c2]) => (0..grid.n()).any(|j| {
            (0..grid.n()).any(|i| {
                let k = grid.index(i, j);
                c1.values[k].hypot(c2.values[k]) > tol && !cores.in_dilated(grid.node(i, j))
            })
        }),
        Err(_) => false,
    };
    EnergyBreakdown {
        elastic,
        core,
        total: if support_violation {
            f64::INFINITY
        } else {
            elastic + core
        },
        support_violation,
    }
}

/// Cell-centred measures: μ₁ = dist²(A, SO(2))/(τε) off the cores, μ₂ =
/// Lebesgue measure on B_{λε}(S) under the chosen normalisation, and μ = μ₁ + μ₂.
pub fn build_measures(
    a: &MatrixField,
    cores: &CoreSet,
    params: &Params,
    normalization: CoreMeasureNormalization,
) -> (
    WeightedPointMeasure,
    WeightedPointMeasure,
    WeightedPointMeasure,
) {
    let grid = a.grid;
    let cells = grid.n() - 1;
    let h2 = grid.h() * grid.h();
    let excluded = excluded_cells(&grid, cores);
    let core_weight = match normalization {
        CoreMeasureNormalization::PerLambdaEpsilon => h2 / params.core_radius(),
        CoreMeasureNormalization::PerLambdaSquaredEpsilon => {
            h2 / (params.lambda * params.core_radius())
        }
    };
    let mut mu1 = Vec::new();
    let mut mu2 = Vec::new();
    for j in 0..cells {
        for i in 0..cells {
            let c = grid.cell_center(i, j);
            if !excluded[j * cells + i] {
                let w = h2 * dist_so2_sq(a.cell_value(i, j)) / params.burgers_quantum();
                if w > 0.0 {
                    mu1.push((c, w));
                }
            }
            if cores.in_dilated(c) {
                mu2.push((c, core_weight));
            }
        }
    }
    let mu1 = WeightedPointMeasure { atoms: mu1 };
    let mu2 = WeightedPointMeasure { atoms: mu2 };
    let mu = mu1.plus(&mu2);
    (mu1, mu2, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::{rotation, Mat2};
    use std::f64::consts::PI;

    fn params() -> Params {
        Params::new(0.05, 0.1, 1.0, 1.0, 1.0, 0.2).unwrap()
    }

    fn grid(n: usize) -> Grid2 {
        Grid2::new(n, 1.0).unwrap()
    }

    #[test]
    fn rotations_have_zero_elastic_energy() {
        let p = params();
        let a = MatrixField::constant(grid(33), rotation(p.alpha));
        let s = CoreSet::new(vec![Vec2::new(0.1, 0.2)], &p).unwrap();
        assert_eq!(elastic_energy(&a, &s, &p), 0.0);
    }

    #[test]
    fn doubled_identity_energy_matches_area_times_two() {
        let p = params();
        let a = MatrixField::constant(grid(65), Mat2::IDENTITY.scale(2.0));
        let e = elastic_energy(&a, &CoreSet::empty(&p), &p);
        assert!((e - 8.0).abs() < 1e-10 * 8.0);
    }

    #[test]
    fn core_energy_examples() {
        let p = params();
        assert_eq!(core_energy(&CoreSet::empty(&p), &p), 0.0);
        let one = CoreSet::new(vec![Vec2::ZERO], &p).unwrap();
        assert!((core_energy(&one, &p) - 4.0 * PI * p.epsilon * p.epsilon).abs() < 1e-15);
        let two = CoreSet::new(vec![Vec2::new(0.0, -0.5), Vec2::new(0.0, 0.5)], &p).unwrap();
        assert!((core_energy(&two, &p) - 8.0 * PI * p.epsilon * p.epsilon).abs() < 1e-12);
    }

    #[test]
    fn overlapping_cores_use_seeded_monte_carlo() {
        let p = params();
        let r = 2.0 * p.core_radius();
        // Two disks at distance r overlap in a lens of area (2π/3 − √3/2) r².
        let s = CoreSet::new(vec![Vec2::ZERO, Vec2::new(r, 0.0)], &p).unwrap();
        let (area, method) = dilated_core_area(&s);
        assert!(matches!(
            method,
            UnionAreaMethod::MonteCarlo {
                seed: CORE_MC_SEED,
                ..
            }
        ));
        let lens = (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0) * r * r;
        let exact = 2.0 * PI * r * r - lens;
        assert!((area - exact).abs() < 0.005 * exact);
        assert_eq!(dilated_core_area(&s).0, area);
    }

    #[test]
    fn core_energy_is_monotone_under_adding_cores() {
        let p = params();
        let mut centers = Vec::new();
        let mut last = 0.0;
        for k in 0..6 {
            centers.push(Vec2::new(0.01 * k as f64, 0.13 * k as f64 - 0.4));
            let e = core_energy(&CoreSet::new(centers.clone(), &p).unwrap(), &p);
            assert!(e >= last);
            last = e;
        }
    }

    #[test]
    fn identity_has_empty_measures_and_zero_energy() {
        let p = params();
        let a = MatrixField::constant(grid(33), Mat2::IDENTITY);
        let e = total_energy(&a, &CoreSet::empty(&p), &p, None);
        assert_eq!(
            e,
            EnergyBreakdown {
                elastic: 0.0,
                core: 0.0,
                total: 0.0,
                support_violation: false
            }
        );
        let (m1, m2, m) = build_measures(&a, &CoreSet::empty(&p), &p, Default::default());
        assert_eq!((m1.mass(), m2.mass(), m.mass()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn core_measure_mass_matches_disk_area() {
        let p = params();
        let a = MatrixField::constant(grid(513), Mat2::IDENTITY);
        let s = CoreSet::new(vec![Vec2::new(0.01, -0.02)], &p).unwrap();
        let (_, m2, _) = build_measures(&a, &s, &p, CoreMeasureNormalization::PerLambdaEpsilon);
        let expected = 4.0 * PI * p.epsilon / p.lambda;
        assert!((m2.mass() - expected).abs() < 0.02 * expected);
    }

    #[test]
    fn elastic_measure_reproduces_elastic_energy() {
        let p = params();
        let a = MatrixField::from_fn(grid(129), |q| {
            Mat2::new(1.0 + q.x * q.y, 0.2 * q.x, 0.0, 1.0 - q.y)
        });
        let s = CoreSet::new(vec![Vec2::new(0.3, 0.1)], &p).unwrap();
        let (m1, _, _) = build_measures(&a, &s, &p, Default::default());
        let e = elastic_energy(&a, &s, &p);
        assert!((m1.mass() * p.epsilon - e).abs() < 1e-12 * e);
        // Additivity under a split of the domain along x = 0.
        let left = m1.mass_where(|q| q.x < 0.0);
        let right = m1.mass_where(|q| q.x >= 0.0);
        assert!((left + right - m1.mass()).abs() < 1e-12 * m1.mass());
    }

    #[test]
    fn breakdown_serializes_with_expected_keys() {
        let b = EnergyBreakdown {
            elastic: 1.0,
            core: 2.0,
            total: 3.0,
            support_violation: false,
        };
        let v: serde_json::Value = serde_json::to_value(b).unwrap();
        for key in ["elastic", "core", "total", "support_violation"] {
            assert!(v.get(key).is_some());
        }
    }
}
