use serde::Serialize;

use super::{hodge_split, recompose, solve_dirichlet, CompetitorError, HodgeSplit, RegionMask};
use crate::field_core::{dist_so2_sq, MatrixField, ScalarField};
use crate::numeric::pairwise_sum;

/// Ã = ∇ũ + F, where ũ is the discrete harmonic extension into O of the
/// Hodge potential u, and the norms entering Ĉ.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCompetitor {
    pub field: MatrixField,
    pub split: HodgeSplit,
    /// ũ¹, ũ².
    pub extended: [ScalarField; 2],
    pub summary: HarmonicSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicSummary {
    /// ‖A − Ã‖_{L²(O)}.
    pub difference: f64,
    /// ‖dist(A, SO(2))‖_{L²(O)}.
    pub dist_before: f64,
    /// ‖dist(Ã, SO(2))‖_{L²(O)}.
    pub dist_after: f64,
    /// difference / dist_before; zero when both vanish.
    pub c_hat: f64,
}

/// Replaces the Hodge potential of `a` by its harmonic extension in `mask`.
/// Each entry of the result is discretely harmonic at deep nodes of the mask
/// when `a` has zero staggered curl there.
pub fn harmonic_competitor(
    a: &MatrixField,
    mask: &RegionMask,
) -> Result<HarmonicCompetitor, CompetitorError> {
    if mask.grid() != a.grid {
        return Err(CompetitorError::GridMismatch {
            got: mask.grid().n(),
            expected: a.grid.n(),
        });
    }
    let split = hodge_split(a)?;
    let extended = [
        solve_dirichlet(mask, &split.potentials[0])?,
        solve_dirichlet(mask, &split.potentials[1])?,
    ];
    let field = recompose(&extended, &split.remainder);
    let summary = summarize(a, &field, mask);
    Ok(HarmonicCompetitor {
        field,
        split,
        extended,
        summary,
    })
}

fn summarize(a: &MatrixField, tilde: &MatrixField, mask: &RegionMask) -> HarmonicSummary {
    let grid = a.grid;
    let h2 = grid.h() * grid.h();
    let n = grid.n();
    let (mut diff, mut before, mut after) = (Vec::new(), Vec::new(), Vec::new());
    for j in 0..n {
        for i in 0..n {
            if mask.contains(i, j) {
                let k = grid.index(i, j);
                diff.push((a.values[k] - tilde.values[k]).frobenius_sq() * h2);
                before.push(dist_so2_sq(a.values[k]) * h2);
                after.push(dist_so2_sq(tilde.values[k]) * h2);
            }
        }
    }
    let difference = pairwise_sum(&diff).sqrt();
    let dist_before = pairwise_sum(&before).sqrt();
    let c_hat = if difference == 0.0 {
        0.0
    } else {
        difference / dist_before
    };
    HarmonicSummary {
        difference,
        dist_before,
        dist_after: pairwise_sum(&after).sqrt(),
        c_hat,
    }
}

/// Largest five-point stencil sum Σneighbours − 4·centre of any entry over
/// nodes whose (2·depth + 1)² neighbourhood is interior to `mask`.
pub fn max_entry_laplacian(field: &MatrixField, mask: &RegionMask, depth: usize) -> f64 {
    let grid = field.grid;
    let n = grid.n();
    let mut worst: f64 = 0.0;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            if !mask.is_deep(i, j, depth.max(1)) {
                continue;
            }
            let stencil =
                field.at(i + 1, j) + field.at(i - 1, j) + field.at(i, j + 1) + field.at(i, j - 1)
                    - field.at(i, j).scale(4.0);
            worst = worst.max(stencil.max_abs());
        }
    }
    worst
}

/// |Σ (det A − det A_h)·h²| over every cell with a corner in `mask` or
/// 4-adjacent to it, each determinant taken at the cell midpoint (mean of
/// the corners). The cells cover every node where forward-difference
/// competitors built on `mask` differ from `a`.
pub fn null_lagrangian_check(
    a: &MatrixField,
    a_h: &MatrixField,
    mask: &RegionMask,
) -> Result<f64, CompetitorError> {
    let grid = a.grid;
    for g in [a_h.grid, mask.grid()] {
        if g != grid {
            return Err(CompetitorError::GridMismatch {
                got: g.n(),
                expected: grid.n(),
            });
        }
    }
    let n = grid.n();
    let mut near = vec![false; grid.len()];
    for j in 0..n {
        for i in 0..n {
            if mask.contains(i, j) {
                near[grid.index(i, j)] = true;
                if i > 0 {
                    near[grid.index(i - 1, j)] = true;
                }
                if j > 0 {
                    near[grid.index(i, j - 1)] = true;
                }
                if i + 1 < n {
                    near[grid.index(i + 1, j)] = true;
                }
                if j + 1 < n {
                    near[grid.index(i, j + 1)] = true;
                }
            }
        }
    }
    let h2 = grid.h() * grid.h();
    let mut terms = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            if corners.iter().any(|&(p, q)| near[grid.index(p, q)]) {
                terms.push((a.cell_value(i, j).det() - a_h.cell_value(i, j).det()) * h2);
            }
        }
    }
    Ok(pairwise_sum(&terms).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::competitors::gradient_forward;
    use crate::field_core::{rotation, Grid2, Mat2, Vec2};

    fn grid(n: usize) -> Grid2 {
        Grid2::new(n, 1.0).unwrap()
    }

    #[test]
    fn constant_rotation_is_its_own_competitor() {
        let g = grid(65);
        let a = MatrixField::constant(g, rotation(0.3));
        let mask = RegionMask::annulus(g, Vec2::ZERO, 0.2, 0.6).unwrap();
        let c = harmonic_competitor(&a, &mask).unwrap();
        let worst = a
            .values
            .iter()
            .zip(&c.field.values)
            .fold(0.0f64, |m, (x, y)| m.max((*x - *y).max_abs()));
        assert!(worst < 1e-9, "{worst}");
        assert!(c.summary.difference < 1e-9);
        assert_eq!(null_lagrangian_check(&a, &a, &mask).unwrap(), 0.0);
    }

    #[test]
    fn competitor_is_harmonic_inside_the_mask() {
        let g = grid(97);
        let pot = |p: Vec2| {
            Vec2::new(
                p.x + 0.2 * (2.0 * p.y).sin() * p.x,
                p.y + 0.1 * (p.x * p.y).cos(),
            )
        };
        let u1 = ScalarField::from_fn(g, |p| pot(p).x);
        let u2 = ScalarField::from_fn(g, |p| pot(p).y);
        let [a, b] = gradient_forward(&u1);
        let [c, d] = gradient_forward(&u2);
        let field = MatrixField::from_components([[&a, &b], [&c, &d]]);
        let mask = RegionMask::annulus(g, Vec2::new(0.05, 0.0), 0.25, 0.7).unwrap();
        let comp = harmonic_competitor(&field, &mask).unwrap();
        assert!(max_entry_laplacian(&field, &mask, 2) > 1e-5);
        let lap = max_entry_laplacian(&comp.field, &mask, 2);
        assert!(lap <= 1e-6, "{lap}");
        let dist_bound = comp.summary.dist_before * (1.0 + comp.summary.c_hat);
        assert!(comp.summary.dist_after <= dist_bound * (1.0 + 1e-12));
    }

    #[test]
    fn determinant_integral_is_preserved_up_to_discretization() {
        let mut residuals = Vec::new();
        for n in [129, 257] {
            let g = grid(n);
            let pot = |p: Vec2| {
                Vec2::new(
                    p.x + 0.3 * (2.0 * p.y + p.x).sin(),
                    p.y + 0.2 * (p.x * p.x - p.y).cos(),
                )
            };
            let u1 = ScalarField::from_fn(g, |p| pot(p).x);
            let u2 = ScalarField::from_fn(g, |p| pot(p).y);
            let [a, b] = gradient_forward(&u1);
            let [c, d] = gradient_forward(&u2);
            let field = MatrixField::from_components([[&a, &b], [&c, &d]]);
            let mask = RegionMask::annulus(g, Vec2::ZERO, 0.3, 0.7).unwrap();
            let comp = harmonic_competitor(&field, &mask).unwrap();
            residuals.push(null_lagrangian_check(&field, &comp.field, &mask).unwrap());
        }
        assert!(residuals[1] * 2.0 <= residuals[0], "{residuals:?}");
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = MatrixField::constant(grid(33), Mat2::IDENTITY);
        let mask = RegionMask::annulus(grid(17), Vec2::ZERO, 0.2, 0.6).unwrap();
        assert!(matches!(
            harmonic_competitor(&a, &mask),
            Err(CompetitorError::GridMismatch { .. })
        ));
    }
}
