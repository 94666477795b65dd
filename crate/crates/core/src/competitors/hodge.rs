use serde::Serialize;

use super::{solve_poisson, CompetitorError, RegionMask, SolveStats, SolverOptions};
use crate::field_core::{Mat2, MatrixField, ScalarField};

/// Pointwise bound on the discrete divergence of the Hodge remainder that
/// the Poisson solves target.
pub const HODGE_DIVERGENCE_TARGET: f64 = 5e-9;

/// A = ∇u + F with u = 0 on the grid boundary and div F = 0 at interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeSplit {
    /// u¹, u²: one potential per matrix row.
    pub potentials: [ScalarField; 2],
    pub remainder: MatrixField,
    pub stats: [HodgeStats; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HodgeStats {
    pub iterations: usize,
    /// Max-norm of the Poisson residual divided by h², the divergence defect.
    pub divergence_defect: f64,
}

/// Forward differences (∂ₓ⁺u, ∂ᵧ⁺u); the last column or row uses the
/// backward difference.
pub fn gradient_forward(u: &ScalarField) -> [ScalarField; 2] {
    let grid = u.grid;
    let (n, h) = (grid.n(), grid.h());
    let diff = |axis: usize| {
        let mut values = vec![0.0; grid.len()];
        for j in 0..n {
            for i in 0..n {
                let (k, idx) = (if axis == 0 { i } else { j }, grid.index(i, j));
                let stride = if axis == 0 { 1 } else { n };
                values[idx] = if k + 1 < n {
                    (u.values[idx + stride] - u.values[idx]) / h
                } else {
                    (u.values[idx] - u.values[idx - stride]) / h
                };
            }
        }
        ScalarField { grid, values }
    };
    [diff(0), diff(1)]
}

/// Backward-difference divergence ∂ₓ⁻vₓ + ∂ᵧ⁻v_y at interior nodes, zero on
/// the grid boundary. At interior nodes the composition with
/// [`gradient_forward`] is the five-point Laplacian.
pub fn divergence_backward(vx: &ScalarField, vy: &ScalarField) -> ScalarField {
    let grid = vx.grid;
    let (n, h) = (grid.n(), grid.h());
    let mut values = vec![0.0; grid.len()];
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = grid.index(i, j);
            values[k] =
                (vx.values[k] - vx.values[k - 1]) / h + (vy.values[k] - vy.values[k - n]) / h;
        }
    }
    ScalarField { grid, values }
}

/// Splits each row of A into the forward gradient of a potential vanishing
/// on the grid boundary and a remainder with zero backward divergence.
pub fn hodge_split(a: &MatrixField) -> Result<HodgeSplit, CompetitorError> {
    let grid = a.grid;
    let mask = RegionMask::from_fn(grid, |_| true)?;
    let opts = SolverOptions {
        rel_tol: 0.0,
        abs_tol: HODGE_DIVERGENCE_TARGET * grid.h() * grid.h(),
        max_iter: None,
    };
    let zero = ScalarField::zeros(grid);
    let mut potentials = Vec::with_capacity(2);
    let mut stats = Vec::with_capacity(2);
    for row in 0..2 {
        let div = divergence_backward(&a.component(row, 0), &a.component(row, 1));
        let (u, s): (ScalarField, SolveStats) = solve_poisson(&mask, &zero, Some(&div), opts)?;
        potentials.push(u);
        stats.push(HodgeStats {
            iterations: s.iterations,
            divergence_defect: s.residual / (grid.h() * grid.h()),
        });
    }
    let [g1, g2] = [
        gradient_forward(&potentials[0]),
        gradient_forward(&potentials[1]),
    ];
    let remainder = MatrixField {
        grid,
        values: a
            .values
            .iter()
            .enumerate()
            .map(|(k, m)| {
                *m - Mat2::new(
                    g1[0].values[k],
                    g1[1].values[k],
                    g2[0].values[k],
                    g2[1].values[k],
                )
            })
            .collect(),
    };
    let [u1, u2]: [ScalarField; 2] = potentials.try_into().expect("two rows");
    Ok(HodgeSplit {
        potentials: [u1, u2],
        remainder,
        stats: [stats[0], stats[1]],
    })
}

/// ∇⁺u + F for row potentials `u` and remainder `f`.
pub fn recompose(u: &[ScalarField; 2], f: &MatrixField) -> MatrixField {
    let [g1, g2] = [gradient_forward(&u[0]), gradient_forward(&u[1])];
    MatrixField {
        grid: f.grid,
        values: f
            .values
            .iter()
            .enumerate()
            .map(|(k, m)| {
                Mat2::new(
                    g1[0].values[k],
                    g1[1].values[k],
                    g2[0].values[k],
                    g2[1].values[k],
                ) + *m
            })
            .collect(),
    }
}
