use serde::Serialize;

use super::{CompetitorError, RegionMask};
use crate::field_core::ScalarField;
use crate::numeric::pairwise_sum;

const KNOWN: u32 = u32::MAX;
/// Iterations between recomputations of the true residual.
const RESIDUAL_REFRESH: usize = 64;
/// Block length of the blocked dot product.
const DOT_BLOCK: usize = 1024;

/// Stopping rule ‖r‖∞ ≤ max(rel_tol·‖b‖∞, abs_tol) for the scaled system
/// 4uᵢ − Σ neighbours = h²·(−f)ᵢ + boundary terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Defaults to 10·n².
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_iter: None,
        }
    }
}

/// Outcome of a converged solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Max-norm of the recomputed residual.
    pub residual: f64,
    pub target: f64,
    pub unknowns: usize,
}

/// Discrete harmonic extension: the five-point Laplacian vanishes at every
/// interior node of `mask`, all other nodes copy `boundary`.
pub fn solve_dirichlet(
    mask: &RegionMask,
    boundary: &ScalarField,
) -> Result<ScalarField, CompetitorError> {
    solve_dirichlet_with(mask, boundary, SolverOptions::default()).map(|(u, _)| u)
}

pub fn solve_dirichlet_with(
    mask: &RegionMask,
    boundary: &ScalarField,
    opts: SolverOptions,
) -> Result<(ScalarField, SolveStats), CompetitorError> {
    solve_poisson(mask, boundary, None, opts)
}

/// Solves Δₕu = f at the interior nodes of `mask` with u = `boundary`
/// elsewhere, by conjugate gradients preconditioned with symmetric SOR.
pub fn solve_poisson(
    mask: &RegionMask,
    boundary: &ScalarField,
    rhs: Option<&ScalarField>,
    opts: SolverOptions,
) -> Result<(ScalarField, SolveStats), CompetitorError> {
    let grid = mask.grid();
    for f in std::iter::once(boundary).chain(rhs) {
        if f.grid != grid {
            return Err(CompetitorError::GridMismatch {
                got: f.grid.n(),
                expected: grid.n(),
            });
        }
    }
    let n = grid.n();
    let mut unknown = vec![KNOWN; grid.len()];
    let mut nodes = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if mask.is_interior(i, j) {
                unknown[grid.index(i, j)] = nodes.len() as u32;
                nodes.push(grid.index(i, j));
            }
        }
    }
    if nodes.is_empty() {
        return Err(CompetitorError::EmptyInterior);
    }
    let sys = System { n, unknown, nodes };
    let h2 = grid.h() * grid.h();
    let mut known_sum = Vec::with_capacity(sys.nodes.len());
    let mut known_vals = Vec::new();
    let b: Vec<f64> = sys
        .nodes
        .iter()
        .map(|&k| {
            let mut acc = 0.0;
            for m in sys.neighbours(k) {
                if sys.unknown[m] == KNOWN {
                    acc += boundary.values[m];
                    known_vals.push(boundary.values[m]);
                }
            }
            known_sum.push(acc);
            acc - rhs.map_or(0.0, |f| h2 * f.values[k])
        })
        .collect();
    let target = (opts.rel_tol * max_abs(&b)).max(opts.abs_tol);
    let guess = if known_vals.is_empty() {
        0.0
    } else {
        pairwise_sum(&known_vals) / known_vals.len() as f64
    };
    let mut x = vec![guess; sys.nodes.len()];
    let max_iter = opts.max_iter.unwrap_or(10 * n * n);
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / (n - 1) as f64).sin());
    let (iterations, residual) = sys.pcg(&b, &mut x, target, max_iter, omega);
    if residual > target {
        return Err(CompetitorError::NoConvergence {
            iterations,
            residual,
            target,
        });
    }
    let mut values = boundary.values.clone();
    for (u, &k) in sys.nodes.iter().enumerate() {
        values[k] = x[u];
    }
    let stats = SolveStats {
        iterations,
        residual,
        target,
        unknowns: sys.nodes.len(),
    };
    Ok((ScalarField { grid, values }, stats))
}

struct System {
    n: usize,
    unknown: Vec<u32>,
    nodes: Vec<usize>,
}

impl System {
    /// Left, down, right, up neighbours of an interior node.
    fn neighbours(&self, k: usize) -> [usize; 4] {
        [k - 1, k - self.n, k + 1, k + self.n]
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (u, &k) in self.nodes.iter().enumerate() {
            let mut acc = 4.0 * x[u];
            for m in self.neighbours(k) {
                let v = self.unknown[m];
                if v != KNOWN {
                    acc -= x[v as usize];
                }
            }
            y[u] = acc;
        }
    }

    /// z = M⁻¹r for the SSOR splitting of the five-point matrix, up to a
    /// positive scalar factor.
    fn precondition(&self, r: &[f64], z: &mut [f64], omega: f64) {
        let w = omega / 4.0;
        for (u, &k) in self.nodes.iter().enumerate() {
            let mut acc = r[u];
            for m in [k - 1, k - self.n] {
                let v = self.unknown[m];
                if v != KNOWN {
                    acc += z[v as usize];
                }
            }
            z[u] = acc * w;
        }
        for (u, &k) in self.nodes.iter().enumerate().rev() {
            let mut acc = 0.0;
            for m in [k + 1, k + self.n] {
                let v = self.unknown[m];
                if v != KNOWN {
                    acc += z[v as usize];
                }
            }
            z[u] += acc * w;
        }
    }

    fn true_residual(&self, b: &[f64], x: &[f64], r: &mut [f64]) {
        self.apply(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
    }

    /// Returns the iteration count and the final true residual max-norm.
    fn pcg(
        &self,
        b: &[f64],
        x: &mut [f64],
        target: f64,
        max_iter: usize,
        omega: f64,
    ) -> (usize, f64) {
        let m = b.len();
        let (mut r, mut z, mut q) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        self.true_residual(b, x, &mut r);
        let mut iterations = 0;
        loop {
            let res = max_abs(&r);
            if res <= target || iterations >= max_iter {
                return (iterations, res);
            }
            self.precondition(&r, &mut z, omega);
            let mut p = z.clone();
            let mut rz = dot(&r, &z);
            let mut since_refresh = 0;
            while iterations < max_iter {
                self.apply(&p, &mut q);
                let pq = dot(&p, &q);
                if pq <= 0.0 {
                    break;
                }
                let alpha = rz / pq;
                for u in 0..m {
                    x[u] += alpha * p[u];
                    r[u] -= alpha * q[u];
                }
                iterations += 1;
                since_refresh += 1;
                if since_refresh == RESIDUAL_REFRESH || max_abs(&r) <= target {
                    break;
                }
                self.precondition(&r, &mut z, omega);
                let rz_next = dot(&r, &z);
                let beta = rz_next / rz;
                rz = rz_next;
                for u in 0..m {
                    p[u] = z[u] + beta * p[u];
                }
            }
            self.true_residual(b, x, &mut r);
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Dot product summed in fixed blocks, then pairwise across blocks.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let blocks: Vec<f64> = a
        .chunks(DOT_BLOCK)
        .zip(b.chunks(DOT_BLOCK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    pairwise_sum(&blocks)
}
