use std::cmp::Ordering;

use serde::Serialize;

use super::grid::partial;
use super::{FieldError, Mat2, MatrixField, Params, PolyCurve, Vec2};
use crate::numeric::{gl8_on, pairwise_sum};

/// Default Burgers tolerance as a fraction of the quantum τε.
pub const DEFAULT_BURGERS_TOL_FACTOR: f64 = 0.05;

/// A matrix field that can be evaluated along segments.
///
/// `breakpoints` reports the parameters in (0, 1) where the field's
/// piecewise representation changes along a→b; between consecutive
/// breakpoints the field is a polynomial of degree ≤ 2 in the parameter, so
/// 8-point Gauss–Legendre per piece is exact.
pub trait MatrixSampler {
    fn contains(&self, p: Vec2) -> bool;
    fn sample(&self, p: Vec2) -> Mat2;
    fn breakpoints(&self, a: Vec2, b: Vec2, out: &mut Vec<f64>);
}

impl MatrixSampler for MatrixField {
    fn contains(&self, p: Vec2) -> bool {
        self.grid.contains(p)
    }

    fn sample(&self, p: Vec2) -> Mat2 {
        MatrixField::sample(self, p)
    }

    fn breakpoints(&self, a: Vec2, b: Vec2, out: &mut Vec<f64>) {
        self.grid.crossings(a, b, out);
    }
}

/// A closure on the plane with the breakpoints of an underlying grid.
struct GridFnSampler<'a, F: Fn(Vec2) -> Mat2> {
    field: &'a MatrixField,
    f: F,
}

impl<F: Fn(Vec2) -> Mat2> MatrixSampler for GridFnSampler<'_, F> {
    fn contains(&self, p: Vec2) -> bool {
        self.field.grid.contains(p)
    }

    fn sample(&self, p: Vec2) -> Mat2 {
        (self.f)(p)
    }

    fn breakpoints(&self, a: Vec2, b: Vec2, out: &mut Vec<f64>) {
        self.field.grid.crossings(a, b, out);
    }
}

/// ∫ A·(b − a) dt over the segment a→b, one component per row.
pub fn segment_integral<S: MatrixSampler + ?Sized>(field: &S, a: Vec2, b: Vec2) -> Vec2 {
    let mut ts = vec![0.0, 1.0];
    field.breakpoints(a, b, &mut ts);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let d = b - a;
    let mut pieces = Vec::with_capacity(ts.len());
    for w in ts.windows(2) {
        let mut acc = Vec2::ZERO;
        for (t, weight) in gl8_on(w[0], w[1]) {
            acc += field.sample(a.lerp(b, t)).mul_vec(d) * weight;
        }
        pieces.push(acc);
    }
    Vec2::new(
        pairwise_sum(&pieces.iter().map(|p| p.x).collect::<Vec<_>>()),
        pairwise_sum(&pieces.iter().map(|p| p.y).collect::<Vec<_>>()),
    )
}

fn lex(a: Vec2, b: Vec2) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

/// Circulation ∮_γ A·t of each row of `field`, i.e. the Burgers vector of γ.
///
/// Each edge is integrated in a canonical direction and the edge sums are
/// reduced in a canonical order, so reversing γ negates the result exactly.
pub fn line_integral<S: MatrixSampler + ?Sized>(
    field: &S,
    gamma: &PolyCurve,
) -> Result<Vec2, FieldError> {
    for (index, v) in gamma.vertices().iter().enumerate() {
        if !field.contains(*v) {
            return Err(FieldError::CurveOutsideDomain {
                index,
                x: v.x,
                y: v.y,
            });
        }
    }
    let mut edges: Vec<(Vec2, Vec2, Vec2)> = gamma
        .segments()
        .map(|(a, b)| {
            if lex(a, b) == Ordering::Greater {
                (b, a, -segment_integral(field, b, a))
            } else {
                (a, b, segment_integral(field, a, b))
            }
        })
        .collect();
    edges.sort_by(|l, r| lex(l.0, r.0).then(lex(l.1, r.1)));
    let xs: Vec<f64> = edges.iter().map(|e| e.2.x).collect();
    let ys: Vec<f64> = edges.iter().map(|e| e.2.y).collect();
    Ok(Vec2::new(pairwise_sum(&xs), pairwise_sum(&ys)))
}

/// Outcome of the Burgers quantization test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BurgersClass {
    Zero,
    Quantized(f64),
    Violation,
}

/// Zero if |b| ≤ tol, Quantized if |b| ≥ τε − tol, Violation otherwise.
pub fn classify_burgers(b: Vec2, params: &Params, tol: f64) -> BurgersClass {
    let magnitude = b.norm();
    if magnitude <= tol {
        BurgersClass::Zero
    } else if magnitude >= params.burgers_quantum() - tol {
        BurgersClass::Quantized(magnitude)
    } else {
        BurgersClass::Violation
    }
}

/// Centred-difference Jacobians of both rows: entry (k, j) of the `i`-th
/// result is ∂_j A_{ik}.
fn row_jacobians(field: &MatrixField) -> [MatrixField; 2] {
    let grid = field.grid;
    let jac = |row: usize| {
        let v1 = field.component(row, 0).values;
        let v2 = field.component(row, 1).values;
        let (d1x, d1y) = (partial(&grid, &v1, 0), partial(&grid, &v1, 1));
        let (d2x, d2y) = (partial(&grid, &v2, 0), partial(&grid, &v2, 1));
        let values = (0..grid.len())
            .map(|k| Mat2::new(d1x[k], d1y[k], d2x[k], d2y[k]))
            .collect();
        MatrixField { grid, values }
    };
    [jac(0), jac(1)]
}

/// Residual of the representation ∮ V·t = −∮ (∇Vᵀ x)·t for each row V of
/// `field`, maximised over rows. The identity holds for every C¹ field, so
/// the residual measures discretisation error only.
pub fn repr_burgers_residual(field: &MatrixField, gamma: &PolyCurve) -> Result<f64, FieldError> {
    let jacobians = row_jacobians(field);
    let mut worst: f64 = 0.0;
    for (row, jac) in jacobians.iter().enumerate() {
        let sampler = GridFnSampler {
            field,
            f: |p: Vec2| {
                let v = field.sample(p).row(row);
                let g = jac.sample(p);
                let w = g.transpose().mul_vec(p);
                Mat2::from_rows(v, w)
            },
        };
        let both = line_integral(&sampler, gamma)?;
        worst = worst.max((both.x + both.y).abs());
    }
    Ok(worst)
}

/// Burgers vector from the matrix form valid for curl- and divergence-free
/// rows: row 1 uses (x·∇A₁₁, x⊥·∇A₁₁), row 2 uses (−x⊥·∇A₂₂, x·∇A₂₂),
/// with x⊥ = (−x₂, x₁) and the overall sign negative.
pub fn repr_harmonic_form(field: &MatrixField, gamma: &PolyCurve) -> Result<Vec2, FieldError> {
    let [j1, j2] = row_jacobians(field);
    let sampler = GridFnSampler {
        field,
        f: |p: Vec2| {
            let g11 = j1.sample(p).row(0);
            let g22 = j2.sample(p).row(1);
            let w1 = Vec2::new(p.dot(g11), p.perp().dot(g11));
            let w2 = Vec2::new(-p.perp().dot(g22), p.dot(g22));
            Mat2::from_rows(w1, w2).scale(-1.0)
        },
    };
    line_integral(&sampler, gamma)
}
