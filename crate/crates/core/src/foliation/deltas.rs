use std::f64::consts::TAU;

use serde::Serialize;

use super::FoliationError;
use crate::coverings::{Ball, BallFamily};
use crate::numeric::pairwise_sum;

/// Inner and outer margins of the radial ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deltas {
    pub inner: f64,
    pub outer: f64,
}

/// Length of the circle ∂B(c, ρ) inside the open annulus 1/2 < |x| < 1.
pub fn arc_length_in_annulus(ball: &Ball) -> f64 {
    let d = ball.center.norm();
    let r = ball.radius;
    if d == 0.0 {
        return if r > 0.5 && r < 1.0 { TAU * r } else { 0.0 };
    }
    // |c + r e(θ)|² = d² + r² + 2dr cos θ; the arc is where cos θ ∈ (lo, hi).
    let lo = ((0.25 - d * d - r * r) / (2.0 * d * r)).clamp(-1.0, 1.0);
    let hi = ((1.0 - d * d - r * r) / (2.0 * d * r)).clamp(-1.0, 1.0);
    2.0 * r * (lo.acos() - hi.acos()).max(0.0)
}

/// Upper bound of the boundary length of ⋃ balls inside the annulus: the sum
/// of arc lengths, overlaps counted repeatedly.
pub fn perimeter_in_annulus(balls: &BallFamily) -> f64 {
    pairwise_sum(
        &balls
            .balls
            .iter()
            .map(arc_length_in_annulus)
            .collect::<Vec<_>>(),
    )
}

/// Smallest r ≥ δ₀ such that the circle of radius `radius_of(r)` misses every
/// ball, where `hit(ball)` is the open interval of r values whose circle meets it.
fn first_free(balls: &[Ball], delta0: f64, hit: impl Fn(&Ball) -> (f64, f64)) -> f64 {
    let mut r = delta0;
    loop {
        let next = balls
            .iter()
            .map(&hit)
            .filter(|&(lo, hi)| r > lo && r < hi)
            .map(|(_, hi)| hi)
            .fold(r, f64::max);
        if next == r {
            return r;
        }
        r = next;
    }
}

/// δ₁ = inf{r ≥ δ₀ : ∂B(0, 1/2 + r) misses every ball} and δ₂ likewise for
/// ∂B(0, 1 − r). Requires the boundary-length bound δ₀.
pub fn compute_deltas(balls: &BallFamily, delta0: f64) -> Result<Deltas, FoliationError> {
    if !(delta0 > 0.0 && delta0 < 0.125) {
        return Err(FoliationError::InvalidParameter {
            name: "delta0",
            value: delta0,
            range: "(0, 1/8)",
        });
    }
    let perimeter = perimeter_in_annulus(balls);
    if perimeter > delta0 {
        return Err(FoliationError::PerimeterTooLarge { perimeter, delta0 });
    }
    let inner = first_free(&balls.balls, delta0, |b| {
        let d = b.center.norm();
        (d - b.radius - 0.5, d + b.radius - 0.5)
    });
    let outer = first_free(&balls.balls, delta0, |b| {
        let d = b.center.norm();
        (1.0 - d - b.radius, 1.0 - d + b.radius)
    });
    let bound = 1.5 * delta0;
    for value in [inner, outer] {
        if value > bound {
            return Err(FoliationError::MarginTooLarge { value, bound });
        }
    }
    Ok(Deltas { inner, outer })
}
