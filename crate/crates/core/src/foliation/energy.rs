use super::{FoliationError, FoliationFn};
use crate::coverings::BallFamily;
use crate::field_core::Vec2;
use crate::numeric::pairwise_sum;

/// Smallest admissible grid for [`foliation_energy`].
pub const MIN_ENERGY_GRID: usize = 256;

/// Midpoint-rule value of ∫_U |∇φ|² / dist²(x, ∂U) over U = annulus ∖ ⋃ balls,
/// on `grid_n`² cells covering the outer disk. The distance is the minimum
/// over the two annulus circles and every ball boundary.
pub fn foliation_energy(
    phi: &FoliationFn,
    balls: &BallFamily,
    grid_n: usize,
) -> Result<f64, FoliationError> {
    if grid_n < MIN_ENERGY_GRID {
        return Err(FoliationError::GridTooCoarse {
            n: grid_n,
            min: MIN_ENERGY_GRID,
        });
    }
    let (c, s) = (phi.center, phi.scale);
    let h = 2.0 * s / grid_n as f64;
    let rows: Vec<f64> = (0..grid_n)
        .map(|j| {
            let y = c.y - s + (j as f64 + 0.5) * h;
            let terms: Vec<f64> = (0..grid_n)
                .filter_map(|i| {
                    let x = Vec2::new(c.x - s + (i as f64 + 0.5) * h, y);
                    let r = x.dist(c);
                    if r <= 0.5 * s || r >= s {
                        return None;
                    }
                    let g = phi.gradient(x).norm_sq();
                    if g == 0.0 {
                        return None;
                    }
                    let mut dist = (r - 0.5 * s).min(s - r);
                    for b in &balls.balls {
                        let d = x.dist(b.center) - b.radius;
                        if d <= 0.0 {
                            return None;
                        }
                        dist = dist.min(d);
                    }
                    Some(g / (dist * dist))
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&rows) * h * h)
}

/// Largest central-difference gradient of φ over an n² node grid on the
/// square circumscribing the outer circle.
pub fn sampled_lipschitz(phi: &FoliationFn, n: usize) -> f64 {
    let (c, s) = (phi.center, phi.scale);
    let h = 2.0 * s / (n.max(2) - 1) as f64;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let x = Vec2::new(c.x - s + i as f64 * h, c.y - s + j as f64 * h);
            let dx = phi.eval(x + Vec2::new(h, 0.0)) - phi.eval(x - Vec2::new(h, 0.0));
            let dy = phi.eval(x + Vec2::new(0.0, h)) - phi.eval(x - Vec2::new(0.0, h));
            worst = worst.max(dx.hypot(dy) / (2.0 * h));
        }
    }
    worst
}
