use serde::Serialize;

use super::ball::lex_order;
use super::CoveringError;
use crate::field_core::Vec2;

/// Largest dyadic exponent tried when searching for an empty annulus.
const MAX_LEVEL: usize = 256;

/// Output of [`make_deg2_disjoint`]: selected indices with their radii,
/// plus the radius assigned to every member of J.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deg2Selection {
    pub chosen: Vec<(usize, f64)>,
    pub radii_of_j: Vec<(usize, f64)>,
    pub beta: f64,
}

fn check_params(delta: f64, m: f64, big_r: f64) -> Result<(), CoveringError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CoveringError::InvalidParameter {
            name: "delta",
            value: delta,
            range: "(0, 1)",
        });
    }
    if !(m > 34.0 && m.is_finite()) {
        return Err(CoveringError::InvalidParameter {
            name: "M",
            value: m,
            range: "(34, inf)",
        });
    }
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(CoveringError::InvalidParameter {
            name: "R",
            value: big_r,
            range: "(0, inf)",
        });
    }
    Ok(())
}

/// Largest δᵏR whose annulus {δᵏR ≤ |y − x_j| < βδᵏR} contains no point.
fn annulus_radius(
    points: &[Vec2],
    j: usize,
    big_r: f64,
    delta: f64,
    beta: f64,
) -> Result<f64, CoveringError> {
    let mut rho = big_r;
    for _ in 0..MAX_LEVEL {
        let occupied = points.iter().any(|p| {
            let d = p.dist(points[j]);
            d >= rho && d < beta * rho
        });
        if !occupied {
            return Ok(rho);
        }
        rho *= delta;
        if rho == 0.0 {
            break;
        }
    }
    Err(CoveringError::NoQualifyingAnnulus {
        index: j,
        tried: MAX_LEVEL,
    })
}

/// Degree-two disjointification. Each j ∈ J receives the largest dyadic
/// radius r_j = δᵏR with an empty annulus of ratio β = M/2 − 2; then, level by
/// level from the largest radius, members are kept greedily (lexicographic
/// centre order) when |x_i − x_j| ≥ (β/2)(r_i + r_j) for all kept i.
pub fn make_deg2_disjoint(
    points: &[Vec2],
    j_set: &[usize],
    big_r: f64,
    delta: f64,
    m: f64,
) -> Result<Deg2Selection, CoveringError> {
    check_params(delta, m, big_r)?;
    let beta = 0.5 * m - 2.0;
    for &j in j_set {
        if j >= points.len() {
            return Err(CoveringError::Precondition {
                index: j,
                reason: format!("index outside the point list of length {}", points.len()),
            });
        }
    }
    let mut radii_of_j = Vec::with_capacity(j_set.len());
    for &j in j_set {
        radii_of_j.push((j, annulus_radius(points, j, big_r, delta, beta)?));
    }
    let mut levels: Vec<f64> = radii_of_j.iter().map(|&(_, r)| r).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let mut chosen: Vec<(usize, f64)> = Vec::new();
    for level in levels {
        let members = lex_order(
            radii_of_j
                .iter()
                .filter(|&&(_, r)| r == level)
                .map(|&(j, _)| (j, points[j])),
        );
        for j in members {
            let separated = chosen
                .iter()
                .all(|&(i, ri)| points[i].dist(points[j]) >= 0.5 * beta * (ri + level));
            if separated {
                chosen.push((j, level));
            }
        }
    }
    Ok(Deg2Selection {
        chosen,
        radii_of_j,
        beta,
    })
}

/// Exhaustive check of disjointness of the (M/4 − 1)r balls and of the
/// covering of every (M/8 − 5/4)r_j ball of J by a single (M/8 − 1/4)r_i ball.
pub fn verify_deg2(points: &[Vec2], selection: &Deg2Selection, m: f64) -> Result<(), String> {
    let sep = 0.25 * m - 1.0;
    let slack = |r: f64| 1e-12 * (1.0 + r);
    let chosen = &selection.chosen;
    for (a, &(i, ri)) in chosen.iter().enumerate() {
        for &(j, rj) in &chosen[a + 1..] {
            if points[i].dist(points[j]) < sep * (ri + rj) - slack(ri + rj) {
                return Err(format!("balls around {i} and {j} overlap"));
            }
        }
    }
    for &(j, rj) in &selection.radii_of_j {
        let covered = chosen.iter().any(|&(i, ri)| {
            points[i].dist(points[j]) + (m / 8.0 - 1.25) * rj <= (m / 8.0 - 0.25) * ri + slack(ri)
        });
        if !covered {
            return Err(format!("ball around {j} is not covered"));
        }
    }
    Ok(())
}
