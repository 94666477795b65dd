use std::collections::BTreeMap;

use serde::Serialize;

use super::ball::lex_order;
use super::{BallFamily, CoveringError};
use crate::energies::WeightedPointMeasure;
use crate::field_core::Vec2;

/// Guaranteed mass fraction 1/(2·13²).
pub const MASS_FRACTION_BOUND: f64 = 1.0 / 338.0;

/// Selected indices with radii and the achieved mass fraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub chosen: Vec<usize>,
    pub radii: Vec<f64>,
    pub fraction: f64,
    /// Shell index of each chosen ball.
    pub shells: Vec<u32>,
    /// Colour classes used by the shell carrying the most classes.
    pub max_colours: usize,
}

/// Shell index k with R(1 − 2^{−k}) ≤ |x| < R(1 − 2^{−(k+1)}).
fn shell_of(x: Vec2, big_r: f64) -> u32 {
    let t = x.norm();
    let mut k = 0u32;
    while k < 1000 && t >= big_r * (1.0 - 0.5f64.powi(k as i32 + 1)) {
        k += 1;
    }
    k
}

fn shell_radius(k: u32, big_r: f64) -> f64 {
    0.5f64.powi(k as i32) * big_r / 10.0
}

/// μ of a union of open balls, each atom counted once.
fn union_mass(mu: &WeightedPointMeasure, centers: &[Vec2], r: f64) -> f64 {
    mu.mass_where(|p| centers.iter().any(|c| c.dist(p) < r))
}

fn check_preconditions(
    family: &BallFamily,
    mu: &WeightedPointMeasure,
    big_r: f64,
) -> Result<(), CoveringError> {
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(CoveringError::InvalidParameter {
            name: "R",
            value: big_r,
            range: "(0, inf)",
        });
    }
    for (i, b) in family.balls.iter().enumerate() {
        if b.center.norm() + 30.0 * b.radius > big_r {
            return Err(CoveringError::Precondition {
                index: i,
                reason: format!("B(x, 30ρ) with ρ = {} leaves B(0, {big_r})", b.radius),
            });
        }
    }
    for (a, (p, w)) in mu.atoms().iter().enumerate() {
        if *w > 0.0 && !family.balls.iter().any(|b| b.contains_point(*p)) {
            return Err(CoveringError::Precondition {
                index: a,
                reason: format!("atom at ({}, {}) lies outside every ball", p.x, p.y),
            });
        }
    }
    Ok(())
}

/// Mass-fraction selection. Centres are grouped in dyadic shells U_k with
/// radius r_k = 2^{−k}R/10; each shell keeps a maximal r_k/3-separated
/// subfamily; the parity class of shells with more mass is kept; within
/// each kept shell a greedy colouring with conflict distance 4r_k splits the
/// subfamily and the heaviest colour class is selected with R_i = r_k.
pub fn find_nice_balls(
    family: &BallFamily,
    mu: &WeightedPointMeasure,
    big_r: f64,
) -> Result<SelectionResult, CoveringError> {
    check_preconditions(family, mu, big_r)?;
    let total = mu.mass_in_ball(Vec2::ZERO, big_r);
    if total <= 0.0 {
        return Ok(SelectionResult {
            chosen: Vec::new(),
            radii: Vec::new(),
            fraction: 1.0,
            shells: Vec::new(),
            max_colours: 0,
        });
    }
    let balls = &family.balls;
    let mut by_shell: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, b) in balls.iter().enumerate() {
        by_shell
            .entry(shell_of(b.center, big_r))
            .or_default()
            .push(i);
    }
    let mut maximal: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (&k, members) in &by_shell {
        let rk = shell_radius(k, big_r);
        let mut kept: Vec<usize> = Vec::new();
        for i in lex_order(members.iter().map(|&i| (i, balls[i].center))) {
            if kept
                .iter()
                .all(|&j| balls[j].center.dist(balls[i].center) >= rk / 3.0)
            {
                kept.push(i);
            }
        }
        maximal.insert(k, kept);
    }
    let mut parity_mass = [0.0f64; 2];
    for (&k, kept) in &maximal {
        let centers: Vec<Vec2> = kept.iter().map(|&i| balls[i].center).collect();
        parity_mass[(k % 2) as usize] += union_mass(mu, &centers, shell_radius(k, big_r));
    }
    let parity = if parity_mass[1] > parity_mass[0] {
        1
    } else {
        0
    };
    let mut chosen = Vec::new();
    let mut radii = Vec::new();
    let mut shells = Vec::new();
    let mut max_colours = 0;
    for (&k, kept) in maximal.iter().filter(|(k, _)| *k % 2 == parity) {
        let rk = shell_radius(k, big_r);
        let mut colour: Vec<usize> = Vec::with_capacity(kept.len());
        for (a, &i) in kept.iter().enumerate() {
            let mut used: Vec<usize> = (0..a)
                .filter(|&b| balls[kept[b]].center.dist(balls[i].center) < 4.0 * rk)
                .map(|b| colour[b])
                .collect();
            used.sort_unstable();
            used.dedup();
            let c = used
                .iter()
                .enumerate()
                .find(|(pos, &c)| *pos != c)
                .map_or(used.len(), |(pos, _)| pos);
            colour.push(c);
        }
        let n_colours = colour.iter().max().map_or(0, |&c| c + 1);
        max_colours = max_colours.max(n_colours);
        let mut best: Option<(f64, usize)> = None;
        for c in 0..n_colours {
            let class: Vec<Vec2> = kept
                .iter()
                .zip(&colour)
                .filter(|(_, &cc)| cc == c)
                .map(|(&i, _)| balls[i].center)
                .collect();
            let m = union_mass(mu, &class, rk);
            if best.is_none_or(|(bm, _)| m > bm) {
                best = Some((m, c));
            }
        }
        if let Some((_, c)) = best {
            for (&i, &cc) in kept.iter().zip(&colour) {
                if cc == c {
                    chosen.push(i);
                    radii.push(rk);
                    shells.push(k);
                }
            }
        }
    }
    let picked: Vec<f64> = chosen
        .iter()
        .zip(&radii)
        .map(|(&i, &r)| mu.mass_in_ball(balls[i].center, r))
        .collect();
    let fraction = (crate::numeric::pairwise_sum(&picked) / total).clamp(0.0, 1.0);
    Ok(SelectionResult {
        chosen,
        radii,
        fraction,
        shells,
        max_colours,
    })
}

/// Checks every postcondition of [`find_nice_balls`] by direct computation.
pub fn verify_nice_balls(
    family: &BallFamily,
    mu: &WeightedPointMeasure,
    big_r: f64,
    result: &SelectionResult,
) -> Result<(), String> {
    let balls = &family.balls;
    let slack = 1e-12 * big_r;
    for (a, (&i, &ri)) in result.chosen.iter().zip(&result.radii).enumerate() {
        if balls[i].center.norm() + 2.0 * ri > big_r + slack {
            return Err(format!("doubled ball {i} leaves B(0, R)"));
        }
        if ri <= 3.0 * balls[i].radius {
            return Err(format!("radius of {i} is not larger than 3ρ"));
        }
        for (&j, &rj) in result.chosen[a + 1..].iter().zip(&result.radii[a + 1..]) {
            if balls[i].center.dist(balls[j].center) < 2.0 * (ri + rj) - slack {
                return Err(format!("doubled balls {i} and {j} overlap"));
            }
        }
    }
    let shell_pts: Vec<(u32, Vec2)> = balls
        .iter()
        .map(|b| (shell_of(b.center, big_r), b.center))
        .collect();
    for (a, &(k, x)) in shell_pts.iter().enumerate() {
        for &(kk, y) in &shell_pts[a + 1..] {
            if k.abs_diff(kk) >= 2
                && x.dist(y) < shell_radius(k, big_r) + shell_radius(kk, big_r) - slack
            {
                return Err(format!("shell balls of levels {k} and {kk} meet"));
            }
        }
    }
    let picked: Vec<f64> = result
        .chosen
        .iter()
        .zip(&result.radii)
        .map(|(&i, &r)| mu.mass_in_ball(balls[i].center, r))
        .collect();
    let total = mu.mass_in_ball(Vec2::ZERO, big_r);
    let sum = crate::numeric::pairwise_sum(&picked);
    if total > 0.0 && sum < MASS_FRACTION_BOUND * total * (1.0 - 1e-12) {
        return Err(format!("mass fraction {} below 1/338", sum / total));
    }
    if !(0.0..=1.0).contains(&result.fraction) {
        return Err(format!("fraction {} outside [0, 1]", result.fraction));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverings::Ball;
    use crate::numeric::split_rng;
    use rand::Rng;

    #[test]
    fn shells_follow_dyadic_boundaries() {
        assert_eq!(shell_of(Vec2::ZERO, 1.0), 0);
        assert_eq!(shell_of(Vec2::new(0.5, 0.0), 1.0), 1);
        assert_eq!(shell_of(Vec2::new(0.74, 0.0), 1.0), 1);
        assert_eq!(shell_of(Vec2::new(0.75, 0.0), 1.0), 2);
    }

    #[test]
    fn single_ball_holding_all_mass() {
        let fam = BallFamily::new(vec![Ball::new(Vec2::ZERO, 0.01).unwrap()]);
        let mu = WeightedPointMeasure::new(vec![(Vec2::new(0.001, 0.0), 2.0)]).unwrap();
        let res = find_nice_balls(&fam, &mu, 1.0).unwrap();
        assert_eq!(res.chosen, vec![0]);
        assert_eq!(res.fraction, 1.0);
        verify_nice_balls(&fam, &mu, 1.0, &res).unwrap();
    }

    #[test]
    fn zero_measure_gives_empty_selection() {
        let fam = BallFamily::new(vec![Ball::new(Vec2::ZERO, 0.01).unwrap()]);
        let res = find_nice_balls(&fam, &WeightedPointMeasure::empty(), 1.0).unwrap();
        assert!(res.chosen.is_empty());
        assert_eq!(res.fraction, 1.0);
    }

    #[test]
    fn preconditions_report_the_offending_index() {
        let fam = BallFamily::new(vec![
            Ball::new(Vec2::ZERO, 0.01).unwrap(),
            Ball::new(Vec2::new(0.9, 0.0), 0.01).unwrap(),
        ]);
        let err = find_nice_balls(&fam, &WeightedPointMeasure::empty(), 1.0).unwrap_err();
        assert!(matches!(err, CoveringError::Precondition { index: 1, .. }));
        let fam = BallFamily::new(vec![Ball::new(Vec2::ZERO, 0.01).unwrap()]);
        let mu = WeightedPointMeasure::new(vec![(Vec2::new(0.5, 0.0), 1.0)]).unwrap();
        let err = find_nice_balls(&fam, &mu, 1.0).unwrap_err();
        assert!(matches!(err, CoveringError::Precondition { index: 0, .. }));
    }

    #[test]
    fn fifty_random_balls_meet_the_fraction_bound() {
        for seed in 0..30 {
            let mut rng = split_rng(seed, 7);
            let mut balls = Vec::new();
            let mut atoms = Vec::new();
            while balls.len() < 50 {
                let c = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let r: f64 = rng.gen_range(0.0005..0.01);
                if c.norm() + 30.0 * r > 1.0 {
                    continue;
                }
                balls.push(Ball::new(c, r).unwrap());
                for _ in 0..3 {
                    let off = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)) * r;
                    atoms.push((c + off, rng.gen_range(0.0..1.0)));
                }
            }
            let fam = BallFamily::new(balls);
            let mu = WeightedPointMeasure::new(atoms).unwrap();
            let res = find_nice_balls(&fam, &mu, 1.0).unwrap();
            verify_nice_balls(&fam, &mu, 1.0, &res).unwrap();
            assert!(res.fraction >= MASS_FRACTION_BOUND);
            assert!(res.max_colours <= 169);
        }
    }
}
