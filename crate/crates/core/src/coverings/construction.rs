use serde::Serialize;

use super::ball::first_overlap;
use super::{rho_bar, vitali_select, Ball, BallFamily, CoveringError};
use crate::energies::WeightedPointMeasure;
use crate::field_core::Vec2;

/// Cover factor of the Vitali stage relative to ρ̄ (3 × the doubled balls).
pub const CONSTRUCTION_VITALI_FACTOR: f64 = 6.0;
/// Radius of the dilated balls relative to ρ̄.
pub const DILATION_FACTOR: f64 = 180.0;

/// One grow/select/dilate/merge step with its bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepResult {
    pub next: BallFamily,
    /// Growth radius of every input ball, never below its own radius.
    pub rho_bar: Vec<f64>,
    /// Input indices kept by the Vitali stage.
    pub vitali: Vec<usize>,
    /// B(x_i, 180ρ̄_i) for the kept indices, in the same order.
    pub dilated: Vec<Ball>,
    /// Output ball containing each dilated ball.
    pub parent: Vec<usize>,
    /// Σ output radii / Σ input radii.
    pub growth: f64,
}

/// Uniform atoms on every circle ∂B(x_i, ρ_i), total mass ρ_i per circle:
/// the perimeter measure divided by 2π. Its total mass is Σρ_i, which is
/// what bounds the growth of one step by 180/δ₀.
pub fn perimeter_measure(family: &BallFamily, atoms_per_circle: usize) -> WeightedPointMeasure {
    let m = atoms_per_circle.max(3);
    let mut atoms = Vec::with_capacity(family.len() * m);
    for b in &family.balls {
        let w = b.radius / m as f64;
        for k in 0..m {
            let t = std::f64::consts::TAU * k as f64 / m as f64;
            atoms.push((b.center + Vec2::new(t.cos(), t.sin()) * b.radius, w));
        }
    }
    WeightedPointMeasure::new(atoms).expect("perimeter weights are positive and finite")
}

/// Repeatedly replaces the first pair of balls with intersecting closures by
/// their smallest enclosing ball. Returns the merged balls and, for every
/// input ball, the index of the merged ball that absorbed it.
pub fn merge_overlapping(balls: &[Ball]) -> (Vec<Ball>, Vec<usize>) {
    let mut groups: Vec<(Ball, Vec<usize>)> = balls
        .iter()
        .enumerate()
        .map(|(i, b)| (*b, vec![i]))
        .collect();
    'outer: loop {
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                if groups[a].0.closures_meet(&groups[b].0) {
                    let (bb, members) = groups.remove(b);
                    groups[a].0 = groups[a].0.enclosing(&bb);
                    groups[a].1.extend(members);
                    continue 'outer;
                }
            }
        }
        break;
    }
    let mut owner = vec![0usize; balls.len()];
    for (g, (_, members)) in groups.iter().enumerate() {
        for &m in members {
            owner[m] = g;
        }
    }
    (groups.into_iter().map(|(b, _)| b).collect(), owner)
}

/// Expands each ball to its growth radius ρ̄ under `mu`, keeps a Vitali
/// subfamily of the 2ρ̄ balls (so the 6ρ̄ balls cover), dilates the kept
/// balls to 180ρ̄ and merges them into a disjoint family.
pub fn ball_construction_step(
    family: &BallFamily,
    mu: &WeightedPointMeasure,
    delta0: f64,
) -> Result<StepResult, CoveringError> {
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(CoveringError::InvalidParameter {
            name: "delta0",
            value: delta0,
            range: "(0, inf)",
        });
    }
    if let Some((first, second)) = first_overlap(&family.balls) {
        return Err(CoveringError::NonDisjointInput { first, second });
    }
    let rho: Vec<f64> = family
        .balls
        .iter()
        .map(|b| rho_bar(mu, b.center, delta0).max(b.radius))
        .collect();
    let doubled = BallFamily::new(
        family
            .balls
            .iter()
            .zip(&rho)
            .map(|(b, &r)| Ball {
                center: b.center,
                radius: 2.0 * r,
            })
            .collect(),
    );
    let vitali = vitali_select(&doubled, CONSTRUCTION_VITALI_FACTOR / 2.0)?;
    let dilated: Vec<Ball> = vitali
        .iter()
        .map(|&i| Ball {
            center: family.balls[i].center,
            radius: DILATION_FACTOR * rho[i],
        })
        .collect();
    let (merged, parent) = merge_overlapping(&dilated);
    let mut next = BallFamily::new(merged);
    next.certify_disjoint()?;
    let input_sum = family.sum_radii();
    let growth = if input_sum > 0.0 {
        next.sum_radii() / input_sum
    } else {
        0.0
    };
    Ok(StepResult {
        next,
        rho_bar: rho,
        vitali,
        dilated,
        parent,
        growth,
    })
}

/// Verifies the inclusions of one step: each input ball lies in a 6ρ̄ ball of
/// the Vitali subfamily, each dilated ball lies in exactly one output ball,
/// and the output balls have pairwise disjoint closures.
pub fn verify_construction_step(family: &BallFamily, step: &StepResult) -> Result<(), String> {
    for (k, b) in family.balls.iter().enumerate() {
        let covered = step.vitali.iter().any(|&i| {
            Ball {
                center: family.balls[i].center,
                radius: CONSTRUCTION_VITALI_FACTOR * step.rho_bar[i],
            }
            .contains_ball(b)
        });
        if !covered {
            return Err(format!("input ball {k} escapes the 6ρ̄ cover"));
        }
    }
    let out = &step.next.balls;
    for (d, ball) in step.dilated.iter().enumerate() {
        let holders: Vec<usize> = (0..out.len())
            .filter(|&o| out[o].contains_ball(ball))
            .collect();
        if holders != [step.parent[d]] {
            return Err(format!("dilated ball {d} lies in output balls {holders:?}"));
        }
    }
    for a in 0..out.len() {
        for b in a + 1..out.len() {
            if out[a].closures_meet(&out[b]) {
                return Err(format!("output balls {a} and {b} meet"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverings::DEFAULT_DELTA0;
    use crate::numeric::split_rng;
    use rand::Rng;

    pub(crate) fn random_disjoint(seed: u64, n: usize) -> BallFamily {
        let mut rng = split_rng(seed, 11);
        let mut balls: Vec<Ball> = Vec::new();
        while balls.len() < n {
            let b = Ball::new(
                Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                rng.gen_range(0.002..0.02),
            )
            .unwrap();
            if balls.iter().all(|o| o.disjoint_from(&b)) {
                balls.push(b);
            }
        }
        BallFamily::disjoint(balls).unwrap()
    }

    #[test]
    fn single_ball_grows_without_merging() {
        let fam =
            BallFamily::disjoint(vec![Ball::new(Vec2::new(0.2, 0.1), 0.01).unwrap()]).unwrap();
        let mu = perimeter_measure(&fam, 32);
        let step = ball_construction_step(&fam, &mu, DEFAULT_DELTA0).unwrap();
        assert_eq!(step.next.len(), 1);
        assert!((step.rho_bar[0] - 0.01).abs() < 1e-15);
        assert!(step.growth <= DILATION_FACTOR / DEFAULT_DELTA0);
        verify_construction_step(&fam, &step).unwrap();
    }

    #[test]
    fn overlapping_dilations_merge_into_one_ball() {
        let fam = BallFamily::disjoint(vec![
            Ball::new(Vec2::new(0.0, 0.0), 0.01).unwrap(),
            Ball::new(Vec2::new(5.0, 0.0), 0.01).unwrap(),
        ])
        .unwrap();
        // Own perimeters only: ρ̄ = ρ, dilations of radius 1.8 stay apart.
        let apart = ball_construction_step(&fam, &perimeter_measure(&fam, 32), 1.0).unwrap();
        assert_eq!(apart.next.len(), 2);
        let close = BallFamily::disjoint(vec![
            Ball::new(Vec2::new(0.0, 0.0), 0.01).unwrap(),
            Ball::new(Vec2::new(3.0, 0.0), 0.01).unwrap(),
        ])
        .unwrap();
        let merged = ball_construction_step(&close, &perimeter_measure(&close, 32), 1.0).unwrap();
        assert_eq!(merged.next.len(), 1);
        for d in &merged.dilated {
            assert!(merged.next.balls[0].contains_ball(d));
        }
        verify_construction_step(&close, &merged).unwrap();
    }

    #[test]
    fn non_disjoint_input_is_rejected() {
        let fam = BallFamily::new(vec![
            Ball::new(Vec2::ZERO, 1.0).unwrap(),
            Ball::new(Vec2::new(0.5, 0.0), 1.0).unwrap(),
        ]);
        let err = ball_construction_step(&fam, &WeightedPointMeasure::empty(), 0.1).unwrap_err();
        assert_eq!(
            err,
            CoveringError::NonDisjointInput {
                first: 0,
                second: 1
            }
        );
    }

    #[test]
    fn hundred_ball_instances_respect_growth_and_inclusions() {
        for seed in 0..10 {
            let fam = random_disjoint(seed, 100);
            let mu = perimeter_measure(&fam, 32);
            let step = ball_construction_step(&fam, &mu, DEFAULT_DELTA0).unwrap();
            verify_construction_step(&fam, &step).unwrap();
            assert!(
                step.growth <= DILATION_FACTOR / DEFAULT_DELTA0,
                "seed {seed}: {}",
                step.growth
            );
        }
    }

    #[test]
    fn merge_is_idempotent_on_separated_families() {
        let balls = vec![
            Ball::new(Vec2::ZERO, 1.0).unwrap(),
            Ball::new(Vec2::new(3.0, 0.0), 1.0).unwrap(),
        ];
        let (merged, owner) = merge_overlapping(&balls);
        assert_eq!(merged, balls);
        assert_eq!(owner, vec![0, 1]);
    }
}
