use super::{Ball, BallFamily, CoveringError};

/// Greedy Vitali selection: balls by decreasing radius (ties by centre),
/// kept when disjoint from every kept ball. With `dilation` ≥ 3 every input
/// ball lies in the `dilation`-fold enlargement of some kept ball.
pub fn vitali_select(family: &BallFamily, dilation: f64) -> Result<Vec<usize>, CoveringError> {
    if dilation.is_nan() || dilation < 3.0 {
        return Err(CoveringError::InvalidDilation(dilation));
    }
    let balls = &family.balls;
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| {
        balls[b]
            .radius
            .total_cmp(&balls[a].radius)
            .then(balls[a].center.x.total_cmp(&balls[b].center.x))
            .then(balls[a].center.y.total_cmp(&balls[b].center.y))
            .then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = Vec::new();
    for i in order {
        if chosen.iter().all(|&c| balls[c].disjoint_from(&balls[i])) {
            chosen.push(i);
        }
    }
    Ok(chosen)
}

/// Exhaustive check of disjointness and the dilated cover property.
pub fn verify_vitali_cover(balls: &[Ball], chosen: &[usize], dilation: f64) -> Result<(), String> {
    for (a, &i) in chosen.iter().enumerate() {
        for &j in &chosen[a + 1..] {
            if !balls[i].disjoint_from(&balls[j]) {
                return Err(format!("chosen balls {i} and {j} overlap"));
            }
        }
    }
    for (k, b) in balls.iter().enumerate() {
        if !chosen
            .iter()
            .any(|&c| balls[c].dilated(dilation).contains_ball(b))
        {
            return Err(format!("ball {k} is not covered"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::Vec2;
    use crate::numeric::split_rng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn trivial_families() {
        let one = BallFamily::new(vec![Ball::new(Vec2::ZERO, 1.0).unwrap()]);
        assert_eq!(vitali_select(&one, 5.0).unwrap(), vec![0]);
        let two = BallFamily::new(vec![
            Ball::new(Vec2::ZERO, 1.0).unwrap(),
            Ball::new(Vec2::new(5.0, 0.0), 2.0).unwrap(),
        ]);
        let mut sel = vitali_select(&two, 5.0).unwrap();
        sel.sort();
        assert_eq!(sel, vec![0, 1]);
        assert!(vitali_select(&BallFamily::new(vec![]), 5.0)
            .unwrap()
            .is_empty());
        assert!(vitali_select(&one, 2.0).is_err());
    }

    #[test]
    fn hundred_random_balls_are_covered() {
        for seed in 0..20 {
            let mut rng = split_rng(seed, 0);
            let balls: Vec<Ball> = (0..100)
                .map(|_| {
                    let c = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    Ball::new(c, rng.gen_range(0.01..0.3)).unwrap()
                })
                .collect();
            let fam = BallFamily::new(balls.clone());
            let chosen = vitali_select(&fam, 5.0).unwrap();
            verify_vitali_cover(&balls, &chosen, 5.0).unwrap();
            verify_vitali_cover(&balls, &chosen, 3.0).unwrap();
        }
    }

    proptest! {
        #[test]
        fn selection_is_disjoint_and_covers(
            raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.001f64..0.5), 1..60)
        ) {
            let balls: Vec<Ball> = raw.iter().map(|&(x, y, r)| Ball::new(Vec2::new(x, y), r).unwrap()).collect();
            let chosen = vitali_select(&BallFamily::new(balls.clone()), 3.0).unwrap();
            prop_assert!(verify_vitali_cover(&balls, &chosen, 3.0).is_ok());
        }
    }
}
