use serde::Serialize;

use super::CoveringError;
use crate::field_core::Vec2;

/// Absolute slack of disjointness and containment tests.
pub const DISJOINT_SLACK: f64 = 1e-12;

/// An open ball B(center, radius).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ball {
    pub center: Vec2,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec2, radius: f64) -> Result<Self, CoveringError> {
        if !(radius.is_finite() && radius > 0.0 && center.is_finite()) {
            return Err(CoveringError::InvalidRadius(radius));
        }
        Ok(Self { center, radius })
    }

    /// Same centre, radius multiplied by `factor`.
    pub fn dilated(&self, factor: f64) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius * factor,
        }
    }

    /// Whether the open balls are disjoint, up to [`DISJOINT_SLACK`].
    pub fn disjoint_from(&self, other: &Ball) -> bool {
        self.center.dist(other.center) >= self.radius + other.radius - DISJOINT_SLACK
    }

    /// Whether the closed balls share a point.
    pub fn closures_meet(&self, other: &Ball) -> bool {
        self.center.dist(other.center) <= self.radius + other.radius
    }

    /// Whether `other` ⊂ `self`, up to [`DISJOINT_SLACK`] relative to the radius.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.center.dist(other.center) + other.radius
            <= self.radius * (1.0 + DISJOINT_SLACK) + DISJOINT_SLACK
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        self.center.dist(p) < self.radius
    }

    /// Smallest ball containing both.
    pub fn enclosing(&self, other: &Ball) -> Ball {
        let d = self.center.dist(other.center);
        if d + other.radius <= self.radius {
            return *self;
        }
        if d + self.radius <= other.radius {
            return *other;
        }
        let radius = 0.5 * (d + self.radius + other.radius);
        let center = self.center.lerp(other.center, (radius - self.radius) / d);
        Ball { center, radius }
    }
}

/// A list of balls with an optional verified disjointness flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallFamily {
    pub balls: Vec<Ball>,
    disjoint: bool,
}

impl BallFamily {
    pub fn new(balls: Vec<Ball>) -> Self {
        Self {
            balls,
            disjoint: false,
        }
    }

    /// Builds a family and certifies pairwise disjointness.
    pub fn disjoint(balls: Vec<Ball>) -> Result<Self, CoveringError> {
        let mut f = Self::new(balls);
        f.certify_disjoint()?;
        Ok(f)
    }

    /// Verifies pairwise disjointness and records it.
    pub fn certify_disjoint(&mut self) -> Result<(), CoveringError> {
        if let Some((first, second)) = first_overlap(&self.balls) {
            return Err(CoveringError::NonDisjointInput { first, second });
        }
        self.disjoint = true;
        Ok(())
    }

    pub fn is_certified_disjoint(&self) -> bool {
        self.disjoint
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn sum_radii(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.balls.iter().map(|b| b.radius).collect::<Vec<_>>())
    }
}

/// First pair of overlapping open balls, scanning in x-sorted order.
pub(crate) fn first_overlap(balls: &[Ball]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| {
        (balls[a].center.x - balls[a].radius).total_cmp(&(balls[b].center.x - balls[b].radius))
    });
    let mut found: Option<(usize, usize)> = None;
    for (pos, &a) in order.iter().enumerate() {
        let reach = balls[a].center.x + balls[a].radius;
        for &b in &order[pos + 1..] {
            if balls[b].center.x - balls[b].radius >= reach {
                break;
            }
            if !balls[a].disjoint_from(&balls[b]) {
                let pair = (a.min(b), a.max(b));
                found = Some(found.map_or(pair, |f| f.min(pair)));
            }
        }
    }
    found
}

/// Lexicographic order on centres, then index.
pub(crate) fn lex_order(
    points: impl Iterator<Item = (usize, crate::field_core::Vec2)>,
) -> Vec<usize> {
    let mut v: Vec<(usize, crate::field_core::Vec2)> = points.collect();
    v.sort_by(|a, b| {
        a.1.x
            .total_cmp(&b.1.x)
            .then(a.1.y.total_cmp(&b.1.y))
            .then(a.0.cmp(&b.0))
    });
    v.into_iter().map(|(i, _)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enclosing_ball_contains_both_and_is_subadditive() {
        let a = Ball::new(Vec2::ZERO, 1.0).unwrap();
        let b = Ball::new(Vec2::new(1.5, 0.0), 0.7).unwrap();
        let e = a.enclosing(&b);
        assert!(e.contains_ball(&a) && e.contains_ball(&b));
        assert!(e.radius <= a.radius + b.radius);
        assert!((e.radius - 1.6).abs() < 1e-15);
        let inner = Ball::new(Vec2::new(0.1, 0.0), 0.2).unwrap();
        assert_eq!(a.enclosing(&inner), a);
    }

    #[test]
    fn disjointness_certificate() {
        let a = Ball::new(Vec2::ZERO, 1.0).unwrap();
        let b = Ball::new(Vec2::new(2.0, 0.0), 1.0).unwrap();
        assert!(BallFamily::disjoint(vec![a, b]).is_ok());
        let c = Ball::new(Vec2::new(1.9, 0.0), 1.0).unwrap();
        assert_eq!(
            BallFamily::disjoint(vec![a, c]),
            Err(CoveringError::NonDisjointInput {
                first: 0,
                second: 1
            })
        );
        assert!(Ball::new(Vec2::ZERO, 0.0).is_err());
    }
}
