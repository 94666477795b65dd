//! Seeded instance generators. Instance `index` of a battery draws from the
//! stream `split_rng(seed, STREAM_STRIDE·index + tag)`, so instances are
//! independent of how many others are generated.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::coverings::{Ball, BallFamily, DEFAULT_DELTA0};
use crate::energies::WeightedPointMeasure;
use crate::field_core::{CoreSet, Mat2, Params, PolyCurve, Vec2};
use crate::grain_boundary::compatible_epsilon;
use crate::numeric::split_rng;

const STREAM_STRIDE: u64 = 16;

/// Stream tag of each instance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Vitali = 0,
    NiceBalls = 1,
    Deg2 = 2,
    Construction = 3,
    Foliation = 4,
    CoreCurves = 5,
    FreeCurves = 6,
    CompetitorCurves = 7,
}

/// Generator of instance `index` of the family `stream`.
pub fn instance_rng(seed: u64, stream: Stream, index: u64) -> ChaCha20Rng {
    split_rng(seed, STREAM_STRIDE * index + stream as u64)
}

/// Demonstration parameters: α = 1/16, L = τ = λ = 1, ℓ = 0.2 and the
/// largest compatible ε ≤ 1/32.
pub fn demo_params() -> Params {
    let epsilon = compatible_epsilon(1.0 / 16.0, 1.0, 1.0, 1.0 / 32.0);
    Params::new(epsilon, 1.0 / 16.0, 1.0, 1.0, 1.0, 0.2)
        .expect("demonstration parameters are admissible")
}

/// Smooth non-polynomial rows used for the representation-identity rate.
pub fn analytic_rows(p: Vec2) -> Mat2 {
    Mat2::new(
        (2.0 * p.x).sin() * p.y.cos(),
        0.3 * (p.x + p.y).exp(),
        0.0,
        0.0,
    )
}

/// Smooth map whose gradient drives the null-Lagrangian rate.
pub fn smooth_potential(p: Vec2) -> Vec2 {
    Vec2::new(
        p.x + 0.3 * (2.0 * p.y + p.x).sin(),
        p.y + 0.2 * (p.x * p.x - p.y).cos(),
    )
}

/// Random disjoint balls with atoms inside them, all within the admissible
/// region of the mass-fraction selection for R = 1.
pub fn nice_balls_instance(seed: u64, index: u64) -> (BallFamily, WeightedPointMeasure) {
    let mut rng = instance_rng(seed, Stream::NiceBalls, index);
    let count = rng.gen_range(10..=80);
    let mut balls: Vec<Ball> = Vec::with_capacity(count);
    let mut atoms = Vec::new();
    while balls.len() < count {
        let c = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let r: f64 = rng.gen_range(0.0005..0.01);
        if c.norm() + 30.0 * r > 1.0 {
            continue;
        }
        let b = Ball::new(c, r).expect("radius is positive");
        if balls.iter().any(|o| !o.disjoint_from(&b)) {
            continue;
        }
        balls.push(b);
        for _ in 0..rng.gen_range(1..=4) {
            let off = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)) * r;
            atoms.push((c + off, rng.gen_range(0.01..1.0)));
        }
    }
    let mu = WeightedPointMeasure::new(atoms).expect("atom masses are positive");
    (BallFamily::new(balls), mu)
}

/// Points, the subset J, R, δ and M for the degree-two disjointification.
pub struct Deg2Instance {
    pub points: Vec<Vec2>,
    pub j_set: Vec<usize>,
    pub big_r: f64,
    pub delta: f64,
    pub m: f64,
}

/// Uniform points with a clustered fraction, a random subset J, δ ∈ [0.2, 0.8]
/// and M ∈ [35, 80].
pub fn deg2_instance(seed: u64, index: u64) -> Deg2Instance {
    let mut rng = instance_rng(seed, Stream::Deg2, index);
    let count = rng.gen_range(2..=200);
    let mut points: Vec<Vec2> = Vec::with_capacity(count);
    while points.len() < count {
        let p = if !points.is_empty() && rng.gen_bool(0.3) {
            let anchor = points[rng.gen_range(0..points.len())];
            let scale: f64 = 10f64.powf(rng.gen_range(-4.0..-1.0));
            anchor + Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
        } else {
            Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        };
        points.push(p);
    }
    let j_set = (0..count).filter(|_| rng.gen_bool(0.5)).collect();
    Deg2Instance {
        points,
        j_set,
        big_r: rng.gen_range(0.5..2.0),
        delta: rng.gen_range(0.2..0.8),
        m: rng.gen_range(35.0..80.0),
    }
}

/// Random disjoint balls with radii spanning a decade.
pub fn construction_instance(seed: u64, index: u64) -> BallFamily {
    let mut rng = instance_rng(seed, Stream::Construction, index);
    let count = rng.gen_range(1..=100);
    let mut balls: Vec<Ball> = Vec::with_capacity(count);
    while balls.len() < count {
        let b = Ball::new(
            Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            rng.gen_range(0.002..0.02),
        )
        .expect("radius is positive");
        if balls.iter().all(|o| o.disjoint_from(&b)) {
            balls.push(b);
        }
    }
    BallFamily::disjoint(balls).expect("balls were drawn disjoint")
}

/// Random balls and a dilation factor for the Vitali selection.
pub fn vitali_instance(seed: u64, index: u64) -> (BallFamily, f64) {
    let mut rng = instance_rng(seed, Stream::Vitali, index);
    let count = rng.gen_range(1..=100);
    let balls = (0..count)
        .map(|_| {
            Ball::new(
                Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                10f64.powf(rng.gen_range(-3.0..-0.5)),
            )
            .expect("radius is positive")
        })
        .collect();
    (BallFamily::new(balls), rng.gen_range(3.0..6.0))
}

/// `count` disjoint balls centred in the unit annulus whose total perimeter
/// is 0.9·δ₀, so the small-radii condition holds with margin.
pub fn foliation_instance(seed: u64, index: u64, count: usize) -> BallFamily {
    let mut rng = instance_rng(seed, Stream::Foliation, index);
    let budget = 0.9 * DEFAULT_DELTA0 / TAU;
    let mut balls: Vec<Ball> = Vec::with_capacity(count);
    let mut radii: Vec<f64> = (0..count).map(|_| rng.gen_range(0.5..1.0)).collect();
    let total: f64 = radii.iter().sum();
    for r in &mut radii {
        *r *= budget / total;
    }
    for &r in &radii {
        loop {
            let t: f64 = rng.gen_range(0.0..TAU);
            let rho: f64 = rng.gen_range(0.5..1.0);
            let b = Ball::new(Vec2::new(t.cos(), t.sin()) * rho, r).expect("radius is positive");
            if balls.iter().all(|o| o.disjoint_from(&b)) {
                balls.push(b);
                break;
            }
        }
    }
    BallFamily::new(balls)
}

/// Counter-clockwise star-shaped polygon around `center` with radii in
/// [r_lo, r_hi]; consecutive vertex angles differ by less than π, so the
/// polygon is simple and winds once around `center`.
pub fn star_polygon(rng: &mut ChaCha20Rng, center: Vec2, r_lo: f64, r_hi: f64) -> PolyCurve {
    let sides = rng.gen_range(5..=24);
    let phase: f64 = rng.gen_range(0.0..TAU);
    let vertices = (0..sides)
        .map(|k| {
            let t = phase + TAU * (k as f64 + rng.gen_range(0.0..0.8)) / sides as f64;
            center + Vec2::new(t.cos(), t.sin()) * rng.gen_range(r_lo..=r_hi)
        })
        .collect();
    PolyCurve::new(vertices).expect("star polygons are simple")
}

/// Star polygon around the core `index`, between 1.2λε and 0.9 of the
/// half core spacing.
pub fn core_curve(seed: u64, index: u64, cores: &CoreSet, params: &Params) -> PolyCurve {
    let mut rng = instance_rng(seed, Stream::CoreCurves, index);
    let centers = cores.centers();
    let c = centers[rng.gen_range(0..centers.len())];
    let spacing = nearest_other(centers, c).min(2.0 * params.half_side);
    star_polygon(&mut rng, c, 1.2 * params.core_radius(), 0.45 * spacing)
}

/// Star polygon in the domain enclosing no core and avoiding B_{1.2λε}(S).
pub fn core_free_curve(seed: u64, index: u64, cores: &CoreSet, params: &Params) -> PolyCurve {
    let mut rng = instance_rng(seed, Stream::FreeCurves, index);
    let l = params.half_side;
    loop {
        let c = Vec2::new(
            rng.gen_range(-0.9 * l..0.9 * l),
            rng.gen_range(-0.9 * l..0.9 * l),
        );
        let to_core = cores
            .centers()
            .iter()
            .map(|s| s.dist(c))
            .fold(f64::INFINITY, f64::min)
            - 1.2 * params.core_radius();
        let to_edge = 0.99 * l - c.x.abs().max(c.y.abs());
        let r_hi = to_core.min(to_edge);
        if r_hi > 0.01 * l {
            return star_polygon(&mut rng, c, 0.2 * r_hi, r_hi);
        }
    }
}

fn nearest_other(centers: &[Vec2], c: Vec2) -> f64 {
    centers
        .iter()
        .filter(|&&s| s != c)
        .map(|s| s.dist(c))
        .fold(f64::INFINITY, f64::min)
}
