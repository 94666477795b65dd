use serde::Serialize;

use super::{build_hierarchy, compute_deltas, Deltas, FoliationError};
use crate::coverings::{make_deg2_disjoint, Ball, BallFamily};
use crate::field_core::Vec2;
use crate::numeric::{gl8_on, pairwise_sum};

/// A region where the ramp is blended towards its local average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlendSite {
    pub center: Vec2,
    pub rbar: f64,
    /// Mean of the radial ramp over B(center, c₂·rbar).
    pub average: f64,
}

/// Non-decreasing piecewise-linear ψ: [0, 1] → [0, 1], constant on each
/// excluded interval and of slope 1/(1 − |ℐ|) elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutMap {
    /// Disjoint closed components of ℐ ∩ [0, 1], ascending.
    pub components: Vec<(f64, f64)>,
    /// ψ on each component.
    values: Vec<f64>,
    /// Measure of ℐ strictly before each component.
    before: Vec<f64>,
    pub excluded: f64,
}

impl CutMap {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self, FoliationError> {
        intervals.retain(|&(a, b)| b >= 0.0 && a <= 1.0 && a <= b);
        for iv in &mut intervals {
            *iv = (iv.0.max(0.0), iv.1.min(1.0));
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let mut components: Vec<(f64, f64)> = Vec::new();
        for (a, b) in intervals {
            match components.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => components.push((a, b)),
            }
        }
        let mut before = Vec::with_capacity(components.len());
        let mut acc = 0.0;
        for &(a, b) in &components {
            before.push(acc);
            acc += b - a;
        }
        let excluded = acc;
        if excluded > 0.5 {
            return Err(FoliationError::ExcludedSetTooLarge { measure: excluded });
        }
        let values = components
            .iter()
            .zip(&before)
            .map(|(&(a, b), &pre)| {
                if b >= 1.0 {
                    1.0
                } else if a <= 0.0 {
                    0.0
                } else {
                    (a - pre) / (1.0 - excluded)
                }
            })
            .collect();
        Ok(Self {
            components,
            values,
            before,
            excluded,
        })
    }

    fn locate(&self, t: f64) -> (usize, bool) {
        let m = self.components.partition_point(|&(a, _)| a <= t);
        if m > 0 && t <= self.components[m - 1].1 {
            (m - 1, true)
        } else {
            (m, false)
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match self.locate(t) {
            (m, true) => self.values[m],
            (m, false) => {
                let pre = if m == 0 {
                    0.0
                } else {
                    self.before[m - 1] + self.components[m - 1].1 - self.components[m - 1].0
                };
                ((t - pre) / (1.0 - self.excluded)).clamp(0.0, 1.0)
            }
        }
    }

    pub fn slope(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 || self.locate(t).1 {
            0.0
        } else {
            1.0 / (1.0 - self.excluded)
        }
    }
}

/// φ = ψ∘φ₁ on the annulus B(center, scale) ∖ B(center, scale/2).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoliationFn {
    pub center: Vec2,
    /// Outer radius of the annulus.
    pub scale: f64,
    pub delta0: f64,
    /// δ₀ used for the hierarchy scale c₀ = 2δ₀ after the Lipschitz check.
    pub delta0_effective: f64,
    pub deltas: Deltas,
    /// Slope of the radial ramp in unit coordinates.
    pub slope: f64,
    pub blend_inner: f64,
    pub blend_outer: f64,
    pub sites: Vec<BlendSite>,
    pub cut: CutMap,
    /// Lipschitz bound of φ₁ in unit coordinates.
    pub lip_phi1: f64,
    pub r0: f64,
    pub top_level: usize,
    /// Number of degree-two points before disjointification.
    pub degree_two_count: usize,
    /// Input balls in physical coordinates.
    pub balls: Vec<Ball>,
}

impl FoliationFn {
    fn to_unit(&self, x: Vec2) -> Vec2 {
        (x - self.center) * (1.0 / self.scale)
    }

    fn phi0(&self, y: Vec2) -> f64 {
        (self.slope * (1.0 - self.deltas.outer - y.norm())).clamp(0.0, 1.0)
    }

    fn grad_phi0(&self, y: Vec2) -> Vec2 {
        let t = y.norm();
        if t > 0.5 + self.deltas.inner && t < 1.0 - self.deltas.outer {
            y * (-self.slope / t)
        } else {
            Vec2::ZERO
        }
    }

    fn eta(&self, t: f64) -> (f64, f64) {
        let (c1, c2) = (self.blend_inner, self.blend_outer);
        if t <= c1 {
            (1.0, 0.0)
        } else if t < c2 {
            ((c2 - t) / (c2 - c1), -1.0 / (c2 - c1))
        } else {
            (0.0, 0.0)
        }
    }

    fn site_at(&self, y: Vec2) -> Option<&BlendSite> {
        self.sites
            .iter()
            .find(|s| y.dist(s.center) < self.blend_outer * s.rbar)
    }

    /// φ₁ in unit coordinates.
    pub fn phi1_unit(&self, y: Vec2) -> f64 {
        let base = self.phi0(y);
        match self.site_at(y) {
            Some(s) => {
                let (eta, _) = self.eta(y.dist(s.center) / s.rbar);
                eta * s.average + (1.0 - eta) * base
            }
            None => base,
        }
    }

    fn grad_phi1_unit(&self, y: Vec2) -> Vec2 {
        let base = self.grad_phi0(y);
        match self.site_at(y) {
            Some(s) => {
                let d = y.dist(s.center);
                let (eta, deta) = self.eta(d / s.rbar);
                let radial = if d > 0.0 {
                    (y - s.center) * (1.0 / d)
                } else {
                    Vec2::ZERO
                };
                radial * (deta / s.rbar * (s.average - self.phi0(y))) + base * (1.0 - eta)
            }
            None => base,
        }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        self.cut.eval(self.phi1_unit(self.to_unit(x)))
    }

    /// Analytic gradient, zero on the plateaus.
    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let y = self.to_unit(x);
        let s = self.cut.slope(self.phi1_unit(y));
        if s == 0.0 {
            return Vec2::ZERO;
        }
        self.grad_phi1_unit(y) * (s / self.scale)
    }

    /// Lipschitz bound of φ in physical units.
    pub fn lipschitz_bound(&self) -> f64 {
        self.lip_phi1 / ((1.0 - self.cut.excluded) * self.scale)
    }

    /// Value of φ on the plateau around each input ball.
    pub fn plateau_values(&self) -> Vec<f64> {
        self.balls.iter().map(|b| self.eval(b.center)).collect()
    }

    /// Inner radius (physical) of the region where φ ≡ 1 by the ramp alone.
    pub fn inner_plateau_radius(&self) -> f64 {
        self.scale * (0.5 + self.deltas.inner)
    }
}

/// Mean of the radial ramp over B(c, r) by Gauss–Legendre in the radius and
/// the trapezoid rule in the angle.
fn disk_average(slope: f64, outer: f64, c: Vec2, r: f64) -> f64 {
    const ANGLES: usize = 128;
    let mut terms = Vec::with_capacity(8 * ANGLES);
    for (s, w) in gl8_on(0.0, r) {
        for k in 0..ANGLES {
            let t = std::f64::consts::TAU * k as f64 / ANGLES as f64;
            let y = c + Vec2::new(t.cos(), t.sin()) * s;
            let v = (slope * (1.0 - outer - y.norm())).clamp(0.0, 1.0);
            terms.push(v * s * w);
        }
    }
    pairwise_sum(&terms) * std::f64::consts::TAU / ANGLES as f64 / (std::f64::consts::PI * r * r)
}

/// Range of φ₁ over B(c, s), widened so it contains every evaluated value.
fn image_interval(phi: &FoliationFn, c: Vec2, s: f64) -> (f64, f64) {
    const PAD: f64 = 1e-12;
    let touches_site = phi
        .sites
        .iter()
        .any(|site| c.dist(site.center) < s + phi.blend_outer * site.rbar);
    if !touches_site {
        let (tmin, tmax) = ((c.norm() - s).max(0.0), c.norm() + s);
        let f = |t: f64| (phi.slope * (1.0 - phi.deltas.outer - t)).clamp(0.0, 1.0);
        return (f(tmax) - PAD, f(tmin) + PAD);
    }
    const RINGS: usize = 16;
    const ANGLES: usize = 64;
    let mut lo = phi.phi1_unit(c);
    let mut hi = lo;
    for i in 1..=RINGS {
        let rad = s * i as f64 / RINGS as f64;
        for k in 0..ANGLES {
            let t = std::f64::consts::TAU * k as f64 / ANGLES as f64;
            let v = phi.phi1_unit(c + Vec2::new(t.cos(), t.sin()) * rad);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let margin = phi.lip_phi1 * s * (1.0 / RINGS as f64 + std::f64::consts::PI / ANGLES as f64);
    (lo - margin, hi + margin)
}

/// Foliation of the unit annulus B(0, 1) ∖ B(0, 1/2) around `balls`.
pub fn foliate(balls: &BallFamily, delta0: f64, m: f64) -> Result<FoliationFn, FoliationError> {
    build(balls, delta0, m, Vec2::ZERO, 1.0)
}

/// Foliation of B(p, 2R) ∖ B(p, R): the unit construction pulled back by
/// x ↦ (x − p)/(2R). Requires boundary length ≤ δ₀R inside the annulus.
pub fn foliate_scaled(
    p: Vec2,
    big_r: f64,
    balls: &BallFamily,
    delta0: f64,
    m: f64,
) -> Result<FoliationFn, FoliationError> {
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(FoliationError::InvalidParameter {
            name: "R",
            value: big_r,
            range: "(0, inf)",
        });
    }
    let scale = 2.0 * big_r;
    let unit = unit_balls(balls, p, scale);
    let perimeter = super::perimeter_in_annulus(&unit) * scale;
    if perimeter > delta0 * big_r {
        return Err(FoliationError::PerimeterTooLarge {
            perimeter,
            delta0: delta0 * big_r,
        });
    }
    build(balls, delta0, m, p, scale)
}

fn unit_balls(balls: &BallFamily, p: Vec2, scale: f64) -> BallFamily {
    BallFamily::new(
        balls
            .balls
            .iter()
            .map(|b| Ball {
                center: (b.center - p) * (1.0 / scale),
                radius: b.radius / scale,
            })
            .collect(),
    )
}

fn build(
    balls: &BallFamily,
    delta0: f64,
    m: f64,
    center: Vec2,
    scale: f64,
) -> Result<FoliationFn, FoliationError> {
    if !(m > 34.0 && m.is_finite()) {
        return Err(FoliationError::InvalidParameter {
            name: "M",
            value: m,
            range: "(34, inf)",
        });
    }
    let unit = unit_balls(balls, center, scale);
    let deltas = compute_deltas(&unit, delta0)?;
    let slope = 1.0 / (0.5 - deltas.inner - deltas.outer);
    let (c1, c2) = (m / 8.0 + 0.75, m / 4.0 - 2.0);
    let blend_factor = 1.0 + c2 / (c2 - c1);
    let delta0_effective = delta0.min(1.0 / (16.0 * slope * blend_factor));
    let n = unit.len();
    let mut phi = FoliationFn {
        center,
        scale,
        delta0,
        delta0_effective,
        deltas,
        slope,
        blend_inner: c1,
        blend_outer: c2,
        sites: Vec::new(),
        cut: CutMap::new(Vec::new())?,
        lip_phi1: slope,
        r0: 0.0,
        top_level: 0,
        degree_two_count: 0,
        balls: balls.balls.clone(),
    };
    if n == 0 {
        return Ok(phi);
    }
    let points: Vec<Vec2> = unit.balls.iter().map(|b| b.center).collect();
    let hierarchy = build_hierarchy(&points, 2.0 * delta0_effective, m)?;
    phi.r0 = hierarchy.r0;
    phi.top_level = hierarchy.top;
    let j = hierarchy.degree_two_points();
    phi.degree_two_count = j.len();
    if !j.is_empty() {
        let top_radius = hierarchy.radii[hierarchy.top];
        let selection = make_deg2_disjoint(&points, &j, top_radius, 1.0 / m, m)?;
        let (lo, hi) = (0.5 + deltas.inner, 1.0 - deltas.outer);
        for (i, rbar) in selection.chosen {
            let c = points[i];
            let reach = c2 * rbar;
            if c.norm() - reach >= lo && c.norm() + reach <= hi {
                phi.sites.push(BlendSite {
                    center: c,
                    rbar,
                    average: disk_average(slope, deltas.outer, c, reach),
                });
            }
        }
    }
    if !phi.sites.is_empty() {
        phi.lip_phi1 = slope * blend_factor;
    }
    let intervals = unit
        .balls
        .iter()
        .map(|b| image_interval(&phi, b.center, 2.0 * b.radius + phi.r0))
        .collect();
    phi.cut = CutMap::new(intervals)?;
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverings::DEFAULT_M;

    const DELTA0: f64 = 1.0 / 64.0;

    #[test]
    fn cut_map_is_monotone_and_flat_on_components() {
        let cut = CutMap::new(vec![(0.2, 0.3), (0.25, 0.4), (0.9, 1.2)]).unwrap();
        assert_eq!(cut.components, vec![(0.2, 0.4), (0.9, 1.0)]);
        assert!((cut.excluded - 0.3).abs() < 1e-15);
        assert_eq!(cut.eval(0.0), 0.0);
        assert_eq!(cut.eval(1.0), 1.0);
        assert_eq!(cut.eval(0.95), 1.0);
        assert_eq!(cut.eval(0.2), cut.eval(0.4));
        assert!((cut.eval(0.5) - (0.5 - 0.2) / 0.7).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 0..=1000 {
            let v = cut.eval(k as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(cut.slope(0.3), 0.0);
        assert!((cut.slope(0.5) - 1.0 / 0.7).abs() < 1e-15);
        assert!(CutMap::new(vec![(0.0, 0.6)]).is_err());
    }

    #[test]
    fn no_balls_gives_the_clamped_ramp() {
        let phi = foliate(&BallFamily::new(vec![]), DELTA0, DEFAULT_M).unwrap();
        for k in 0..10_000 {
            let t = std::f64::consts::TAU * k as f64 / 10_000.0;
            let u = Vec2::new(t.cos(), t.sin());
            assert_eq!(phi.eval(u), 0.0);
            assert_eq!(phi.eval(u * 0.5), 1.0);
        }
        let mid = phi.eval(Vec2::new(0.75, 0.0));
        assert!((mid - phi.slope * (1.0 - DELTA0 - 0.75)).abs() < 1e-15);
    }

    #[test]
    fn one_interior_ball_sits_on_a_plateau() {
        let ball = Ball::new(Vec2::new(0.0, 0.7), 1e-3).unwrap();
        let phi = foliate(&BallFamily::new(vec![ball]), DELTA0, DEFAULT_M).unwrap();
        let plateau = phi.eval(ball.center);
        assert_eq!(plateau, phi.cut.eval(phi.phi1_unit(ball.center)));
        for k in 0..100 {
            let t = std::f64::consts::TAU * k as f64 / 100.0;
            let r = 2.0 * ball.radius * (k % 10) as f64 / 10.0;
            assert_eq!(
                phi.eval(ball.center + Vec2::new(t.cos(), t.sin()) * r),
                plateau
            );
        }
        assert_eq!(phi.gradient(ball.center), Vec2::ZERO);
    }

    #[test]
    fn unit_scaling_is_the_identity() {
        let fam = BallFamily::new(vec![
            Ball::new(Vec2::new(0.6, 0.2), 3e-4).unwrap(),
            Ball::new(Vec2::new(-0.3, -0.7), 5e-4).unwrap(),
        ]);
        let a = foliate(&fam, DELTA0, DEFAULT_M).unwrap();
        let b = foliate_scaled(Vec2::ZERO, 0.5, &fam, DELTA0, DEFAULT_M).unwrap();
        for k in 0..500 {
            let x = Vec2::new(-1.0 + 0.004 * k as f64, 0.3 - 0.001 * k as f64);
            assert!((a.eval(x) - b.eval(x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn scaled_boundary_values() {
        let p = Vec2::new(0.3, -0.2);
        let phi = foliate_scaled(p, 4.0, &BallFamily::new(vec![]), DELTA0, DEFAULT_M).unwrap();
        for k in 0..360 {
            let t = std::f64::consts::TAU * k as f64 / 360.0;
            let u = Vec2::new(t.cos(), t.sin());
            assert_eq!(phi.eval(p + u * 8.0), 0.0);
            assert_eq!(phi.eval(p + u * 4.0), 1.0);
        }
        assert!((phi.lipschitz_bound() - phi.slope / 8.0).abs() < 1e-15);
    }
}
