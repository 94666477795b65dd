use serde::Serialize;

use super::{FoliationError, FoliationFn};
use crate::field_core::{curl_fd, line_integral, MatrixField, PolyCurve, ScalarField, Vec2};
use crate::numeric::{gl8_on, pairwise_sum};

/// Polygon resolution of the circles used for plateau circulations.
const CIRCLE_SIDES: usize = 512;
/// Number of concentric circles averaged for the inner-plateau circulation.
const INNER_BAND_CIRCLES: usize = 128;
/// Maximal relative width of the band of averaged circles below the plateau edge.
const INNER_BAND_FRACTION: f64 = 0.5;
/// Clearance, in grid cells, between the band and any node carrying curl.
const INNER_BAND_CLEARANCE: f64 = 2.0;

/// Both sides of the level-set flux identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxReport {
    /// Σ b_i over every plateau with positive value.
    pub lhs: Vec2,
    /// Σ (1 − φ_i) b_i − ∫₀¹ dh ∮_{∂{φ>h}} W·t.
    pub rhs: Vec2,
    pub residual: f64,
    /// Distinct plateau values in (0, 1) and the bounding 0 and 1.
    pub plateaus: Vec<f64>,
}

/// A contour piece inside one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSegment {
    pub start: Vec2,
    pub end: Vec2,
    /// Lower-left node indices of the cell.
    pub cell: (usize, usize),
}

/// Marching-squares segments of ∂{f > level}, each oriented with the
/// superlevel set on its left. Saddles are split by the cell-centre mean.
pub fn contour_segments(
    f: &ScalarField,
    level: f64,
) -> Result<Vec<ContourSegment>, FoliationError> {
    let grid = f.grid;
    let n = grid.n();
    for k in 0..n {
        for (i, j) in [(k, 0), (k, n - 1), (0, k), (n - 1, k)] {
            if f.at(i, j) > level {
                return Err(FoliationError::ContourLeavesDomain { h: level });
            }
        }
    }
    let mut out = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let vals = corners.map(|(a, b)| f.at(a, b));
            let high = vals.map(|v| v > level);
            if high.iter().all(|&b| b) || high.iter().all(|&b| !b) {
                continue;
            }
            let pts = corners.map(|(a, b)| grid.node(a, b));
            let crossing = |e: usize| {
                let (p, q) = (e, (e + 1) % 4);
                let t = (level - vals[p]) / (vals[q] - vals[p]);
                pts[p].lerp(pts[q], t)
            };
            // Edge e runs from corner e to corner e+1 counter-clockwise.
            let exits: Vec<usize> = (0..4).filter(|&e| high[e] && !high[(e + 1) % 4]).collect();
            let entries: Vec<usize> = (0..4).filter(|&e| !high[e] && high[(e + 1) % 4]).collect();
            let mut push = |from: usize, to: usize| {
                out.push(ContourSegment {
                    start: crossing(from),
                    end: crossing(to),
                    cell: (i, j),
                })
            };
            if exits.len() == 1 {
                push(exits[0], entries[0]);
            } else {
                let centre_high = 0.25 * vals.iter().sum::<f64>() > level;
                for &e in &exits {
                    push(
                        e,
                        if centre_high {
                            (e + 1) % 4
                        } else {
                            (e + 3) % 4
                        },
                    );
                }
            }
        }
    }
    Ok(out)
}

/// ∮ W·t over contour segments, with W_r = ∇A_rᵀ(x − origin) built from the
/// exact cellwise Jacobian of the bilinear interpolant of `a`. Along a
/// segment inside one cell the integrand is a polynomial of degree ≤ 3, so
/// Gauss–Legendre is exact and ∮ A·t = −∮ W·t holds per closed contour.
fn segments_integral(a: &MatrixField, origin: Vec2, segs: &[ContourSegment]) -> Vec2 {
    let grid = a.grid;
    let h = grid.h();
    let mut xs = Vec::with_capacity(segs.len());
    let mut ys = Vec::with_capacity(segs.len());
    for seg in segs {
        let (i, j) = seg.cell;
        let (a00, a10, a01, a11) = (
            a.at(i, j),
            a.at(i + 1, j),
            a.at(i, j + 1),
            a.at(i + 1, j + 1),
        );
        let base = grid.node(i, j);
        let d = seg.end - seg.start;
        let mut acc = Vec2::ZERO;
        for (t, weight) in gl8_on(0.0, 1.0) {
            let p = seg.start.lerp(seg.end, t);
            let (s, u) = ((p.x - base.x) / h, (p.y - base.y) / h);
            let dx = ((a10 - a00).scale(1.0 - u) + (a11 - a01).scale(u)).scale(1.0 / h);
            let dy = ((a01 - a00).scale(1.0 - s) + (a11 - a10).scale(s)).scale(1.0 / h);
            let r = p - origin;
            let (gx, gy) = (dx.mul_vec(r), dy.mul_vec(r));
            // Row k of W is (∂ₓA_k·r, ∂ᵧA_k·r).
            acc += Vec2::new(gx.x * d.x + gy.x * d.y, gx.y * d.x + gy.y * d.y) * weight;
        }
        xs.push(acc.x);
        ys.push(acc.y);
    }
    Vec2::new(pairwise_sum(&xs), pairwise_sum(&ys))
}

/// Lower radius of the band of circles averaged for the inner circulation:
/// the band clears every enclosed ball and every node of the inner disk
/// whose curl exceeds `curl_tol`.
fn inner_band_start(phi: &FoliationFn, inner: f64, curl: &[ScalarField; 2], curl_tol: f64) -> f64 {
    let grid = curl[0].grid;
    let clearance = INNER_BAND_CLEARANCE * grid.h();
    let mut lo = phi
        .balls
        .iter()
        .map(|b| b.center.dist(phi.center) + 1.5 * b.radius)
        .filter(|&r| r < inner)
        .fold(inner * (1.0 - INNER_BAND_FRACTION), f64::max);
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            let r = grid.node(i, j).dist(phi.center);
            let k = grid.index(i, j);
            if r < inner && curl[0].values[k].hypot(curl[1].values[k]) > curl_tol {
                lo = lo.max(r + clearance);
            }
        }
    }
    lo.min(inner)
}

/// Circulation averaged over concentric circles with radii in [lo, hi]
/// under the weight sin²(π(r − lo)/(hi − lo)); equals the circulation of the
/// inner plateau when `a` is curl-free on the band. The weight vanishes at
/// both ends so the discretization error of the average is that of a
/// smooth test function rather than of a single curve.
fn inner_circulation(a: &MatrixField, c: Vec2, lo: f64, hi: f64) -> Result<Vec2, FoliationError> {
    if hi - lo <= 0.0 {
        return Ok(line_integral(a, &PolyCurve::circle(c, hi, CIRCLE_SIDES)?)?);
    }
    let mut xs = Vec::with_capacity(INNER_BAND_CIRCLES);
    let mut ys = Vec::with_capacity(INNER_BAND_CIRCLES);
    let mut ws = Vec::with_capacity(INNER_BAND_CIRCLES);
    for k in 0..INNER_BAND_CIRCLES {
        let t = (k as f64 + 0.5) / INNER_BAND_CIRCLES as f64;
        let w = (std::f64::consts::PI * t).sin().powi(2);
        let b = line_integral(a, &PolyCurve::circle(c, lo + (hi - lo) * t, CIRCLE_SIDES)?)?;
        xs.push(w * b.x);
        ys.push(w * b.y);
        ws.push(w);
    }
    let total = pairwise_sum(&ws);
    Ok(Vec2::new(
        pairwise_sum(&xs) / total,
        pairwise_sum(&ys) / total,
    ))
}

/// Checks Σ b_i = Σ (1 − φ_i) b_i − ∫₀¹ dh ∮_{∂{φ>h}} W·t, where b_i is the
/// circulation of `a` around the plateau {φ = φ_i}, the inner disk carries
/// φ = 1, and W has rows ∇A_rᵀ(x − p) for the bilinear interpolant of `a`.
/// The inner circulation is averaged over circles in a band below the
/// plateau edge that clears all curl-carrying nodes and enclosed balls. Level
/// sets are extracted at `levels` midpoints inside each gap between plateau
/// values.
pub fn flux_identity_check(
    a: &MatrixField,
    phi: &FoliationFn,
    levels: usize,
    curl_tol: f64,
) -> Result<FluxReport, FoliationError> {
    let grid = a.grid;
    let (c, s) = (phi.center, phi.scale);
    let l = grid.half_side();
    if c.x.abs() + s >= l || c.y.abs() + s >= l {
        return Err(FoliationError::ContourLeavesDomain { h: 0.0 });
    }
    let curl = curl_fd(a)?;
    let [c1, c2] = &curl;
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            let x = grid.node(i, j);
            if x.dist(c) >= s || phi.gradient(x) == Vec2::ZERO {
                continue;
            }
            let k = grid.index(i, j);
            let magnitude = c1.values[k].hypot(c2.values[k]);
            if magnitude > curl_tol {
                return Err(FoliationError::CurlOnSupport {
                    x: x.x,
                    y: x.y,
                    magnitude,
                    tol: curl_tol,
                });
            }
        }
    }
    let values = ScalarField::from_fn(grid, |x| phi.eval(x));
    let inner = phi.inner_plateau_radius();
    let band_lo = inner_band_start(phi, inner, &curl, curl_tol);
    let mut lhs = inner_circulation(a, c, band_lo, inner)?;
    let mut weighted = Vec2::ZERO;
    let mut plateaus = vec![0.0, 1.0];
    for b in &phi.balls {
        let v = phi.eval(b.center);
        if v <= 0.0 || b.center.dist(c) + b.radius <= inner {
            continue;
        }
        let circ = line_integral(
            a,
            &PolyCurve::circle(b.center, 1.5 * b.radius, CIRCLE_SIDES)?,
        )?;
        lhs += circ;
        weighted += circ * (1.0 - v);
        plateaus.push(v);
    }
    plateaus.sort_by(f64::total_cmp);
    plateaus.dedup();
    let per_level = levels.max(1);
    let mut integral = Vec2::ZERO;
    for gap in plateaus.windows(2) {
        let (lo, hi) = (gap[0], gap[1]);
        let mut acc = Vec2::ZERO;
        for m in 0..per_level {
            let h = lo + (m as f64 + 0.5) * (hi - lo) / per_level as f64;
            let segs = contour_segments(&values, h)?;
            acc += segments_integral(a, c, &segs);
        }
        integral += acc * ((hi - lo) / per_level as f64);
    }
    let rhs = weighted - integral;
    Ok(FluxReport {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        plateaus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverings::{BallFamily, DEFAULT_M};
    use crate::field_core::{Grid2, Mat2};
    use crate::foliation::foliate_scaled;

    #[test]
    fn contour_of_a_cone_is_a_ccw_circle() {
        let grid = Grid2::new(201, 1.0).unwrap();
        let f = ScalarField::from_fn(grid, |x| 1.0 - x.norm());
        let segs = contour_segments(&f, 0.5).unwrap();
        // ∮ x dy over the contour is the enclosed area π/4.
        let area: f64 = segs
            .iter()
            .map(|s| 0.5 * (s.start.x + s.end.x) * (s.end.y - s.start.y))
            .sum();
        assert!((area - std::f64::consts::PI / 4.0).abs() < 1e-3, "{area}");
        assert!(matches!(
            contour_segments(&f, -0.5),
            Err(FoliationError::ContourLeavesDomain { .. })
        ));
    }

    #[test]
    fn saddle_cells_produce_two_segments() {
        let grid = Grid2::new(2, 1.0).unwrap();
        let f = ScalarField::new(grid, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            contour_segments(&f, 0.5).err(),
            Some(FoliationError::ContourLeavesDomain { h: 0.5 })
        );
    }

    #[test]
    fn curl_free_field_without_balls_balances() {
        let grid = Grid2::new(257, 1.0).unwrap();
        let a = MatrixField::from_fn(grid, |x| {
            Mat2::from_rows(Vec2::new(2.0 * x.x, 0.0), Vec2::new(x.y, x.x))
        });
        let phi = foliate_scaled(
            Vec2::new(0.1, 0.0),
            0.3,
            &BallFamily::new(vec![]),
            1.0 / 64.0,
            DEFAULT_M,
        )
        .unwrap();
        let rep = flux_identity_check(&a, &phi, 4, 1e-9).unwrap();
        assert!(rep.lhs.norm() < 1e-12 && rep.residual < 1e-10, "{rep:?}");
    }
}
