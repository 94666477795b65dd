//! Property checks shared by the experiments and the acceptance suite. Each
//! returns the measured quantities; pass/fail thresholds live with callers.

use std::f64::consts::TAU;

use super::instances::{
    analytic_rows, construction_instance, core_curve, core_free_curve, deg2_instance,
    foliation_instance, instance_rng, nice_balls_instance, smooth_potential, star_polygon,
    vitali_instance, Stream,
};
use super::ExperimentError;
use crate::competitors::{
    gradient_forward, harmonic_competitor, max_entry_laplacian, mollified_competitor,
    mollified_curl_report, null_lagrangian_check, HarmonicCompetitor, MollifiedCurlReport,
    RegionMask,
};
use crate::coverings::{
    ball_construction_step, find_nice_balls, make_deg2_disjoint, perimeter_measure,
    verify_construction_step, verify_deg2, verify_nice_balls, verify_vitali_cover, vitali_select,
    BallFamily, DEFAULT_DELTA0, DEFAULT_M, DILATION_FACTOR, MASS_FRACTION_BOUND,
};
use crate::field_core::{
    classify_burgers, line_integral, repr_burgers_residual, BurgersClass, CoreSet, Grid2,
    MatrixField, Params, PolyCurve, ScalarField, Vec2,
};
use crate::foliation::{
    flux_identity_check, foliate, foliate_scaled, foliation_energy, FoliationFn,
};
use crate::grain_boundary::{compatible_epsilon, compose_tile, PiecewiseAffineMap};

/// Outcome of one randomized instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub index: u64,
    /// Battery-specific figure of merit.
    pub metric: f64,
    /// Failed property, if any.
    pub failure: Option<String>,
}

/// Outcomes of a battery of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct Battery {
    pub name: &'static str,
    pub outcomes: Vec<InstanceOutcome>,
}

impl Battery {
    pub fn passed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.failure.is_none()).count()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.len() - self.passed()
    }

    pub fn first_failure(&self) -> Option<(u64, &str)> {
        self.outcomes
            .iter()
            .find_map(|o| o.failure.as_deref().map(|f| (o.index, f)))
    }

    fn run(
        name: &'static str,
        count: u64,
        check: impl Fn(u64) -> (f64, Result<(), String>),
    ) -> Self {
        let outcomes = (0..count)
            .map(|index| {
                let (metric, result) = check(index);
                InstanceOutcome {
                    index,
                    metric,
                    failure: result.err(),
                }
            })
            .collect();
        Battery { name, outcomes }
    }
}

/// Vitali selection: the dilated kept balls cover every input ball.
/// Metric: kept fraction.
pub fn vitali_battery(seed: u64, count: u64) -> Battery {
    Battery::run("vitali", count, |index| {
        let (family, dilation) = vitali_instance(seed, index);
        match vitali_select(&family, dilation) {
            Ok(chosen) => (
                chosen.len() as f64 / family.len() as f64,
                verify_vitali_cover(&family.balls, &chosen, dilation),
            ),
            Err(e) => (f64::NAN, Err(e.to_string())),
        }
    })
}

/// Mass-fraction selection: verified postconditions and fraction ≥ 1/338.
/// Metric: selected mass fraction.
pub fn nice_balls_battery(seed: u64, count: u64) -> Battery {
    Battery::run("nice-balls", count, |index| {
        let (family, mu) = nice_balls_instance(seed, index);
        match find_nice_balls(&family, &mu, 1.0) {
            Ok(sel) => {
                let verdict = verify_nice_balls(&family, &mu, 1.0, &sel).and_then(|()| {
                    if sel.fraction >= MASS_FRACTION_BOUND {
                        Ok(())
                    } else {
                        Err(format!(
                            "mass fraction {} below {MASS_FRACTION_BOUND}",
                            sel.fraction
                        ))
                    }
                });
                (sel.fraction, verdict)
            }
            Err(e) => (f64::NAN, Err(e.to_string())),
        }
    })
}

/// Degree-two disjointification: exhaustive disjointness and coverage.
/// Metric: number of selected points.
pub fn deg2_battery(seed: u64, count: u64) -> Battery {
    Battery::run("deg2", count, |index| {
        let inst = deg2_instance(seed, index);
        match make_deg2_disjoint(&inst.points, &inst.j_set, inst.big_r, inst.delta, inst.m) {
            Ok(sel) => (
                sel.chosen.len() as f64,
                verify_deg2(&inst.points, &sel, inst.m),
            ),
            Err(e) => (f64::NAN, Err(e.to_string())),
        }
    })
}

/// One ball-construction step: inclusions and Σ-radii growth ≤ 180/δ₀.
/// Metric: growth·δ₀.
pub fn construction_battery(seed: u64, count: u64) -> Battery {
    Battery::run("construction", count, |index| {
        let family = construction_instance(seed, index);
        let mu = perimeter_measure(&family, 32);
        match ball_construction_step(&family, &mu, DEFAULT_DELTA0) {
            Ok(step) => {
                let bound = DILATION_FACTOR / DEFAULT_DELTA0;
                let verdict = verify_construction_step(&family, &step).and_then(|()| {
                    if step.growth <= bound {
                        Ok(())
                    } else {
                        Err(format!("growth {} exceeds {bound}", step.growth))
                    }
                });
                (step.growth * DEFAULT_DELTA0, verdict)
            }
            Err(e) => (f64::NAN, Err(e.to_string())),
        }
    })
}

/// Circulations of A_gb around seeded curves.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersSurvey {
    /// Largest |b − (τε, 0)|/τε over curves around one core.
    pub worst_core_error: f64,
    /// Largest |b|/τε over core-free curves.
    pub worst_free: f64,
    /// Curves whose classification differs from the expected one.
    pub misclassified: Vec<String>,
}

/// Classifies `core_count` curves around single cores and `free_count`
/// core-free curves of the exact gradient of `u` with tolerance `rel_tol`·τε.
pub fn burgers_survey(
    u: &PiecewiseAffineMap,
    cores: &CoreSet,
    params: &Params,
    seed: u64,
    core_count: u64,
    free_count: u64,
    rel_tol: f64,
) -> Result<BurgersSurvey, ExperimentError> {
    let field = u.gradient_field();
    let quantum = params.burgers_quantum();
    let tol = rel_tol * quantum;
    let mut survey = BurgersSurvey {
        worst_core_error: 0.0,
        worst_free: 0.0,
        misclassified: Vec::new(),
    };
    for index in 0..core_count {
        let gamma = core_curve(seed, index, cores, params);
        let b = line_integral(&field, &gamma)?;
        let error = (b - Vec2::new(quantum, 0.0)).norm() / quantum;
        survey.worst_core_error = survey.worst_core_error.max(error);
        let class = classify_burgers(b, params, tol);
        if !matches!(class, BurgersClass::Quantized(_)) || error > rel_tol {
            survey.misclassified.push(format!(
                "core curve {index}: {class:?}, b = ({}, {})",
                b.x, b.y
            ));
        }
    }
    for index in 0..free_count {
        let gamma = core_free_curve(seed, index, cores, params);
        let b = line_integral(&field, &gamma)?;
        survey.worst_free = survey.worst_free.max(b.norm() / quantum);
        let class = classify_burgers(b, params, tol);
        if class != BurgersClass::Zero {
            survey.misclassified.push(format!(
                "free curve {index}: {class:?}, b = ({}, {})",
                b.x, b.y
            ));
        }
    }
    Ok(survey)
}

/// Representation-identity residual of the analytic rows on an n-node grid.
pub fn repr_residual(n: usize) -> Result<f64, ExperimentError> {
    let field = MatrixField::from_fn(Grid2::new(n, 1.0)?, analytic_rows);
    let gamma = PolyCurve::circle(Vec2::new(0.13, 0.21), 0.5, 64)?;
    Ok(repr_burgers_residual(&field, &gamma)?)
}

/// Foliation of one seeded instance and its checks.
#[derive(Debug, Clone, PartialEq)]
pub struct FoliationSample {
    pub count: usize,
    pub index: u64,
    pub energy: f64,
    /// energy/(1 + N).
    pub ratio: f64,
    pub lipschitz_bound: f64,
    /// Largest max − min of φ over 100 samples inside any ball.
    pub plateau_spread: f64,
    /// Largest |φ − 0| on |x| = 1 and |φ − 1| on |x| = 1/2 over 4096 samples.
    pub boundary_defect: f64,
}

/// Builds the foliation of instance `index` with `count` balls and measures
/// its energy on a `grid_n`² midpoint grid.
pub fn foliation_sample(
    seed: u64,
    count: usize,
    index: u64,
    grid_n: usize,
) -> Result<FoliationSample, ExperimentError> {
    let balls = foliation_instance(seed, index, count);
    let phi = foliate(&balls, DEFAULT_DELTA0, DEFAULT_M)?;
    let energy = foliation_energy(&phi, &balls, grid_n)?;
    Ok(FoliationSample {
        count,
        index,
        energy,
        ratio: energy / (1.0 + count as f64),
        lipschitz_bound: phi.lipschitz_bound(),
        plateau_spread: plateau_spread(&phi, &balls),
        boundary_defect: boundary_defect(&phi),
    })
}

fn plateau_spread(phi: &FoliationFn, balls: &BallFamily) -> f64 {
    let mut worst: f64 = 0.0;
    for b in &balls.balls {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for ring in 0..10 {
            for k in 0..10 {
                let t = TAU * (k as f64 + 0.5 * (ring % 2) as f64) / 10.0;
                let r = b.radius * ring as f64 / 10.0;
                let v = phi.eval(b.center + Vec2::new(t.cos(), t.sin()) * r);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        worst = worst.max(hi - lo);
    }
    worst
}

fn boundary_defect(phi: &FoliationFn) -> f64 {
    const SAMPLES: usize = 4096;
    (0..SAMPLES)
        .map(|k| {
            let t = TAU * k as f64 / SAMPLES as f64;
            let u = Vec2::new(t.cos(), t.sin());
            phi.eval(u).abs().max((phi.eval(u * 0.5) - 1.0).abs())
        })
        .fold(0.0, f64::max)
}

/// Middle core of the demonstration boundary, the centre of the flux and
/// harmonic-competitor annuli.
pub const DEMO_CORE: Vec2 = Vec2::new(0.0, 0.125);

/// Flux-identity residual of A_gb on an n-node grid around the middle core
/// with R = 0.08, no balls and 128 levels.
pub fn flux_residual(params: &Params, n: usize) -> Result<f64, ExperimentError> {
    let (u, _) = compose_tile(params)?;
    let grid = Grid2::new(n, params.half_side)?;
    let a = u.average_gradient(grid, crate::field_core::Mat2::IDENTITY);
    let phi = foliate_scaled(
        DEMO_CORE,
        0.08,
        &BallFamily::new(vec![]),
        DEFAULT_DELTA0,
        DEFAULT_M,
    )?;
    let curl_tol = crate::energies::DEFAULT_CURL_TOL_FACTOR * params.burgers_quantum() / grid.h();
    Ok(flux_identity_check(&a, &phi, 128, curl_tol)?.residual)
}

/// Harmonic competitor of A_gb on the annulus 0.07 ≤ |x − p| ≤ 0.11 around
/// the middle core.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicReport {
    pub n: usize,
    pub null_lagrangian: f64,
    /// Largest undivided five-point stencil of any entry at depth-2 nodes.
    pub max_laplacian: f64,
    /// Largest amount by which an extended potential leaves the range of
    /// its Dirichlet data; zero when the maximum principle holds.
    pub max_principle_excess: f64,
    /// Largest |b(Ã) − b(A)| over the curves.
    pub burgers_defect: f64,
    /// Largest |b(A) − b_exact| over the curves.
    pub quadrature_tol: f64,
    pub c_hat: f64,
}

/// Inner and outer radius of the competitor annulus.
pub const COMPETITOR_ANNULUS: (f64, f64) = (0.07, 0.11);

pub fn harmonic_report(
    params: &Params,
    n: usize,
    seed: u64,
    curves: u64,
) -> Result<HarmonicReport, ExperimentError> {
    let (u, _) = compose_tile(params)?;
    let grid = Grid2::new(n, params.half_side)?;
    let a = u.edge_average_gradient(grid);
    let (r_in, r_out) = COMPETITOR_ANNULUS;
    let mask = RegionMask::annulus(grid, DEMO_CORE, r_in, r_out)?;
    let comp = harmonic_competitor(&a, &mask)?;
    let exact = u.gradient_field();
    let (mut defect, mut quad): (f64, f64) = (0.0, 0.0);
    for index in 0..curves {
        let mut rng = instance_rng(seed, Stream::CompetitorCurves, index);
        let gamma = star_polygon(
            &mut rng,
            DEMO_CORE,
            r_in + 0.1 * (r_out - r_in),
            r_out - 0.1 * (r_out - r_in),
        );
        let b_exact = line_integral(&exact, &gamma)?;
        let b_a = line_integral(&a, &gamma)?;
        let b_tilde = line_integral(&comp.field, &gamma)?;
        quad = quad.max((b_a - b_exact).norm());
        defect = defect.max((b_tilde - b_a).norm());
    }
    Ok(HarmonicReport {
        n,
        null_lagrangian: null_lagrangian_check(&a, &comp.field, &mask)?,
        max_laplacian: max_entry_laplacian(&comp.field, &mask, 2),
        max_principle_excess: max_principle_excess(&comp, &mask),
        burgers_defect: defect,
        quadrature_tol: quad,
        c_hat: comp.summary.c_hat,
    })
}

/// Largest excursion of each extended potential at the unknowns beyond the
/// range of the known values adjacent to them.
pub fn max_principle_excess(comp: &HarmonicCompetitor, mask: &RegionMask) -> f64 {
    let grid = mask.grid();
    let n = grid.n();
    let mut worst: f64 = 0.0;
    for (k, ext) in comp.extended.iter().enumerate() {
        let original = &comp.split.potentials[k];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                if !mask.is_interior(i, j) {
                    continue;
                }
                for (a, b) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
                    if !mask.is_interior(a, b) {
                        lo = lo.min(original.at(a, b));
                        hi = hi.max(original.at(a, b));
                    }
                }
            }
        }
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                if mask.is_interior(i, j) {
                    let v = ext.at(i, j);
                    worst = worst.max(v - hi).max(lo - v);
                }
            }
        }
    }
    worst
}

/// Null-Lagrangian residual of the forward-difference gradient of the
/// smooth potential on the annulus 0.3 ≤ |x − (0.05, −0.02)| ≤ 0.7.
pub fn smooth_null_lagrangian(n: usize) -> Result<f64, ExperimentError> {
    let grid = Grid2::new(n, 1.0)?;
    let u1 = ScalarField::from_fn(grid, |p| smooth_potential(p).x);
    let u2 = ScalarField::from_fn(grid, |p| smooth_potential(p).y);
    let [a11, a12] = gradient_forward(&u1);
    let [a21, a22] = gradient_forward(&u2);
    let a = MatrixField::from_components([[&a11, &a12], [&a21, &a22]]);
    let mask = RegionMask::annulus(grid, Vec2::new(0.05, -0.02), 0.3, 0.7)?;
    let comp = harmonic_competitor(&a, &mask)?;
    Ok(null_lagrangian_check(&a, &comp.field, &mask)?)
}

/// Mollified competitor of A_gb at lattice spacing ε on a grid with
/// h ≈ λε/8.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifiedSample {
    pub epsilon: f64,
    pub n: usize,
    pub curl_tol: f64,
    pub report: MollifiedCurlReport,
}

/// Grid size with h ≤ λε/8 on [−L, L]².
pub fn mollifier_grid_size(params: &Params) -> usize {
    (16.0 * params.half_side / params.core_radius()).ceil() as usize + 2
}

pub fn mollified_sample(base: &Params, epsilon: f64) -> Result<MollifiedSample, ExperimentError> {
    let params = base.with_epsilon_alpha(epsilon, base.alpha);
    params.validate()?;
    let (u, cores) = compose_tile(&params)?;
    let n = mollifier_grid_size(&params);
    let grid = Grid2::new(n, params.half_side)?;
    let a = u.average_gradient(grid, crate::field_core::Mat2::IDENTITY);
    let field = mollified_competitor(&a, &cores, &params)?;
    let curl_tol = crate::energies::DEFAULT_CURL_TOL_FACTOR * params.burgers_quantum() / grid.h();
    let report = mollified_curl_report(&field, &cores, &params, curl_tol)?;
    Ok(MollifiedSample {
        epsilon,
        n,
        curl_tol,
        report,
    })
}

/// The two lattice spacings of the mollifier comparison: the largest
/// compatible ε ≤ 1/16 and a quarter of it.
pub fn mollifier_epsilons(base: &Params) -> [f64; 2] {
    let e = compatible_epsilon(base.alpha, base.half_side, base.tau, 1.0 / 16.0);
    [e, e / 4.0]
}

/// max/min of positive values; infinite if any is non-positive.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::instances::demo_params;

    #[test]
    fn spread_of_positive_and_degenerate_values() {
        assert_eq!(spread(&[2.0, 1.0, 4.0]), 4.0);
        assert_eq!(spread(&[1.0, 0.0]), f64::INFINITY);
    }

    #[test]
    fn batteries_count_failures() {
        let b = Battery::run("probe", 4, |i| {
            (i as f64, if i == 2 { Err("odd".into()) } else { Ok(()) })
        });
        assert_eq!((b.passed(), b.failed()), (3, 1));
        assert_eq!(b.first_failure(), Some((2, "odd")));
    }

    #[test]
    fn small_batteries_pass() {
        for b in [
            vitali_battery(1, 20),
            nice_balls_battery(1, 20),
            deg2_battery(1, 20),
            construction_battery(1, 20),
        ] {
            assert_eq!(b.failed(), 0, "{:?}", b.first_failure());
        }
    }

    #[test]
    fn foliation_sample_is_exact_on_the_boundary() {
        let s = foliation_sample(2, 5, 0, 256).unwrap();
        assert_eq!(s.boundary_defect, 0.0);
        assert_eq!(s.plateau_spread, 0.0);
        assert!(s.energy > 0.0 && s.ratio == s.energy / 6.0);
    }

    #[test]
    fn burgers_survey_on_the_demo_boundary() {
        let params = demo_params();
        let (u, cores) = compose_tile(&params).unwrap();
        let s = burgers_survey(&u, &cores, &params, 4, 10, 10, 0.02).unwrap();
        assert!(s.misclassified.is_empty(), "{:?}", s.misclassified);
        assert!(s.worst_core_error < 1e-12 && s.worst_free < 1e-12);
    }

    #[test]
    fn mollifier_grid_resolves_the_core() {
        let p = demo_params();
        let n = mollifier_grid_size(&p);
        assert!(2.0 * p.half_side / (n - 1) as f64 <= p.core_radius() / 8.0);
    }
}
