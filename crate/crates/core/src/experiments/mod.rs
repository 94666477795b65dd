//! Experiment runner: JSON configuration, the five canonical experiments and
//! their CSV and gnuplot `.dat` artifacts. Outputs depend only on the
//! configuration and the seed, so reruns are byte-identical.

pub mod checks;
pub mod instances;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::competitors::CompetitorError;
use crate::coverings::{density_trace, CoveringError, DEFAULT_DELTA0};
use crate::field_core::{FieldError, Grid2, Mat2, Params, Vec2};
use crate::foliation::FoliationError;
use crate::grain_boundary::{compatible_epsilon, compose_tile, gb_scan, GrainBoundaryError};

use checks::{
    construction_battery, deg2_battery, foliation_sample, harmonic_report, mollified_sample,
    mollifier_epsilons, nice_balls_battery, spread, vitali_battery, Battery, DEMO_CORE,
};

/// Failures of a run. Usage and configuration problems map to exit status 2,
/// everything else to 1.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    GrainBoundary(#[from] GrainBoundaryError),
    #[error(transparent)]
    Covering(#[from] CoveringError),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error(transparent)]
    Competitor(#[from] CompetitorError),
}

impl ExperimentError {
    pub fn exit_code(&self) -> u8 {
        match self {
            ExperimentError::Usage(_) | ExperimentError::Config(_) | ExperimentError::Io { .. } => {
                2
            }
            _ => 1,
        }
    }
}

/// The canonical experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    GbScan,
    CoveringsSuite,
    FoliateDemo,
    Competitor,
    DensityTrace,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::GbScan,
        Experiment::CoveringsSuite,
        Experiment::FoliateDemo,
        Experiment::Competitor,
        Experiment::DensityTrace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::GbScan => "gb-scan",
            Experiment::CoveringsSuite => "coverings-suite",
            Experiment::FoliateDemo => "foliate-demo",
            Experiment::Competitor => "competitor",
            Experiment::DensityTrace => "density-trace",
        }
    }
}

impl FromStr for Experiment {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                ExperimentError::Usage(format!(
                    "unknown experiment '{s}'; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Physical parameters; missing entries take the demonstration values and a
/// missing ε is the largest compatible ε ≤ `epsilon_max`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub half_side: Option<f64>,
    pub tau: Option<f64>,
    pub lambda: Option<f64>,
    pub band_width: Option<f64>,
}

/// Optional overrides of the default assertion thresholds.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest admissible max/min of the grain-boundary ratio (default 4).
    pub ratio_spread: Option<f64>,
    /// Largest admissible max/min of energy/(1 + N); unchecked when absent.
    pub foliation_ratio_spread: Option<f64>,
    /// Largest undivided five-point stencil of the harmonic competitor
    /// (default 1e−6).
    pub laplacian: Option<f64>,
    /// Admissible |b(Ã) − b(A)| in units of the quadrature tolerance
    /// (default 2).
    pub burgers_invariance: Option<f64>,
}

/// Window B(p, 2R) ∖ B(p, R) of the density trace.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

/// JSON experiment configuration. Unknown keys are rejected at every level.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the experiment named on the command line when present.
    pub experiment: Option<String>,
    pub params: Option<ParamsConfig>,
    /// Misorientation sweep of `gb-scan`.
    pub alphas: Option<Vec<f64>>,
    /// Grid sizes: `competitor` sweeps them, `foliate-demo` and
    /// `density-trace` use the first.
    pub resolutions: Option<Vec<usize>>,
    /// Ball counts of `foliate-demo`.
    pub ball_counts: Option<Vec<usize>>,
    /// Lattice spacings of the mollified competitor.
    pub epsilons: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Instances per battery or per ball count.
    pub instances: Option<u64>,
    /// Curves for the Burgers invariance check.
    pub curves: Option<u64>,
    pub output_dir: Option<PathBuf>,
    /// Upper bound on ε for compatible-ε selection.
    pub epsilon_max: Option<f64>,
    pub steps: Option<usize>,
    pub delta0: Option<f64>,
    pub window: Option<WindowConfig>,
    pub tolerances: Option<Tolerances>,
}

impl ExperimentConfig {
    /// Parses JSON text. Blank text and `{}` are usage errors.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let value: serde_json::Value = if text.trim().is_empty() {
            serde_json::Value::Object(Default::default())
        } else {
            serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?
        };
        if value.as_object().is_some_and(|o| o.is_empty()) {
            return Err(ExperimentError::Usage("configuration is empty".into()));
        }
        serde_json::from_value(value).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ExperimentError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn params(&self) -> Result<Params, ExperimentError> {
        let pc = self.params.clone().unwrap_or_default();
        let alpha = pc.alpha.unwrap_or(1.0 / 16.0);
        let half_side = pc.half_side.unwrap_or(1.0);
        let tau = pc.tau.unwrap_or(1.0);
        let epsilon = pc.epsilon.unwrap_or_else(|| {
            compatible_epsilon(
                alpha,
                half_side,
                tau,
                self.epsilon_max.unwrap_or(1.0 / 32.0),
            )
        });
        Params::new(
            epsilon,
            alpha,
            half_side,
            tau,
            pc.lambda.unwrap_or(1.0),
            pc.band_width.unwrap_or(0.2),
        )
        .map_err(|e| ExperimentError::Config(e.to_string()))
    }

    fn tolerances(&self) -> Tolerances {
        self.tolerances.clone().unwrap_or_default()
    }
}

/// One tabular artifact, written as `<name>.csv` and `<name>.dat`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// A violated invariant, named for the report.
#[derive(Debug, Clone, PartialEq)]
pub struct AssertionFailure {
    pub name: String,
    pub detail: String,
}

/// Tables, human-readable summary lines and failed assertions of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: Experiment,
    pub seed: u64,
    pub tables: Vec<Table>,
    pub summary: Vec<String>,
    pub failures: Vec<AssertionFailure>,
}

impl RunReport {
    fn new(experiment: Experiment, seed: u64) -> Self {
        RunReport {
            experiment,
            seed,
            tables: Vec::new(),
            summary: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(AssertionFailure {
                name: name.to_string(),
                detail: detail(),
            });
        }
    }

    fn battery(&mut self, battery: &Battery) {
        self.summary.push(format!(
            "{}: {} passed, {} failed",
            battery.name,
            battery.passed(),
            battery.failed()
        ));
        if let Some((index, reason)) = battery.first_failure() {
            self.failures.push(AssertionFailure {
                name: battery.name.to_string(),
                detail: format!("instance {index}: {reason}"),
            });
        }
    }

    /// Comment line opening every artifact.
    pub fn header_line(&self) -> String {
        format!("# dislab {} seed={}", self.experiment.name(), self.seed)
    }

    /// CSV text of `table`.
    pub fn csv(&self, table: &Table) -> String {
        let mut out = format!("{}\n{}\n", self.header_line(), table.header.join(","));
        for row in &table.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Whitespace-separated text of `table` with a commented header.
    pub fn dat(&self, table: &Table) -> String {
        let mut out = format!("{}\n# {}\n", self.header_line(), table.header.join(" "));
        for row in &table.rows {
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    /// Writes every table into `dir`, creating it if needed, and returns the
    /// written paths in order.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ExperimentError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        for table in &self.tables {
            for (ext, text) in [("csv", self.csv(table)), ("dat", self.dat(table))] {
                let path = dir.join(format!("{}.{ext}", table.name));
                std::fs::write(&path, text).map_err(io(&path))?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// Runs `experiment` with `config`; `seed` overrides the configured seed.
pub fn run(
    experiment: Experiment,
    config: &ExperimentConfig,
    seed: Option<u64>,
) -> Result<RunReport, ExperimentError> {
    if let Some(name) = &config.experiment {
        if name != experiment.name() {
            return Err(ExperimentError::Usage(format!(
                "config is for '{name}' but '{}' was requested",
                experiment.name()
            )));
        }
    }
    let seed = seed.or(config.seed).unwrap_or(0);
    let mut report = RunReport::new(experiment, seed);
    match experiment {
        Experiment::GbScan => run_gb_scan(config, &mut report)?,
        Experiment::CoveringsSuite => run_coverings(config, &mut report),
        Experiment::FoliateDemo => run_foliate(config, &mut report)?,
        Experiment::Competitor => run_competitor(config, &mut report)?,
        Experiment::DensityTrace => run_density(config, &mut report)?,
    }
    Ok(report)
}

/// Default misorientation sweep 2⁻³ … 2⁻⁸.
pub fn default_alphas() -> Vec<f64> {
    (3..=8).map(|k| 0.5f64.powi(k)).collect()
}

fn positive(values: &[f64], what: &str) -> Result<(), ExperimentError> {
    match values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        Some(v) => Err(ExperimentError::Config(format!(
            "{what} entry {v} must be finite and positive"
        ))),
        None => Ok(()),
    }
}

fn run_gb_scan(config: &ExperimentConfig, report: &mut RunReport) -> Result<(), ExperimentError> {
    let alphas = config.alphas.clone().unwrap_or_else(default_alphas);
    positive(&alphas, "alphas")?;
    let base = config.params()?;
    let rows = gb_scan(&alphas, &base, config.epsilon_max.unwrap_or(1.0 / 1024.0))?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let limit = config.tolerances().ratio_spread.unwrap_or(4.0);
    let s = spread(&ratios);
    report.summary.push(format!(
        "gb-scan: {} angles, ratio max/min = {s:.4} (limit {limit})",
        rows.len()
    ));
    report.check("ratio positive", ratios.iter().all(|r| *r > 0.0), || {
        format!("{ratios:?}")
    });
    report.check("ratio spread", s <= limit, || {
        format!("max/min = {s} > {limit}")
    });
    report.tables.push(Table {
        name: "gb_scan".into(),
        header: vec!["alpha", "E_el", "E_core", "F", "ratio"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    num(r.alpha),
                    num(r.e_el),
                    num(r.e_core),
                    num(r.f),
                    num(r.ratio),
                ]
            })
            .collect(),
    });
    Ok(())
}

fn run_coverings(config: &ExperimentConfig, report: &mut RunReport) {
    let count = config.instances.unwrap_or(1000);
    let seed = report.seed;
    let batteries = [
        vitali_battery(seed, count),
        nice_balls_battery(seed, count),
        deg2_battery(seed, count),
        construction_battery(seed, count),
    ];
    let mut rows = Vec::new();
    for battery in &batteries {
        report.battery(battery);
        for o in &battery.outcomes {
            rows.push(vec![
                battery.name.to_string(),
                o.index.to_string(),
                u8::from(o.failure.is_none()).to_string(),
                num(o.metric),
            ]);
        }
    }
    report.tables.push(Table {
        name: "coverings_suite".into(),
        header: vec!["battery", "instance", "passed", "metric"],
        rows,
    });
}

/// Default ball counts 0, 1, 2, 4, …, 64.
pub fn default_ball_counts() -> Vec<usize> {
    std::iter::once(0).chain((0..=6).map(|k| 1 << k)).collect()
}

fn run_foliate(config: &ExperimentConfig, report: &mut RunReport) -> Result<(), ExperimentError> {
    let counts = config
        .ball_counts
        .clone()
        .unwrap_or_else(default_ball_counts);
    let per_count = config.instances.unwrap_or(2);
    let grid_n = config
        .resolutions
        .as_ref()
        .and_then(|r| r.first().copied())
        .unwrap_or(512);
    let mut samples = Vec::new();
    for &count in &counts {
        for index in 0..per_count {
            samples.push(foliation_sample(report.seed, count, index, grid_n)?);
        }
    }
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    let constant = ratios.iter().cloned().fold(0.0, f64::max);
    let s = spread(&ratios);
    report.summary.push(format!(
        "foliate-demo: {} instances, energy/(1+N) <= {constant:.4}, max/min = {s:.4}",
        samples.len()
    ));
    for sample in &samples {
        let tag = format!("N={} instance {}", sample.count, sample.index);
        report.check("boundary values", sample.boundary_defect == 0.0, || {
            format!("{tag}: defect {}", sample.boundary_defect)
        });
        report.check("plateau spread", sample.plateau_spread == 0.0, || {
            format!("{tag}: spread {}", sample.plateau_spread)
        });
    }
    if let Some(limit) = config.tolerances().foliation_ratio_spread {
        report.check("energy ratio spread", s <= limit, || {
            format!("max/min = {s} > {limit}")
        });
    }
    report.tables.push(Table {
        name: "foliate_demo".into(),
        header: vec![
            "N",
            "instance",
            "energy",
            "ratio",
            "lipschitz_bound",
            "plateau_spread",
            "boundary_defect",
        ],
        rows: samples
            .iter()
            .map(|s| {
                vec![
                    s.count.to_string(),
                    s.index.to_string(),
                    num(s.energy),
                    num(s.ratio),
                    num(s.lipschitz_bound),
                    num(s.plateau_spread),
                    num(s.boundary_defect),
                ]
            })
            .collect(),
    });
    Ok(())
}

fn run_competitor(
    config: &ExperimentConfig,
    report: &mut RunReport,
) -> Result<(), ExperimentError> {
    let params = config.params()?;
    let resolutions = config.resolutions.clone().unwrap_or_else(|| vec![256, 512]);
    let curves = config.curves.unwrap_or(20);
    let tol = config.tolerances();
    let lap_limit = tol.laplacian.unwrap_or(1e-6);
    let invariance = tol.burgers_invariance.unwrap_or(2.0);
    let mut rows = Vec::new();
    for &n in &resolutions {
        let r = harmonic_report(&params, n, report.seed, curves)?;
        let tag = format!("n={n}");
        report.check(
            "discrete maximum principle",
            r.max_principle_excess == 0.0,
            || format!("{tag}: excess {}", r.max_principle_excess),
        );
        report.check("harmonic entries", r.max_laplacian <= lap_limit, || {
            format!("{tag}: stencil {} > {lap_limit}", r.max_laplacian)
        });
        report.check(
            "Burgers invariance",
            r.burgers_defect <= invariance * r.quadrature_tol,
            || {
                format!(
                    "{tag}: {} > {invariance} x {}",
                    r.burgers_defect, r.quadrature_tol
                )
            },
        );
        report.summary.push(format!(
            "harmonic n={n}: null-Lagrangian {:.3e}, stencil {:.3e}, Burgers {:.3e} (tol {:.3e}), C_hat {:.4}",
            r.null_lagrangian, r.max_laplacian, r.burgers_defect, r.quadrature_tol, r.c_hat
        ));
        rows.push(vec![
            n.to_string(),
            num(r.null_lagrangian),
            num(r.max_laplacian),
            num(r.max_principle_excess),
            num(r.burgers_defect),
            num(r.quadrature_tol),
            num(r.c_hat),
        ]);
    }
    report.tables.push(Table {
        name: "competitor_harmonic".into(),
        header: vec![
            "n",
            "null_lagrangian",
            "max_laplacian",
            "max_principle_excess",
            "burgers_defect",
            "quadrature_tol",
            "C_hat",
        ],
        rows,
    });
    let epsilons = match &config.epsilons {
        Some(e) => {
            positive(e, "epsilons")?;
            e.clone()
        }
        None => mollifier_epsilons(&params).to_vec(),
    };
    let mut rows = Vec::new();
    for &eps in &epsilons {
        let m = mollified_sample(&params, eps)?;
        let r = &m.report;
        report.check("curl support", r.support_ok, || {
            format!(
                "epsilon={eps}: |curl| {} outside B_3(S) exceeds {}",
                r.max_outside, m.curl_tol
            )
        });
        report.summary.push(format!(
            "mollified eps={eps:.6} n={}: C_hat {:.4}, outside {:.3} (tol {:.3})",
            m.n, r.c_hat, r.max_outside, m.curl_tol
        ));
        rows.push(vec![
            num(eps),
            m.n.to_string(),
            num(r.sup_curl),
            num(r.c_hat),
            num(r.max_outside),
            num(m.curl_tol),
            u8::from(r.support_ok).to_string(),
            num(r.total_variation),
            num(r.tv_ratio),
        ]);
    }
    report.tables.push(Table {
        name: "competitor_mollified".into(),
        header: vec![
            "epsilon",
            "n",
            "sup_curl",
            "C_hat",
            "max_outside",
            "curl_tol",
            "support_ok",
            "total_variation",
            "tv_ratio",
        ],
        rows,
    });
    Ok(())
}

fn run_density(config: &ExperimentConfig, report: &mut RunReport) -> Result<(), ExperimentError> {
    let params = config.params()?;
    let n = config
        .resolutions
        .as_ref()
        .and_then(|r| r.first().copied())
        .unwrap_or(513);
    let (p, big_r) = match &config.window {
        Some(w) => (Vec2::new(w.center[0], w.center[1]), w.radius),
        None => (DEMO_CORE, 0.25),
    };
    let (u, cores) = compose_tile(&params)?;
    let grid = Grid2::new(n, params.half_side)?;
    let a = u.average_gradient(grid, Mat2::IDENTITY);
    let steps = config.steps.unwrap_or(4);
    let records = density_trace(
        &a,
        &cores,
        &params,
        p,
        big_r,
        config.delta0.unwrap_or(DEFAULT_DELTA0),
        steps,
    )?;
    report.check(
        "finite trace",
        records
            .iter()
            .all(|r| r.tau_k.is_finite() && r.c_hat.is_finite() && r.sum_radii.is_finite()),
        || "non-finite record".into(),
    );
    if let Some(last) = records.last() {
        report.summary.push(format!(
            "density-trace: {} steps, final tau_k {:.4e}, C_hat {:.4e}",
            steps, last.tau_k, last.c_hat
        ));
    }
    report.tables.push(Table {
        name: "density_trace".into(),
        header: vec!["k", "tau_k", "n_k", "sum_radii", "C_hat"],
        rows: records
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    num(r.tau_k),
                    r.n_k.to_string(),
                    num(r.sum_radii),
                    num(r.c_hat),
                ]
            })
            .collect(),
    });
    Ok(())
}
