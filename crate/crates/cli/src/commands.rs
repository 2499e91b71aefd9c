//! One function per subcommand. Parameters are optional so that a config file
//! can supply them; defaults are filled in before the run and echoed in the report.

use std::f64::consts::{E, PI};

use clap::Args;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hardylab_core::besselpair::{
    closed_form_maximizer, improved_weight_auxiliary, integrate_bessel_ode, verify_system, BesselSystem, RadialOdeState,
};
use hardylab_core::geometry::{
    cylindrical_orthogonality, direct_rayleigh, fd_gradient_check, homogeneity_check, measure_homogeneity_check,
    strip_quotient, vandermonde_checks, GaugeModel, GeometryRecord,
};
use hardylab_core::identities::{sample_pair, scalar_identity_breakdown, vector_identity_breakdown, IdentityBreakdown};
use hardylab_core::ode::StepControl;
use hardylab_core::reduce::reduce_radial_functional;
use hardylab_core::sampling::{parallel_batches, random_profiles, DEFAULT_SEED};
use hardylab_core::scenario::{scenario_catalog, MaximizerForm, Scenario, ScenarioKind, ScenarioParams};
use hardylab_core::sharpness::{sweep_quotient, BridgeShape, DEFAULT_EPS_GRID};
use hardylab_core::spectral::{check_lambda1_lower_bound, closed_form_lambda1_p2, first_eigenvalue, AnnulusProblem};
use hardylab_core::weight::Interval;
use hardylab_core::Profile64;

use crate::config::{merge, read_config};
use crate::report::{Cell, Format, Report};
use crate::{Command, Failure, IoArgs};

pub struct Outcome {
    pub report: Report,
    pub default_format: Format,
    /// Names and details of failed checks; empty on success.
    pub failed_checks: Vec<String>,
}

pub fn dispatch(cmd: Command) -> Result<(IoArgs, Outcome), Failure> {
    fn resolve<P: Serialize + serde::de::DeserializeOwned>(io: &IoArgs, p: &P) -> Result<P, Failure> {
        let cfg = io.config.as_deref().map(read_config).transpose()?;
        merge(p, cfg)
    }
    Ok(match cmd {
        Command::Identity { io, params } => {
            let o = identity(resolve(&io, &params)?)?;
            (io, o)
        }
        Command::Bessel { io, params } => {
            let o = bessel(resolve(&io, &params)?)?;
            (io, o)
        }
        Command::Eig { io, params } => {
            let o = eig(resolve(&io, &params)?)?;
            (io, o)
        }
        Command::Sharpness { io, params } => {
            let o = sharpness(resolve(&io, &params)?)?;
            (io, o)
        }
        Command::Geometry { io, params } => {
            let o = geometry(resolve(&io, &params)?)?;
            (io, o)
        }
        Command::Rayleigh { io, params } => {
            let o = rayleigh(resolve(&io, &params)?)?;
            (io, o)
        }
        Command::Catalog { io, params } => {
            let o = catalog(resolve(&io, &params)?)?;
            (io, o)
        }
    })
}

fn config_value<P: Serialize>(p: &P) -> Value {
    serde_json::to_value(p).expect("parameter structs serialize")
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Scenario selection shared by `bessel`, `sharpness` and `rayleigh`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioArgs {
    /// Catalog scenario (see `catalog`).
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gauss_beta: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<f64>,
}

impl ScenarioArgs {
    fn build(&mut self, default: ScenarioKind) -> Result<Scenario<f64>, Failure> {
        let kind: ScenarioKind = match &self.scenario {
            Some(s) => s.parse()?,
            None => default,
        };
        self.scenario = Some(kind.to_string());
        let params = ScenarioParams {
            q: self.q,
            p: self.p,
            theta: self.theta,
            beta: self.beta,
            r_max: self.r_max,
            alpha: self.alpha,
            gauss_beta: self.gauss_beta,
            a: self.a,
            b: self.b,
            m: self.m,
            n: self.n,
        };
        let s: Scenario<f64> = scenario_catalog(kind, &params)?;
        // echo the parameters the catalog actually used
        let used = s.params();
        self.q = used.q;
        self.p = used.p;
        self.theta = used.theta;
        self.beta = used.beta;
        self.r_max = used.r_max;
        self.alpha = used.alpha;
        self.gauss_beta = used.gauss_beta;
        self.a = used.a;
        self.b = used.b;
        self.m = used.m;
        self.n = used.n;
        Ok(s)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityParams {
    /// Exponents p >= 2, comma separated [default: 2,2.5,3,4].
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Complex dimension h of the vectors [default: 1].
    #[arg(long)]
    pub h: Option<usize>,
    /// Pairs per exponent [default: 10000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sampling radius of each complex component [default: 10].
    #[arg(long)]
    pub radius: Option<f64>,
    /// Relative tolerance of the residual [default: 1e-9].
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn identity(mut p: IdentityParams) -> Result<Outcome, Failure> {
    let mut ps = p.p.take().unwrap_or_else(|| vec![2.0, 2.5, 3.0, 4.0]);
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let h = *p.h.get_or_insert(1);
    let samples = *p.samples.get_or_insert(10_000);
    let radius = *p.radius.get_or_insert(10.0);
    let tol = *p.tol.get_or_insert(1e-9);
    let seed = *p.seed.get_or_insert(DEFAULT_SEED);
    p.p = Some(ps.clone());
    if h == 0 {
        return Err(usage("h must be >= 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(usage("radius must be positive"));
    }

    let mut columns = vec!["p".to_string(), "h".to_string()];
    for side in ["f", "g"] {
        for j in 1..=h {
            let suffix = if h == 1 { String::new() } else { j.to_string() };
            columns.push(format!("re_{side}{suffix}"));
            columns.push(format!("im_{side}{suffix}"));
        }
    }
    columns.extend(["residual", "w_term", "wtilde_term"].map(String::from));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut report = Report::new(&cols, config_value(&p));

    let mut max_scaled = 0.0f64;
    let mut min_term = f64::INFINITY;
    let mut failures = Vec::new();
    for (k, &pe) in ps.iter().enumerate() {
        type Sample = (Vec<Complex<f64>>, Vec<Complex<f64>>, IdentityBreakdown<f64>);
        let batches = parallel_batches(samples, seed, (k as u64) << 32, |rng, n| {
            (0..n)
                .map(|i| {
                    let (f, g): (Vec<_>, Vec<_>) = (0..h).map(|_| sample_pair(rng, i, radius)).unzip();
                    let b = if h == 1 {
                        scalar_identity_breakdown(pe, f[0], g[0])
                    } else {
                        vector_identity_breakdown(pe, &f, &g)
                    };
                    b.map(|b| (f, g, b))
                })
                .collect::<hardylab_core::Result<Vec<Sample>>>()
        });
        for batch in batches {
            for (f, g, b) in batch? {
                let scaled = b.residual / (1.0 + b.rhs_closed.abs());
                max_scaled = max_scaled.max(scaled);
                min_term = min_term.min(b.w_term).min(b.wtilde_term);
                let mut row: Vec<Cell> = vec![pe.into(), h.into()];
                for z in f.iter().chain(&g) {
                    row.push(z.re.into());
                    row.push(z.im.into());
                }
                row.extend([b.residual.into(), b.w_term.into(), b.wtilde_term.into()]);
                report.push(row);
            }
        }
    }
    if max_scaled > tol {
        failures.push(format!(
            "remainder identity: max |w + w~ - remainder| / (1 + |remainder|) = {max_scaled:e} exceeds {tol:e}"
        ));
    }
    // terms are integrals of nonnegative functions; allow quadrature noise only
    if min_term < -tol {
        failures.push(format!("nonnegativity of the integral terms: minimum {min_term:e}"));
    }
    report.summary = json!({
        "max_scaled_residual": max_scaled,
        "min_term": min_term,
        "tolerance": tol,
        "pairs": samples * ps.len(),
        "pass": failures.is_empty(),
    });
    Ok(Outcome { report, default_format: Format::Csv, failed_checks: failures })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesselParams {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    /// Start of the integration range [default: inside the scenario interval].
    #[arg(long)]
    pub r0: Option<f64>,
    /// End of the integration range.
    #[arg(long)]
    pub r1: Option<f64>,
    /// Tolerance on the ODE residual and on the closed-form deviation [default: 1e-6].
    #[arg(long)]
    pub tol: Option<f64>,
}

/// One decade inside `interval`, away from its endpoints.
fn default_range(kind: ScenarioKind, iv: &Interval<f64>) -> (f64, f64) {
    // forward integration loses these decaying extremals to the growing solution
    match kind {
        ScenarioKind::GaussianB => return (0.5, 3.0),
        ScenarioKind::ImprovedWeight => return (0.2, 2.0),
        _ => {}
    }
    match (iv.lower > 0.0, iv.upper.is_finite()) {
        (false, false) => (1.0, 10.0),
        (false, true) => (iv.upper * 1e-2, iv.upper * 1e-1),
        (true, false) => (2.0 * iv.lower, 20.0 * iv.lower),
        (true, true) => {
            let w = iv.upper - iv.lower;
            (iv.lower + 0.05 * w, iv.upper - 0.05 * w)
        }
    }
}

fn bessel(mut p: BesselParams) -> Result<Outcome, Failure> {
    let s = p.scenario.build(ScenarioKind::Power)?;
    let (d0, d1) = default_range(s.name, &s.pair.interval);
    let r0 = *p.r0.get_or_insert(d0);
    let r1 = *p.r1.get_or_insert(d1);
    let tol = *p.tol.get_or_insert(1e-6);
    let (system, phi) = if s.name == ScenarioKind::ImprovedWeight {
        improved_weight_auxiliary(s.exponents.q, s.exponents.p)
    } else {
        (BesselSystem::from_scenario(&s), closed_form_maximizer(&s)?)
    };
    let cert = verify_system(&system, &phi, (r0, r1), &s.pair.interval)?;
    let init = RadialOdeState {
        r: r0,
        phi: phi.value(r0),
        momentum: system.momentum(r0, phi.derivative(r0)),
    };
    let traj = integrate_bessel_ode(&system, init, r1, &StepControl::default())?;

    let mut report = Report::new(&["r", "phi", "m", "residual"], config_value(&p));
    for st in &traj.states {
        report.push(vec![st.r.into(), st.phi.into(), st.momentum.into(), system.residual_of(&phi, st.r).into()]);
    }
    let mut failures = Vec::new();
    if !cert.is_positive {
        failures.push(format!("positive solution of the radial equation: min phi = {:e}", cert.min_phi));
    }
    if cert.max_ode_residual > tol {
        failures.push(format!("closed-form solution of the radial equation: residual {:e}", cert.max_ode_residual));
    }
    if cert.max_closed_form_error > tol {
        failures.push(format!(
            "integrated trajectory against the closed form: relative error {:e}",
            cert.max_closed_form_error
        ));
    }
    report.summary = json!({
        "scenario": s.name,
        "is_positive": cert.is_positive,
        "min_phi": cert.min_phi,
        "max_ode_residual": cert.max_ode_residual,
        "max_closed_form_error": cert.max_closed_form_error,
        "tolerance": tol,
        "pass": failures.is_empty(),
    });
    Ok(Outcome { report, default_format: Format::Csv, failed_checks: failures })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigParams {
    /// Homogeneous dimension [default: 3].
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    /// Exponent p >= 2 [default: 2].
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Inner radius, > 0 [default: 1].
    #[arg(long)]
    pub a: Option<f64>,
    /// Outer radius [default: e].
    #[arg(long)]
    pub b: Option<f64>,
    /// Relative bracket width of the bisection [default: 1e-8].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Eigenvalue index, 1 or 2 [default: 1].
    #[arg(long)]
    pub which: Option<usize>,
    /// Also write this many eigenfunction samples (r, phi) as CSV to this path.
    #[arg(long)]
    pub eigenfunction_out: Option<std::path::PathBuf>,
    /// Number of eigenfunction samples [default: 101].
    #[arg(long)]
    pub eigenfunction_points: Option<usize>,
}

fn eig(mut p: EigParams) -> Result<Outcome, Failure> {
    let problem = AnnulusProblem {
        q: *p.q.get_or_insert(3.0),
        p: *p.p.get_or_insert(2.0),
        theta: *p.theta.get_or_insert(1.0),
        a: *p.a.get_or_insert(1.0),
        b: *p.b.get_or_insert(E),
    };
    let tol = *p.tol.get_or_insert(1e-8);
    let which = *p.which.get_or_insert(1);
    if !(1..=2).contains(&which) {
        return Err(usage("--which must be 1 or 2"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(usage("--tol must lie in (0, 1)"));
    }
    problem.validate()?;
    if p.eigenfunction_out.is_some() {
        p.eigenfunction_points.get_or_insert(101);
    }
    let res = first_eigenvalue(&problem, tol, which)?;

    if let Some(path) = &p.eigenfunction_out {
        let n = p.eigenfunction_points.unwrap_or(101).max(2);
        let mut ef = Report::new(&["r", "phi"], Value::Null);
        for i in 0..n {
            let r = problem.a + (problem.b - problem.a) * i as f64 / (n - 1) as f64;
            ef.push(vec![r.into(), res.eigenfunction.value(r).into()]);
        }
        crate::emit_report(&ef, Format::Csv, Some(path), &mut std::io::sink())?;
    }

    let mut report = Report::new(&["lambda", "zero_count", "endpoint_residual"], config_value(&p));
    report.push(vec![res.lambda.into(), res.zero_count.into(), res.endpoint_residual.into()]);
    let mut failures = Vec::new();
    let bound_holds = check_lambda1_lower_bound(&problem, &res);
    if !bound_holds {
        failures.push(format!(
            "eigenvalue lower bound lambda > |(Q - p theta)/p|^p = {:e}: lambda = {:e}",
            problem.hardy_bound(),
            res.lambda
        ));
    }
    if res.zero_count != which - 1 {
        failures.push(format!(
            "nodal count of eigenfunction {which}: {} interior zeros, expected {}",
            res.zero_count,
            which - 1
        ));
    }
    let closed = (problem.p == 2.0 && which == 1)
        .then(|| closed_form_lambda1_p2(problem.q, problem.theta, problem.a, problem.b));
    report.summary = json!({
        "lambda": res.lambda,
        "zero_count": res.zero_count,
        "endpoint_residual": res.endpoint_residual,
        "hardy_bound": problem.hardy_bound(),
        "lower_bound_holds": bound_holds,
        "closed_form_p2": closed,
        "pass": failures.is_empty(),
    });
    Ok(Outcome { report, default_format: Format::Json, failed_checks: failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BridgeArg {
    Cubic,
    Quintic,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessParams {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    /// Strictly decreasing epsilons in (0, 1/4), comma separated [default: 1e-2,1e-3,1e-4].
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Shape of the cut-off bridges [default: quintic].
    #[arg(long, value_enum)]
    pub bridge: Option<BridgeArg>,
}

fn sharpness(mut p: SharpnessParams) -> Result<Outcome, Failure> {
    let s = p.scenario.build(ScenarioKind::Power)?;
    let grid = p.grid.get_or_insert_with(|| DEFAULT_EPS_GRID.to_vec()).clone();
    let shape = match p.bridge.get_or_insert(BridgeArg::Quintic) {
        BridgeArg::Cubic => BridgeShape::Cubic,
        BridgeArg::Quintic => BridgeShape::Quintic,
    };
    let sweep = sweep_quotient(&s, &grid, shape)?;
    let mut report = Report::new(&["epsilon", "quotient", "deficit", "scaled_deficit"], config_value(&p));
    for r in &sweep.rows {
        report.push(vec![r.epsilon.into(), r.quotient.into(), r.deficit.into(), r.scaled_deficit.into()]);
    }
    let mut failures = Vec::new();
    if !sweep.inequality_holds {
        failures.push(format!("{} inequality: a truncated quotient fell below {}", s.name, sweep.sharp_constant));
    }
    if !sweep.stable {
        failures.push(format!(
            "{} sharpness rate: deficit not positive and decreasing, or deficit * ln(1/(4 eps^2)) outside a factor 2",
            s.name
        ));
    }
    report.summary = json!({
        "scenario": sweep.scenario,
        "sharp_constant": sweep.sharp_constant,
        "grid": sweep.grid,
        "stable": sweep.stable,
        "inequality_holds": sweep.inequality_holds,
        "smoothing": sweep.smoothing,
        "derivative_constants": sweep.derivative_constants,
    });
    Ok(Outcome { report, default_format: Format::Csv, failed_checks: failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum GeometryCheck {
    /// gradient, homogeneity, orthogonality (Greiner), measure and rayleigh for the model
    All,
    Gradient,
    Homogeneity,
    Orthogonality,
    Measure,
    Rayleigh,
    Strip,
    Vandermonde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelKind {
    Euclidean,
    Greiner,
    Grushin,
    CylindricalSplit,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryParams {
    /// Gauge model [default: grushin].
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Check to run [default: all].
    #[arg(long, value_enum)]
    pub check: Option<GeometryCheck>,
    /// n of the model (Euclidean dimension, or the x block) [default: 3 Euclidean, 1 otherwise].
    #[arg(long)]
    pub n: Option<usize>,
    /// Size of the y block of the Grushin model [default: 1].
    #[arg(long)]
    pub k: Option<usize>,
    /// Degeneracy exponent gamma [default: 1].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// x block of the cylindrical split [default: 2].
    #[arg(long)]
    pub m: Option<usize>,
    /// Ambient dimension of the cylindrical split, or of the Vandermonde check [default: 3].
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    /// Exponent of |grad_L d| in the measure check [default: 2].
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    /// Relative tolerance of the measure ratio [default: 0.02].
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Monte Carlo samples [default: 1000000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// theta of the strip and Vandermonde checks [default: 1].
    #[arg(long)]
    pub theta: Option<f64>,
    /// Cut-off parameter [default: 1e-3 strip, 1e-2 Vandermonde].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Gauss points per panel of the strip rule [default: 24].
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Sample points of the finite-difference and homogeneity checks.
pub const GEOMETRY_POINTS: usize = 1000;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const HOMOGENEITY_TOL: f64 = 1e-12;
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
pub const HARMONICITY_TOL: f64 = 1e-6;
pub const SPHERE_EIGENVALUE_TOL: f64 = 1e-6;

impl GeometryParams {
    fn model(&mut self) -> GaugeModel<f64> {
        match *self.model.get_or_insert(ModelKind::Grushin) {
            ModelKind::Euclidean => GaugeModel::Euclidean { n: *self.n.get_or_insert(3) },
            ModelKind::Greiner => GaugeModel::Greiner {
                n: *self.n.get_or_insert(1),
                gamma: *self.gamma.get_or_insert(1.0),
            },
            ModelKind::Grushin => GaugeModel::Grushin {
                n: *self.n.get_or_insert(1),
                k: *self.k.get_or_insert(1),
                gamma: *self.gamma.get_or_insert(1.0),
            },
            ModelKind::CylindricalSplit => GaugeModel::CylindricalSplit {
                m: *self.m.get_or_insert(2),
                n_total: *self.big_n.get_or_insert(3),
            },
        }
    }
}

fn record(model: &str, check: &str, estimate: f64, std_error: f64, expected: f64, pass: bool) -> GeometryRecord {
    GeometryRecord {
        model: model.to_string(),
        check: check.to_string(),
        estimate,
        std_error,
        expected,
        pass,
    }
}

/// `sin(pi r)` on `(0, 1)`, the profile of the direct quotient check.
pub fn sine_profile() -> Profile64 {
    Profile64::new(move |r: f64| (PI * r).sin(), move |r: f64| PI * (PI * r).cos(), (0.0, 1.0)).compactly_supported()
}

fn geometry(mut p: GeometryParams) -> Result<Outcome, Failure> {
    let check = *p.check.get_or_insert(GeometryCheck::All);
    let seed = *p.seed.get_or_insert(DEFAULT_SEED);
    let mut records = Vec::new();
    let mut extra = serde_json::Map::new();
    match check {
        GeometryCheck::Strip => {
            let theta = *p.theta.get_or_insert(1.0);
            let eps = *p.epsilon.get_or_insert(1e-3);
            let q = strip_quotient(theta, eps, *p.points.get_or_insert(24))?;
            extra.insert("convergence".into(), json!(q.convergence));
            records.push(record("strip", "strip_quotient", q.quotient, 0.0, q.sharp_constant, q.quotient >= q.sharp_constant));
        }
        GeometryCheck::Vandermonde => {
            let n = *p.big_n.get_or_insert(3);
            let theta = *p.theta.get_or_insert(1.0);
            let eps = *p.epsilon.get_or_insert(1e-2);
            let samples = *p.samples.get_or_insert(1_000_000);
            let v = vandermonde_checks(n, theta, eps, samples, seed)?;
            let name = format!("vandermonde(N={n})");
            records.push(record(&name, "harmonicity", v.harmonicity_residual, 0.0, 0.0, v.harmonicity_residual <= HARMONICITY_TOL));
            let sphere_ok = (v.sphere_eigenvalue - v.expected_eigenvalue).abs() <= SPHERE_EIGENVALUE_TOL * v.expected_eigenvalue;
            records.push(record(&name, "sphere_eigenvalue", v.sphere_eigenvalue, 0.0, v.expected_eigenvalue, sphere_ok));
            let rq = v.rayleigh_quotient;
            records.push(record(
                &name,
                "sector_quotient",
                rq.mean,
                rq.std_error,
                v.expected_constant,
                rq.mean >= v.expected_constant - 3.0 * rq.std_error,
            ));
            extra.insert("reduced_quotient".into(), json!(v.reduced_quotient));
            extra.insert("sphere_eigenvalue_residual".into(), json!(v.sphere_eigenvalue_residual));
        }
        _ => {
            let model = p.model();
            model.validate()?;
            let name = model.to_string();
            let greiner = matches!(model, GaugeModel::Greiner { .. });
            let cylindrical = matches!(model, GaugeModel::CylindricalSplit { .. });
            let run = |c: GeometryCheck| check == c || check == GeometryCheck::All;
            if run(GeometryCheck::Gradient) {
                let e = fd_gradient_check(&model, GEOMETRY_POINTS, seed)?;
                records.push(record(&name, "gradient", e, 0.0, 0.0, e <= GRADIENT_TOL));
            }
            if run(GeometryCheck::Homogeneity) && !cylindrical {
                let e = homogeneity_check(&model, GEOMETRY_POINTS, seed)?;
                records.push(record(&name, "homogeneity", e, 0.0, 0.0, e <= HOMOGENEITY_TOL));
            }
            if run(GeometryCheck::Orthogonality) && (greiner || check == GeometryCheck::Orthogonality) {
                let e = cylindrical_orthogonality(&model, GEOMETRY_POINTS, seed)?;
                records.push(record(&name, "orthogonality", e, 0.0, 0.0, e <= ORTHOGONALITY_TOL));
            }
            if run(GeometryCheck::Measure) && (!cylindrical || check == GeometryCheck::Measure) {
                let alpha = *p.alpha.get_or_insert(2.0);
                let r1 = *p.r1.get_or_insert(1.0);
                let r2 = *p.r2.get_or_insert(2.0);
                let tol = *p.rel_tol.get_or_insert(0.02);
                let samples = *p.samples.get_or_insert(1_000_000);
                let m = measure_homogeneity_check(&model, alpha, r1, r2, samples, seed, tol)?;
                extra.insert("measure_inconclusive".into(), json!(m.inconclusive));
                records.push(record(&name, "measure", m.ratio.mean, m.ratio.std_error, m.expected, m.pass || m.inconclusive));
            }
            if run(GeometryCheck::Rayleigh) && (!cylindrical || check == GeometryCheck::Rayleigh) {
                let samples = *p.samples.get_or_insert(1_000_000);
                let q = model.homogeneous_dimension();
                let s: Scenario<f64> = scenario_catalog(
                    ScenarioKind::Power,
                    &ScenarioParams { q: Some(q), p: Some(2.0), theta: Some(1.0), ..Default::default() },
                )?;
                let phi = sine_profile();
                let exact = reduce_radial_functional(&s, &phi)?.quotient;
                let est = direct_rayleigh(&model, &s, &phi, samples, seed)?;
                let ok = (est.mean - exact).abs() <= 3.0 * est.std_error;
                records.push(record(&name, "rayleigh", est.mean, est.std_error, exact, ok));
            }
        }
    }
    let mut report = Report::new(&["model", "check", "estimate", "std_error", "expected", "pass"], config_value(&p));
    let mut failures = Vec::new();
    for r in &records {
        if !r.pass {
            failures.push(format!("{} {}: estimate {:e}, expected {:e}", r.model, r.check, r.estimate, r.expected));
        }
        report.push(vec![
            r.model.clone().into(),
            r.check.clone().into(),
            r.estimate.into(),
            r.std_error.into(),
            r.expected.into(),
            r.pass.into(),
        ]);
    }
    extra.insert("pass".into(), json!(failures.is_empty()));
    report.summary = Value::Object(extra);
    Ok(Outcome { report, default_format: Format::Json, failed_checks: failures })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayleighParams {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of random profiles [default: 200].
    #[arg(long)]
    pub profiles: Option<usize>,
    /// Relative tolerance below the sharp constant [default: 1e-8].
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn rayleigh(mut p: RayleighParams) -> Result<Outcome, Failure> {
    let s = p.scenario.build(ScenarioKind::Power)?;
    let count = *p.profiles.get_or_insert(200);
    let tol = *p.tol.get_or_insert(1e-8);
    let seed = *p.seed.get_or_insert(DEFAULT_SEED);
    let profiles = random_profiles(&s.pair.interval, count, seed)?;
    let quotients = profiles
        .par_iter()
        .map(|phi| reduce_radial_functional(&s, phi))
        .collect::<hardylab_core::Result<Vec<_>>>()?;
    let c = s.sharp_constant;
    let mut report = Report::new(&["index", "numerator", "denominator", "quotient", "relative_slack"], config_value(&p));
    let mut min_ratio = f64::INFINITY;
    let mut failures = Vec::new();
    for (i, q) in quotients.iter().enumerate() {
        min_ratio = min_ratio.min(q.quotient / c);
        if q.quotient < c * (1.0 - tol) {
            failures.push(format!("{} inequality: profile {i} has quotient {:e} < {c:e}", s.name, q.quotient));
        }
        report.push(vec![
            i.into(),
            q.numerator.value.into(),
            q.denominator.value.into(),
            q.quotient.into(),
            q.relative_slack(c).into(),
        ]);
    }
    report.summary = json!({
        "scenario": s.name,
        "sharp_constant": c,
        "profiles": count,
        "min_quotient_ratio": min_ratio,
        "pass": failures.is_empty(),
    });
    Ok(Outcome { report, default_format: Format::Csv, failed_checks: failures })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogParams {}

fn maximizer_name(m: &MaximizerForm<f64>) -> &'static str {
    match m {
        MaximizerForm::Power { .. } => "power",
        MaximizerForm::LogPower { .. } => "log_power",
        MaximizerForm::Exponential { .. } => "exponential",
        MaximizerForm::AnnulusSine { .. } => "annulus_sine",
        MaximizerForm::Eigenfunction => "eigenfunction",
        MaximizerForm::None => "none",
    }
}

fn catalog(p: CatalogParams) -> Result<Outcome, Failure> {
    let mut report = Report::new(
        &["scenario", "Q", "p", "theta", "beta", "sharp_constant", "lower", "upper", "maximizer"],
        config_value(&p),
    );
    for kind in ScenarioKind::ALL {
        let s: Scenario<f64> = scenario_catalog(kind, &ScenarioParams::default())?;
        let e = &s.exponents;
        report.push(vec![
            kind.as_str().into(),
            e.q.into(),
            e.p.into(),
            e.theta.into(),
            e.beta.into(),
            s.sharp_constant.into(),
            s.pair.interval.lower.into(),
            s.pair.interval.upper.into(),
            maximizer_name(&s.maximizer).into(),
        ]);
    }
    report.summary = json!({ "scenarios": ScenarioKind::ALL.len() });
    Ok(Outcome { report, default_format: Format::Json, failed_checks: Vec::new() })
}
