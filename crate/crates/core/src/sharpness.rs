//! Cut-off families and epsilon-sweeps of Rayleigh quotients toward sharp constants.
//!
//! The truncated extremal `u_eps = phi * g_eps` has reduced integrals that grow like
//! `ln(1/(4 eps^2))`, so `quotient - C` decays like the reciprocal of that logarithm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::quadrature::integrate_piecewise;
use crate::reduce::{reduce_problem, reduce_radial_functional, reduction_options, ReducedProblem};
use crate::sampling::random_profiles;
use crate::scalar::{lit, to_f64, Real};
use crate::scenario::{scenario_catalog, MaximizerForm, Scenario, ScenarioKind, ScenarioParams};

/// Monotone bridge `S: [0,1] -> [0,1]` with `S(0) = 0`, `S(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeShape {
    /// `3t^2 - 2t^3`, C1 at the junctions.
    Cubic,
    /// `6t^5 - 15t^4 + 10t^3`, C2 at the junctions.
    #[default]
    Quintic,
}

impl BridgeShape {
    pub fn eval<T: Real>(self, t: T) -> (T, T) {
        let t = t.max(T::zero()).min(T::one());
        match self {
            BridgeShape::Cubic => {
                let s = t * t * (lit::<T>(3.0) - lit::<T>(2.0) * t);
                let d = lit::<T>(6.0) * t * (T::one() - t);
                (s, d)
            }
            BridgeShape::Quintic => {
                let t3 = t * t * t;
                let s = t3 * (t * (t * lit(6.0) - lit(15.0)) + lit(10.0));
                let d = lit::<T>(30.0) * t * t * (t - T::one()) * (t - T::one());
                (s, d)
            }
        }
    }

    /// `max |S'|`.
    pub fn max_slope(self) -> f64 {
        match self {
            BridgeShape::Cubic => 1.5,
            BridgeShape::Quintic => 15.0 / 8.0,
        }
    }

    /// Constants `c` in `|g'| <= c/eps` on the inner bridge and `|g'| <= c eps` on the outer one.
    pub fn derivative_constants(self) -> (f64, f64) {
        (self.max_slope(), 2.0 * self.max_slope())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    /// `g_eps(r)`: 0 off `(eps, 1/eps)`, 1 on `[2 eps, 1/(2 eps)]`.
    PlainGEps,
    /// `g_eps(ln(R/r))`.
    LogGEps,
    /// Piecewise logarithmic Lipschitz cut-off with knots `1/R^2, 1/R, R, R^2`.
    PsiR,
    /// Even cut-off on `(-pi/2, pi/2)`: 1 for `|x| <= (pi/2)/(2 eps + 1)`, 0 beyond `(pi/2)/(eps + 1)`.
    StripFEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec<T> {
    pub kind: CutoffKind,
    /// `eps` for the g and f families, `R` for `PsiR`.
    pub epsilon_or_r: T,
    pub smoothing: BridgeShape,
    /// Outer radius `R` of the logarithmic variant.
    pub log_radius: T,
}

impl<T: Real> CutoffSpec<T> {
    pub fn new(kind: CutoffKind, epsilon_or_r: T) -> Self {
        Self {
            kind,
            epsilon_or_r,
            smoothing: BridgeShape::Quintic,
            log_radius: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let x = self.epsilon_or_r;
        let ok = match self.kind {
            CutoffKind::PlainGEps | CutoffKind::LogGEps => x > T::zero() && x < lit(0.5),
            CutoffKind::StripFEps => x > T::zero() && x.is_finite(),
            CutoffKind::PsiR => x > T::one() && x.is_finite(),
        };
        if !ok {
            return Err(Error::ParameterDomain(format!(
                "{:?} cut-off parameter {x} out of range",
                self.kind
            )));
        }
        if self.kind == CutoffKind::LogGEps && !(self.log_radius > T::zero() && self.log_radius.is_finite()) {
            return Err(Error::ParameterDomain(format!("log radius {} must be positive", self.log_radius)));
        }
        Ok(())
    }
}

/// Builds the cut-off described by `spec`.
pub fn make_cutoff<T: Real>(spec: &CutoffSpec<T>) -> Result<Profile<T>> {
    spec.validate()?;
    let x = spec.epsilon_or_r;
    match spec.kind {
        CutoffKind::PlainGEps => Ok(g_eps(x, spec.smoothing)),
        CutoffKind::LogGEps => g_eps(x, spec.smoothing).compose_log(spec.log_radius),
        CutoffKind::PsiR => Ok(psi_r(x)),
        CutoffKind::StripFEps => Ok(strip_f_eps(x, spec.smoothing)),
    }
}

fn g_eps<T: Real>(eps: T, shape: BridgeShape) -> Profile<T> {
    let two: T = lit(2.0);
    let inner_end = two * eps;
    let outer_start = T::one() / (two * eps);
    let end = T::one() / eps;
    let value = move |r: T| {
        if r <= eps || r >= end {
            T::zero()
        } else if r < inner_end {
            shape.eval((r - eps) / eps).0
        } else if r <= outer_start {
            T::one()
        } else {
            shape.eval(two - two * eps * r).0
        }
    };
    let derivative = move |r: T| {
        if r <= eps || r >= end {
            T::zero()
        } else if r < inner_end {
            shape.eval((r - eps) / eps).1 / eps
        } else if r <= outer_start {
            T::zero()
        } else {
            -two * eps * shape.eval(two - two * eps * r).1
        }
    };
    Profile::new(value, derivative, (eps, end))
        .compactly_supported()
        .with_knots([inner_end, outer_start])
}

fn psi_r<T: Real>(big_r: T) -> Profile<T> {
    let l = big_r.ln();
    let (k0, k1, k2, k3) = (T::one() / (big_r * big_r), T::one() / big_r, big_r, big_r * big_r);
    let two: T = lit(2.0);
    let value = move |r: T| {
        if r < k0 || r > k3 {
            T::zero()
        } else if r < k1 {
            two + r.ln() / l
        } else if r <= k2 {
            T::one()
        } else {
            two - r.ln() / l
        }
    };
    let derivative = move |r: T| {
        if r < k0 || r > k3 {
            T::zero()
        } else if r < k1 {
            T::one() / (r * l)
        } else if r <= k2 {
            T::zero()
        } else {
            -T::one() / (r * l)
        }
    };
    Profile::new(value, derivative, (k0, k3))
        .compactly_supported()
        .with_knots([k1, k2])
}

fn strip_f_eps<T: Real>(eps: T, shape: BridgeShape) -> Profile<T> {
    let half_pi = T::FRAC_PI_2();
    let x1 = half_pi / (lit::<T>(2.0) * eps + T::one());
    let x2 = half_pi / (eps + T::one());
    let w = x2 - x1;
    let value = move |x: T| {
        let a = x.abs();
        if a <= x1 {
            T::one()
        } else if a >= x2 {
            T::zero()
        } else {
            shape.eval((x2 - a) / w).0
        }
    };
    let derivative = move |x: T| {
        let a = x.abs();
        if a <= x1 || a >= x2 {
            T::zero()
        } else {
            -x.signum() * shape.eval((x2 - a) / w).1 / w
        }
    };
    Profile::new(value, derivative, (-x2, x2))
        .compactly_supported()
        .with_knots([-x1, x1])
}

/// The three integrals controlled by the cut-off bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffIntegrals<T> {
    /// `int r^{-1} g^p dr`.
    pub log_mass: T,
    /// `int g^{p-1} |g'| dr`.
    pub cross: T,
    /// `int r^{p-1} |g'|^p dr`.
    pub energy: T,
}

/// Integrals of the plain cut-off; `log_mass + ln(4 eps^2)` stays bounded.
pub fn cutoff_integrals<T: Real>(eps: T, p: T, shape: BridgeShape) -> Result<CutoffIntegrals<T>> {
    let g = make_cutoff(&CutoffSpec { smoothing: shape, ..CutoffSpec::new(CutoffKind::PlainGEps, eps) })?;
    let pts = g.breakpoints();
    let (lo, hi) = g.support();
    let opts = reduction_options::<T>();
    let log_mass = integrate_piecewise(|r| g.value(r).powf(p) / r, lo, hi, &pts, &opts)?.value;
    let cross = integrate_piecewise(|r| g.value(r).powf(p - T::one()) * g.derivative(r).abs(), lo, hi, &pts, &opts)?.value;
    let energy = integrate_piecewise(|r| r.powf(p - T::one()) * g.derivative(r).abs().powf(p), lo, hi, &pts, &opts)?.value;
    Ok(CutoffIntegrals { log_mass, cross, energy })
}

/// Integrals of the logarithmic cut-off in `r`: `int r^{-1} g^p / ln(R/r)`,
/// `int r^{-1} g^{p-1} |g'|`, `int r^{-1} ln(R/r)^{p-1} |g'|^p`, all over `(0, R)`.
pub fn log_cutoff_integrals<T: Real>(eps: T, p: T, big_r: T, shape: BridgeShape) -> Result<CutoffIntegrals<T>> {
    let g = g_eps(eps, shape);
    if !(big_r * (-T::one() / eps).exp() > T::zero()) {
        return Err(Error::ParameterDomain(format!(
            "R exp(-1/eps) underflows for eps = {eps}"
        )));
    }
    let spec = CutoffSpec { smoothing: shape, log_radius: big_r, ..CutoffSpec::new(CutoffKind::LogGEps, eps) };
    let pts = make_cutoff(&spec)?.breakpoints();
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    let opts = reduction_options::<T>();
    let t = move |r: T| (big_r / r).ln();
    let log_mass = integrate_piecewise(|r| g.value(t(r)).powf(p) / (r * t(r)), lo, hi, &pts, &opts)?.value;
    let cross = integrate_piecewise(
        |r| g.value(t(r)).powf(p - T::one()) * g.derivative(t(r)).abs() / r,
        lo,
        hi,
        &pts,
        &opts,
    )?
    .value;
    let energy = integrate_piecewise(
        |r| t(r).powf(p - T::one()) * g.derivative(t(r)).abs().powf(p) / r,
        lo,
        hi,
        &pts,
        &opts,
    )?
    .value;
    Ok(CutoffIntegrals { log_mass, cross, energy })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub epsilon: T,
    pub quotient: T,
    /// `quotient - sharp_constant`.
    pub deficit: T,
    /// `deficit * ln(1/(4 eps^2))`.
    pub scaled_deficit: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport<T> {
    pub scenario: ScenarioKind,
    pub sharp_constant: T,
    pub grid: Vec<T>,
    pub rows: Vec<SweepRow<T>>,
    /// Deficits positive and nonincreasing, scaled deficits within a factor 2.
    pub stable: bool,
    /// Every quotient is at least `sharp_constant - 1e-9`.
    pub inequality_holds: bool,
    pub smoothing: BridgeShape,
    /// `(c_inner, c_outer)` of the derivative bounds.
    pub derivative_constants: (f64, f64),
}

pub const DEFAULT_EPS_GRID: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Reduced problem and truncated extremal for one `eps`.
fn truncated_extremal<T: Real>(scenario: &Scenario<T>, eps: T, shape: BridgeShape) -> Result<(ReducedProblem<T>, Profile<T>)> {
    let g = make_cutoff(&CutoffSpec { smoothing: shape, ..CutoffSpec::new(CutoffKind::PlainGEps, eps) })?;
    let full = (T::zero(), T::infinity());
    match scenario.maximizer {
        MaximizerForm::Power { exponent } => Ok((scenario.reduced_problem(), Profile::power_law(exponent, full).product(&g)?)),
        MaximizerForm::LogPower { exponent, .. } => {
            // In t = ln(R/r) the extremal is t^exponent and the cut-off is g_eps(t).
            Ok((scenario.log_reduced_problem()?, Profile::power_law(exponent, full).product(&g)?))
        }
        MaximizerForm::Exponential { coef, power } => {
            Ok((scenario.reduced_problem(), Profile::exponential(coef, power, full).product(&g)?))
        }
        _ => Err(Error::Unsupported(format!(
            "{} has no closed-form extremal to truncate",
            scenario.name
        ))),
    }
}

/// Rayleigh quotients of `extremal * g_eps` over a decreasing grid in `(0, 1/4)`.
pub fn sweep_quotient<T: Real>(scenario: &Scenario<T>, eps_grid: &[T], shape: BridgeShape) -> Result<SweepReport<T>> {
    if eps_grid.is_empty() {
        return Err(Error::ParameterDomain("empty epsilon grid".into()));
    }
    if eps_grid.iter().any(|e| !(*e > T::zero() && *e < lit(0.25))) {
        return Err(Error::ParameterDomain("epsilon values must lie in (0, 1/4)".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::ParameterDomain("epsilon grid must be strictly decreasing".into()));
    }
    let c = scenario.sharp_constant;
    let rows = eps_grid
        .par_iter()
        .map(|&eps| {
            let (problem, phi) = truncated_extremal(scenario, eps, shape)?;
            let q = reduce_problem(&problem, &phi)?.quotient;
            let deficit = q - c;
            let log = -(lit::<T>(4.0) * eps * eps).ln();
            Ok(SweepRow {
                epsilon: eps,
                quotient: q,
                deficit,
                scaled_deficit: deficit * log,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tol: T = lit(1e-9);
    let inequality_holds = rows.iter().all(|r| r.quotient >= c - tol);
    Ok(SweepReport {
        scenario: scenario.name,
        sharp_constant: c,
        grid: eps_grid.to_vec(),
        stable: sweep_is_stable(&rows),
        inequality_holds,
        rows,
        smoothing: shape,
        derivative_constants: shape.derivative_constants(),
    })
}

/// Positive nonincreasing deficits whose scaled values agree within a factor 2.
pub fn sweep_is_stable<T: Real>(rows: &[SweepRow<T>]) -> bool {
    if rows.is_empty() {
        return false;
    }
    let positive = rows.iter().all(|r| r.deficit > T::zero());
    let decreasing = rows.windows(2).all(|w| w[1].deficit <= w[0].deficit);
    positive && decreasing && within_factor(rows.iter().map(|r| r.scaled_deficit), lit(2.0))
}

/// `max / min <= factor` for positive values.
pub fn within_factor<T: Real>(values: impl Iterator<Item = T>, factor: T) -> bool {
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    lo > T::zero() && hi <= factor * lo
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiRow<T> {
    #[serde(rename = "R")]
    pub r: T,
    /// `int r psi_R'^2 dr`, equal to `2 / ln R`.
    pub psi_energy: T,
    pub deficit: T,
    pub scaled_deficit: T,
}

/// Hardy deficit of `u_R = r^{-(Q-p)/p} psi_R` for the weights `V = 1`, `W = r^{-p}`.
pub fn psi_r_deficit<T: Real>(q: T, p: T, r_grid: &[T]) -> Result<Vec<PsiRow<T>>> {
    let params = ScenarioParams {
        q: Some(to_f64(q)),
        p: Some(to_f64(p)),
        theta: Some(1.0),
        ..Default::default()
    };
    let scenario: Scenario<T> = scenario_catalog(ScenarioKind::Power, &params)?;
    let c = scenario.sharp_constant;
    let gamma = -(q - p) / p;
    r_grid
        .par_iter()
        .map(|&big_r| {
            let psi = make_cutoff(&CutoffSpec::new(CutoffKind::PsiR, big_r))?;
            let (lo, hi) = psi.support();
            let pts = psi.breakpoints();
            let psi_energy = integrate_piecewise(
                |r| r * psi.derivative(r).powi(2),
                lo,
                hi,
                &pts,
                &reduction_options::<T>(),
            )?
            .value;
            let u = Profile::power_law(gamma, (T::zero(), T::infinity())).product(&psi)?;
            let rq = reduce_radial_functional(&scenario, &u)?;
            let deficit = rq.numerator.value - c * rq.denominator.value;
            Ok(PsiRow {
                r: big_r,
                psi_energy,
                deficit,
                scaled_deficit: deficit * big_r.ln(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovedWeightReport<T> {
    /// Smallest `(N - D) / (|N| + |D|)` over the sampled profiles.
    pub min_slack: T,
    pub worst_index: usize,
    pub profiles: usize,
    pub seed: u64,
}

/// Samples `W = |(Q-p)/p|^p r^{-p} + c_p (p-1)(1-r)/r` against random profiles.
pub fn improved_weight_check<T: Real>(q: T, p: T, profile_count: usize, seed: u64) -> Result<ImprovedWeightReport<T>> {
    if profile_count == 0 {
        return Err(Error::ParameterDomain("need at least one profile".into()));
    }
    let params = ScenarioParams {
        q: Some(to_f64(q)),
        p: Some(to_f64(p)),
        ..Default::default()
    };
    let scenario: Scenario<T> = scenario_catalog(ScenarioKind::ImprovedWeight, &params)?;
    let profiles = random_profiles(&scenario.pair.interval, profile_count, seed)?;
    let slacks = profiles
        .par_iter()
        .map(|phi| Ok(reduce_radial_functional(&scenario, phi)?.relative_slack(T::one())))
        .collect::<Result<Vec<T>>>()?;
    let (worst_index, min_slack) = slacks
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::infinity()), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });
    Ok(ImprovedWeightReport {
        min_slack,
        worst_index,
        profiles: profile_count,
        seed,
    })
}
