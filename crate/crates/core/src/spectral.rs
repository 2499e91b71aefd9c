//! Dirichlet eigenvalues of the weighted radial p-Laplacian on an annulus `(a, b)`:
//! `(r^{Q-1-p(theta-1)} |phi'|^{p-2} phi')' + lambda r^{Q-1-p theta} |phi|^{p-2} phi = 0`.
//!
//! Shooting from `(phi, m) = (0, 1)` at `a`; the `n`-th eigenvalue is the first
//! `lambda` at which the solution acquires `n` zeros in `(a, b]`.

use serde::{Deserialize, Serialize};

use crate::besselpair::{integrate_bessel_ode, BesselSystem, BesselTrajectory, RadialOdeState};
use crate::error::{Error, Result};
use crate::ode::StepControl;
use crate::profile::Profile;
use crate::scalar::{lit, Real};
use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusProblem<T> {
    #[serde(rename = "Q")]
    pub q: T,
    pub p: T,
    pub theta: T,
    pub a: T,
    pub b: T,
}

impl<T: Real> AnnulusProblem<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > T::zero() && self.b > self.a && self.b.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "annulus needs 0 < a < b < inf (a = {}, b = {})",
                self.a, self.b
            )));
        }
        if !(self.p >= lit(2.0)) {
            return Err(Error::ParameterDomain(format!("p = {} must be >= 2", self.p)));
        }
        if !(self.q >= T::one()) {
            return Err(Error::ParameterDomain(format!("Q = {} must be >= 1", self.q)));
        }
        Ok(())
    }

    pub fn system(&self, lambda: T) -> BesselSystem<T> {
        BesselSystem {
            v: Weight::power(T::one(), -self.p * (self.theta - T::one())),
            w: Weight::power(T::one(), -self.p * self.theta),
            p: self.p,
            measure_exponent: self.q - T::one(),
            lambda,
        }
    }

    /// `|(Q - p theta)/p|^p`, a strict lower bound for `lambda_1`.
    pub fn hardy_bound(&self) -> T {
        ((self.q - self.p * self.theta) / self.p).abs().powf(self.p)
    }
}

/// `((Q - 2 theta)/2)^2 + (pi / ln(b/a))^2`.
pub fn closed_form_lambda1_p2<T: Real>(q: T, theta: T, a: T, b: T) -> T {
    let h = (q - lit::<T>(2.0) * theta) / lit(2.0);
    let k = T::PI() / (b / a).ln();
    h * h + k * k
}

/// Endpoint value normalised by `phi'(a)` and the number of sign changes in `(a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotOutcome<T> {
    pub endpoint_value: T,
    pub zero_count: usize,
}

#[derive(Debug, Clone)]
pub struct ShootingResult<T: Real> {
    pub lambda: T,
    /// Interior zeros of the eigenfunction.
    pub zero_count: usize,
    /// `|phi(b)| / max |phi|` at the reported `lambda`.
    pub endpoint_residual: T,
    pub eigenfunction: Profile<T>,
    pub bracket: (T, T),
}

fn shooting_control<T: Real>(problem: &AnnulusProblem<T>) -> StepControl<T> {
    StepControl::default()
        .with_tolerance(lit::<T>(1e-12).max(T::epsilon() * lit(100.0)), lit::<T>(1e-14).max(T::epsilon() * lit(100.0)))
        .with_max_step((problem.b - problem.a) / lit(64.0))
}

fn trajectory<T: Real>(problem: &AnnulusProblem<T>, lambda: T, m0: T) -> Result<BesselTrajectory<T>> {
    let sys = problem.system(lambda);
    let init = RadialOdeState {
        r: problem.a,
        phi: T::zero(),
        momentum: m0,
    };
    integrate_bessel_ode(&sys, init, problem.b, &shooting_control(problem))
}

/// Shoots at `lambda` from `(phi, m) = (0, 1)`.
pub fn shoot<T: Real>(problem: &AnnulusProblem<T>, lambda: T) -> Result<ShotOutcome<T>> {
    problem.validate()?;
    let traj = trajectory(problem, lambda, T::one())?;
    Ok(outcome(&traj))
}

fn outcome<T: Real>(traj: &BesselTrajectory<T>) -> ShotOutcome<T> {
    let d0 = traj.derivatives[0];
    ShotOutcome {
        endpoint_value: traj.last().phi / d0,
        zero_count: traj.sign_changes(),
    }
}

/// The `which`-th Dirichlet eigenvalue (`which >= 1`) to relative bracket width `tol`.
pub fn first_eigenvalue<T: Real>(problem: &AnnulusProblem<T>, tol: T, which: usize) -> Result<ShootingResult<T>> {
    problem.validate()?;
    if which == 0 {
        return Err(Error::ParameterDomain("eigenvalue index starts at 1".into()));
    }
    let below = |lambda: T| -> Result<bool> {
        let o = shoot(problem, lambda)?;
        Ok(o.zero_count < which)
    };
    let lambda_max: T = lit(1e6);
    let mut lo = problem.hardy_bound();
    let p2 = closed_form_lambda1_p2(problem.q, problem.theta, problem.a, problem.b);
    let mut hi = p2 * (problem.p - T::one()).max(T::one()) * lit(4.0) * lit::<T>((which * which) as f64);
    if !below(lo)? {
        return Err(Error::SearchFailure(format!(
            "lower bound {lo} already has {which} zeros"
        )));
    }
    while below(hi)? {
        lo = hi;
        hi = hi + hi;
        if hi > lambda_max {
            return Err(Error::SearchFailure(format!(
                "no sign change below lambda_max = {lambda_max}"
            )));
        }
    }
    while hi - lo > tol * lo.max(T::epsilon()) {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = (lo + hi) * lit(0.5);
    let lower = trajectory(problem, lo, T::one())?;
    let zero_count = lower.sign_changes();
    let traj = trajectory(problem, lambda, T::one())?;
    let peak = traj
        .states
        .iter()
        .map(|s| s.phi.abs())
        .fold(T::zero(), T::max);
    if peak == T::zero() {
        return Err(Error::SearchFailure("eigenfunction vanished".into()));
    }
    let endpoint_residual = traj.last().phi.abs() / peak;
    let scaled = BesselTrajectory {
        states: traj
            .states
            .iter()
            .map(|s| RadialOdeState {
                r: s.r,
                phi: s.phi / peak,
                momentum: s.momentum,
            })
            .collect(),
        derivatives: traj.derivatives.iter().map(|d| *d / peak).collect(),
    };
    let eigenfunction = scaled.to_profile()?.compactly_supported();
    Ok(ShootingResult {
        lambda,
        zero_count,
        endpoint_residual,
        eigenfunction,
        bracket: (lo, hi),
    })
}

/// `lambda > |(Q - p theta)/p|^p + 1e-9`.
pub fn check_lambda1_lower_bound<T: Real>(problem: &AnnulusProblem<T>, result: &ShootingResult<T>) -> bool {
    result.lambda > problem.hardy_bound() + lit(1e-9)
}
