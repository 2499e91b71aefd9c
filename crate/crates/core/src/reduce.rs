//! One-dimensional reduction of the Hardy functional for gauge-radial functions.
//!
//! For `u = phi(d)` the quotient becomes
//! `int r^k V |phi'|^p dr / int r^k W |phi|^p dr` with `k` the measure exponent.

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::quadrature::{integrate_piecewise, QuadratureEstimate, QuadratureOptions};
use crate::scalar::{lit, Real};
use crate::scenario::{Scenario, ScenarioKind};
use crate::weight::{Interval, Weight};

/// Everything needed to evaluate the reduced quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedProblem<T: Real> {
    pub v: Weight<T>,
    pub w: Weight<T>,
    pub p: T,
    pub measure_exponent: T,
    pub lambda: T,
    pub interval: Interval<T>,
    /// Eigenvalue `mu` of an angular factor; adds `mu int r^{k-2} V |phi|^p` to the numerator.
    pub angular_eigenvalue: Option<T>,
}

/// Numerator, denominator and their ratio.
///
/// `quotient` is `+inf` when the denominator is not positive: the inequality
/// `N >= c D` then holds for every `c >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialQuotient<T> {
    pub numerator: QuadratureEstimate<T>,
    pub denominator: QuadratureEstimate<T>,
    pub quotient: T,
}

impl<T: Real> RadialQuotient<T> {
    /// `N - c D` scaled by `N + |c D|`.
    pub fn relative_slack(&self, c: T) -> T {
        let n = self.numerator.value;
        let cd = c * self.denominator.value;
        let scale = n.abs() + cd.abs();
        if scale == T::zero() {
            T::zero()
        } else {
            (n - cd) / scale
        }
    }
}

impl<T: Real> Scenario<T> {
    pub fn reduced_problem(&self) -> ReducedProblem<T> {
        ReducedProblem {
            v: self.pair.v.clone(),
            w: self.pair.w.clone(),
            p: self.exponents.p,
            measure_exponent: self.exponents.measure_exponent(),
            lambda: self.pair.lambda,
            interval: self.pair.interval,
            angular_eigenvalue: self.extra.angular_eigenvalue,
        }
    }

    /// The logarithmic scenarios rewritten in `t = ln(R/r)`:
    /// `int t^{theta+p} |psi'|^p dt` over `int t^theta |psi|^p dt`.
    pub fn log_reduced_problem(&self) -> Result<ReducedProblem<T>> {
        if !matches!(self.name, ScenarioKind::LogRadial | ScenarioKind::LogCylindrical) {
            return Err(Error::Unsupported(format!(
                "{} has no logarithmic coordinate",
                self.name
            )));
        }
        let e = &self.exponents;
        Ok(ReducedProblem {
            v: Weight::power(T::one(), e.theta + e.p),
            w: Weight::power(T::one(), e.theta),
            p: e.p,
            measure_exponent: T::zero(),
            lambda: self.pair.lambda,
            interval: Interval::new(T::zero(), T::infinity()),
            angular_eigenvalue: None,
        })
    }
}

pub(crate) fn reduction_options<T: Real>() -> QuadratureOptions<T> {
    let rel = lit::<T>(1e-11).max(T::epsilon() * lit(50.0));
    QuadratureOptions::default().with_tolerance(T::min_positive_value(), rel)
}

/// Reduced quotient of `phi` for `problem`.
pub fn reduce_problem<T: Real>(problem: &ReducedProblem<T>, phi: &Profile<T>) -> Result<RadialQuotient<T>> {
    let (lo, hi) = phi.support();
    if !problem.interval.contains_closed(lo, hi) {
        return Err(Error::InvalidProfile(format!(
            "support [{lo}, {hi}] not inside ({}, {})",
            problem.interval.lower, problem.interval.upper
        )));
    }
    let p = problem.p;
    let k = problem.measure_exponent;
    let numerator_at = |r: T| {
        let s = phi.scaled(r);
        let (va, vs) = problem.v.eval_scaled(r);
        let mut alg = va * s.derivative.abs().powf(p);
        if let Some(mu) = problem.angular_eigenvalue {
            alg = alg + mu * va * s.value.abs().powf(p) / (r * r);
        }
        if alg == T::zero() {
            return T::zero();
        }
        r.powf(k) * alg * (vs + p * s.log_scale).exp()
    };
    let denominator_at = |r: T| {
        let s = phi.scaled(r);
        let (wa, ws) = problem.w.eval_scaled(r);
        let alg = wa * s.value.abs().powf(p);
        if alg == T::zero() {
            return T::zero();
        }
        r.powf(k) * alg * (ws + p * s.log_scale).exp()
    };
    let pts = phi.breakpoints();
    let opts = reduction_options::<T>().singular(lo == T::zero(), false);
    let numerator = integrate_piecewise(numerator_at, lo, hi, &pts, &opts)?;
    let denominator = integrate_piecewise(denominator_at, lo, hi, &pts, &opts)?;
    let quotient = if denominator.value > T::zero() {
        numerator.value / denominator.value
    } else {
        if problem.w.is_nonnegative() {
            return Err(Error::InvalidProfile(
                "denominator vanishes for a nonnegative weight".into(),
            ));
        }
        T::infinity()
    };
    Ok(RadialQuotient {
        numerator,
        denominator,
        quotient,
    })
}

/// Reduced quotient of `phi` for `scenario`, with `phi` a function of the gauge.
pub fn reduce_radial_functional<T: Real>(scenario: &Scenario<T>, phi: &Profile<T>) -> Result<RadialQuotient<T>> {
    reduce_problem(&scenario.reduced_problem(), phi)
}
