//! The radial Bessel-pair equation
//! `(r^k V |phi'|^{p-2} phi')' + lambda r^k W |phi|^{p-2} phi = 0`
//! in first-order form on the state `(phi, m)`, `m = r^k V |phi'|^{p-2} phi'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{dopri5, StepControl};
use crate::profile::Profile;
use crate::reduce::ReducedProblem;
use crate::scalar::{lit, signed_pow, to_f64, Real};
use crate::scenario::{MaximizerForm, Scenario, ScenarioKind};
use crate::weight::{Interval, PowerTerm, Weight};

/// `(r, phi, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialOdeState<T> {
    pub r: T,
    pub phi: T,
    pub momentum: T,
}

/// Accepted points of an integration, with `phi'` recovered from the momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselTrajectory<T> {
    pub states: Vec<RadialOdeState<T>>,
    pub derivatives: Vec<T>,
}

impl<T: Real> BesselTrajectory<T> {
    pub fn last(&self) -> RadialOdeState<T> {
        *self.states.last().expect("trajectory is never empty")
    }

    /// Sign changes of `phi` after the first point, ignoring exact zeros.
    pub fn sign_changes(&self) -> usize {
        let mut count = 0;
        let mut prev = T::zero();
        for s in self.states.iter().skip(1) {
            if s.phi != T::zero() {
                if prev != T::zero() && (s.phi > T::zero()) != (prev > T::zero()) {
                    count += 1;
                }
                prev = s.phi;
            }
        }
        count
    }

    /// Cubic Hermite profile through the accepted points (forward direction only).
    pub fn to_profile(&self) -> Result<Profile<T>> {
        let mut r: Vec<T> = self.states.iter().map(|s| s.r).collect();
        let mut v: Vec<T> = self.states.iter().map(|s| s.phi).collect();
        let mut d = self.derivatives.clone();
        if r.len() >= 2 && r[0] > r[r.len() - 1] {
            r.reverse();
            v.reverse();
            d.reverse();
        }
        Profile::hermite(r, v, d)
    }
}

/// The first-order system for a given weight pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselSystem<T: Real> {
    pub v: Weight<T>,
    pub w: Weight<T>,
    pub p: T,
    pub measure_exponent: T,
    pub lambda: T,
}

impl<T: Real> From<&ReducedProblem<T>> for BesselSystem<T> {
    /// An angular eigenvalue `mu` enters the equation as `W - (mu/lambda) r^{-2} V`,
    /// folded into `W` when both weights carry the same log and Gaussian factors.
    fn from(p: &ReducedProblem<T>) -> Self {
        let mut w = p.w.clone();
        if let Some(mu) = p.angular_eigenvalue {
            if p.v.log_factor == w.log_factor && p.v.gaussian == w.gaussian && p.lambda != T::zero() {
                let c = mu / p.lambda;
                w.terms.extend(p.v.terms.iter().map(|t| PowerTerm {
                    coef: -c * t.coef,
                    exponent: t.exponent - lit(2.0),
                }));
            }
        }
        Self {
            v: p.v.clone(),
            w,
            p: p.p,
            measure_exponent: p.measure_exponent,
            lambda: p.lambda,
        }
    }
}

impl<T: Real> BesselSystem<T> {
    pub fn from_scenario(s: &Scenario<T>) -> Self {
        Self::from(&s.reduced_problem())
    }

    /// Same system with another `lambda`.
    pub fn with_lambda(&self, lambda: T) -> Self {
        Self { lambda, ..self.clone() }
    }

    /// `r^k V(r)`, split as (algebraic, log-scale).
    fn flux_factor(&self, r: T) -> (T, T) {
        let (a, s) = self.v.eval_scaled(r);
        (a * r.powf(self.measure_exponent), s)
    }

    /// `phi'` from the momentum.
    pub fn phi_prime(&self, r: T, m: T) -> Result<T> {
        let (a, s) = self.flux_factor(r);
        if a == T::zero() || !a.is_finite() || !s.is_finite() {
            return Err(Error::SingularCoefficient { r: to_f64(r) });
        }
        if m == T::zero() {
            return Ok(T::zero());
        }
        let ratio = m.abs() / a.abs() * (-s).exp();
        Ok(m.signum() * a.signum() * ratio.powf(T::one() / (self.p - T::one())))
    }

    /// Momentum `r^k V |phi'|^{p-2} phi'`.
    pub fn momentum(&self, r: T, phi_prime: T) -> T {
        let (a, s) = self.flux_factor(r);
        a * s.exp() * signed_pow(phi_prime, self.p)
    }

    /// `lambda r^k W |phi|^{p-2} phi`.
    pub fn potential(&self, r: T, phi: T) -> T {
        self.lambda * r.powf(self.measure_exponent) * self.w.value(r) * signed_pow(phi, self.p)
    }

    pub fn rhs(&self, r: T, y: &[T; 2]) -> Result<[T; 2]> {
        Ok([self.phi_prime(r, y[1])?, -self.potential(r, y[0])])
    }

    /// Pointwise relative residual of a closed-form `phi` in the equation.
    pub fn residual_of(&self, phi: &Profile<T>, r: T) -> T {
        let h = r * lit(1e-3);
        let flux = |x: T| self.momentum(x, phi.derivative(x));
        let d = (flux(r - h - h) - lit::<T>(8.0) * flux(r - h) + lit::<T>(8.0) * flux(r + h) - flux(r + h + h))
            / (lit::<T>(12.0) * h);
        let pot = self.potential(r, phi.value(r));
        // flux / r keeps the scale away from zero where W changes sign
        let scale = d.abs() + pot.abs() + flux(r).abs() / r;
        if scale == T::zero() {
            T::zero()
        } else {
            (d + pot).abs() / scale
        }
    }
}

/// Blow-up threshold for `|phi|`.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Integrates from `init` to `r_end`.
pub fn integrate_bessel_ode<T: Real>(
    system: &BesselSystem<T>,
    init: RadialOdeState<T>,
    r_end: T,
    ctrl: &StepControl<T>,
) -> Result<BesselTrajectory<T>> {
    let limit: T = lit(DIVERGENCE_LIMIT);
    let pts = dopri5(
        |r, y| system.rhs(r, y),
        init.r,
        [init.phi, init.momentum],
        r_end,
        ctrl,
        |r, y| {
            if y[0].abs() > limit || !y[0].is_finite() {
                Err(Error::Divergence {
                    r: to_f64(r),
                    value: to_f64(y[0]),
                })
            } else {
                Ok(())
            }
        },
    )?;
    let mut states = Vec::with_capacity(pts.len());
    let mut derivatives = Vec::with_capacity(pts.len());
    for (r, y) in pts {
        derivatives.push(system.phi_prime(r, y[1])?);
        states.push(RadialOdeState {
            r,
            phi: y[0],
            momentum: y[1],
        });
    }
    Ok(BesselTrajectory { states, derivatives })
}

/// Summary of a Bessel-pair verification on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselCertificate<T> {
    pub is_positive: bool,
    pub min_phi: T,
    pub max_ode_residual: T,
    pub max_closed_form_error: T,
}

/// Closed-form extremal profile of `scenario` on its interval.
pub fn closed_form_maximizer<T: Real>(scenario: &Scenario<T>) -> Result<Profile<T>> {
    let iv = scenario.pair.interval;
    let support = (iv.lower, iv.upper);
    match scenario.maximizer {
        MaximizerForm::Power { exponent } => Ok(Profile::power_law(exponent, support)),
        MaximizerForm::LogPower { r_max, exponent } => Ok(Profile::log_power(r_max, exponent, support)),
        MaximizerForm::Exponential { coef, power } => Ok(Profile::exponential(coef, power, support)),
        MaximizerForm::AnnulusSine { a, b, exponent } => {
            let k = T::PI() / (b / a).ln();
            Ok(Profile::new(
                move |r: T| r.powf(exponent) * (k * (r / a).ln()).sin(),
                move |r: T| {
                    let arg = k * (r / a).ln();
                    r.powf(exponent - T::one()) * (exponent * arg.sin() + k * arg.cos())
                },
                support,
            ))
        }
        MaximizerForm::Eigenfunction | MaximizerForm::None => Err(Error::Unsupported(format!(
            "{} has no closed-form extremal",
            scenario.name
        ))),
    }
}

/// Auxiliary pair behind the improved weight: `V = r^{-(Q-p)}`,
/// `W = r^{-(Q-p)}(1-r)/r`, `lambda = p - 1`, solved by `e^{-r}`.
pub fn improved_weight_auxiliary<T: Real>(q: T, p: T) -> (BesselSystem<T>, Profile<T>) {
    let one = T::one();
    let system = BesselSystem {
        v: Weight::power(one, p - q),
        w: Weight::sum(vec![
            PowerTerm { coef: one, exponent: p - q - one },
            PowerTerm { coef: -one, exponent: p - q },
        ]),
        p,
        measure_exponent: q - one,
        lambda: p - one,
    };
    let phi = Profile::new(|r: T| (-r).exp(), |r: T| -(-r).exp(), (T::zero(), T::infinity()));
    (system, phi)
}

/// Verifies on `[r0, r1]` that the closed-form extremal solves the equation and
/// that integrating from its initial data reproduces it.
pub fn verify_bessel_pair<T: Real>(scenario: &Scenario<T>, range: (T, T)) -> Result<BesselCertificate<T>> {
    let (system, phi) = if scenario.name == ScenarioKind::ImprovedWeight {
        improved_weight_auxiliary(scenario.exponents.q, scenario.exponents.p)
    } else {
        (BesselSystem::from_scenario(scenario), closed_form_maximizer(scenario)?)
    };
    verify_system(&system, &phi, range, &scenario.pair.interval)
}

/// [`verify_bessel_pair`] for an explicit system and candidate solution.
pub fn verify_system<T: Real>(
    system: &BesselSystem<T>,
    phi: &Profile<T>,
    range: (T, T),
    interval: &Interval<T>,
) -> Result<BesselCertificate<T>> {
    let (r0, r1) = range;
    if !(r0 > interval.lower && r1 < interval.upper && r0 < r1) {
        return Err(Error::ParameterDomain(format!(
            "range [{r0}, {r1}] must lie inside ({}, {})",
            interval.lower, interval.upper
        )));
    }
    let grid = 1000;
    let mut max_res = T::zero();
    for i in 0..=grid {
        let t = lit::<T>(i as f64 / grid as f64);
        let r = r0 * (r1 / r0).powf(t);
        max_res = max_res.max(system.residual_of(phi, r));
    }
    let init = RadialOdeState {
        r: r0,
        phi: phi.value(r0),
        momentum: system.momentum(r0, phi.derivative(r0)),
    };
    let traj = integrate_bessel_ode(system, init, r1, &StepControl::default())?;
    let mut max_err = T::zero();
    let mut min_phi = T::infinity();
    for s in &traj.states {
        let exact = phi.value(s.r);
        max_err = max_err.max((s.phi - exact).abs() / exact.abs().max(T::min_positive_value()));
        min_phi = min_phi.min(s.phi);
    }
    Ok(BesselCertificate {
        is_positive: min_phi > T::zero(),
        min_phi,
        max_ode_residual: max_res,
        max_closed_form_error: max_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{scenario_catalog, ScenarioParams};

    fn scenario(kind: ScenarioKind, params: ScenarioParams) -> Scenario<f64> {
        scenario_catalog(kind, &params).unwrap()
    }

    #[test]
    fn power_trajectory_matches_closed_form() {
        let s = scenario(ScenarioKind::Power, ScenarioParams { q: Some(5.0), p: Some(2.0), theta: Some(1.0), ..Default::default() });
        assert!((s.exponents.beta + 3.0).abs() < 1e-15);
        let sys = BesselSystem::from_scenario(&s);
        let init = RadialOdeState { r: 1.0, phi: 1.0, momentum: sys.momentum(1.0, -1.5) };
        let traj = integrate_bessel_ode(&sys, init, 10.0, &StepControl::default()).unwrap();
        for st in &traj.states {
            assert!((st.phi / st.r.powf(-1.5) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn log_pair_certificate() {
        let s = scenario(ScenarioKind::LogRadial, ScenarioParams { p: Some(2.0), theta: Some(0.0), r_max: Some(1.0), ..Default::default() });
        let c = verify_bessel_pair(&s, (0.01, 0.9)).unwrap();
        assert!(c.is_positive);
        assert!(c.max_ode_residual < 1e-6, "{c:?}");
        assert!(c.max_closed_form_error < 1e-6, "{c:?}");
    }

    #[test]
    fn gaussian_pairs() {
        let a = scenario(ScenarioKind::GaussianA, ScenarioParams { q: Some(3.0), ..Default::default() });
        let c = verify_bessel_pair(&a, (0.5, 3.0)).unwrap();
        assert!(c.max_closed_form_error < 1e-6 && c.max_ode_residual < 1e-6, "{c:?}");
        let b = scenario(ScenarioKind::GaussianB, ScenarioParams { q: Some(5.0), theta: Some(2.0), ..Default::default() });
        let phi = closed_form_maximizer(&b).unwrap();
        assert!((phi.value(4.0) - 0.5).abs() < 1e-15);
        let c = verify_bessel_pair(&b, (0.5, 3.0)).unwrap();
        assert!(c.max_closed_form_error < 1e-6 && c.max_ode_residual < 1e-6, "{c:?}");
    }

    #[test]
    fn improved_weight_auxiliary_solution() {
        let s = scenario(ScenarioKind::ImprovedWeight, ScenarioParams { q: Some(5.0), p: Some(3.0), ..Default::default() });
        let c = verify_bessel_pair(&s, (0.2, 4.0)).unwrap();
        assert!(c.is_positive && c.max_ode_residual < 1e-6 && c.max_closed_form_error < 1e-6, "{c:?}");
    }

    #[test]
    fn annulus_sine_is_positive_inside() {
        let s = scenario(ScenarioKind::Annulus, ScenarioParams::default());
        let e = std::f64::consts::E;
        let c = verify_bessel_pair(&s, (1.01, e - 0.01)).unwrap();
        assert!(c.is_positive && c.max_ode_residual < 1e-6, "{c:?}");
    }

    #[test]
    fn strip_and_sector_extremals_solve_their_equations() {
        // the sector pair carries an angular eigenvalue folded into W
        for (kind, params) in [
            (ScenarioKind::Strip, ScenarioParams { theta: Some(1.5), ..Default::default() }),
            (ScenarioKind::Antisymmetric, ScenarioParams { n: Some(3.0), theta: Some(1.0), ..Default::default() }),
        ] {
            let s = scenario(kind, params);
            let c = verify_bessel_pair(&s, (0.5, 5.0)).unwrap();
            assert!(c.is_positive && c.max_ode_residual < 1e-8 && c.max_closed_form_error < 1e-8, "{kind}: {c:?}");
        }
    }

    #[test]
    fn vanishing_coefficient_is_reported() {
        let sys = BesselSystem {
            v: Weight::sum(vec![PowerTerm { coef: 1.0, exponent: 0.0 }, PowerTerm { coef: -1.0, exponent: 1.0 }]),
            w: Weight::power(1.0, 0.0),
            p: 2.0,
            measure_exponent: 0.0,
            lambda: 1.0,
        };
        let init = RadialOdeState { r: 0.5, phi: 1.0, momentum: 0.1 };
        let res = integrate_bessel_ode(&sys, init, 1.5, &StepControl::default());
        assert!(matches!(res, Err(Error::SingularCoefficient { .. }) | Err(Error::StepUnderflow { .. })), "{res:?}");
    }

    #[test]
    fn divergence_is_reported() {
        let sys = BesselSystem {
            v: Weight::power(1.0, 0.0),
            w: Weight::power(-1.0, 0.0),
            p: 2.0,
            measure_exponent: 0.0,
            lambda: 100.0,
        };
        let init = RadialOdeState { r: 0.0, phi: 1.0, momentum: 10.0 };
        let res = integrate_bessel_ode(&sys, init, 10.0, &StepControl::default());
        assert!(matches!(res, Err(Error::Divergence { .. })), "{res:?}");
    }

    #[test]
    fn homogeneity_of_solutions() {
        for p in [2.0, 3.0] {
            let s = scenario(ScenarioKind::Power, ScenarioParams { q: Some(4.0), p: Some(p), theta: Some(0.5), ..Default::default() });
            let sys = BesselSystem::from_scenario(&s);
            let base = RadialOdeState { r: 1.0, phi: 0.3, momentum: 0.7 };
            let t0 = integrate_bessel_ode(&sys, base, 3.0, &StepControl::default()).unwrap().last();
            for c in [2.0f64, -1.0, 10.0] {
                let init = RadialOdeState { r: 1.0, phi: c * base.phi, momentum: signed_pow(c, p) * base.momentum };
                let t = integrate_bessel_ode(&sys, init, 3.0, &StepControl::default()).unwrap().last();
                assert!((t.phi - c * t0.phi).abs() <= 1e-8 * (c * t0.phi).abs().max(1.0), "p={p} c={c}");
            }
        }
    }
}
