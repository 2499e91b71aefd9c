//! Catalog of weighted Hardy inequalities with their sharp constants.
//!
//! Each scenario fixes the radial weight pair `(V, W)`, the constant `lambda`
//! and, when one exists, a closed-form extremal profile. The measure exponent
//! of the one-dimensional reduction is `-(beta - 1)(p - 1)`, which equals
//! `Q - 1` whenever `beta = (p - Q)/(p - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::weight::{Interval, PowerTerm, RadialWeightPair, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Power,
    LogRadial,
    LogCylindrical,
    GaussianA,
    GaussianB,
    Annulus,
    Cylindrical,
    Strip,
    Antisymmetric,
    ImprovedWeight,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 10] = [
        ScenarioKind::Power,
        ScenarioKind::LogRadial,
        ScenarioKind::LogCylindrical,
        ScenarioKind::GaussianA,
        ScenarioKind::GaussianB,
        ScenarioKind::Annulus,
        ScenarioKind::Cylindrical,
        ScenarioKind::Strip,
        ScenarioKind::Antisymmetric,
        ScenarioKind::ImprovedWeight,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Power => "power",
            ScenarioKind::LogRadial => "log_radial",
            ScenarioKind::LogCylindrical => "log_cylindrical",
            ScenarioKind::GaussianA => "gaussian_a",
            ScenarioKind::GaussianB => "gaussian_b",
            ScenarioKind::Annulus => "annulus",
            ScenarioKind::Cylindrical => "cylindrical",
            ScenarioKind::Strip => "strip",
            ScenarioKind::Antisymmetric => "antisymmetric",
            ScenarioKind::ImprovedWeight => "improved_weight",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::ParameterDomain(format!("unknown scenario '{s}'")))
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exponents of the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents<T> {
    pub p: T,
    pub theta: T,
    pub beta: T,
    #[serde(rename = "Q")]
    pub q: T,
}

impl<T: Real> Exponents<T> {
    /// Exponents with `beta = (p - Q)/(p - 1)`.
    pub fn fundamental(q: T, p: T, theta: T) -> Result<Self> {
        let e = Self {
            p,
            theta,
            beta: (p - q) / (p - T::one()),
            q,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= lit(2.0)) || !self.p.is_finite() {
            return Err(Error::ParameterDomain(format!("p = {} must be >= 2", self.p)));
        }
        if !(self.q >= T::one()) || !self.q.is_finite() {
            return Err(Error::ParameterDomain(format!("Q = {} must be >= 1", self.q)));
        }
        if !self.theta.is_finite() || !self.beta.is_finite() {
            return Err(Error::ParameterDomain("theta and beta must be finite".into()));
        }
        Ok(())
    }

    /// `-(beta - 1)(p - 1)`, the power of `r` in the reduced measure.
    pub fn measure_exponent(&self) -> T {
        -(self.beta - T::one()) * (self.p - T::one())
    }
}

/// Symbolic description of the extremal profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaximizerForm<T> {
    /// `r^exponent`.
    Power { exponent: T },
    /// `(ln(r_max/r))^exponent`.
    LogPower { r_max: T, exponent: T },
    /// `exp(coef r^power)`.
    Exponential { coef: T, power: T },
    /// `r^exponent sin(pi ln(r/a)/ln(b/a))`.
    AnnulusSine { a: T, b: T, exponent: T },
    /// First eigenfunction, computed by shooting.
    Eigenfunction,
    None,
}

/// Scenario parameters beyond the exponents.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioExtra<T> {
    pub r_max: Option<T>,
    pub alpha: Option<T>,
    pub gauss_beta: Option<T>,
    pub a: Option<T>,
    pub b: Option<T>,
    pub m: Option<T>,
    pub n_total: Option<T>,
    pub angular_eigenvalue: Option<T>,
}

/// A catalog entry: weights, sharp constant and extremal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Scenario<T: Real> {
    pub name: ScenarioKind,
    pub exponents: Exponents<T>,
    pub pair: RadialWeightPair<T>,
    pub sharp_constant: T,
    pub maximizer: MaximizerForm<T>,
    pub extra: ScenarioExtra<T>,
}

/// User-facing parameters; anything left `None` takes the scenario default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    pub p: Option<f64>,
    pub theta: Option<f64>,
    pub beta: Option<f64>,
    pub r_max: Option<f64>,
    pub alpha: Option<f64>,
    pub gauss_beta: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub m: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<f64>,
}

/// `|(beta(p-1) + p(theta-1))/p|^p`.
pub fn power_constant<T: Real>(p: T, theta: T, beta: T) -> T {
    ((beta * (p - T::one()) + p * (theta - T::one())) / p).abs().powf(p)
}

/// `|(Q - p theta)/p|^p`.
pub fn fundamental_power_constant<T: Real>(q: T, p: T, theta: T) -> T {
    ((q - p * theta) / p).abs().powf(p)
}

fn require(cond: bool, scenario: ScenarioKind, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{scenario}: {msg}")))
    }
}

fn positive_constant(kind: ScenarioKind, c: f64) -> Result<()> {
    require(
        c > 0.0 && c.is_finite(),
        kind,
        "sharp constant vanishes for these exponents",
    )
}

/// `r^{-p(theta-1)}` and `r^{-p theta}`.
fn power_weights<T: Real>(p: T, theta: T) -> (Weight<T>, Weight<T>) {
    (
        Weight::power(T::one(), -p * (theta - T::one())),
        Weight::power(T::one(), -p * theta),
    )
}

/// Builds the catalog scenario `kind` from `params`.
pub fn scenario_catalog<T: Real>(kind: ScenarioKind, params: &ScenarioParams) -> Result<Scenario<T>> {
    let f = |x: Option<f64>, d: f64| -> T { lit(x.unwrap_or(d)) };
    let zero = T::zero();
    let one = T::one();
    let inf = T::infinity();
    let mut extra = ScenarioExtra::default();
    match kind {
        ScenarioKind::Power | ScenarioKind::Cylindrical => {
            let (q, n_total) = if kind == ScenarioKind::Cylindrical {
                let m: T = f(params.m.or(params.q), 3.0);
                let n: T = f(params.n, to_f64(m) + 2.0);
                require(n >= m, kind, "N must be >= m")?;
                extra.m = Some(m);
                extra.n_total = Some(n);
                (m, Some(n))
            } else {
                (f(params.q, 3.0), None)
            };
            let _ = n_total;
            let p: T = f(params.p, 2.0);
            let theta: T = f(params.theta, 1.0);
            let mut e = Exponents::fundamental(q, p, theta)?;
            if let Some(b) = params.beta {
                require(kind == ScenarioKind::Power, kind, "beta is fixed by the geometry")?;
                e.beta = lit(b);
            }
            let c = power_constant(p, theta, e.beta);
            positive_constant(kind, to_f64(c))?;
            let (v, w) = power_weights(p, theta);
            let gamma = (e.beta * (p - one) + p * (theta - one)) / p;
            Ok(Scenario {
                name: kind,
                exponents: e,
                pair: RadialWeightPair { v, w, lambda: c, interval: Interval::new(zero, inf) },
                sharp_constant: c,
                maximizer: MaximizerForm::Power { exponent: gamma },
                extra,
            })
        }
        ScenarioKind::LogRadial | ScenarioKind::LogCylindrical => {
            let q: T = if kind == ScenarioKind::LogCylindrical {
                let m: T = f(params.m.or(params.q), 3.0);
                let n: T = f(params.n, to_f64(m) + 2.0);
                require(n >= m, kind, "N must be >= m")?;
                extra.m = Some(m);
                extra.n_total = Some(n);
                m
            } else {
                f(params.q, 3.0)
            };
            let p: T = f(params.p, 2.0);
            let theta: T = f(params.theta, 0.0);
            let r_max: T = f(params.r_max, 1.0);
            require(r_max > zero && r_max.is_finite(), kind, "R must be positive and finite")?;
            let e = Exponents::fundamental(q, p, theta)?;
            let s = (theta + one) / p;
            let c = s.abs().powf(p);
            positive_constant(kind, to_f64(c))?;
            extra.r_max = Some(r_max);
            let v = Weight::power(one, p - q).with_log(r_max, theta + p);
            let w = Weight::power(one, -q).with_log(r_max, theta);
            Ok(Scenario {
                name: kind,
                exponents: e,
                pair: RadialWeightPair { v, w, lambda: c, interval: Interval::new(zero, r_max) },
                sharp_constant: c,
                maximizer: MaximizerForm::LogPower { r_max, exponent: -s },
                extra,
            })
        }
        ScenarioKind::GaussianA => {
            let q: T = f(params.q, 3.0);
            let p: T = f(params.p, 2.0);
            let alpha: T = f(params.alpha, 2.0);
            let gb: T = f(params.gauss_beta, 2.0);
            require(alpha >= lit(2.0), kind, "alpha must be >= 2")?;
            require(gb > zero, kind, "beta must be > 0")?;
            let mut e = Exponents::fundamental(q, p, f(params.theta, 0.0))?;
            e.theta = zero;
            let k = alpha / (p * gb);
            let c = k.powf(p);
            let corr = p * gb / alpha * (alpha * (p - one) + q - p);
            extra.alpha = Some(alpha);
            extra.gauss_beta = Some(gb);
            let v = Weight::power(one, zero).with_gaussian(alpha, gb);
            let w = Weight::sum(vec![
                PowerTerm { coef: one, exponent: p * (alpha - one) },
                PowerTerm { coef: -corr, exponent: alpha * (p - one) - p },
            ])
            .with_gaussian(alpha, gb);
            Ok(Scenario {
                name: kind,
                exponents: e,
                pair: RadialWeightPair { v, w, lambda: c, interval: Interval::new(zero, inf) },
                sharp_constant: c,
                maximizer: MaximizerForm::Exponential { coef: one / (p * gb), power: alpha },
                extra,
            })
        }
        ScenarioKind::GaussianB => {
            let q: T = f(params.q, 5.0);
            let p: T = f(params.p, 2.0);
            let theta: T = f(params.theta, 1.0);
            let alpha: T = f(params.alpha, 2.0);
            let gb: T = f(params.gauss_beta, 2.0);
            require(alpha >= lit(2.0), kind, "alpha must be >= 2")?;
            require(gb > zero, kind, "beta must be > 0")?;
            let e = Exponents::fundamental(q, p, theta)?;
            let s = (q - p * theta) / p;
            let c = s.abs().powf(p);
            positive_constant(kind, to_f64(c))?;
            extra.alpha = Some(alpha);
            extra.gauss_beta = Some(gb);
            let v = Weight::power(one, -p * (theta - one)).with_gaussian(alpha, gb);
            let w = Weight::sum(vec![
                PowerTerm { coef: one, exponent: -p * theta },
                PowerTerm { coef: -(alpha / gb) / s, exponent: alpha - p * theta },
            ])
            .with_gaussian(alpha, gb);
            Ok(Scenario {
                name: kind,
                exponents: e,
                pair: RadialWeightPair { v, w, lambda: c, interval: Interval::new(zero, inf) },
                sharp_constant: c,
                maximizer: MaximizerForm::Power { exponent: -s },
                extra,
            })
        }
        ScenarioKind::Annulus => {
            let q: T = f(params.q, 3.0);
            let p: T = f(params.p, 2.0);
            let theta: T = f(params.theta, 1.0);
            let a: T = f(params.a, 1.0);
            let b: T = f(params.b, std::f64::consts::E);
            require(a > zero && b > a && b.is_finite(), kind, "need 0 < a < b < inf")?;
            let e = Exponents::fundamental(q, p, theta)?;
            extra.a = Some(a);
            extra.b = Some(b);
            let (c, maximizer) = if p == lit(2.0) {
                (
                    crate::spectral::closed_form_lambda1_p2(q, theta, a, b),
                    MaximizerForm::AnnulusSine { a, b, exponent: -(q - lit::<T>(2.0) * theta) / lit(2.0) },
                )
            } else {
                let problem = crate::spectral::AnnulusProblem { q, p, theta, a, b };
                let res = crate::spectral::first_eigenvalue(&problem, lit(1e-10), 1)?;
                (res.lambda, MaximizerForm::Eigenfunction)
            };
            let (v, w) = power_weights(p, theta);
            Ok(Scenario {
                name: kind,
                exponents: e,
                pair: RadialWeightPair { v, w, lambda: c, interval: Interval::new(a, b) },
                sharp_constant: c,
                maximizer,
                extra,
            })
        }
        ScenarioKind::Strip => {
            let theta: T = f(params.theta, 1.0);
            let two: T = lit(2.0);
            let e = Exponents { p: two, theta, beta: one, q: two };
            let half = (two * theta - one) / two;
            let c = half * half;
            positive_constant(kind, to_f64(c))?;
            let (v, w) = power_weights(two, theta);
            Ok(Scenario {
                name: kind,
                exponents: e,
                pair: RadialWeightPair { v, w, lambda: c, interval: Interval::new(zero, inf) },
                sharp_constant: c,
                maximizer: MaximizerForm::Power { exponent: half },
                extra,
            })
        }
        ScenarioKind::Antisymmetric => {
            let n_dim = params.n.or(params.q).unwrap_or(3.0);
            require(
                n_dim >= 2.0 && n_dim.fract() == 0.0,
                kind,
                "N must be an integer >= 2",
            )?;
            let n: T = lit(n_dim);
            let theta: T = f(params.theta, 1.0);
            let two: T = lit(2.0);
            require(n * n > two * theta, kind, "requires N^2 > 2 theta")?;
            let e = Exponents::fundamental(n, two, theta)?;
            let k = n * (n - one) / two;
            let mu = k * (k + n - two);
            let radial = (n - two * theta) / two;
            let c = radial * radial + mu;
            extra.n_total = Some(n);
            extra.angular_eigenvalue = Some(mu);
            let (v, w) = power_weights(two, theta);
            Ok(Scenario {
                name: kind,
                exponents: e,
                pair: RadialWeightPair { v, w, lambda: c, interval: Interval::new(zero, inf) },
                sharp_constant: c,
                maximizer: MaximizerForm::Power { exponent: -radial },
                extra,
            })
        }
        ScenarioKind::ImprovedWeight => {
            let q: T = f(params.q, 5.0);
            let p: T = f(params.p, 2.0);
            let e = Exponents::fundamental(q, p, one)?;
            let cp = lit::<T>(2.0).powf(-p);
            let lead = ((q - p) / p).abs().powf(p);
            let v = Weight::power(one, zero);
            let w = Weight::sum(vec![
                PowerTerm { coef: lead, exponent: -p },
                PowerTerm { coef: cp * (p - one), exponent: -one },
                PowerTerm { coef: -cp * (p - one), exponent: zero },
            ]);
            Ok(Scenario {
                name: kind,
                exponents: e,
                pair: RadialWeightPair { v, w, lambda: one, interval: Interval::new(zero, inf) },
                sharp_constant: one,
                maximizer: MaximizerForm::None,
                extra,
            })
        }
    }
}

impl<T: Real> Scenario<T> {
    /// Parameters reproducing this scenario through [`scenario_catalog`].
    pub fn params(&self) -> ScenarioParams {
        let g = |x: Option<T>| x.map(to_f64);
        let e = &self.exponents;
        let mut p = ScenarioParams {
            p: Some(to_f64(e.p)),
            theta: Some(to_f64(e.theta)),
            r_max: g(self.extra.r_max),
            alpha: g(self.extra.alpha),
            gauss_beta: g(self.extra.gauss_beta),
            a: g(self.extra.a),
            b: g(self.extra.b),
            ..Default::default()
        };
        match self.name {
            ScenarioKind::Cylindrical | ScenarioKind::LogCylindrical => {
                p.m = g(self.extra.m);
                p.n = g(self.extra.n_total);
            }
            ScenarioKind::Antisymmetric => p.n = g(self.extra.n_total),
            ScenarioKind::Strip => p.p = None,
            _ => p.q = Some(to_f64(e.q)),
        }
        if self.name == ScenarioKind::Power {
            p.beta = Some(to_f64(e.beta));
        }
        if matches!(self.name, ScenarioKind::GaussianA | ScenarioKind::ImprovedWeight) {
            p.theta = None;
        }
        p
    }

    /// Whether `W >= 0` on the whole interval.
    pub fn has_nonnegative_weight(&self) -> bool {
        self.pair.w.is_nonnegative()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Parses and re-derives the scenario; the stored constant must match the catalog.
    pub fn from_json(s: &str) -> Result<Self> {
        let parsed: Scenario<T> =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        let rebuilt = scenario_catalog::<T>(parsed.name, &parsed.params())?;
        let tol = lit::<T>(1e-9) * rebuilt.sharp_constant.abs().max(T::one());
        if (rebuilt.sharp_constant - parsed.sharp_constant).abs() > tol {
            return Err(Error::ParameterDomain(format!(
                "sharp_constant {} does not match the catalog value {}",
                parsed.sharp_constant, rebuilt.sharp_constant
            )));
        }
        Ok(parsed)
    }

    /// Coefficient of the lower-order Gaussian term, `(alpha/(p beta))^{p-1}(alpha(p-1)+Q-p)`.
    pub fn gaussian_correction(&self) -> Option<T> {
        if self.name != ScenarioKind::GaussianA {
            return None;
        }
        let (alpha, gb) = (self.extra.alpha?, self.extra.gauss_beta?);
        let e = &self.exponents;
        let one = T::one();
        Some((alpha / (e.p * gb)).powf(e.p - one) * (alpha * (e.p - one) + e.q - e.p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: f64, p: f64, theta: f64) -> ScenarioParams {
        ScenarioParams {
            q: Some(q),
            p: Some(p),
            theta: Some(theta),
            ..Default::default()
        }
    }

    #[test]
    fn power_constants() {
        let s: Scenario<f64> = scenario_catalog(ScenarioKind::Power, &params(5.0, 2.0, 1.0)).unwrap();
        assert!((s.sharp_constant - 2.25).abs() < 1e-15);
        let s: Scenario<f64> = scenario_catalog(ScenarioKind::Power, &params(4.0, 3.0, 1.0)).unwrap();
        assert!((s.sharp_constant - 1.0 / 27.0).abs() < 1e-15);
        assert!((s.exponents.measure_exponent() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn log_and_gaussian_constants() {
        let s: Scenario<f64> = scenario_catalog(ScenarioKind::LogRadial, &params(3.0, 2.0, 0.0)).unwrap();
        assert!((s.sharp_constant - 0.25).abs() < 1e-15);
        for q in [1.0, 3.0, 7.0] {
            let g: Scenario<f64> = scenario_catalog(
                ScenarioKind::GaussianA,
                &ScenarioParams { q: Some(q), p: Some(2.0), alpha: Some(2.0), gauss_beta: Some(2.0), ..Default::default() },
            )
            .unwrap();
            assert!((g.sharp_constant - 0.25).abs() < 1e-15);
            assert!((g.gaussian_correction().unwrap() - q / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        let bad = ScenarioParams { alpha: Some(1.5), ..Default::default() };
        assert!(matches!(
            scenario_catalog::<f64>(ScenarioKind::GaussianA, &bad),
            Err(Error::ParameterDomain(_))
        ));
        let bad = ScenarioParams { gauss_beta: Some(0.0), ..Default::default() };
        assert!(scenario_catalog::<f64>(ScenarioKind::GaussianB, &bad).is_err());
        assert!(scenario_catalog::<f64>(ScenarioKind::Power, &params(3.0, 1.5, 1.0)).is_err());
        assert!(scenario_catalog::<f64>(ScenarioKind::Power, &params(0.5, 2.0, 1.0)).is_err());
        assert!(scenario_catalog::<f64>(ScenarioKind::Power, &params(4.0, 2.0, 2.0)).is_err());
    }

    #[test]
    fn json_round_trip_for_every_scenario() {
        for kind in ScenarioKind::ALL {
            let s: Scenario<f64> = scenario_catalog(kind, &ScenarioParams::default()).unwrap();
            let js = s.to_json().unwrap();
            assert!(js.contains(&format!("\"name\": \"{}\"", kind.as_str())));
            let back = Scenario::<f64>::from_json(&js).unwrap();
            assert_eq!(back, s, "{kind}");
        }
    }

    #[test]
    fn json_with_wrong_constant_is_rejected() {
        let s: Scenario<f64> = scenario_catalog(ScenarioKind::Power, &params(5.0, 2.0, 1.0)).unwrap();
        let js = s.to_json().unwrap().replace("\"sharp_constant\": 2.25", "\"sharp_constant\": 2.5");
        assert!(Scenario::<f64>::from_json(&js).is_err());
    }

    #[test]
    fn antisymmetric_constant_matches_closed_form() {
        for n in [2.0, 3.0, 4.0] {
            for theta in [0.0, 1.0, 1.5] {
                let s: Scenario<f64> = scenario_catalog(
                    ScenarioKind::Antisymmetric,
                    &ScenarioParams { n: Some(n), theta: Some(theta), ..Default::default() },
                )
                .unwrap();
                let expect = ((n * n - 2.0 * theta) / 2.0).powi(2) + n * (n - 1.0) * (theta - 1.0);
                assert!((s.sharp_constant - expect).abs() < 1e-12);
            }
        }
    }
}
