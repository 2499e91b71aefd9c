//! Closed-form radial weights `V`, `W` and the pair they form.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// `coef * r^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm<T> {
    pub coef: T,
    pub exponent: T,
}

/// `(ln(radius / r))^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFactor<T> {
    pub radius: T,
    pub exponent: T,
}

/// `exp(-r^alpha / beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFactor<T> {
    pub alpha: T,
    pub beta: T,
}

/// `(sum_i c_i r^{e_i}) * (ln(R/r))^b * exp(-r^alpha/beta)`, optional factors omitted when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight<T> {
    pub terms: Vec<PowerTerm<T>>,
    pub log_factor: Option<LogFactor<T>>,
    pub gaussian: Option<GaussianFactor<T>>,
}

impl<T: Real> Weight<T> {
    pub fn power(coef: T, exponent: T) -> Self {
        Self {
            terms: vec![PowerTerm { coef, exponent }],
            log_factor: None,
            gaussian: None,
        }
    }

    pub fn sum(terms: Vec<PowerTerm<T>>) -> Self {
        Self {
            terms,
            log_factor: None,
            gaussian: None,
        }
    }

    pub fn with_log(mut self, radius: T, exponent: T) -> Self {
        self.log_factor = Some(LogFactor { radius, exponent });
        self
    }

    pub fn with_gaussian(mut self, alpha: T, beta: T) -> Self {
        self.gaussian = Some(GaussianFactor { alpha, beta });
        self
    }

    /// Algebraic factor and the exponent of the Gaussian factor at `r`.
    pub fn eval_scaled(&self, r: T) -> (T, T) {
        let mut alg: T = self
            .terms
            .iter()
            .map(|t| t.coef * r.powf(t.exponent))
            .sum();
        if let Some(l) = self.log_factor {
            alg = alg * (l.radius / r).ln().powf(l.exponent);
        }
        let log_scale = match self.gaussian {
            Some(g) => -r.powf(g.alpha) / g.beta,
            None => T::zero(),
        };
        (alg, log_scale)
    }

    pub fn value(&self, r: T) -> T {
        let (a, s) = self.eval_scaled(r);
        a * s.exp()
    }

    /// True when every power term has a nonnegative coefficient.
    pub fn is_nonnegative(&self) -> bool {
        self.terms.iter().all(|t| t.coef >= T::zero())
    }
}

/// Radial interval `(lower, upper)`; `upper` may be `+inf` (serialized as `null`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Interval<T: Real> {
    pub lower: T,
    #[serde(with = "extended")]
    pub upper: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lower: T, upper: T) -> Self {
        Self { lower, upper }
    }

    pub fn contains_closed(&self, lo: T, hi: T) -> bool {
        lo >= self.lower && hi <= self.upper && lo <= hi
    }
}

/// Weights `V`, `W`, the constant `lambda` and the radial interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RadialWeightPair<T: Real> {
    pub v: Weight<T>,
    pub w: Weight<T>,
    pub lambda: T,
    pub interval: Interval<T>,
}

mod extended {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::Real;

    pub fn serialize<S: Serializer, T: Real>(x: &T, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > T::zero() {
            s.serialize_none()
        } else {
            x.serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Real>(d: D) -> Result<T, D::Error> {
        let v: Option<T> = Option::deserialize(d)?;
        Ok(v.unwrap_or_else(T::infinity))
    }

}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_weight_splits_exponent() {
        let w = Weight::sum(vec![
            PowerTerm { coef: 1.0f64, exponent: 2.0 },
            PowerTerm { coef: -6.0, exponent: 0.0 },
        ])
        .with_gaussian(2.0, 2.0);
        let r = 1.5;
        let (a, s) = w.eval_scaled(r);
        assert!((a - (r * r - 6.0)).abs() < 1e-15);
        assert!((s + r * r / 2.0).abs() < 1e-15);
        assert!(!w.is_nonnegative());
    }

    #[test]
    fn infinite_upper_round_trips_as_null() {
        let i = Interval::new(0.0f64, f64::INFINITY);
        let s = serde_json::to_string(&i).unwrap();
        assert_eq!(s, r#"{"lower":0.0,"upper":null}"#);
        let back: Interval<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, i);
    }
}
