//! Radial profiles `phi(r)` with analytic derivatives.
//!
//! A profile may carry an exponential envelope `exp(c r^k)` kept apart from the
//! algebraic part so that products with Gaussian weights can be formed in log
//! space without overflow.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// `exp(coef * r^power)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope<T> {
    pub coef: T,
    pub power: T,
}

impl<T: Real> Envelope<T> {
    pub fn exponent(&self, r: T) -> T {
        self.coef * r.powf(self.power)
    }

    pub fn rate(&self, r: T) -> T {
        self.coef * self.power * r.powf(self.power - T::one())
    }
}

/// Value, derivative and support of a radial test function.
#[derive(Clone)]
pub struct Profile<T> {
    value: RealFn<T>,
    derivative: RealFn<T>,
    support: (T, T),
    compact: bool,
    knots: Vec<T>,
    envelope: Option<Envelope<T>>,
}

impl<T: Real> std::fmt::Debug for Profile<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Profile")
            .field("support", &self.support)
            .field("compact", &self.compact)
            .field("knots", &self.knots.len())
            .field("envelope", &self.envelope)
            .finish()
    }
}

/// Scaled evaluation: `phi = exp(log_scale) * value`, `phi' = exp(log_scale) * derivative`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPoint<T> {
    pub log_scale: T,
    pub value: T,
    pub derivative: T,
}

impl<T: Real> Profile<T> {
    /// A profile supported on `support` (not flagged compact).
    pub fn new(
        value: impl Fn(T) -> T + Send + Sync + 'static,
        derivative: impl Fn(T) -> T + Send + Sync + 'static,
        support: (T, T),
    ) -> Self {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            support,
            compact: false,
            knots: Vec::new(),
            envelope: None,
        }
    }

    pub fn compactly_supported(mut self) -> Self {
        self.compact = true;
        self
    }

    pub fn with_knots(mut self, knots: impl IntoIterator<Item = T>) -> Self {
        self.knots.extend(knots);
        self.knots
            .sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        self.knots.dedup();
        self
    }

    pub fn with_envelope(mut self, envelope: Envelope<T>) -> Self {
        self.envelope = Some(envelope);
        self
    }

    pub fn support(&self) -> (T, T) {
        self.support
    }

    pub fn is_compact(&self) -> bool {
        self.compact
    }

    pub fn envelope(&self) -> Option<Envelope<T>> {
        self.envelope
    }

    /// Support endpoints together with interior knots, in increasing order.
    pub fn breakpoints(&self) -> Vec<T> {
        let (lo, hi) = self.support;
        let mut pts: Vec<T> = self
            .knots
            .iter()
            .copied()
            .filter(|k| *k > lo && *k < hi)
            .collect();
        pts.insert(0, lo);
        pts.push(hi);
        pts
    }

    fn inside(&self, r: T) -> bool {
        r >= self.support.0 && r <= self.support.1
    }

    /// Algebraic part and envelope exponent at `r`.
    pub fn scaled(&self, r: T) -> ScaledPoint<T> {
        if !self.inside(r) {
            return ScaledPoint {
                log_scale: T::zero(),
                value: T::zero(),
                derivative: T::zero(),
            };
        }
        let v = (self.value)(r);
        let dv = (self.derivative)(r);
        match self.envelope {
            None => ScaledPoint {
                log_scale: T::zero(),
                value: v,
                derivative: dv,
            },
            Some(env) => ScaledPoint {
                log_scale: env.exponent(r),
                value: v,
                derivative: dv + env.rate(r) * v,
            },
        }
    }

    pub fn value(&self, r: T) -> T {
        let s = self.scaled(r);
        s.value * s.log_scale.exp()
    }

    pub fn derivative(&self, r: T) -> T {
        let s = self.scaled(r);
        s.derivative * s.log_scale.exp()
    }

    /// `r^gamma` on `support`.
    pub fn power_law(gamma: T, support: (T, T)) -> Self {
        Self::new(
            move |r: T| r.powf(gamma),
            move |r: T| gamma * r.powf(gamma - T::one()),
            support,
        )
    }

    /// `(ln(R/r))^exponent` on `support`, which must lie below `R`.
    pub fn log_power(r_max: T, exponent: T, support: (T, T)) -> Self {
        Self::new(
            move |r: T| (r_max / r).ln().powf(exponent),
            move |r: T| {
                let l = (r_max / r).ln();
                -exponent * l.powf(exponent - T::one()) / r
            },
            support,
        )
    }

    /// `exp(coef r^power)` stored as a pure envelope.
    pub fn exponential(coef: T, power: T, support: (T, T)) -> Self {
        Self::new(|_| T::one(), |_| T::zero(), support).with_envelope(Envelope { coef, power })
    }

    /// Pointwise product with the product rule; supports intersect.
    pub fn product(&self, other: &Profile<T>) -> Result<Self> {
        let envelope = match (self.envelope, other.envelope) {
            (None, e) | (e, None) => e,
            (Some(a), Some(b)) if a.power == b.power => Some(Envelope {
                coef: a.coef + b.coef,
                power: a.power,
            }),
            _ => {
                return Err(Error::InvalidProfile(
                    "cannot multiply envelopes with different powers".into(),
                ))
            }
        };
        let (fa, da) = (self.value.clone(), self.derivative.clone());
        let (fb, db) = (other.value.clone(), other.derivative.clone());
        let (fa2, fb2) = (fa.clone(), fb.clone());
        let lo = self.support.0.max(other.support.0);
        let hi = self.support.1.min(other.support.1);
        if lo > hi {
            return Err(Error::InvalidProfile("supports do not intersect".into()));
        }
        let mut knots = self.knots.clone();
        knots.extend(other.knots.iter().copied());
        knots.push(self.support.0);
        knots.push(self.support.1);
        knots.push(other.support.0);
        knots.push(other.support.1);
        let p = Self {
            value: Arc::new(move |r| fa(r) * fb(r)),
            derivative: Arc::new(move |r| da(r) * fb2(r) + fa2(r) * db(r)),
            support: (lo, hi),
            compact: self.compact || other.compact,
            knots: Vec::new(),
            envelope,
        };
        Ok(p.with_knots(knots.into_iter().filter(|k| k.is_finite())))
    }

    /// Composes a profile of `t = ln(R/r)` into a profile of `r`.
    pub fn compose_log(&self, r_max: T) -> Result<Self> {
        if self.envelope.is_some() {
            return Err(Error::Unsupported(
                "logarithmic composition of enveloped profiles".into(),
            ));
        }
        let (f, d) = (self.value.clone(), self.derivative.clone());
        let (t_lo, t_hi) = self.support;
        let lo = r_max * (-t_hi).exp();
        let hi = r_max * (-t_lo).exp();
        let knots: Vec<T> = self
            .knots
            .iter()
            .map(|t| r_max * (-*t).exp())
            .collect();
        let p = Self {
            value: Arc::new(move |r: T| f((r_max / r).ln())),
            derivative: Arc::new(move |r: T| -d((r_max / r).ln()) / r),
            support: (lo, hi),
            compact: self.compact,
            knots: Vec::new(),
            envelope: None,
        };
        Ok(p.with_knots(knots))
    }

    /// Sum of bumps `a_k B((ln r - c_k)/w_k)` with `B(t) = (1 - t^2)^3`.
    pub fn log_bump_sum(bumps: Vec<LogBump<T>>) -> Result<Self> {
        if bumps.is_empty() {
            return Err(Error::InvalidProfile("empty bump list".into()));
        }
        let lo = bumps
            .iter()
            .map(|b| (b.center - b.width).exp())
            .fold(T::infinity(), T::min);
        let hi = bumps
            .iter()
            .map(|b| (b.center + b.width).exp())
            .fold(T::zero(), T::max);
        let mut knots = Vec::new();
        for b in &bumps {
            knots.push((b.center - b.width).exp());
            knots.push(b.center.exp());
            knots.push((b.center + b.width).exp());
        }
        let bv = bumps.clone();
        let value = move |r: T| {
            let s = r.ln();
            bv.iter().map(|b| b.amplitude * bump((s - b.center) / b.width)).sum()
        };
        let derivative = move |r: T| {
            let s = r.ln();
            bumps
                .iter()
                .map(|b| b.amplitude * bump_derivative((s - b.center) / b.width) / b.width)
                .sum::<T>()
                / r
        };
        Ok(Self::new(value, derivative, (lo, hi))
            .compactly_supported()
            .with_knots(knots))
    }

    /// Cubic Hermite interpolant through `(r_i, phi_i, phi'_i)`.
    pub fn hermite(nodes: Vec<T>, values: Vec<T>, derivatives: Vec<T>) -> Result<Self> {
        let n = nodes.len();
        if n < 2 || values.len() != n || derivatives.len() != n {
            return Err(Error::InvalidProfile(
                "hermite data needs at least two consistent samples".into(),
            ));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile("hermite nodes must increase".into()));
        }
        let data = Arc::new((nodes.clone(), values, derivatives));
        let d2 = data.clone();
        let support = (nodes[0], nodes[n - 1]);
        let value = move |r: T| hermite_eval(&data, r).0;
        let derivative = move |r: T| hermite_eval(&d2, r).1;
        Ok(Self::new(value, derivative, support).with_knots(nodes))
    }

    /// Largest relative mismatch between `derivative` and a central difference
    /// at `count` points away from knots.
    pub fn derivative_mismatch(&self, count: usize) -> T {
        let pts = self.breakpoints();
        let mut worst = T::zero();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !a.is_finite() || !b.is_finite() || b <= a {
                continue;
            }
            for i in 1..=count {
                let r = a + (b - a) * lit::<T>(i as f64) / lit::<T>(count as f64 + 1.0);
                let h = (b - a) * lit(1e-5);
                let fd = (self.value(r + h) - self.value(r - h)) / (h + h);
                let d = self.derivative(r);
                let scale = d.abs().max(self.value(r).abs() / r.max(T::epsilon())).max(T::one());
                worst = worst.max((fd - d).abs() / scale);
            }
        }
        worst
    }
}

/// One bump in logarithmic radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBump<T> {
    pub amplitude: T,
    pub center: T,
    pub width: T,
}

fn bump<T: Real>(t: T) -> T {
    if t.abs() >= T::one() {
        T::zero()
    } else {
        let u = T::one() - t * t;
        u * u * u
    }
}

fn bump_derivative<T: Real>(t: T) -> T {
    if t.abs() >= T::one() {
        T::zero()
    } else {
        let u = T::one() - t * t;
        lit::<T>(-6.0) * t * u * u
    }
}

fn hermite_eval<T: Real>(data: &(Vec<T>, Vec<T>, Vec<T>), r: T) -> (T, T) {
    let (x, y, d) = data;
    let n = x.len();
    let i = match x.binary_search_by(|v| v.partial_cmp(&r).unwrap_or(Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    };
    let h = x[i + 1] - x[i];
    let t = (r - x[i]) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    let six: T = lit(6.0);
    let h00 = two * t3 - three * t2 + T::one();
    let h10 = t3 - two * t2 + t;
    let h01 = -two * t3 + three * t2;
    let h11 = t3 - t2;
    let v = h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
    let dh00 = six * t2 - six * t;
    let dh10 = three * t2 - lit::<T>(4.0) * t + T::one();
    let dh01 = -six * t2 + six * t;
    let dh11 = three * t2 - two * t;
    let dv = (dh00 * y[i] + dh01 * y[i + 1]) / h + dh10 * d[i] + dh11 * d[i + 1];
    (v, dv)
}
