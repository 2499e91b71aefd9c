//! Concrete gauges and direct multi-dimensional checks of the radial reduction.
//!
//! Gauges are encoded by closed forms for `d`, `|grad_L d|` and the matrix
//! `sigma` of the horizontal gradient. Monte Carlo estimates sample a box that
//! encloses the gauge ball and run in `f64`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::quadrature::{gauss_fixed, gauss_legendre};
use crate::reduce::reduce_radial_functional;
use crate::sampling::{parallel_batches, ratio_estimate, stream_rng, MonteCarloEstimate, RatioAccumulator};
use crate::scalar::{lit, Real};
use crate::scenario::{scenario_catalog, Scenario, ScenarioKind, ScenarioParams};
use crate::sharpness::{make_cutoff, BridgeShape, CutoffKind, CutoffSpec};

/// Operator geometries with closed-form gauges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeModel<T> {
    /// `R^n`, `d = |x|`.
    Euclidean { n: usize },
    /// `(x, y, t)` in `R^n x R^n x R`, `rho = (|z|^{4 gamma} + t^2)^{1/(4 gamma)}`.
    Greiner { n: usize, gamma: T },
    /// `(x, y)` in `R^n x R^k`, `rho = (|x|^{2(1+gamma)} + |y|^2)^{1/(2(1+gamma))}`.
    Grushin { n: usize, k: usize, gamma: T },
    /// `(x, y)` in `R^m x R^{N-m}`, `d = |x|`.
    CylindricalSplit {
        m: usize,
        #[serde(rename = "N")]
        n_total: usize,
    },
}

/// Gauge value and horizontal gradient magnitude at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeValue<T> {
    pub d: T,
    pub grad_gauge_mag: T,
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

impl<T: Real> GaugeModel<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GaugeModel::Euclidean { n } => n >= 1,
            GaugeModel::Greiner { n, gamma } => n >= 1 && gamma >= T::one(),
            GaugeModel::Grushin { n, gamma, .. } => n >= 1 && gamma >= T::zero(),
            GaugeModel::CylindricalSplit { m, n_total } => m >= 1 && n_total >= m,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterDomain(format!("invalid gauge model {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GaugeModel::Euclidean { .. } => "euclidean",
            GaugeModel::Greiner { .. } => "greiner",
            GaugeModel::Grushin { .. } => "grushin",
            GaugeModel::CylindricalSplit { .. } => "cylindrical_split",
        }
    }

    /// Ambient dimension.
    pub fn dimension(&self) -> usize {
        match *self {
            GaugeModel::Euclidean { n } => n,
            GaugeModel::Greiner { n, .. } => 2 * n + 1,
            GaugeModel::Grushin { n, k, .. } => n + k,
            GaugeModel::CylindricalSplit { n_total, .. } => n_total,
        }
    }

    /// Exponents `eta_i` of the dilations `delta_lambda`.
    pub fn dilation_exponents(&self) -> Vec<T> {
        match *self {
            GaugeModel::Euclidean { n } => vec![T::one(); n],
            GaugeModel::Greiner { n, gamma } => {
                let mut e = vec![T::one(); 2 * n];
                e.push(lit::<T>(2.0) * gamma);
                e
            }
            GaugeModel::Grushin { n, k, gamma } => {
                let mut e = vec![T::one(); n];
                e.extend(std::iter::repeat(T::one() + gamma).take(k));
                e
            }
            // `d = |x|` ignores y; only the x block scales
            GaugeModel::CylindricalSplit { m, n_total } => {
                let mut e = vec![T::one(); m];
                e.extend(std::iter::repeat(T::zero()).take(n_total - m));
                e
            }
        }
    }

    /// Homogeneous dimension `Q`.
    pub fn homogeneous_dimension(&self) -> T {
        self.dilation_exponents().into_iter().sum()
    }

    pub fn dilate(&self, lambda: T, point: &[T]) -> Vec<T> {
        point
            .iter()
            .zip(self.dilation_exponents())
            .map(|(x, e)| *x * lambda.powf(e))
            .collect()
    }

    fn check_point(&self, point: &[T]) -> Result<()> {
        if point.len() != self.dimension() {
            return Err(Error::ParameterDomain(format!(
                "{} expects {} coordinates, got {}",
                self.name(),
                self.dimension(),
                point.len()
            )));
        }
        Ok(())
    }

    /// Gauge `d` alone.
    pub fn gauge(&self, point: &[T]) -> Result<T> {
        self.check_point(point)?;
        let d = match *self {
            GaugeModel::Euclidean { .. } => norm(point),
            GaugeModel::Greiner { n, gamma } => {
                let z = norm(&point[..2 * n]);
                let t = point[2 * n];
                let four_g = lit::<T>(4.0) * gamma;
                (z.powf(four_g) + t * t).powf(T::one() / four_g)
            }
            GaugeModel::Grushin { n, gamma, .. } => {
                let x = norm(&point[..n]);
                let y = norm(&point[n..]);
                let e = lit::<T>(2.0) * (T::one() + gamma);
                (x.powf(e) + y * y).powf(T::one() / e)
            }
            GaugeModel::CylindricalSplit { m, .. } => norm(&point[..m]),
        };
        if d == T::zero() {
            return Err(Error::SingularPoint);
        }
        Ok(d)
    }

    /// `d` and `|grad_L d|` from the closed forms.
    pub fn gauge_eval(&self, point: &[T]) -> Result<GaugeValue<T>> {
        let d = self.gauge(point)?;
        let grad_gauge_mag = match *self {
            GaugeModel::Euclidean { .. } | GaugeModel::CylindricalSplit { .. } => T::one(),
            GaugeModel::Greiner { n, gamma } => {
                let z = norm(&point[..2 * n]);
                let e = lit::<T>(2.0) * gamma - T::one();
                (z / d).powf(e)
            }
            GaugeModel::Grushin { n, gamma, .. } => {
                let x = norm(&point[..n]);
                (x / d).powf(gamma)
            }
        };
        Ok(GaugeValue { d, grad_gauge_mag })
    }

    /// `sigma(point) * grad` for a Euclidean gradient `grad`.
    pub fn horizontal(&self, point: &[T], grad: &[T]) -> Result<Vec<T>> {
        self.check_point(point)?;
        Ok(match *self {
            GaugeModel::Euclidean { .. } | GaugeModel::CylindricalSplit { .. } => grad.to_vec(),
            GaugeModel::Greiner { n, gamma } => {
                let z = norm(&point[..2 * n]);
                let c = lit::<T>(2.0) * gamma * z.powf(lit::<T>(2.0) * gamma - lit(2.0));
                let gt = grad[2 * n];
                let mut h = Vec::with_capacity(2 * n);
                for i in 0..n {
                    h.push(grad[i] + c * point[n + i] * gt);
                }
                for i in 0..n {
                    h.push(grad[n + i] - c * point[i] * gt);
                }
                h
            }
            GaugeModel::Grushin { n, gamma, .. } => {
                let x = norm(&point[..n]);
                let c = (T::one() + gamma) * x.powf(gamma);
                grad.iter()
                    .enumerate()
                    .map(|(i, g)| if i < n { *g } else { c * *g })
                    .collect()
            }
        })
    }

    /// Closed-form `grad_L d`.
    pub fn horizontal_gauge_gradient(&self, point: &[T]) -> Result<Vec<T>> {
        let d = self.gauge(point)?;
        let euclid: Vec<T> = match *self {
            GaugeModel::Euclidean { .. } => point.iter().map(|x| *x / d).collect(),
            GaugeModel::CylindricalSplit { m, .. } => point
                .iter()
                .enumerate()
                .map(|(i, x)| if i < m { *x / d } else { T::zero() })
                .collect(),
            GaugeModel::Greiner { n, gamma } => {
                let z = norm(&point[..2 * n]);
                let four_g = lit::<T>(4.0) * gamma;
                let s = d.powf(T::one() - four_g);
                let mut g: Vec<T> = point[..2 * n]
                    .iter()
                    .map(|x| s * z.powf(four_g - lit(2.0)) * *x)
                    .collect();
                g.push(s * point[2 * n] / (lit::<T>(2.0) * gamma));
                g
            }
            GaugeModel::Grushin { n, gamma, .. } => {
                let x = norm(&point[..n]);
                let e = lit::<T>(2.0) * (T::one() + gamma);
                let s = d.powf(T::one() - e);
                point
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        if i < n {
                            s * x.powf(e - lit(2.0)) * *v
                        } else {
                            s * *v / (T::one() + gamma)
                        }
                    })
                    .collect()
            }
        };
        self.horizontal(point, &euclid)
    }

    /// Half-widths of a box containing the unit gauge ball.
    pub fn unit_box(&self) -> Result<Vec<T>> {
        match self {
            GaugeModel::CylindricalSplit { .. } => Err(Error::Unsupported(
                "gauge balls of the cylindrical split are unbounded".into(),
            )),
            _ => Ok(vec![T::one(); self.dimension()]),
        }
    }
}

/// Central finite-difference Euclidean gradient.
pub fn fd_gradient<T: Real>(f: impl Fn(&[T]) -> Result<T>, point: &[T], h: T) -> Result<Vec<T>> {
    let mut g = Vec::with_capacity(point.len());
    let mut x = point.to_vec();
    for i in 0..point.len() {
        let xi = x[i];
        x[i] = xi + h;
        let fp = f(&x)?;
        x[i] = xi - h;
        let fm = f(&x)?;
        x[i] = xi;
        g.push((fp - fm) / (h + h));
    }
    Ok(g)
}

fn uniform_point(rng: &mut ChaCha8Rng, half_widths: &[f64]) -> Vec<f64> {
    half_widths.iter().map(|w| rng.gen_range(-*w..*w)).collect()
}

/// Largest relative gap between `|grad_L d|` from the closed form and from
/// `sigma` applied to a finite-difference gradient. Points with
/// `|grad_L d| < 1e-3` (near the characteristic set) are skipped.
pub fn fd_gradient_check(model: &GaugeModel<f64>, samples: usize, seed: u64) -> Result<f64> {
    model.validate()?;
    let mut rng = stream_rng(seed, 0);
    let dim = model.dimension();
    let widths = vec![2.0; dim];
    let mut worst = 0.0f64;
    let mut used = 0;
    while used < samples {
        let x = uniform_point(&mut rng, &widths);
        let gv = match model.gauge_eval(&x) {
            Ok(g) if g.d > 1e-2 && g.grad_gauge_mag > 1e-3 => g,
            _ => continue,
        };
        let h = 1e-5 * gv.d;
        let grad = fd_gradient(|p| model.gauge(p), &x, h)?;
        let fd = norm(&model.horizontal(&x, &grad)?);
        let closed = norm(&model.horizontal_gauge_gradient(&x)?);
        worst = worst
            .max((fd - gv.grad_gauge_mag).abs() / gv.grad_gauge_mag)
            .max((closed - gv.grad_gauge_mag).abs() / gv.grad_gauge_mag);
        used += 1;
    }
    Ok(worst)
}

/// Largest `|d(delta_lambda x) - lambda d(x)| / (lambda d(x))` over random `(x, lambda)`.
pub fn homogeneity_check(model: &GaugeModel<f64>, samples: usize, seed: u64) -> Result<f64> {
    model.validate()?;
    let mut rng = stream_rng(seed, 1);
    let widths = vec![2.0; model.dimension()];
    let mut worst = 0.0f64;
    let mut used = 0;
    while used < samples {
        let x = uniform_point(&mut rng, &widths);
        let d = match model.gauge(&x) {
            Ok(d) if d > 1e-3 => d,
            _ => continue,
        };
        let lambda = rng.gen_range(-2.3f64..2.3).exp();
        let dl = model.gauge(&model.dilate(lambda, &x))?;
        worst = worst.max((dl - lambda * d).abs() / (lambda * d));
        used += 1;
    }
    Ok(worst)
}

/// Largest `|z . a| / (|z| |a|)` where `a` is the `t`-column of `sigma` in the
/// Greiner model: the `t` contribution is orthogonal to the radial direction in `z`.
pub fn cylindrical_orthogonality(model: &GaugeModel<f64>, samples: usize, seed: u64) -> Result<f64> {
    let (n, gamma) = match *model {
        GaugeModel::Greiner { n, gamma } => (n, gamma),
        _ => return Err(Error::Unsupported("orthogonality check is specific to the Greiner model".into())),
    };
    model.validate()?;
    let mut rng = stream_rng(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let p = uniform_point(&mut rng, &vec![1.0; 2 * n + 1]);
        let z = norm(&p[..2 * n]);
        let c = 2.0 * gamma * z.powf(2.0 * gamma - 2.0);
        let a: Vec<f64> = (0..n).map(|i| c * p[n + i]).chain((0..n).map(|i| -c * p[i])).collect();
        let dot: f64 = p[..2 * n].iter().zip(&a).map(|(x, y)| x * y).sum();
        let scale = z * norm(&a);
        if scale > 0.0 {
            worst = worst.max(dot.abs() / scale);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureHomogeneity {
    /// Estimate of `I(R2) / I(R1)` with `I(R) = int_{d < R} |grad_L d|^alpha dx`.
    pub ratio: MonteCarloEstimate<f64>,
    /// `(R2 / R1)^Q`.
    pub expected: f64,
    /// Three standard errors exceed the tolerance band.
    pub inconclusive: bool,
    pub pass: bool,
}

fn ball_integral(model: &GaugeModel<f64>, alpha: f64, radius: f64, samples: usize, seed: u64, stream: u64) -> Result<(f64, f64)> {
    let widths: Vec<f64> = model
        .unit_box()?
        .iter()
        .zip(model.dilation_exponents())
        .map(|(w, e)| w * radius.powf(e))
        .collect();
    let volume: f64 = widths.iter().map(|w| 2.0 * w).product();
    let parts = parallel_batches(samples, seed, stream, |rng, n| {
        let mut acc = RatioAccumulator::default();
        for _ in 0..n {
            let x = uniform_point(rng, &widths);
            let v = match model.gauge_eval(&x) {
                Ok(g) if g.d < radius => g.grad_gauge_mag.powf(alpha),
                _ => 0.0,
            };
            acc.push(v, 1.0);
        }
        acc
    });
    let mut total = RatioAccumulator::default();
    for p in &parts {
        total.merge(p);
    }
    Ok((volume * total.mean_a(), volume * total.std_error_a()))
}

const SECOND_STREAM: u64 = 1 << 32;

/// Monte Carlo check of `I(R) = lambda_alpha R^Q` through the ratio `I(R2)/I(R1)`.
pub fn measure_homogeneity_check(
    model: &GaugeModel<f64>,
    alpha: f64,
    r1: f64,
    r2: f64,
    samples: usize,
    seed: u64,
    rel_tol: f64,
) -> Result<MeasureHomogeneity> {
    model.validate()?;
    if !(r1 > 0.0 && r2 >= r1 && r2.is_finite()) {
        return Err(Error::ParameterDomain(format!("need 0 < R1 <= R2 (R1 = {r1}, R2 = {r2})")));
    }
    if model.dimension() > 4 {
        return Err(Error::Unsupported("Monte Carlo checks are limited to dimension <= 4".into()));
    }
    if alpha < 0.0 {
        return Err(Error::ParameterDomain("alpha must be >= 0".into()));
    }
    let expected = (r2 / r1).powf(model.homogeneous_dimension());
    let (i1, s1) = ball_integral(model, alpha, r1, samples, seed, 0)?;
    let (mean, std_error) = if r1 == r2 {
        (1.0, 0.0)
    } else {
        let (i2, s2) = ball_integral(model, alpha, r2, samples, seed, SECOND_STREAM)?;
        let r = i2 / i1;
        (r, r * ((s1 / i1).powi(2) + (s2 / i2).powi(2)).sqrt())
    };
    let band = rel_tol * expected;
    Ok(MeasureHomogeneity {
        ratio: MonteCarloEstimate { mean, std_error, samples, seed },
        expected,
        inconclusive: 3.0 * std_error > band,
        pass: (mean - expected).abs() <= band,
    })
}

/// Smooth bump `exp(-1/(1-y^2))` on `(-1, 1)` and its derivative.
fn eta(y: f64) -> (f64, f64) {
    let s = 1.0 - y * y;
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    let v = (-1.0 / s).exp();
    (v, -2.0 * y / (s * s) * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripQuotient {
    pub theta: f64,
    pub epsilon: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
    /// `((2 theta - 1)/2)^2`.
    pub sharp_constant: f64,
    /// Relative change of the quotient when the rule is doubled.
    pub convergence: f64,
    pub nodes: usize,
}

/// Relative agreement demanded between the `n` and `2n` tensor rules.
pub const STRIP_CONVERGENCE: f64 = 1e-8;

fn strip_panels(eps: f64) -> Vec<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let x1 = half_pi / (2.0 * eps + 1.0);
    let x2 = half_pi / (eps + 1.0);
    // geometric grading toward the edges where 1/cos x grows
    let mut right = vec![0.0];
    let mut s = half_pi - x1;
    let mut inner = Vec::new();
    while s < half_pi / 2.0 {
        inner.push(half_pi - s);
        s *= 2.0;
    }
    inner.reverse();
    right.extend(inner);
    let bridge = 4;
    for i in 0..=bridge {
        right.push(x1 + (x2 - x1) * i as f64 / bridge as f64);
    }
    right.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut all: Vec<f64> = right.iter().rev().map(|x| -x).collect();
    all.pop();
    all.extend(right);
    all
}

const Y_PANELS: [f64; 9] = [-1.0, -0.99, -0.9, -0.5, 0.0, 0.5, 0.9, 0.99, 1.0];

fn strip_integrals(theta: f64, f: &Profile<f64>, x_panels: &[f64], rule: &(Vec<f64>, Vec<f64>)) -> (f64, f64, usize) {
    let a = theta - 0.5;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut nodes = 0;
    for xw in x_panels.windows(2) {
        for yw in Y_PANELS.windows(2) {
            let (hx, cx) = (0.5 * (xw[1] - xw[0]), 0.5 * (xw[1] + xw[0]));
            let (hy, cy) = (0.5 * (yw[1] - yw[0]), 0.5 * (yw[1] + yw[0]));
            for (ti, wi) in rule.0.iter().zip(&rule.1) {
                let x = cx + hx * ti;
                let (c, s) = (x.cos(), x.sin());
                let (fv, fd) = (f.value(x), f.derivative(x));
                let ca = c.powf(a);
                for (tj, wj) in rule.0.iter().zip(&rule.1) {
                    let y = cy + hy * tj;
                    let (e, ed) = eta(y);
                    let ey = (a * y).exp();
                    let u = ca * fv * ey * e;
                    let ux = ey * e * (-a * c.powf(a - 1.0) * s * fv + ca * fd);
                    let uy = ca * fv * ey * (a * e + ed);
                    let dir = -s * ux + c * uy;
                    let damp = (-2.0 * (theta - 1.0) * y).exp();
                    let w = wi * wj * hx * hy;
                    num += w * dir * dir * c.powf(-2.0 * (theta - 1.0)) * damp;
                    den += w * u * u * c.powf(-2.0 * theta) * damp;
                    nodes += 1;
                }
            }
        }
    }
    (num, den, nodes)
}

/// Directional Rayleigh quotient on `(-pi/2, pi/2) x R` for
/// `u = cos^{theta-1/2}(x) f_eps(x) e^{(theta-1/2) y} eta(y)` and the gauge `e^y cos x`.
pub fn strip_quotient(theta: f64, eps: f64, points_per_panel: usize) -> Result<StripQuotient> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::ParameterDomain(format!("epsilon = {eps} must lie in (0, 1/4)")));
    }
    if points_per_panel < 2 {
        return Err(Error::ParameterDomain("need at least two points per panel".into()));
    }
    let f = make_cutoff(&CutoffSpec::new(CutoffKind::StripFEps, eps))?;
    let panels = strip_panels(eps);
    let coarse = strip_integrals(theta, &f, &panels, &gauss_legendre(points_per_panel));
    let fine = strip_integrals(theta, &f, &panels, &gauss_legendre(2 * points_per_panel));
    let q0 = coarse.0 / coarse.1;
    let q1 = fine.0 / fine.1;
    let convergence = ((q1 - q0) / q1).abs();
    if !(convergence <= STRIP_CONVERGENCE) {
        return Err(Error::Resolution(format!(
            "strip quotient changed by {convergence:.3e} under refinement"
        )));
    }
    Ok(StripQuotient {
        theta,
        epsilon: eps,
        numerator: fine.0,
        denominator: fine.1,
        quotient: q1,
        sharp_constant: ((2.0 * theta - 1.0) / 2.0).powi(2),
        convergence,
        nodes: fine.2,
    })
}

/// `prod_{i<j} (x_j - x_i)`.
pub fn vandermonde(x: &[f64]) -> f64 {
    let mut v = 1.0;
    for j in 0..x.len() {
        for i in 0..j {
            v *= x[j] - x[i];
        }
    }
    v
}

/// Gradient of the Vandermonde product, each entry a sum of products of the other factors.
pub fn vandermonde_gradient(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let mut total = 0.0;
            for l in 0..n {
                if l == k {
                    continue;
                }
                // derivative of the factor pairing k and l, times all the others
                let sign = if l > k { -1.0 } else { 1.0 };
                let mut prod = sign;
                for j in 0..n {
                    for i in 0..j {
                        if (i == k && j == l) || (i == l && j == k) {
                            continue;
                        }
                        prod *= x[j] - x[i];
                    }
                }
                total += prod;
            }
            total
        })
        .collect()
}

/// Fourth-order central-difference Laplacian.
pub fn fd_laplacian(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let mut y = x.to_vec();
    let f0 = f(x);
    let mut total = 0.0;
    for i in 0..x.len() {
        let xi = y[i];
        let mut at = |d: f64| {
            y[i] = xi + d;
            f(&y)
        };
        let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        y[i] = xi;
        total += (-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h);
    }
    total
}

fn sphere_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = norm(&v);
        if r > 1e-8 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VandermondeReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub theta: f64,
    pub epsilon: f64,
    /// Largest `|Delta nu| |x|^{2-k}` with `k = N(N-1)/2`.
    pub harmonicity_residual: f64,
    /// Least-squares eigenvalue of `-Delta_S` on `nu(x/|x|)`.
    pub sphere_eigenvalue: f64,
    /// `k (k + N - 2)`.
    pub expected_eigenvalue: f64,
    /// Largest `|Delta_S nu_S + k(k+N-2) nu_S|` over sampled sphere points.
    pub sphere_eigenvalue_residual: f64,
    /// Monte Carlo quotient of the truncated extremal on the ordered sector.
    pub rayleigh_quotient: MonteCarloEstimate<f64>,
    /// The same quotient from the one-dimensional reduction.
    pub reduced_quotient: f64,
    /// `((N^2 - 2 theta)/2)^2 + N(N-1)(theta - 1)`.
    pub expected_constant: f64,
}

/// Points used by the harmonicity and sphere checks.
pub const VANDERMONDE_CHECK_POINTS: usize = 256;

/// Harmonicity of the Vandermonde product, its spherical eigenvalue, and the
/// sector Rayleigh quotient of `|x|^{-(N^2 - 2 theta)/2} nu g_eps(|x|)`.
pub fn vandermonde_checks(n: usize, theta: f64, eps: f64, mc_samples: usize, seed: u64) -> Result<VandermondeReport> {
    if !(2..=4).contains(&n) {
        return Err(Error::Unsupported(format!("N = {n}: only N in {{2, 3, 4}} is supported")));
    }
    let nf = n as f64;
    if !(nf * nf > 2.0 * theta) {
        return Err(Error::Hypothesis(format!("N^2 > 2 theta fails for N = {n}, theta = {theta}")));
    }
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::ParameterDomain(format!("epsilon = {eps} must lie in (0, 1/4)")));
    }
    let k = nf * (nf - 1.0) / 2.0;
    let mut rng = stream_rng(seed, 3);

    let mut harmonicity_residual = 0.0f64;
    for _ in 0..VANDERMONDE_CHECK_POINTS {
        let r = rng.gen_range(0.5..2.0);
        let x: Vec<f64> = sphere_point(&mut rng, n).into_iter().map(|v| v * r).collect();
        let lap = fd_laplacian(vandermonde, &x, 1e-2 * r);
        harmonicity_residual = harmonicity_residual.max(lap.abs() * r.powf(2.0 - k));
    }

    let expected_eigenvalue = k * (k + nf - 2.0);
    let nu_s = |x: &[f64]| vandermonde(x) / norm(x).powf(k);
    let (mut num, mut den) = (0.0, 0.0);
    let mut samples = Vec::with_capacity(VANDERMONDE_CHECK_POINTS);
    for _ in 0..VANDERMONDE_CHECK_POINTS {
        let w = sphere_point(&mut rng, n);
        // on the unit sphere Delta(nu_S) = Delta_S nu_S since nu_S is 0-homogeneous
        let lap = fd_laplacian(nu_s, &w, 1e-3);
        let v = nu_s(&w);
        num += lap * v;
        den += v * v;
        samples.push((lap, v));
    }
    let sphere_eigenvalue = -num / den;
    let sphere_eigenvalue_residual = samples
        .iter()
        .map(|(lap, v)| (lap + expected_eigenvalue * v).abs())
        .fold(0.0, f64::max);

    let gamma = -(nf * nf - 2.0 * theta) / 2.0;
    let g = make_cutoff(&CutoffSpec::new(CutoffKind::PlainGEps, eps))?;
    let log_span = 2.0 * (1.0 / eps).ln();
    let acc = ratio_estimate(mc_samples, seed, 16, |rng| {
        let r = eps * (rng.gen::<f64>() * log_span).exp();
        let x: Vec<f64> = sorted(sphere_point(rng, n)).into_iter().map(|v| v * r).collect();
        let nu = vandermonde(&x);
        let dnu = vandermonde_gradient(&x);
        let (gv, gd) = (g.value(r), g.derivative(r));
        let radial = r.powf(gamma) * gv;
        let radial_d = gamma * r.powf(gamma - 1.0) * gv + r.powf(gamma) * gd;
        let grad_sq: f64 = x
            .iter()
            .zip(&dnu)
            .map(|(xi, di)| {
                let c = radial * di + nu * radial_d * xi / r;
                c * c
            })
            .sum();
        let u = radial * nu;
        // log-uniform radius: dx = r^N d(ln r) d(omega)
        let jac = r.powf(nf);
        (grad_sq * r.powf(-2.0 * (theta - 1.0)) * jac, u * u * r.powf(-2.0 * theta) * jac)
    });
    let (mean, std_error) = acc.ratio();

    let scenario: Scenario<f64> = scenario_catalog(
        ScenarioKind::Antisymmetric,
        &ScenarioParams { n: Some(nf), theta: Some(theta), ..Default::default() },
    )?;
    let phi = Profile::power_law(-(nf - 2.0 * theta) / 2.0, (0.0, f64::INFINITY)).product(&g)?;
    let reduced_quotient = reduce_radial_functional(&scenario, &phi)?.quotient;

    Ok(VandermondeReport {
        n,
        theta,
        epsilon: eps,
        harmonicity_residual,
        sphere_eigenvalue,
        expected_eigenvalue,
        sphere_eigenvalue_residual,
        rayleigh_quotient: MonteCarloEstimate { mean, std_error, samples: mc_samples, seed },
        reduced_quotient,
        expected_constant: ((nf * nf - 2.0 * theta) / 2.0).powi(2) + nf * (nf - 1.0) * (theta - 1.0),
    })
}

/// Monte Carlo estimate of the full directional quotient
/// `int V(d) |grad_L u . grad_L d / |grad_L d||^p / int W(d) |u|^p |grad_L d|^p`
/// for `u = phi(d)`, with `grad_L u` from finite differences of `u`.
pub fn direct_rayleigh(
    model: &GaugeModel<f64>,
    scenario: &Scenario<f64>,
    phi: &Profile<f64>,
    mc_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate<f64>> {
    model.validate()?;
    if model.dimension() > 4 {
        return Err(Error::Unsupported("Monte Carlo checks are limited to dimension <= 4".into()));
    }
    let q = model.homogeneous_dimension();
    if (q - scenario.exponents.q).abs() > 1e-12 {
        return Err(Error::Hypothesis(format!(
            "model has Q = {q} but the scenario uses Q = {}",
            scenario.exponents.q
        )));
    }
    if scenario.extra.angular_eigenvalue.is_some() {
        return Err(Error::Unsupported("angular factors are not gauge-radial".into()));
    }
    let radius = phi.support().1;
    if !radius.is_finite() {
        return Err(Error::InvalidProfile("direct integration needs a bounded support".into()));
    }
    let widths: Vec<f64> = model
        .unit_box()?
        .iter()
        .zip(model.dilation_exponents())
        .map(|(w, e)| w * radius.powf(e))
        .collect();
    let p = scenario.exponents.p;
    let pair = &scenario.pair;
    let acc = ratio_estimate(mc_samples, seed, 0, |rng| {
        let x = uniform_point(rng, &widths);
        let gv = match model.gauge_eval(&x) {
            Ok(g) if g.d < radius && g.grad_gauge_mag > 0.0 => g,
            _ => return (0.0, 0.0),
        };
        let u = |pt: &[f64]| model.gauge(pt).map(|d| phi.value(d));
        let h = 1e-6 * gv.d;
        let (Ok(grad), Ok(dgrad)) = (fd_gradient(u, &x, h), model.horizontal_gauge_gradient(&x)) else {
            return (0.0, 0.0);
        };
        let Ok(hu) = model.horizontal(&x, &grad) else {
            return (0.0, 0.0);
        };
        let dir: f64 = hu.iter().zip(&dgrad).map(|(a, b)| a * b).sum::<f64>() / gv.grad_gauge_mag;
        let a = pair.v.value(gv.d) * dir.abs().powf(p);
        let b = pair.w.value(gv.d) * phi.value(gv.d).abs().powf(p) * gv.grad_gauge_mag.powf(p);
        (a, b)
    });
    let (mean, std_error) = acc.ratio();
    Ok(MonteCarloEstimate { mean, std_error, samples: mc_samples, seed })
}

/// Shape of the bridge used by the geometry sweeps.
pub const GEOMETRY_BRIDGE: BridgeShape = BridgeShape::Quintic;

/// One JSON record of the `geometry` report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryRecord {
    pub model: String,
    pub check: String,
    pub estimate: f64,
    pub std_error: f64,
    pub expected: f64,
    pub pass: bool,
}

impl<T: Real> std::fmt::Display for GaugeModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GaugeModel::Euclidean { n } => write!(f, "euclidean(n={n})"),
            GaugeModel::Greiner { n, gamma } => write!(f, "greiner(n={n},gamma={gamma})"),
            GaugeModel::Grushin { n, k, gamma } => write!(f, "grushin(n={n},k={k},gamma={gamma})"),
            GaugeModel::CylindricalSplit { m, n_total } => write!(f, "cylindrical_split(m={m},N={n_total})"),
        }
    }
}

/// `int g(x) dx` on `[a, b]` with an `n`-point Gauss rule; exposed for the strip oracle.
pub fn gauss_panel(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    gauss_fixed(f, a, b, &gauss_legendre(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sharpness::sweep_quotient;

    fn grushin() -> GaugeModel<f64> {
        GaugeModel::Grushin { n: 1, k: 1, gamma: 1.0 }
    }

    #[test]
    fn closed_form_examples() {
        let g = GaugeModel::Greiner { n: 1, gamma: 1.0f64 };
        let v = g.gauge_eval(&[1.0, 0.0, 0.0]).unwrap();
        assert!((v.d - 1.0).abs() < 1e-15 && (v.grad_gauge_mag - 1.0).abs() < 1e-15);
        let v = grushin().gauge_eval(&[0.0, 1.0]).unwrap();
        assert!((v.d - 1.0).abs() < 1e-15 && v.grad_gauge_mag == 0.0);
        assert_eq!(GaugeModel::Greiner { n: 1, gamma: 2.0 }.homogeneous_dimension(), 6.0);
        assert_eq!(grushin().homogeneous_dimension(), 3.0);
        assert_eq!(GaugeModel::<f64>::Euclidean { n: 3 }.homogeneous_dimension(), 3.0);
    }

    #[test]
    fn origin_is_singular() {
        assert!(matches!(grushin().gauge_eval(&[0.0, 0.0]), Err(Error::SingularPoint)));
        assert!(grushin().gauge_eval(&[0.0]).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        for m in [
            GaugeModel::Euclidean { n: 3 },
            GaugeModel::Greiner { n: 1, gamma: 1.0 },
            GaugeModel::Greiner { n: 1, gamma: 2.0 },
            grushin(),
            GaugeModel::Grushin { n: 2, k: 1, gamma: 0.5 },
            GaugeModel::CylindricalSplit { m: 2, n_total: 3 },
        ] {
            let e = fd_gradient_check(&m, 500, 11).unwrap();
            assert!(e < 1e-6, "{m}: {e}");
        }
    }

    #[test]
    fn gauges_are_homogeneous() {
        for m in [
            GaugeModel::Euclidean { n: 2 },
            GaugeModel::Greiner { n: 1, gamma: 1.5 },
            grushin(),
            GaugeModel::Grushin { n: 1, k: 2, gamma: 2.0 },
        ] {
            assert!(homogeneity_check(&m, 1000, 5).unwrap() < 1e-12, "{m}");
        }
    }

    #[test]
    fn grushin_degenerates_to_euclidean() {
        let e = GaugeModel::Euclidean { n: 3 };
        let mut rng = stream_rng(9, 0);
        for _ in 0..200 {
            let x = uniform_point(&mut rng, &[1.0, 1.0, 1.0]);
            let a = GaugeModel::Grushin { n: 2, k: 1, gamma: 0.0 }.gauge_eval(&x).unwrap();
            let b = e.gauge_eval(&x).unwrap();
            assert!((a.d - b.d).abs() < 1e-12 && (a.grad_gauge_mag - b.grad_gauge_mag).abs() < 1e-12);
            let c = GaugeModel::Grushin { n: 3, k: 0, gamma: 1.0 }.gauge_eval(&x).unwrap();
            assert!((c.d - b.d).abs() < 1e-12 && (c.grad_gauge_mag - b.grad_gauge_mag).abs() < 1e-12);
        }
    }

    #[test]
    fn greiner_time_column_is_orthogonal_to_z() {
        let e = cylindrical_orthogonality(&GaugeModel::Greiner { n: 2, gamma: 1.0 }, 500, 1).unwrap();
        assert!(e < 1e-14);
        assert!(cylindrical_orthogonality(&grushin(), 10, 1).is_err());
    }

    #[test]
    fn euclidean_ball_volumes_scale() {
        let r = measure_homogeneity_check(&GaugeModel::Euclidean { n: 3 }, 0.0, 1.0, 2.0, 1 << 20, 3, 0.01).unwrap();
        assert!(r.pass && !r.inconclusive, "{r:?}");
        let r = measure_homogeneity_check(&GaugeModel::Greiner { n: 1, gamma: 1.0 }, 2.0, 1.0, 1.0, 1000, 3, 0.01).unwrap();
        assert_eq!(r.ratio.mean, 1.0);
    }

    #[test]
    fn vandermonde_gradient_matches_fd() {
        let x = [-0.7, 0.1, 0.4, 1.3];
        let g = vandermonde_gradient(&x);
        let fd = fd_gradient(|p: &[f64]| Ok(vandermonde(p)), &x, 1e-6).unwrap();
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-8);
        }
        assert_eq!(vandermonde(&[1.0, 3.0]), 2.0);
    }

    #[test]
    fn vandermonde_small_cases() {
        let r = vandermonde_checks(2, 1.0, 1e-2, 20_000, 4).unwrap();
        assert!(r.harmonicity_residual < 1e-9);
        assert_eq!(r.expected_constant, 1.0);
        assert!((r.sphere_eigenvalue - 1.0).abs() < 1e-6);
        let r = vandermonde_checks(3, 1.0, 1e-2, 200_000, 4).unwrap();
        assert!(r.harmonicity_residual < 1e-6);
        assert!((r.sphere_eigenvalue - 12.0).abs() < 1e-6, "{r:?}");
        assert!(r.sphere_eigenvalue_residual < 1e-6);
        let gap = (r.rayleigh_quotient.mean - r.reduced_quotient).abs();
        assert!(gap < 4.0 * r.rayleigh_quotient.std_error, "{r:?}");
        assert!(matches!(vandermonde_checks(2, 2.5, 1e-2, 10, 1), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn reduced_quotient_matches_antisymmetric_sweep() {
        let s: Scenario<f64> = scenario_catalog(
            ScenarioKind::Antisymmetric,
            &ScenarioParams { n: Some(3.0), theta: Some(1.0), ..Default::default() },
        )
        .unwrap();
        let sweep = sweep_quotient(&s, &[1e-2], BridgeShape::Quintic).unwrap();
        let r = vandermonde_checks(3, 1.0, 1e-2, 1000, 4).unwrap();
        assert!((sweep.rows[0].quotient - r.reduced_quotient).abs() < 1e-10);
    }

    /// Separable evaluation of the strip quotient from the expanded integrand.
    fn strip_oracle(theta: f64, eps: f64) -> f64 {
        let f = make_cutoff(&CutoffSpec::new(CutoffKind::StripFEps, eps)).unwrap();
        let panels = strip_panels(eps);
        let n = 48;
        let ix = |h: &dyn Fn(f64) -> f64| -> f64 { panels.windows(2).map(|w| gauss_panel(h, w[0], w[1], n)).sum() };
        let iy = |h: &dyn Fn(f64) -> f64| -> f64 { Y_PANELS.windows(2).map(|w| gauss_panel(h, w[0], w[1], n)).sum() };
        let k = (2.0 * theta - 1.0) / 2.0;
        let x1 = ix(&|x| f.value(x).powi(2) / x.cos());
        let x2 = ix(&|x| x.cos() * x.sin().powi(2) * f.derivative(x).powi(2));
        let x3 = ix(&|x| x.cos().powi(3) * f.value(x).powi(2));
        let x4 = ix(&|x| x.sin() * f.value(x) * f.derivative(x));
        let x5 = ix(&|x| x.cos() * f.value(x).powi(2));
        let x6 = ix(&|x| x.cos().powi(2) * x.sin() * f.value(x) * f.derivative(x));
        let y1 = iy(&|y| y.exp() * eta(y).0.powi(2));
        let y2 = iy(&|y| y.exp() * eta(y).1.powi(2));
        let y3 = iy(&|y| y.exp() * eta(y).0 * eta(y).1);
        let num = k * k * x1 * y1 + x2 * y1 + x3 * y2 - (2.0 * theta - 1.0) * x4 * y1 + (2.0 * theta - 1.0) * x5 * y3
            - 2.0 * x6 * y3;
        num / (x1 * y1)
    }

    #[test]
    fn strip_quotient_matches_separable_oracle() {
        for eps in [0.1, 1e-2, 1e-3] {
            let q = strip_quotient(1.0, eps, 24).unwrap();
            let o = strip_oracle(1.0, eps);
            assert!((q.quotient - o).abs() < 1e-8 * o, "{q:?} vs {o}");
            assert!(q.quotient > 0.25);
        }
        let q = strip_quotient(1.5, 1e-2, 24).unwrap();
        assert_eq!(q.sharp_constant, 1.0);
        assert!(q.quotient > 1.0);
    }

    #[test]
    fn strip_quotient_decreases_with_eps() {
        let a = strip_quotient(1.0, 1e-1, 24).unwrap().quotient;
        let b = strip_quotient(1.0, 1e-2, 24).unwrap().quotient;
        let c = strip_quotient(1.0, 1e-3, 24).unwrap().quotient;
        assert!(a > b && b > c, "{a} {b} {c}");
    }

    #[test]
    fn coarse_strip_grid_is_rejected() {
        assert!(matches!(strip_quotient(1.0, 1e-3, 2), Err(Error::Resolution(_))));
    }

    #[test]
    fn direct_rayleigh_matches_reduction() {
        let s: Scenario<f64> = scenario_catalog(
            ScenarioKind::Power,
            &ScenarioParams { q: Some(3.0), p: Some(2.0), theta: Some(1.0), ..Default::default() },
        )
        .unwrap();
        let pi = std::f64::consts::PI;
        let phi = Profile::new(move |r: f64| (pi * r).sin(), move |r: f64| pi * (pi * r).cos(), (0.0, 1.0)).compactly_supported();
        let exact = reduce_radial_functional(&s, &phi).unwrap().quotient;
        for m in [GaugeModel::Euclidean { n: 3 }, grushin()] {
            let est = direct_rayleigh(&m, &s, &phi, 1 << 18, 21).unwrap();
            assert!((est.mean - exact).abs() < 3.0 * est.std_error, "{m}: {est:?} vs {exact}");
        }
        let bad = GaugeModel::Greiner { n: 1, gamma: 1.0 };
        assert!(matches!(direct_rayleigh(&bad, &s, &phi, 10, 1), Err(Error::Hypothesis(_))));
    }
}
