//! Integral identities for the p-th power remainder
//! `|f|^p + (p-1)|g|^p - p|g|^{p-2} Re(conj(g) f)`.
//!
//! The scalar form splits the remainder into a real-part term `w` and an
//! imaginary-part term `w~`; the vector form does the same for `C^h`. A third,
//! independent path evaluates the Taylor remainder of `|x|^p` on `R^{2h}`
//! through its Hessian.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_piecewise, QuadratureOptions};
use crate::sampling::stream_rng;
use crate::scalar::{lit, Real};

/// Both integral terms, the closed-form remainder and the residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityBreakdown<T> {
    pub w_term: T,
    pub wtilde_term: T,
    pub rhs_closed: T,
    pub residual: T,
}

/// Lower-bound check `rhs - 2^{-p}|f-g|^p >= 0` over sampled pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpCheck<T> {
    pub min_slack: T,
    pub worst_pair: (Complex<T>, Complex<T>),
    pub samples: usize,
}

/// Left and right sides of the realified identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealifiedCheck<T> {
    pub lhs: T,
    pub rhs: T,
}

fn validate_p<T: Real>(p: T) -> Result<()> {
    if p >= lit(2.0) && p.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("p = {p} must be >= 2")))
    }
}

fn identity_options<T: Real>(scale: T) -> QuadratureOptions<T> {
    let rel = lit::<T>(1e-12).max(T::epsilon() * lit(50.0));
    QuadratureOptions::default().with_tolerance(rel * lit::<T>(1e-2) * scale, rel)
}

/// Stable evaluation of `|g+d|^p - |g|^p - p|g|^{p-2} Re(conj(g) d)`.
///
/// Written around `g` so that the first-order terms cancel analytically; the
/// direct formula loses absolute accuracy when `f` is close to `g`.
pub fn remainder_closed<T: Real>(p: T, f: Complex<T>, g: Complex<T>) -> T {
    let d = f - g;
    let b = g.norm_sqr();
    if b == T::zero() {
        return d.norm().powf(p);
    }
    let two: T = lit(2.0);
    let c = p / two;
    let re = (g.conj() * d).re;
    let dd = d.norm_sqr();
    let x = (two * re + dd) / b;
    if x <= -T::one() {
        // f = 0: the remainder is (p-1)|g|^p.
        return (p - T::one()) * b.powf(c);
    }
    let lx = x.ln_1p();
    let bracket = (c * lx).exp_m1() - c * x;
    b.powf(c) * bracket + c * b.powf(c - T::one()) * dd
}

/// Direct closed form `|f|^p + (p-1)|g|^p - p|g|^{p-2} Re(conj(g) f)`.
pub fn remainder_direct<T: Real>(p: T, f: Complex<T>, g: Complex<T>) -> T {
    let ng = g.norm();
    let cross = if ng == T::zero() {
        T::zero()
    } else {
        p * ng.powf(p - lit(2.0)) * (g.conj() * f).re
    };
    f.norm().powf(p) + (p - T::one()) * ng.powf(p) - cross
}

/// `argmin_{s in (0,1)} |s g + (1-s) f|`, if interior.
fn interior_minimizer<T: Real>(f: &[Complex<T>], g: &[Complex<T>]) -> Option<T> {
    let mut num = T::zero();
    let mut den = T::zero();
    for (fi, gi) in f.iter().zip(g) {
        let d = *gi - *fi;
        num = num - (fi.conj() * d).re;
        den = den + d.norm_sqr();
    }
    if den == T::zero() {
        return None;
    }
    let s0 = num / den;
    (s0 > T::zero() && s0 < T::one()).then_some(s0)
}

/// Scalar identity for `f, g in C`.
pub fn scalar_identity_breakdown<T: Real>(p: T, f: Complex<T>, g: Complex<T>) -> Result<IdentityBreakdown<T>> {
    validate_p(p)?;
    let d = f - g;
    let dn = d.norm();
    let im = (f * g.conj()).im;
    let rhs_closed = remainder_closed(p, f, g);
    if dn == T::zero() {
        return Ok(IdentityBreakdown {
            w_term: T::zero(),
            wtilde_term: T::zero(),
            rhs_closed,
            residual: rhs_closed.abs(),
        });
    }
    let pm2 = p - lit(2.0);
    let z_at = |s: T| g * s + f * (T::one() - s);
    // |z|^{p-4} [Re(d conj z)]^2 = |z|^{p-2} (Re(d conj z)/|z|)^2, bounded by |d|^2 |z|^{p-2}.
    let w_integrand = |s: T| {
        let z = z_at(s);
        let nz = z.norm();
        if nz == T::zero() {
            return T::zero();
        }
        let c = (d * z.conj()).re / nz;
        s * nz.powf(pm2) * c * c
    };
    let wt_integrand = |s: T| {
        let z = z_at(s);
        let nz = z.norm();
        if nz == T::zero() {
            return T::zero();
        }
        let c = im / nz;
        s * nz.powf(pm2) * c * c
    };
    let scale = T::one() + rhs_closed.abs();
    let opts = identity_options(scale);
    // |z| bottoms out at m = |im|/|d| when s = s0; both integrands then peak on a width k = m/|d|
    let k = im.abs() / (dn * dn);
    let (wi, wti) = if im != T::zero() && k > T::min_positive_value().sqrt() {
        // s = s0 + k sinh(u): |z| = m cosh u, Re(d conj z)/|z| = -|d| tanh u, im/|z| = sign(im)|d|/cosh u
        let s0 = -(f.conj() * (g - f)).re / (dn * dn);
        let m = im.abs() / dn;
        let d2 = dn * dn;
        let (u0, u1) = ((-s0 / k).asinh(), ((T::one() - s0) / k).asinh());
        let w_u = |u: T| {
            let c = u.cosh();
            let t = u.tanh();
            (s0 + k * u.sinh()) * (m * c).powf(pm2) * d2 * t * t * k * c
        };
        let wt_u = |u: T| {
            let c = u.cosh();
            (s0 + k * u.sinh()) * (m * c).powf(pm2) * d2 * k / c
        };
        (
            integrate_piecewise(w_u, u0, u1, &[], &opts)?.value,
            integrate_piecewise(wt_u, u0, u1, &[], &opts)?.value,
        )
    } else {
        let breaks: Vec<T> = interior_minimizer(&[f], &[g]).into_iter().collect();
        let wi = integrate_piecewise(w_integrand, T::zero(), T::one(), &breaks, &opts)?.value;
        let wti = if im == T::zero() {
            T::zero()
        } else {
            integrate_piecewise(wt_integrand, T::zero(), T::one(), &breaks, &opts)?.value
        };
        (wi, wti)
    };
    let w_term = p * (p - T::one()) * wi;
    let wtilde_term = p * wti;
    Ok(IdentityBreakdown {
        w_term,
        wtilde_term,
        rhs_closed,
        residual: (w_term + wtilde_term - rhs_closed).abs(),
    })
}

fn vec_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Vector identity for `zeta, xi in C^h`.
///
/// `w_term` is `p|zeta-xi|^2 int s|z|^{p-2}`, `wtilde_term` is
/// `p(p-2) int s|z|^{p-4}[Re<zeta-xi, z>]^2`, with `z = s xi + (1-s) zeta`.
pub fn vector_identity_breakdown<T: Real>(
    p: T,
    zeta: &[Complex<T>],
    xi: &[Complex<T>],
) -> Result<IdentityBreakdown<T>> {
    validate_p(p)?;
    if zeta.len() != xi.len() || zeta.is_empty() {
        return Err(Error::ParameterDomain(
            "vectors must share a positive length".into(),
        ));
    }
    let pm2 = p - lit(2.0);
    let nz = vec_norm(zeta);
    let nx = vec_norm(xi);
    let inner: T = zeta.iter().zip(xi).map(|(a, b)| (*a * b.conj()).re).sum();
    let cross = if nx == T::zero() {
        T::zero()
    } else {
        p * nx.powf(pm2) * inner
    };
    let rhs_closed = nz.powf(p) + (p - T::one()) * nx.powf(p) - cross;
    let d: Vec<Complex<T>> = zeta.iter().zip(xi).map(|(a, b)| *a - *b).collect();
    let dn2: T = d.iter().map(|z| z.norm_sqr()).sum();
    if dn2 == T::zero() {
        return Ok(IdentityBreakdown {
            w_term: T::zero(),
            wtilde_term: T::zero(),
            rhs_closed,
            residual: rhs_closed.abs(),
        });
    }
    let z_norm_and_re = |s: T| {
        let mut n2 = T::zero();
        let mut re = T::zero();
        for i in 0..zeta.len() {
            let z = xi[i] * s + zeta[i] * (T::one() - s);
            n2 = n2 + z.norm_sqr();
            re = re + (d[i] * z.conj()).re;
        }
        (n2.sqrt(), re)
    };
    let a_integrand = |s: T| {
        let (n, _) = z_norm_and_re(s);
        if n == T::zero() {
            return T::zero();
        }
        s * n.powf(pm2)
    };
    let b_integrand = |s: T| {
        let (n, re) = z_norm_and_re(s);
        if n == T::zero() {
            return T::zero();
        }
        let c = re / n;
        s * n.powf(pm2) * c * c
    };
    let breaks: Vec<T> = interior_minimizer(zeta, xi).into_iter().collect();
    let opts = identity_options(T::one() + rhs_closed.abs());
    let a = integrate_piecewise(a_integrand, T::zero(), T::one(), &breaks, &opts)?.value;
    let b = if pm2 == T::zero() {
        T::zero()
    } else {
        integrate_piecewise(b_integrand, T::zero(), T::one(), &breaks, &opts)?.value
    };
    let w_term = p * dn2 * a;
    let wtilde_term = p * pm2 * b;
    Ok(IdentityBreakdown {
        w_term,
        wtilde_term,
        rhs_closed,
        residual: (w_term + wtilde_term - rhs_closed).abs(),
    })
}

/// Taylor remainder of `F(x) = |x|^p` on `R^n`:
/// `lhs = F(mu) - F(nu) - grad F(nu).(mu - nu)` and
/// `rhs = int_0^1 (1-t) h^T Hess F(nu + t h) h dt`, `h = mu - nu`.
pub fn realified_identity_oracle<T: Real>(p: T, mu: &[T], nu: &[T]) -> Result<RealifiedCheck<T>> {
    validate_p(p)?;
    if mu.len() != nu.len() || mu.is_empty() {
        return Err(Error::ParameterDomain(
            "vectors must share a positive length".into(),
        ));
    }
    let n = mu.len();
    let h: Vec<T> = mu.iter().zip(nu).map(|(a, b)| *a - *b).collect();
    let norm = |v: &[T]| v.iter().map(|x| *x * *x).sum::<T>().sqrt();
    let nmu = norm(mu);
    let nnu = norm(nu);
    let dot: T = nu.iter().zip(mu).map(|(a, b)| *a * *b).sum();
    let pm2 = p - lit(2.0);
    let grad_term = if nnu == T::zero() {
        T::zero()
    } else {
        p * nnu.powf(pm2) * dot
    };
    let lhs = nmu.powf(p) + (p - T::one()) * nnu.powf(p) - grad_term;

    // Hessian of |x|^p: p(p-2)|x|^{p-4} x x^T + p|x|^{p-2} I, assembled entrywise.
    let quad_form = |t: T| {
        let x: Vec<T> = nu.iter().zip(&h).map(|(a, b)| *a + t * *b).collect();
        let nx = norm(&x);
        if nx == T::zero() {
            return T::zero();
        }
        let u: Vec<T> = x.iter().map(|v| *v / nx).collect();
        let base = nx.powf(pm2);
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { T::one() } else { T::zero() };
                let hij = p * pm2 * base * u[i] * u[j] + p * base * delta;
                acc = acc + hij * h[i] * h[j];
            }
        }
        (T::one() - t) * acc
    };
    let hh: T = h.iter().map(|x| *x * *x).sum();
    let mut breaks = Vec::new();
    if hh > T::zero() {
        let t0 = -nu.iter().zip(&h).map(|(a, b)| *a * *b).sum::<T>() / hh;
        if t0 > T::zero() && t0 < T::one() {
            breaks.push(t0);
        }
    }
    let opts = identity_options(T::one() + lhs.abs());
    let rhs = integrate_piecewise(quad_form, T::zero(), T::one(), &breaks, &opts)?.value;
    Ok(RealifiedCheck { lhs, rhs })
}

/// `(Re z_1, Im z_1, Re z_2, ...)`.
pub fn realify<T: Real>(v: &[Complex<T>]) -> Vec<T> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Uniform point in the disc of radius `radius`.
pub fn sample_disc<R: Rng>(rng: &mut R, radius: f64) -> Complex<f64> {
    let r = radius * rng.gen::<f64>().sqrt();
    let a = rng.gen::<f64>() * std::f64::consts::TAU;
    Complex::from_polar(r, a)
}

/// Sample pair number `i`: mostly uniform in the disc, every fourth pair adversarial
/// (nearly collinear, nearly equal or nearly opposite).
pub fn sample_pair<R: Rng>(rng: &mut R, i: usize, radius: f64) -> (Complex<f64>, Complex<f64>) {
    let f = sample_disc(rng, radius);
    if i % 4 != 3 {
        return (f, sample_disc(rng, radius));
    }
    let kind = rng.gen_range(0..4);
    let tiny = 10f64.powf(rng.gen_range(-9.0..-3.0));
    let jitter = Complex::from_polar(tiny * f.norm().max(1e-3), rng.gen::<f64>() * std::f64::consts::TAU);
    let g = match kind {
        0 => f * rng.gen_range(-2.0..2.0) + jitter,
        1 => f + jitter,
        2 => -f + jitter,
        _ => Complex::new(0.0, 0.0) + jitter,
    };
    (f, g)
}

/// Minimum of `rhs - 2^{-p}|f-g|^p` over `samples` pairs from `seed`.
pub fn check_cp_lower_bound(p: f64, samples: usize, seed: u64) -> Result<CpCheck<f64>> {
    validate_p(p)?;
    let mut rng = stream_rng(seed, 0);
    let cp = 2f64.powf(-p);
    let mut best = CpCheck {
        min_slack: f64::INFINITY,
        worst_pair: (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)),
        samples,
    };
    for i in 0..samples {
        let (f, g) = sample_pair(&mut rng, i, 10.0);
        let slack = remainder_closed(p, f, g) - cp * (f - g).norm().powf(p);
        if slack < best.min_slack {
            best.min_slack = slack;
            best.worst_pair = (f, g);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn hand_computed_real_case() {
        let b = scalar_identity_breakdown(3.0, c(2.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((b.rhs_closed - 4.0).abs() < 1e-14);
        assert!((b.w_term - 4.0).abs() < 1e-10);
        assert_eq!(b.wtilde_term, 0.0);
    }

    #[test]
    fn quadratic_case_is_exact() {
        // p = 2: remainder is |f - g|^2.
        let b = scalar_identity_breakdown(2.0, c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!((b.rhs_closed - 2.0).abs() < 1e-14);
        assert!(b.residual < 1e-10);
    }

    #[test]
    fn opposite_pair_crosses_zero() {
        let b = scalar_identity_breakdown(2.5, c(1.0, 2.0), c(-1.0, -2.0)).unwrap();
        assert!(b.residual <= 1e-9 * (1.0 + b.rhs_closed));
    }

    #[test]
    fn closed_forms_agree() {
        let mut rng = stream_rng(1, 0);
        for i in 0..2000 {
            let (f, g) = sample_pair(&mut rng, i, 10.0);
            for p in [2.0, 2.5, 3.0, 4.0] {
                let a = remainder_closed(p, f, g);
                let b = remainder_direct(p, f, g);
                let scale = f.norm().max(g.norm()).powf(p).max(1.0);
                assert!((a - b).abs() <= 1e-12 * scale, "{f} {g} {p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn vector_beta_integral_when_xi_vanishes() {
        let zeta = [c(1.0, 1.0), c(0.5, -2.0)];
        let xi = [c(0.0, 0.0), c(0.0, 0.0)];
        let b = vector_identity_breakdown(3.5, &zeta, &xi).unwrap();
        let n: f64 = zeta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((b.rhs_closed - n.powf(3.5)).abs() < 1e-12);
        assert!(b.residual < 1e-9 * (1.0 + b.rhs_closed));
    }

    #[test]
    fn realified_oracle_simple() {
        let r = realified_identity_oracle(4.0f64, &[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!((r.lhs - 4.0).abs() < 1e-14);
        assert!((r.rhs - 4.0).abs() < 1e-10);
    }

    #[test]
    fn cp_examples() {
        let s = remainder_closed(2.0, c(1.0, 0.0), c(0.0, 0.0)) - 0.25;
        assert!((s - 0.75).abs() < 1e-15);
        let s = remainder_closed(3.0, c(2.0, 0.0), c(1.0, 0.0)) - 0.125;
        assert!((s - 3.875).abs() < 1e-14);
    }

    #[test]
    fn rejects_small_p() {
        assert!(scalar_identity_breakdown(1.5, c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn nearly_antipodal_pair_resolves_peak() {
        // z(s) passes within ~1e-6 of the origin; each integrand alone is a narrow peak
        for p in [2.0, 2.5, 4.0] {
            let f = c(3.3031383236333296, 8.4643701859020162);
            let g = c(-3.3031398498821556, -8.4643684682870344);
            let b = scalar_identity_breakdown(p, f, g).unwrap();
            assert!(b.residual <= 1e-9 * (1.0 + b.rhs_closed), "p={p}: {b:?}");
            assert!(b.wtilde_term > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn terms_nonnegative_and_identity_holds(
            p in 2.0f64..5.0,
            fr in -10.0f64..10.0, fi in -10.0f64..10.0,
            gr in -10.0f64..10.0, gi in -10.0f64..10.0,
        ) {
            let b = scalar_identity_breakdown(p, c(fr, fi), c(gr, gi)).unwrap();
            prop_assert!(b.w_term >= 0.0 && b.wtilde_term >= 0.0);
            prop_assert!(b.residual <= 1e-9 * (1.0 + b.rhs_closed.abs()));
        }

        #[test]
        fn equal_arguments_give_zero(p in 2.0f64..5.0, fr in -10.0f64..10.0, fi in -10.0f64..10.0) {
            let b = scalar_identity_breakdown(p, c(fr, fi), c(fr, fi)).unwrap();
            prop_assert!(b.w_term + b.wtilde_term <= 1e-12);
        }

        #[test]
        fn separated_arguments_give_positive_sum(
            p in 2.0f64..5.0,
            fr in 0.1f64..10.0, fi in -10.0f64..10.0,
            angle in 0.0f64..6.28, sep in 1e-3f64..1.0,
        ) {
            let f = c(fr, fi);
            let g = f + Complex::from_polar(sep * 2.0 * f.norm(), angle);
            let b = scalar_identity_breakdown(p, f, g).unwrap();
            prop_assert!(b.w_term + b.wtilde_term > 1e-12);
        }

        #[test]
        fn cp_slack_nonnegative(
            p in 2.0f64..4.0,
            fr in -10.0f64..10.0, fi in -10.0f64..10.0,
            gr in -10.0f64..10.0, gi in -10.0f64..10.0,
        ) {
            let (f, g) = (c(fr, fi), c(gr, gi));
            let slack = remainder_closed(p, f, g) - 2f64.powf(-p) * (f - g).norm().powf(p);
            prop_assert!(slack >= -1e-12);
        }
    }
}
