//! Dormand–Prince 5(4) integrator for two-component systems.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Step-size control. `h_max = 0` means the whole span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: T,
    pub h_max: T,
    pub max_steps: usize,
}

impl<T: Real> Default for StepControl<T> {
    fn default() -> Self {
        let floor = T::epsilon() * lit(100.0);
        Self {
            rtol: lit::<T>(1e-11).max(floor),
            atol: lit::<T>(1e-13).max(floor),
            h_init: T::zero(),
            h_max: T::zero(),
            max_steps: 2_000_000,
        }
    }
}

impl<T: Real> StepControl<T> {
    pub fn with_tolerance(mut self, rtol: T, atol: T) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_max_step(mut self, h_max: T) -> Self {
        self.h_max = h_max;
        self
    }
}

pub type State<T> = [T; 2];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(r, y)` from `r0` to `r_end` (either direction).
///
/// `accept` sees every accepted point and may abort with an error.
/// Returns all accepted points including both ends.
pub fn dopri5<T, F, G>(
    f: F,
    r0: T,
    y0: State<T>,
    r_end: T,
    ctrl: &StepControl<T>,
    mut accept: G,
) -> Result<Vec<(T, State<T>)>>
where
    T: Real,
    F: Fn(T, &State<T>) -> Result<State<T>>,
    G: FnMut(T, &State<T>) -> Result<()>,
{
    let span = r_end - r0;
    let mut out = vec![(r0, y0)];
    if span == T::zero() {
        return Ok(out);
    }
    let dir = span.signum();
    let h_max = if ctrl.h_max > T::zero() {
        ctrl.h_max
    } else {
        span.abs()
    };
    let mut h = if ctrl.h_init > T::zero() {
        ctrl.h_init
    } else {
        (span.abs() * lit(1e-3)).min(h_max)
    };
    let mut r = r0;
    let mut y = y0;
    let mut k1 = f(r, &y)?;
    let mut steps = 0usize;
    let mut rejected_in_row = 0usize;
    loop {
        let remaining = (r_end - r).abs();
        if remaining <= T::epsilon() * r_end.abs().max(T::one()) * lit(4.0) {
            break;
        }
        if steps >= ctrl.max_steps {
            return Err(Error::StepUnderflow { r: to_f64(r) });
        }
        steps += 1;
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let step = dir * hs;
        let mut k = [[T::zero(); 2]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for c in 0..2 {
                let mut acc = T::zero();
                for j in 0..s {
                    acc = acc + lit::<T>(A[s][j]) * k[j][c];
                }
                ys[c] = y[c] + step * acc;
            }
            let rs = if s == 6 && last { r_end } else { r + step * lit(C[s]) };
            k[s] = f(rs, &ys)?;
        }
        let mut y_new = y;
        for c in 0..2 {
            let mut acc = T::zero();
            for j in 0..6 {
                acc = acc + lit::<T>(A[6][j]) * k[j][c];
            }
            y_new[c] = y[c] + step * acc;
        }
        let mut err2 = T::zero();
        for c in 0..2 {
            let mut e = T::zero();
            for j in 0..7 {
                e = e + lit::<T>(E[j]) * k[j][c];
            }
            let sc = ctrl.atol + ctrl.rtol * y[c].abs().max(y_new[c].abs());
            let q = step * e / sc;
            err2 = err2 + q * q;
        }
        let err = (err2 / lit(2.0)).sqrt();
        if !err.is_finite() {
            h = hs * lit(0.1);
            rejected_in_row += 1;
            if rejected_in_row > 60 || h <= T::epsilon() * r.abs().max(T::one()) {
                return Err(Error::StepUnderflow { r: to_f64(r) });
            }
            continue;
        }
        let fac = if err == T::zero() {
            lit(5.0)
        } else {
            (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0))
        };
        if err <= T::one() {
            r = if last { r_end } else { r + step };
            y = y_new;
            k1 = k[6];
            accept(r, &y)?;
            out.push((r, y));
            rejected_in_row = 0;
            h = (hs * fac).min(h_max);
        } else {
            rejected_in_row += 1;
            h = hs * fac.min(T::one());
            if h <= T::epsilon() * r.abs().max(T::one()) * lit(8.0) {
                return Err(Error::StepUnderflow { r: to_f64(r) });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_quarter_period() {
        let ctrl = StepControl::default();
        let pts = dopri5(
            |_, y: &State<f64>| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            std::f64::consts::FRAC_PI_2,
            &ctrl,
            |_, _| Ok(()),
        )
        .unwrap();
        let (r, y) = *pts.last().unwrap();
        assert_eq!(r, std::f64::consts::FRAC_PI_2);
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn backward_integration() {
        let ctrl = StepControl::default();
        let pts = dopri5(|_, y: &State<f64>| Ok([y[0], 0.0]), 1.0, [1.0, 0.0], 0.0, &ctrl, |_, _| Ok(()))
            .unwrap();
        let y = pts.last().unwrap().1;
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn callback_can_abort() {
        let ctrl = StepControl::default();
        let res = dopri5(
            |_, y: &State<f64>| Ok([y[0] * y[0], 0.0]),
            0.0,
            [1.0, 0.0],
            2.0,
            &ctrl,
            |r, y| {
                if y[0] > 1e6 {
                    Err(Error::Divergence { r, value: y[0] })
                } else {
                    Ok(())
                }
            },
        );
        assert!(matches!(res, Err(Error::Divergence { .. }) | Err(Error::StepUnderflow { .. })));
    }
}
