//! Dormand-Prince 5(4) embedded Runge-Kutta pair with adaptive step size.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Adaptive integrator state. The accepted step size is carried over
/// between calls to [`Dopri5::advance`], so repeated stroboscopic steps do
/// not restart from a cold guess.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    h: Option<f64>,
    steps: usize,
    rejected: usize,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64, max_steps: usize) -> Self {
        Dopri5 {
            rtol,
            atol,
            max_steps,
            h: None,
            steps: 0,
            rejected: 0,
        }
    }

    /// Accepted steps since construction.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`, landing exactly on
    /// `t1`. `escaped` is checked after every accepted step; returning true
    /// aborts with [`Error::Unbounded`].
    pub fn advance<const N: usize, F, G>(
        &mut self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        escaped: G,
    ) -> Result<[f64; N]>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        G: Fn(&[f64; N]) -> bool,
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(y0);
        }
        assert!(span > 0.0, "Dopri5::advance integrates forward only");

        let mut t = t0;
        let mut y = y0;
        let mut h = self.h.unwrap_or(1e-2 * span).min(span);
        let mut k1 = f(t, &y);
        let mut calls = 0usize;

        loop {
            let planned = h;
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            if h <= f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { xi: t });
            }
            calls += 1;
            if calls > self.max_steps {
                return Err(Error::StepBudgetExhausted {
                    xi: t,
                    max_steps: self.max_steps,
                });
            }

            let k2 = f(t + C2 * h, &lin(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &lin(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * h,
                &lin(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h,
                &lin(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &lin(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = lin(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t_new = if last { t1 } else { t + h };
            let k7 = f(t_new, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();

            if err.is_nan() {
                self.rejected += 1;
                h *= MIN_FACTOR;
                continue;
            }

            if err <= 1.0 {
                self.steps += 1;
                t = t_new;
                y = y_new;
                k1 = k7;
                if escaped(&y) {
                    return Err(Error::Unbounded {
                        xi: t,
                        iteration: 0,
                        segment: None,
                    });
                }
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                let next = h * factor;
                if last {
                    // A step clipped to hit t1 says little about the scale;
                    // keep the planned one for the next call.
                    self.h = Some(if h < planned { planned } else { next });
                    return Ok(y);
                }
                self.h = Some(next);
                h = next;
            } else {
                self.rejected += 1;
                h *= (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            }
        }
    }
}

#[inline(always)]
fn lin<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (a, k) in terms {
        let ha = h * a;
        for i in 0..N {
            out[i] += ha * k[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        let mut ode = Dopri5::new(1e-11, 1e-13, 1_000_000);
        let y = ode
            .advance(
                |_, y: &[f64; 2]| [y[1], -y[0]],
                0.0,
                [1.0, 0.0],
                10.0,
                |_| false,
            )
            .unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn exponential_growth_and_restart() {
        let mut ode = Dopri5::new(1e-12, 1e-14, 1_000_000);
        let mut y = [1.0];
        for i in 0..5 {
            let t0 = f64::from(i) * 0.5;
            y = ode
                .advance(|_, y: &[f64; 1]| [y[0]], t0, y, t0 + 0.5, |_| false)
                .unwrap();
        }
        assert!((y[0] - 2.5f64.exp()).abs() < 1e-10 * 2.5f64.exp());
    }

    #[test]
    fn escape_guard_trips() {
        let mut ode = Dopri5::new(1e-8, 1e-10, 1_000_000);
        // y' = y^2 blows up at t = 1
        let r = ode.advance(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            |y| y[0].abs() > 1e3,
        );
        assert!(matches!(r, Err(Error::Unbounded { .. })));
    }

    #[test]
    fn step_budget_is_enforced() {
        let mut ode = Dopri5::new(1e-12, 1e-14, 10);
        let r = ode.advance(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            100.0,
            |_| false,
        );
        assert!(matches!(r, Err(Error::StepBudgetExhausted { .. })));
    }
}
