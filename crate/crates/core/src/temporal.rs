//! Leaky-integrator cascade temporal filter.
//!
//! Each pixel carries a chain of first-order neurons
//! `τ dz_n/dt = -A z_n + C z_{n-1}` driven by `z_0`, integrated with explicit
//! Euler. All levels advance from the pre-step state (level `n` reads level
//! `n - 1` as it was before the step), which the in-place update achieves by
//! walking the chain from the deepest level upward.
//!
//! The filter output at read depth `n` is `K (z_n - z_{n+1})`. One cascade of
//! depth `n_s + 1` serves both the fast (`n_f`) and slow (`n_s`) reads.
//!
//! [`analytic_impulse`], [`analytic_extrema`] and [`classical_kernel`] are the
//! continuous-time references used to check the discrete filter.

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeCoefficients {
    pub decay: f64,
    pub transmission: f64,
    pub tau: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeState {
    /// `levels[i]` holds `z_{i+1}`.
    levels: Vec<Field>,
    coeffs: CascadeCoefficients,
}

impl CascadeState {
    pub fn new(depth: usize, width: usize, height: usize, coeffs: CascadeCoefficients) -> Self {
        Self {
            levels: vec![Field::zeros(width, height); depth],
            coeffs,
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn coefficients(&self) -> CascadeCoefficients {
        self.coeffs
    }

    /// Level `z_n`, `1 <= n <= depth`.
    pub fn level(&self, n: usize) -> &Field {
        &self.levels[n - 1]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut Field {
        &mut self.levels[n - 1]
    }

    /// Advances every level by one Euler step with `input` as `z_0`.
    pub fn step(&mut self, input: &Field) -> Result<()> {
        input.ensure_finite("cascade input")?;
        if let Some(first) = self.levels.first() {
            input.ensure_dims(first.width(), first.height())?;
        }
        let gain = self.coeffs.dt / self.coeffs.tau;
        let (a, c) = (self.coeffs.decay, self.coeffs.transmission);
        for n in (0..self.levels.len()).rev() {
            let (lower, upper) = self.levels.split_at_mut(n);
            let prev = if n == 0 { input } else { &lower[n - 1] };
            for (z, &z_prev) in upper[0].as_mut_slice().iter_mut().zip(prev.as_slice()) {
                *z += gain * (-a * *z + c * z_prev);
            }
        }
        Ok(())
    }

    /// `K (z_n - z_{n+1})`.
    pub fn read_output(&self, n: usize, gain: f64) -> Result<Field> {
        if n == 0 || n + 1 > self.depth() {
            return Err(Error::DepthExceeded {
                depth: self.depth(),
                level: n,
            });
        }
        Ok(self
            .level(n)
            .zip_map(self.level(n + 1), |a, b| gain * (a - b)))
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Continuous impulse response of the read-out at depth `n` with spacing `m`:
/// `K e^{-at} [bⁿ t^{n-1}/(n-1)! - b^{n+m} t^{n+m-1}/(n+m-1)!]`,
/// `a = A/τ`, `b = C/τ`.
pub fn analytic_impulse(
    n: u32,
    m: u32,
    gain: f64,
    decay: f64,
    transmission: f64,
    tau: f64,
    t: f64,
) -> f64 {
    assert!(n >= 1 && m >= 1, "depth and spacing start at 1");
    let a = decay / tau;
    let b = transmission / tau;
    let term = |k: u32| b.powi(k as i32) * t.powi(k as i32 - 1) / factorial(k - 1);
    gain * (-a * t).exp() * (term(n) - term(n + m))
}

/// Stationary points of the `m = 1` impulse response: the two roots of
/// `a b (n-1)! t² - (a+b) n! t + (n-1) n! = 0`, ascending. The first is the
/// peak, the second the trough of the rebound.
pub fn analytic_extrema(n: u32, decay: f64, transmission: f64, tau: f64) -> (f64, f64) {
    let a = decay / tau;
    let b = transmission / tau;
    let qa = a * b * factorial(n - 1);
    let qb = -(a + b) * factorial(n);
    let qc = f64::from(n - 1) * factorial(n);
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    ((-qb - disc) / (2.0 * qa), (-qb + disc) / (2.0 * qa))
}

/// Biphasic gamma-style reference kernel
/// `(kt)ⁿ e^{-kt}/n! - (kt)^{n+2} e^{-kt}/(n+2)!`. Reference only.
pub fn classical_kernel(rate: f64, n: u32, t: f64) -> f64 {
    let kt = rate * t;
    let e = (-kt).exp();
    kt.powi(n as i32) * e / factorial(n) - kt.powi(n as i32 + 2) * e / factorial(n + 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(tau: f64) -> CascadeCoefficients {
        CascadeCoefficients {
            decay: 60.0,
            transmission: 60.0,
            tau,
            dt: 0.05,
        }
    }

    fn impulse(w: usize, h: usize, x: usize, y: usize, amp: f64) -> Field {
        let mut f = Field::zeros(w, h);
        f.set(x, y, amp);
        f
    }

    #[test]
    fn zero_stays_zero() {
        let mut s = CascadeState::new(5, 4, 3, coeffs(5.0));
        s.step(&Field::zeros(4, 3)).unwrap();
        for n in 1..=5 {
            assert!(s.level(n).as_slice().iter().all(|&v| v == 0.0));
        }
        assert!(s
            .read_output(2, 5.0)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn one_step_reads_pre_step_levels() {
        let mut s = CascadeState::new(5, 3, 3, coeffs(5.0));
        s.step(&impulse(3, 3, 1, 1, 1.0)).unwrap();
        // (0.05 / 5) · 60 = 0.6
        assert!((s.level(1).get(1, 1) - 0.6).abs() < 1e-15);
        assert_eq!(s.level(2).get(1, 1), 0.0);
        s.step(&Field::zeros(3, 3)).unwrap();
        assert!((s.level(1).get(1, 1) - 0.24).abs() < 1e-15);
        assert!((s.level(2).get(1, 1) - 0.36).abs() < 1e-15);
    }

    #[test]
    fn linear_in_amplitude() {
        let mut a = CascadeState::new(5, 3, 3, coeffs(5.0));
        let mut b = CascadeState::new(5, 3, 3, coeffs(5.0));
        a.step(&impulse(3, 3, 0, 2, 1.0)).unwrap();
        b.step(&impulse(3, 3, 0, 2, 2.0)).unwrap();
        for _ in 0..12 {
            a.step(&Field::zeros(3, 3)).unwrap();
            b.step(&Field::zeros(3, 3)).unwrap();
            for n in 1..=5 {
                for (x, y) in a.level(n).as_slice().iter().zip(b.level(n).as_slice()) {
                    assert_eq!(2.0 * x, *y);
                }
            }
        }
    }

    #[test]
    fn read_output_bounds_and_cancellation() {
        let mut s = CascadeState::new(3, 2, 2, coeffs(5.0));
        assert!(s.read_output(3, 1.0).is_err());
        assert!(s.read_output(0, 1.0).is_err());
        *s.level_mut(1) = Field::filled(2, 2, 0.7);
        *s.level_mut(2) = Field::filled(2, 2, 0.7);
        assert!(s
            .read_output(1, 5.0)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn non_finite_input_rejected() {
        let mut s = CascadeState::new(3, 2, 2, coeffs(5.0));
        assert!(s.step(&Field::filled(2, 2, f64::NAN)).is_err());
        assert!(s.step(&Field::zeros(3, 2)).is_err());
    }

    #[test]
    fn zero_input_decays_monotonically() {
        let mut s = CascadeState::new(5, 1, 1, coeffs(5.0));
        s.step(&Field::filled(1, 1, 1.0)).unwrap();
        for _ in 0..6 {
            s.step(&Field::zeros(1, 1)).unwrap();
        }
        let mut prev: Vec<f64> = (1..=5).map(|n| s.level(n).get(0, 0).abs()).collect();
        for _ in 0..200 {
            s.step(&Field::zeros(1, 1)).unwrap();
            let cur: Vec<f64> = (1..=5).map(|n| s.level(n).get(0, 0).abs()).collect();
            assert!(cur.iter().sum::<f64>() <= prev.iter().sum::<f64>());
            prev = cur;
        }
        assert!(prev.iter().all(|v| *v < 1e-12));
    }

    #[test]
    fn faster_read_peaks_earlier_and_higher() {
        let mut s = CascadeState::new(5, 1, 1, coeffs(5.0));
        let mut fast = Vec::new();
        let mut slow = Vec::new();
        for k in 0..40 {
            let amp = if k == 0 { 1.0 } else { 0.0 };
            s.step(&Field::filled(1, 1, amp)).unwrap();
            fast.push(s.read_output(2, 5.0).unwrap().get(0, 0));
            slow.push(s.read_output(4, 5.0).unwrap().get(0, 0));
        }
        let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        assert!(argmax(&fast) < argmax(&slow));
        assert!(fast[argmax(&fast)] > slow[argmax(&slow)]);
    }

    #[test]
    fn analytic_impulse_values() {
        assert_eq!(analytic_impulse(2, 1, 5.0, 60.0, 60.0, 5.0, 0.0), 0.0);
        // 5 e^{-1.2} (144·0.1 - 1728·0.01/2)
        let expected = 5.0 * (-1.2f64).exp() * (14.4 - 8.64);
        let v = analytic_impulse(2, 1, 5.0, 60.0, 60.0, 5.0, 0.1);
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 8.674).abs() < 1e-3);
        assert!(analytic_impulse(3, 1, 5.0, 60.0, 60.0, 5.0, 50.0).abs() < 1e-200);
    }

    #[test]
    fn analytic_extrema_values() {
        let (t1, t2) = analytic_extrema(2, 60.0, 60.0, 5.0);
        let q = |t: f64| 144.0 * t * t - 48.0 * t + 2.0;
        assert!(q(t1).abs() < 1e-12 && q(t2).abs() < 1e-12);
        assert!((t1 - 0.04882).abs() < 1e-5 && (t2 - 0.28451).abs() < 1e-5);

        let (t1, t2) = analytic_extrema(2, 60.0, 60.0, 8.0);
        assert!((t1 - 0.07811).abs() < 1e-5 && (t2 - 0.45523).abs() < 1e-5);
    }

    #[test]
    fn extrema_bounds_when_decay_dominates() {
        for n in 2..7u32 {
            for (a, c) in [(60.0, 30.0), (90.0, 60.0), (61.0, 60.0)] {
                let (t1, t2) = analytic_extrema(n, a, c, 5.0);
                let (aa, bb) = (a / 5.0, c / 5.0);
                assert!(t1 < f64::from(n) / aa);
                assert!(t2 > f64::from(n) / bb);
            }
        }
    }

    #[test]
    fn extrema_are_stationary_points_of_closed_form() {
        // Derivative by central finite differences, independent of the root formula.
        for n in 2..6u32 {
            for (a, c, tau) in [(60.0, 60.0, 5.0), (60.0, 60.0, 8.0), (60.0, 30.0, 5.0)] {
                let (t1, t2) = analytic_extrema(n, a, c, tau);
                let f = |t: f64| analytic_impulse(n, 1, 1.0, a, c, tau, t);
                for t in [t1, t2] {
                    let h = 1e-6;
                    let d = (f(t + h) - f(t - h)) / (2.0 * h);
                    let scale = f(t1).abs().max(1e-9);
                    assert!(d.abs() / scale < 1e-4, "n={n} t={t} d={d}");
                }
                assert!(f(t1) > 0.0 && f(t2) < 0.0);
            }
        }
    }

    #[test]
    fn classical_kernel_values() {
        assert_eq!(classical_kernel(1.0, 1, 0.0), 0.0);
        let v = classical_kernel(1.0, 1, 1.0);
        assert!((v - (-1.0f64).exp() * (1.0 - 1.0 / 6.0)).abs() < 1e-15);
        assert!((v - 0.30657).abs() < 1e-5);
    }

    #[test]
    fn classical_kernel_is_biphasic() {
        for n in 1..8u32 {
            let samples: Vec<f64> = (1..4000)
                .map(|i| classical_kernel(1.0, n, i as f64 * 0.01))
                .collect();
            let first_neg = samples
                .iter()
                .position(|&v| v < 0.0)
                .expect("negative lobe");
            assert!(samples[..first_neg].iter().all(|&v| v > 0.0));
            assert!(samples[first_neg..].iter().all(|&v| v <= 0.0));
        }
    }
}
