//! FFT-backed Fourier transforms on uniform grids, plus the free-line
//! Klein-Gordon propagator used as an oracle.
//!
//! Convention: forward `F f(w) = int f(x) exp(-i w x) dx`, inverse with the
//! `1/(2 pi)` factor. Parseval then reads `||f||^2 = ||F f||^2 / (2 pi)`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

/// Real samples `values[j]` at `x0 + j*dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Self {
        assert!(dx > 0.0 && !values.is_empty());
        Self { x0, dx, values }
    }

    pub fn sample(x0: f64, dx: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..n).map(|j| f(x0 + j as f64 * dx)).collect();
        Self { x0, dx, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoid L2 norm.
    pub fn l2_norm(&self) -> f64 {
        let n = self.len();
        let mut acc = 0.5 * (self.values[0].powi(2) + self.values[n - 1].powi(2));
        for v in &self.values[1..n - 1] {
            acc += v * v;
        }
        (acc * self.dx).sqrt()
    }

    /// Smallest interval containing all samples above `eps_rel * max|f|`.
    pub fn support(&self, eps_rel: f64) -> Option<(f64, f64)> {
        let m = self.max_abs();
        if m == 0.0 {
            return None;
        }
        let thr = eps_rel * m;
        let lo = self.values.iter().position(|v| v.abs() > thr)?;
        let hi = self.values.iter().rposition(|v| v.abs() > thr)?;
        Some((self.x(lo), self.x(hi)))
    }
}

/// Complex spectrum at frequencies `omega[m]`, ascending, as produced by
/// [`fourier_forward`]. Keeps the originating grid so the inverse can
/// reconstruct it.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<Complex64>,
    x0: f64,
    dx: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(1/2pi) * sum |g|^2 * d_omega`, the Parseval partner of the L2 norm.
    pub fn l2_norm_scaled(&self) -> f64 {
        let d_omega = TAU / (self.len() as f64 * self.dx);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * d_omega / TAU).sqrt()
    }

    /// Apply a frequency multiplier in place.
    pub fn multiply(&mut self, m: impl Fn(f64) -> Complex64) {
        for (w, v) in self.omega.iter().zip(self.values.iter_mut()) {
            *v *= m(*w);
        }
    }
}

fn check_window(f: &GridFunction) -> Result<()> {
    let m = f.max_abs();
    if m == 0.0 {
        return Ok(());
    }
    let edge = f.values[0].abs().max(f.values[f.len() - 1].abs());
    if edge > 1e-10 * m {
        return Err(Error::WindowTooSmall(format!(
            "samples at the window edges reach {edge:.3e} (max {m:.3e}); enlarge the window"
        )));
    }
    Ok(())
}

/// Discrete approximation of `F f(w) = int f(x) exp(-i w x) dx`.
///
/// Frequencies are the DFT grid `2 pi m / (N dx)`, `m = -N/2 .. N/2 - 1`,
/// returned in ascending order. Errors if `f` is not negligible at the window
/// edges.
pub fn fourier_forward(f: &GridFunction) -> Result<Spectrum> {
    check_window(f)?;
    let n = f.len();
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // buf[m] = sum_j f_j exp(-2 pi i j m / N); attach dx and the x0 phase,
    // then reorder to ascending frequency.
    let d_omega = TAU / (n as f64 * f.dx);
    let half = n / 2;
    let mut omega = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for idx in 0..n {
        let m_signed = idx as i64 - half as i64;
        let w = m_signed as f64 * d_omega;
        let src = ((m_signed + n as i64) % n as i64) as usize;
        let phase = Complex64::from_polar(1.0, -w * f.x0);
        omega.push(w);
        values.push(f.dx * phase * buf[src]);
    }
    Ok(Spectrum {
        omega,
        values,
        x0: f.x0,
        dx: f.dx,
    })
}

/// Inverse of [`fourier_forward`]: `f(x) = (1/2pi) int g(w) exp(i w x) dw`,
/// evaluated on the originating grid. Returns the real part; the callers keep
/// conjugate symmetry so the imaginary residue is roundoff.
pub fn fourier_inverse(g: &Spectrum) -> Result<GridFunction> {
    let n = g.len();
    if n == 0 {
        return Err(Error::WindowTooSmall("empty spectrum".into()));
    }
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for idx in 0..n {
        let m_signed = idx as i64 - half as i64;
        let dst = ((m_signed + n as i64) % n as i64) as usize;
        let phase = Complex64::from_polar(1.0, g.omega[idx] * g.x0);
        buf[dst] = g.values[idx] * phase;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / (n as f64 * g.dx);
    let values = buf.iter().map(|v| v.re * scale).collect();
    Ok(GridFunction {
        x0: g.x0,
        dx: g.dx,
        values,
    })
}

/// Exact evolution of the full-line Klein-Gordon equation
/// `u_tt - c^2 u_xx + a u = 0` from `u(0) = f`, `u_t(0) = 0`:
/// multiply the spectrum by `cos(sqrt(a + c^2 w^2) t)`.
///
/// Admits `a = 0` (the plain wave equation). Errors if the support of `f`,
/// enlarged by `c*t` on both sides, leaves the sampling window.
pub fn kg_fullline_propagate(f: &GridFunction, t: f64, a: f64, c: f64) -> Result<GridFunction> {
    assert!(a >= 0.0 && c > 0.0 && t >= 0.0);
    if let Some((lo, hi)) = f.support(1e-12) {
        let (need_lo, need_hi) = (lo - c * t, hi + c * t);
        let margin = 2.0 * f.dx;
        if need_lo < f.x0 + margin || need_hi > f.x_end() - margin {
            return Err(Error::WindowViolation {
                lo: need_lo,
                hi: need_hi,
                win_lo: f.x0,
                win_hi: f.x_end(),
            });
        }
    }
    let mut g = fourier_forward(f)?;
    g.multiply(|w| Complex64::new(((a + c * c * w * w).sqrt() * t).cos(), 0.0));
    fourier_inverse(&g)
}

/// Time derivative of the propagated field, `-Omega sin(Omega t)` in frequency.
/// Companion to [`kg_fullline_propagate`] for energy bookkeeping.
pub fn kg_fullline_velocity(f: &GridFunction, t: f64, a: f64, c: f64) -> Result<GridFunction> {
    assert!(a >= 0.0 && c > 0.0 && t >= 0.0);
    let mut g = fourier_forward(f)?;
    g.multiply(|w| {
        let om = (a + c * c * w * w).sqrt();
        Complex64::new(-om * (om * t).sin(), 0.0)
    });
    fourier_inverse(&g)
}
