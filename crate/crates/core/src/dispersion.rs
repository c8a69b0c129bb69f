//! Dispersion roots and the reflection/transmission coefficients.
//!
//! The composite square root `s(w) = sqrt(c^2 w^2 - (a2 - a1))` is built as a
//! product of two branch-cut roots with cuts hanging straight down from
//! `w = +-k/c`, so it is analytic on the upper half-plane and restricts to the
//! piecewise real/imaginary values on the real line:
//!
//! * `+sqrt(c^2 w^2 - k^2)` for `w >= k/c`,
//! * `i sqrt(k^2 - c^2 w^2)` for `|w| <= k/c` (tunneling band),
//! * `-sqrt(c^2 w^2 - k^2)` for `w <= -k/c`.
//!
//! All frequencies here are scaled so the band edges sit at `w = +-k/c`.

use crate::branch_cut::branch_sqrt;
use crate::error::{Error, Result};
use crate::params::{Branch, PhysicsParams};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Per-branch dispersion root `K_j`: real decay rate below the branch's band,
/// `i` times the wavenumber above it.
pub fn dispersion_root(branch: Branch, omega_sq: f64, params: &PhysicsParams) -> Complex64 {
    debug_assert!(omega_sq >= 0.0);
    let a = params.a(branch);
    let c2 = params.c() * params.c();
    if omega_sq <= a {
        Complex64::new(((a - omega_sq) / c2).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, ((omega_sq - a) / c2).sqrt())
    }
}

fn on_downward_cut(z: Complex64, edge: f64) -> bool {
    z.re == edge && z.im < 0.0
}

/// The composite root `s(w)`, analytic off the two downward cuts at `+-k/c`.
pub fn s_composite(omega: Complex64, params: &PhysicsParams) -> Result<Complex64> {
    let c = params.c();
    let k = params.k();
    let zc = omega * c;
    if on_downward_cut(zc, k) || on_downward_cut(zc, -k) {
        return Err(Error::OnBranchCut {
            re: omega.re,
            im: omega.im,
        });
    }
    let left = branch_sqrt(zc - Complex64::new(k, 0.0), -FRAC_PI_2);
    let right = branch_sqrt(zc + Complex64::new(k, 0.0), -FRAC_PI_2);
    Ok(left * right)
}

/// Band of a real frequency relative to the edge `k/c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    /// `|w| < k/c`: the transmitted wave is evanescent.
    Tunneling,
    /// `|w| > k/c`: both branches carry travelling waves.
    Propagating,
    /// `|w| = k/c` exactly.
    Edge,
}

pub fn classify(omega: f64, params: &PhysicsParams) -> Band {
    let edge = params.cut_frequency();
    if omega.abs() < edge {
        Band::Tunneling
    } else if omega.abs() > edge {
        Band::Propagating
    } else {
        Band::Edge
    }
}

/// Reflection coefficient `C_R(w) = (w c - s) / (w c + s)`.
pub fn reflection_coeff(omega: Complex64, params: &PhysicsParams) -> Result<Complex64> {
    let s = s_composite(omega, params)?;
    let num = omega * params.c() - s;
    let den = omega * params.c() + s;
    if den.norm() == 0.0 {
        return Err(Error::VanishingDenominator {
            re: omega.re,
            im: omega.im,
        });
    }
    Ok(num / den)
}

/// Transmission coefficient `T(w) = 2 w c / (w c + s)`; satisfies `C_R + 1 = T`.
pub fn transmission_coeff(omega: Complex64, params: &PhysicsParams) -> Result<Complex64> {
    let s = s_composite(omega, params)?;
    let den = omega * params.c() + s;
    if den.norm() == 0.0 {
        return Err(Error::VanishingDenominator {
            re: omega.re,
            im: omega.im,
        });
    }
    Ok(2.0 * omega * params.c() / den)
}

/// One sampled coefficient with its band tag.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientValue {
    pub omega: f64,
    pub value: Complex64,
    pub band: Band,
}

pub fn reflection_table(params: &PhysicsParams, omegas: &[f64]) -> Result<Vec<CoefficientValue>> {
    omegas
        .iter()
        .map(|&w| {
            Ok(CoefficientValue {
                omega: w,
                value: reflection_coeff(Complex64::new(w, 0.0), params)?,
                band: classify(w, params),
            })
        })
        .collect()
}

pub fn transmission_table(params: &PhysicsParams, omegas: &[f64]) -> Result<Vec<CoefficientValue>> {
    omegas
        .iter()
        .map(|&w| {
            Ok(CoefficientValue {
                omega: w,
                value: transmission_coeff(Complex64::new(w, 0.0), params)?,
                band: classify(w, params),
            })
        })
        .collect()
}

/// Modulus bound asserted on upper-half-plane arcs.
pub const MODULUS_BOUND: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct RealAxisSample {
    pub r: f64,
    pub reflection_mod: f64,
    pub transmission_dist: f64,
}

/// Result of [`asymptote_check`]. `pass` is false iff `failures` is nonempty.
#[derive(Debug, Clone)]
pub struct AsymptoteReport {
    pub max_modulus: f64,
    pub worst_arc_point: Option<(f64, f64)>,
    pub real_axis: Vec<RealAxisSample>,
    pub monotone_tail: bool,
    pub tunneling_reflection_dev: f64,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Sample `|C_R|` and `|T|` on upper-half-plane arcs `r exp(i theta)` and along
/// the real axis. Asserts the global modulus bound, monotone decay of `|C_R|`
/// beyond `10 k/c` on the real axis with `|C_R| -> 0`, `T -> 1`, and total
/// reflection in the tunneling band.
pub fn asymptote_check(
    params: &PhysicsParams,
    radii: &[f64],
    angles: &[f64],
) -> Result<AsymptoteReport> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    if angles
        .iter()
        .any(|&t| t <= 0.0 || t >= std::f64::consts::PI)
    {
        return Err(Error::Invalid("angles must lie in (0, pi)".into()));
    }

    let mut failures = Vec::new();
    let mut max_modulus = 0.0f64;
    let mut worst_arc_point = None;
    for &r in radii {
        for &theta in angles {
            let w = Complex64::from_polar(r, theta);
            let cr = reflection_coeff(w, params)?;
            let t = transmission_coeff(w, params)?;
            let m = cr.norm().max(t.norm());
            if m > max_modulus {
                max_modulus = m;
                worst_arc_point = Some((r, theta));
            }
        }
    }
    if max_modulus > MODULUS_BOUND {
        let (r, theta) = worst_arc_point.unwrap();
        failures.push(format!(
            "modulus bound violated: {max_modulus:.3e} at (r = {r:.3e}, theta = {theta:.4})"
        ));
    } else {
        worst_arc_point = None;
    }

    let mut real_axis = Vec::with_capacity(radii.len());
    for &r in radii {
        let cr = reflection_coeff(Complex64::new(r, 0.0), params)?;
        let t = transmission_coeff(Complex64::new(r, 0.0), params)?;
        real_axis.push(RealAxisSample {
            r,
            reflection_mod: cr.norm(),
            transmission_dist: (t - 1.0).norm(),
        });
    }
    let tail_start = 10.0 * params.cut_frequency();
    let tail: Vec<&RealAxisSample> = real_axis.iter().filter(|s| s.r > tail_start).collect();
    let monotone_tail = tail
        .windows(2)
        .all(|w| w[1].reflection_mod <= w[0].reflection_mod);
    if !monotone_tail {
        failures.push("real-axis |C_R| not monotone beyond 10 k/c".into());
    }
    if let Some(last) = real_axis.last() {
        if last.reflection_mod > 1e-4 {
            failures.push(format!(
                "real-axis |C_R| = {:.3e} at r = {:.3e}, expected decay below 1e-4",
                last.reflection_mod, last.r
            ));
        }
        if last.transmission_dist > 1e-4 {
            failures.push(format!(
                "real-axis |T - 1| = {:.3e} at r = {:.3e}, expected approach to 1",
                last.transmission_dist, last.r
            ));
        }
    }

    // Total reflection in the tunneling band (skipped in the degenerate k = 0 case).
    let mut tunneling_reflection_dev = 0.0;
    if params.k() > 0.0 {
        let w = 0.5 * params.cut_frequency();
        let cr = reflection_coeff(Complex64::new(w, 0.0), params)?;
        tunneling_reflection_dev = (cr.norm() - 1.0).abs();
        if tunneling_reflection_dev > 1e-12 {
            failures.push(format!(
                "tunneling-band |C_R| deviates from 1 by {tunneling_reflection_dev:.3e}"
            ));
        }
    }

    let pass = failures.is_empty();
    Ok(AsymptoteReport {
        max_modulus,
        worst_arc_point,
        real_axis,
        monotone_tail,
        tunneling_reflection_dev,
        failures,
        pass,
    })
}
