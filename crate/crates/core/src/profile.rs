//! Compactly supported C^2 initial profiles.
//!
//! The default shape is `A * (1 - ((x - x0)/w)^2)^3` on `|x - x0| <= w`, which
//! is twice continuously differentiable, vanishes with its first two
//! derivatives at the support edges, and stays clear of the node whenever
//! `x0 - w > 0`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub amplitude: f64,
    pub center: f64,
    pub half_width: f64,
}

impl BumpProfile {
    pub fn new(amplitude: f64, center: f64, half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidDatum(format!(
                "bump half-width must be positive, got {half_width}"
            )));
        }
        if !amplitude.is_finite() || !center.is_finite() {
            return Err(Error::InvalidDatum("bump parameters must be finite".into()));
        }
        Ok(Self {
            amplitude,
            center,
            half_width,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = (x - self.center) / self.half_width;
        if y.abs() < 1.0 {
            self.amplitude * (1.0 - y * y).powi(3)
        } else {
            0.0
        }
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let y = (x - self.center) / self.half_width;
        if y.abs() < 1.0 {
            -6.0 * self.amplitude * y * (1.0 - y * y).powi(2) / self.half_width
        } else {
            0.0
        }
    }

    pub fn eval_deriv2(&self, x: f64) -> f64 {
        let y = (x - self.center) / self.half_width;
        if y.abs() < 1.0 {
            let q = 1.0 - y * y;
            self.amplitude * (-6.0 * q * q + 24.0 * y * y * q) / (self.half_width * self.half_width)
        } else {
            0.0
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

/// A finite sum of bumps; empty means the zero profile.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Profile {
    bumps: Vec<BumpProfile>,
}

impl Profile {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn bump(amplitude: f64, center: f64, half_width: f64) -> Result<Self> {
        Ok(Self {
            bumps: vec![BumpProfile::new(amplitude, center, half_width)?],
        })
    }

    pub fn sum(bumps: Vec<BumpProfile>) -> Self {
        Self { bumps }
    }

    pub fn is_zero(&self) -> bool {
        self.bumps.is_empty() || self.bumps.iter().all(|b| b.amplitude == 0.0)
    }

    pub fn bumps(&self) -> &[BumpProfile] {
        &self.bumps
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval(x)).sum()
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval_deriv(x)).sum()
    }

    pub fn eval_deriv2(&self, x: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval_deriv2(x)).sum()
    }

    /// Hull of the bump supports; `None` for the zero profile.
    pub fn support(&self) -> Option<(f64, f64)> {
        if self.is_zero() {
            return None;
        }
        let lo = self
            .bumps
            .iter()
            .map(|b| b.support().0)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .bumps
            .iter()
            .map(|b| b.support().1)
            .fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            bumps: self
                .bumps
                .iter()
                .map(|b| BumpProfile {
                    amplitude: factor * b.amplitude,
                    ..*b
                })
                .collect(),
        }
    }

    /// Narrowest bump half-width, used to size frequency windows.
    pub fn min_half_width(&self) -> Option<f64> {
        self.bumps
            .iter()
            .map(|b| b.half_width)
            .fold(None, |acc, w| Some(acc.map_or(w, |a: f64| a.min(w))))
    }
}

/// Initial condition of the transmission problem: `f1` on branch one and an
/// optional `f2` on branch two, both supported away from the node so the
/// datum sits in the operator domain (value and slope vanish at the node).
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatum {
    pub f1: Profile,
    pub f2: Profile,
}

impl InitialDatum {
    pub fn new(f1: Profile, f2: Profile) -> Result<Self> {
        for (name, p) in [("f1", &f1), ("f2", &f2)] {
            if let Some((lo, _)) = p.support() {
                if lo <= 0.0 {
                    return Err(Error::InvalidDatum(format!(
                        "{name} must be supported strictly inside the open half-axis, support starts at {lo}"
                    )));
                }
            }
        }
        Ok(Self { f1, f2 })
    }

    pub fn single_bump(amplitude: f64, center: f64, half_width: f64) -> Result<Self> {
        Self::new(
            Profile::bump(amplitude, center, half_width)?,
            Profile::zero(),
        )
    }

    pub fn f2_is_zero(&self) -> bool {
        self.f2.is_zero()
    }

    /// Hull of both supports in branch coordinates.
    pub fn max_support_radius(&self) -> f64 {
        let hi1 = self.f1.support().map_or(0.0, |s| s.1);
        let hi2 = self.f2.support().map_or(0.0, |s| s.1);
        hi1.max(hi2)
    }

    /// Rough amplitude scale, used to size admissibility sampling ranges.
    pub fn max_amplitude_hint(&self) -> f64 {
        let mut m = 0.0f64;
        for p in [&self.f1, &self.f2] {
            if let Some((lo, hi)) = p.support() {
                for i in 0..=64 {
                    let x = lo + (hi - lo) * i as f64 / 64.0;
                    m = m.max(p.eval(x).abs());
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_c2_at_the_edges() {
        // Exactly representable edges at 1.0 and 2.0.
        let b = BumpProfile::new(1.3, 1.5, 0.5).unwrap();
        for x in [1.0, 2.0] {
            assert_eq!(b.eval(x), 0.0);
            assert_eq!(b.eval_deriv(x), 0.0);
            assert_eq!(b.eval_deriv2(x), 0.0);
        }
        assert!((b.eval(1.5) - 1.3).abs() < 1e-15);
        // Values just inside the edge stay tiny: C^2 contact.
        assert!(b.eval(1.0 + 1e-8).abs() < 1e-20);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = BumpProfile::new(0.7, 2.0, 0.5).unwrap();
        let h = 1e-6;
        for i in 0..50 {
            let x = 1.4 + 1.2 * i as f64 / 49.0;
            let fd1 = (b.eval(x + h) - b.eval(x - h)) / (2.0 * h);
            let fd2 = (b.eval(x + h) - 2.0 * b.eval(x) + b.eval(x - h)) / (h * h);
            assert!((fd1 - b.eval_deriv(x)).abs() < 1e-7);
            assert!((fd2 - b.eval_deriv2(x)).abs() < 1e-3);
        }
    }

    #[test]
    fn datum_requires_support_off_the_node() {
        assert!(InitialDatum::single_bump(1.0, 0.3, 0.4).is_err());
        assert!(InitialDatum::single_bump(1.0, 1.5, 0.4).is_ok());
    }

    #[test]
    fn profile_sum_and_support() {
        let p = Profile::sum(vec![
            BumpProfile::new(1.0, 1.0, 0.2).unwrap(),
            BumpProfile::new(-0.5, 2.0, 0.3).unwrap(),
        ]);
        assert_eq!(p.support(), Some((0.8, 2.3)));
        assert!((p.eval(1.0) - 1.0).abs() < 1e-15);
        assert!((p.eval(2.0) + 0.5).abs() < 1e-15);
        assert!(Profile::zero().support().is_none());
    }
}
