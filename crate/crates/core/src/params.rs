//! Physical constants of the two-branch transmission problem.

use crate::error::{Error, Result};

/// Which half-axis a quantity lives on. Branch one carries the smaller
/// dispersion coefficient, branch two the larger one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    One,
    Two,
}

impl Branch {
    pub fn index(self) -> usize {
        match self {
            Branch::One => 1,
            Branch::Two => 2,
        }
    }
}

/// Wave speed `c` and per-branch dispersion coefficients `a1 < a2`.
///
/// The derived step size `k = sqrt(a2 - a1)` is recomputed on demand so that
/// `k^2 == a2 - a1` holds exactly; it is never stored separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    c: f64,
    a1: f64,
    a2: f64,
}

impl PhysicsParams {
    /// Standard constructor: requires `c > 0` and `0 < a1 < a2`.
    pub fn new(c: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!("c must be positive, got {c}")));
        }
        if !(a1.is_finite() && a1 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "a1 must be positive, got {a1}"
            )));
        }
        if !(a2.is_finite() && a2 > a1) {
            return Err(Error::InvalidParams(format!(
                "a2 must exceed a1, got a1 = {a1}, a2 = {a2}"
            )));
        }
        Ok(Self { c, a1, a2 })
    }

    /// Degenerate constructor with `a1 == a2 == a` (no step, `k = 0`).
    ///
    /// The transmission problem then reduces to free propagation on the full
    /// line; this is only intended for reduction oracles and tests.
    pub fn equal_coefficients(c: f64, a: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!("c must be positive, got {c}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParams(format!("a must be positive, got {a}")));
        }
        Ok(Self { c, a1: a, a2: a })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn a(&self, branch: Branch) -> f64 {
        match branch {
            Branch::One => self.a1,
            Branch::Two => self.a2,
        }
    }

    /// `k = sqrt(a2 - a1)`, the dispersion step between the branches.
    pub fn k(&self) -> f64 {
        (self.a2 - self.a1).sqrt()
    }

    /// Frequency of the band edge, `k / c`. Below it the transmitted wave is
    /// evanescent (tunneling band), above it both branches propagate.
    pub fn cut_frequency(&self) -> f64 {
        self.k() / self.c
    }
}
