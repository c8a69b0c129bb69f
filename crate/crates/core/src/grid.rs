//! Uniform grids on the two half-axes and real-valued fields on them.
//!
//! Both branches share the same spacing `h` and point count `n`, with index 0
//! at the node. The global coordinate maps branch one to `X = x >= 0` and
//! branch two to `X = -x <= 0`.

use crate::error::{Error, Result};
use crate::params::Branch;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchGrid {
    h: f64,
    n: usize,
}

impl BranchGrid {
    pub fn new(h: f64, n: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {h}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points per branch, got {n}"
            )));
        }
        Ok(Self { h, n })
    }

    /// Smallest grid with spacing `h` whose extent is at least `min_extent`.
    pub fn with_extent(h: f64, min_extent: f64) -> Result<Self> {
        if !(min_extent.is_finite() && min_extent > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "extent must be positive, got {min_extent}"
            )));
        }
        let n = (min_extent / h).ceil() as usize + 1;
        Self::new(h, n.max(3))
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        (self.n - 1) as f64 * self.h
    }

    /// Branch coordinate of point `i`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Global coordinate of point `i` on `branch`.
    pub fn global_x(&self, branch: Branch, i: usize) -> f64 {
        match branch {
            Branch::One => self.x(i),
            Branch::Two => -self.x(i),
        }
    }
}

/// Samples `(u1, u2)` on a [`BranchGrid`], sharing the node value `u1[0] == u2[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchField {
    grid: BranchGrid,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl BranchField {
    pub fn zeros(grid: BranchGrid) -> Self {
        Self {
            grid,
            u1: vec![0.0; grid.n()],
            u2: vec![0.0; grid.n()],
        }
    }

    /// Sample two functions onto the grid. The functions must agree at the
    /// node; the shared node value is taken from `f1`.
    pub fn from_fns(
        grid: BranchGrid,
        f1: impl Fn(f64) -> f64,
        f2: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let n = grid.n();
        let mut u1 = Vec::with_capacity(n);
        let mut u2 = Vec::with_capacity(n);
        for i in 0..n {
            let x = grid.x(i);
            u1.push(f1(x));
            u2.push(f2(x));
        }
        let scale = u1
            .iter()
            .chain(u2.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        if (u1[0] - u2[0]).abs() > 1e-12 * scale {
            return Err(Error::InvalidDatum(format!(
                "profiles disagree at the node: {} vs {}",
                u1[0], u2[0]
            )));
        }
        u2[0] = u1[0];
        Ok(Self { grid, u1, u2 })
    }

    pub fn grid(&self) -> BranchGrid {
        self.grid
    }

    pub fn branch(&self, branch: Branch) -> &[f64] {
        match branch {
            Branch::One => &self.u1,
            Branch::Two => &self.u2,
        }
    }

    pub fn branch_mut(&mut self, branch: Branch) -> &mut [f64] {
        match branch {
            Branch::One => &mut self.u1,
            Branch::Two => &mut self.u2,
        }
    }

    pub fn node(&self) -> f64 {
        self.u1[0]
    }

    pub fn set_node(&mut self, value: f64) {
        self.u1[0] = value;
        self.u2[0] = value;
    }

    /// Residual of the discrete flux-balance condition at the node: the sum
    /// of the second-order one-sided derivatives of both branches.
    pub fn t1_residual(&self) -> f64 {
        let h = self.grid.h();
        let one_sided = |u: &[f64]| (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        one_sided(&self.u1) + one_sided(&self.u2)
    }

    pub fn max_abs(&self) -> f64 {
        self.u1
            .iter()
            .chain(self.u2.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u1.iter().chain(self.u2.iter()).all(|v| v.is_finite())
    }

    /// Trapezoid L2 norm over both branches. The node contributes half a cell
    /// from each side.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.h();
        let mut acc = 0.0;
        for u in [&self.u1, &self.u2] {
            let n = u.len();
            acc += 0.5 * (u[0] * u[0] + u[n - 1] * u[n - 1]);
            for v in &u[1..n - 1] {
                acc += v * v;
            }
        }
        (acc * h).sqrt()
    }

    /// Trapezoid L2 norm of the difference with `other` (same grid required).
    pub fn l2_distance(&self, other: &BranchField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let h = self.grid.h();
        let mut acc = 0.0;
        for (a, b) in [(&self.u1, &other.u1), (&self.u2, &other.u2)] {
            let n = a.len();
            let d0 = a[0] - b[0];
            let dn = a[n - 1] - b[n - 1];
            acc += 0.5 * (d0 * d0 + dn * dn);
            for i in 1..n - 1 {
                let d = a[i] - b[i];
                acc += d * d;
            }
        }
        (acc * h).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_coordinates() {
        let g = BranchGrid::new(0.5, 5).unwrap();
        assert_eq!(g.extent(), 2.0);
        assert_eq!(g.x(3), 1.5);
        assert_eq!(g.global_x(Branch::Two, 3), -1.5);
        assert_eq!(g.global_x(Branch::One, 3), 1.5);
    }

    #[test]
    fn with_extent_covers_request() {
        let g = BranchGrid::with_extent(0.3, 1.0).unwrap();
        assert!(g.extent() >= 1.0);
    }

    #[test]
    fn node_is_shared() {
        let g = BranchGrid::new(0.1, 8).unwrap();
        let mut f = BranchField::zeros(g);
        f.set_node(2.5);
        assert_eq!(f.branch(Branch::One)[0], 2.5);
        assert_eq!(f.branch(Branch::Two)[0], 2.5);
    }

    #[test]
    fn from_fns_rejects_node_mismatch() {
        let g = BranchGrid::new(0.1, 8).unwrap();
        let r = BranchField::from_fns(g, |_| 1.0, |_| 0.0);
        assert!(r.is_err());
    }

    #[test]
    fn t1_residual_vanishes_when_the_node_solves_the_flux_condition() {
        let g = BranchGrid::new(0.1, 16).unwrap();
        let mut f =
            BranchField::from_fns(g, |x| (x * 1.3).sin(), |x| (x * 0.7).cos() - 1.0).unwrap();
        let node = (4.0 * (f.branch(Branch::One)[1] + f.branch(Branch::Two)[1])
            - (f.branch(Branch::One)[2] + f.branch(Branch::Two)[2]))
            / 6.0;
        f.set_node(node);
        assert!(f.t1_residual().abs() < 1e-13);
    }
}
