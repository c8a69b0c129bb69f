//! Finite-difference integration of the nonlinear transmission problem.
//!
//! Interior points of each branch follow the explicit leapfrog update of
//! `u_tt - c^2 u_xx + a_k u = F(u)`. The node couples the branches: the shared
//! value is solved from the continuity condition together with the vanishing
//! sum of second-order one-sided derivatives (see [`node_value`]), or evolved
//! as a half-cell dof of its own (the `DynamicCell` closure used by the
//! energy-conserving scheme). The far ends are homogeneous Dirichlet and are
//! kept outside the light cone of the datum, which the causality instruments
//! confirm after the fact.
//!
//! The conserving scheme replaces `a_k u - F(u)` by the divided difference of
//! its potential between the forward and backward time levels, which makes the
//! discrete energy reported by [`Solver::energy`] an exact invariant of the
//! update (one scalar Newton solve per point per step).
//!
//! Energy bookkeeping: the quadratic part of the energy pairs `c^2` with the
//! spatial gradient and `a_k` with the field value, matching the operator
//! `-c^2 d^2/dx^2 + a_k`; kinetic energy uses the difference quotient of the
//! leapfrog pair, so reports live at half steps.

use crate::error::{Error, Result};
use crate::grid::{BranchField, BranchGrid};
use crate::params::{Branch, PhysicsParams};
use crate::profile::InitialDatum;
use std::fmt;
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A nonlinearity `F` with its derivative and primitive `G(w) = int_0^w F`.
#[derive(Clone)]
pub struct NonlinearitySpec {
    name: String,
    f: RealFn,
    f_prime: RealFn,
    g: RealFn,
    repulsive: bool,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("NonlinearitySpec")
            .field("name", &self.name)
            .field("repulsive", &self.repulsive)
            .finish()
    }
}

impl NonlinearitySpec {
    /// `F = 0`: the linear problem.
    pub fn linear() -> Self {
        Self {
            name: "none".into(),
            f: Arc::new(|_| 0.0),
            f_prime: Arc::new(|_| 0.0),
            g: Arc::new(|_| 0.0),
            repulsive: true,
        }
    }

    /// Repulsive cubic `F(u) = -lambda u^3` with `G(w) = -lambda w^4 / 4`.
    pub fn cubic(lambda: f64) -> Self {
        Self {
            name: format!("cubic(lambda={lambda})"),
            f: Arc::new(move |u| -lambda * u * u * u),
            f_prime: Arc::new(move |u| -3.0 * lambda * u * u),
            g: Arc::new(move |w| -0.25 * lambda * w * w * w * w),
            repulsive: lambda >= 0.0,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        repulsive: bool,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            g: Arc::new(g),
            repulsive,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn claims_repulsive(&self) -> bool {
        self.repulsive
    }

    pub fn f(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        (self.f_prime)(u)
    }

    pub fn g(&self, w: f64) -> f64 {
        (self.g)(w)
    }
}

/// Why a nonlinearity fails the admissibility gate.
#[derive(Debug, Clone, PartialEq)]
pub enum RejectionReason {
    /// `F(0) != 0`: the zero state would not stay a solution.
    NonzeroAtOrigin { value: f64 },
    /// The primitive takes positive values, so the energy no longer bounds
    /// the norm (attractive or sign-indefinite nonlinearity).
    PositivePrimitive { at: f64, value: f64 },
    /// `G' != F` on the sampled range: the declared primitive is inconsistent.
    PrimitiveMismatch { at: f64, fd: f64, f: f64 },
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonzeroAtOrigin { value } => {
                write!(fm, "F(0) = {value:e} must vanish")
            }
            Self::PositivePrimitive { at, value } => {
                write!(
                    fm,
                    "primitive G({at}) = {value:e} is positive (not repulsive)"
                )
            }
            Self::PrimitiveMismatch { at, fd, f } => {
                write!(fm, "G'({at}) = {fd:e} disagrees with F({at}) = {f:e}")
            }
        }
    }
}

/// Check `F(0) = 0`, `G <= 0`, and `G' = F` on `samples` points of `range`.
/// Rejection is a value, not an error.
pub fn validate_nonlinearity(
    spec: &NonlinearitySpec,
    range: (f64, f64),
    samples: usize,
) -> std::result::Result<(), RejectionReason> {
    let f0 = spec.f(0.0);
    if f0.abs() > 1e-12 {
        return Err(RejectionReason::NonzeroAtOrigin { value: f0 });
    }
    let (lo, hi) = range;
    let n = samples.max(3);
    let fd_tol = {
        let max_f = (0..n)
            .map(|i| spec.f(lo + (hi - lo) * i as f64 / (n - 1) as f64).abs())
            .fold(0.0f64, f64::max);
        1e-4 * (1.0 + max_f)
    };
    for i in 0..n {
        let w = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let g = spec.g(w);
        if g > 1e-12 {
            return Err(RejectionReason::PositivePrimitive { at: w, value: g });
        }
        let delta = 1e-4 * (1.0 + w.abs());
        let fd = (spec.g(w + delta) - spec.g(w - delta)) / (2.0 * delta);
        let f = spec.f(w);
        if (fd - f).abs() > fd_tol {
            return Err(RejectionReason::PrimitiveMismatch { at: w, fd, f });
        }
    }
    Ok(())
}

/// Shared node value solving the summed second-order one-sided derivative
/// condition from the first two interior samples of each branch.
pub fn node_value(u1_interior: &[f64], u2_interior: &[f64]) -> f64 {
    assert!(
        u1_interior.len() >= 2 && u2_interior.len() >= 2,
        "need at least two interior samples per branch"
    );
    (4.0 * (u1_interior[0] + u2_interior[0]) - (u1_interior[1] + u2_interior[1])) / 6.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Leapfrog,
    Conserving,
}

/// How the shared node value is closed each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClosure {
    /// Algebraic: [`node_value`] applied to the freshly updated interiors.
    OneSided,
    /// The node is a dof with half-cell mass from each branch; required for
    /// exact discrete energy conservation in the conserving scheme.
    DynamicCell,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub node_closure: NodeClosure,
    pub cfl_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Abort when `max |u|` grows by this factor over the initial field.
    pub amplitude_guard: f64,
}

impl SolverConfig {
    pub fn leapfrog() -> Self {
        Self {
            scheme: Scheme::Leapfrog,
            node_closure: NodeClosure::OneSided,
            cfl_max: 0.9,
            newton_tol: 1e-13,
            newton_max_iter: 80,
            amplitude_guard: 10.0,
        }
    }

    pub fn conserving() -> Self {
        Self {
            scheme: Scheme::Conserving,
            node_closure: NodeClosure::DynamicCell,
            ..Self::leapfrog()
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::leapfrog()
    }
}

/// Energy of a leapfrog pair, reported at the half step between them.
/// `total` is by construction the sum of the four parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub total: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub dispersive: f64,
    pub nonlinear: f64,
}

impl EnergyReport {
    /// The quadratic part `1/2 ||phi||^2` (everything except the nonlinear term).
    pub fn norm_part(&self) -> f64 {
        self.kinetic + self.elastic + self.dispersive
    }
}

/// Marching state: the two newest time levels plus the update machinery.
pub struct Solver {
    params: PhysicsParams,
    spec: NonlinearitySpec,
    cfg: SolverConfig,
    grid: BranchGrid,
    dt: f64,
    step_index: usize,
    older: BranchField,
    newer: BranchField,
    scratch: BranchField,
    guard_level: f64,
}

impl Solver {
    pub fn new(
        datum: &InitialDatum,
        params: &PhysicsParams,
        spec: &NonlinearitySpec,
        grid: BranchGrid,
        dt: f64,
        cfg: SolverConfig,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
        }
        let ratio = params.c() * dt / grid.h();
        if ratio > cfg.cfl_max {
            return Err(Error::CflViolation {
                ratio,
                limit: cfg.cfl_max,
            });
        }
        let u0 = BranchField::from_fns(grid, |x| datum.f1.eval(x), |x| datum.f2.eval(x))?;
        let far = grid.n() - 1;
        if u0.branch(Branch::One)[far] != 0.0 || u0.branch(Branch::Two)[far] != 0.0 {
            return Err(Error::ExtentTooSmall {
                required: datum.max_support_radius(),
                actual: grid.extent(),
            });
        }
        let guard_level = cfg.amplitude_guard * u0.max_abs();
        let mut solver = Self {
            params: *params,
            spec: spec.clone(),
            cfg,
            grid,
            dt,
            step_index: 0,
            older: u0.clone(),
            newer: u0.clone(),
            scratch: BranchField::zeros(grid),
            guard_level,
        };
        solver.taylor_start(&u0);
        Ok(solver)
    }

    /// Second-order start consistent with zero initial velocity:
    /// `u^1 = u^0 + (dt^2/2) (c^2 u0'' - a_k u0 + F(u0))`.
    fn taylor_start(&mut self, u0: &BranchField) {
        let h2 = self.grid.h() * self.grid.h();
        let dt2 = self.dt * self.dt;
        let c2 = self.params.c() * self.params.c();
        let n = self.grid.n();
        let mut first = BranchField::zeros(self.grid);
        for branch in [Branch::One, Branch::Two] {
            let a = self.params.a(branch);
            let src = u0.branch(branch);
            let dst = first.branch_mut(branch);
            for i in 1..n - 1 {
                let lap = (src[i + 1] - 2.0 * src[i] + src[i - 1]) / h2;
                dst[i] = src[i] + 0.5 * dt2 * (c2 * lap - a * src[i] + self.spec.f(src[i]));
            }
            dst[n - 1] = 0.0;
        }
        let node = match self.cfg.node_closure {
            NodeClosure::OneSided => node_value(
                &first.branch(Branch::One)[1..],
                &first.branch(Branch::Two)[1..],
            ),
            NodeClosure::DynamicCell => {
                let u0n = u0.node();
                let flux = (u0.branch(Branch::One)[1] + u0.branch(Branch::Two)[1] - 2.0 * u0n) / h2;
                let a_mean = 0.5 * (self.params.a1() + self.params.a2());
                u0n + 0.5 * dt2 * (c2 * flux - a_mean * u0n + self.spec.f(u0n))
            }
        };
        first.set_node(node);
        self.newer = first;
        self.step_index = 1;
    }

    pub fn grid(&self) -> BranchGrid {
        self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Time of the newest level.
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.dt
    }

    pub fn newest(&self) -> &BranchField {
        &self.newer
    }

    pub fn previous(&self) -> &BranchField {
        &self.older
    }

    /// Swap the two time levels. Leapfrog is time-symmetric, so marching on
    /// after a swap retraces the trajectory.
    pub fn swap_pair(&mut self) {
        std::mem::swap(&mut self.older, &mut self.newer);
    }

    pub fn step(&mut self) -> Result<()> {
        let mut next = std::mem::replace(&mut self.scratch, BranchField::zeros(self.grid));
        match self.cfg.scheme {
            Scheme::Leapfrog => self.leapfrog_into(&mut next),
            Scheme::Conserving => self.conserving_into(&mut next)?,
        }
        self.close_node(&mut next)?;

        if !next.is_finite() {
            return Err(Error::NonFiniteField {
                step: self.step_index + 1,
            });
        }
        let max = next.max_abs();
        if self.guard_level > 0.0 && max > self.guard_level {
            return Err(Error::AmplitudeGuard {
                step: self.step_index + 1,
                max,
                limit: self.guard_level,
            });
        }

        self.scratch = std::mem::replace(&mut self.older, BranchField::zeros(self.grid));
        self.older = std::mem::replace(&mut self.newer, next);
        self.step_index += 1;
        Ok(())
    }

    fn leapfrog_into(&self, next: &mut BranchField) {
        let h2 = self.grid.h() * self.grid.h();
        let dt2 = self.dt * self.dt;
        let c2 = self.params.c() * self.params.c();
        let n = self.grid.n();
        for branch in [Branch::One, Branch::Two] {
            let a = self.params.a(branch);
            let cur = self.newer.branch(branch);
            let old = self.older.branch(branch);
            let dst = next.branch_mut(branch);
            for i in 1..n - 1 {
                let lap = (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) / h2;
                dst[i] =
                    2.0 * cur[i] - old[i] + dt2 * (c2 * lap - a * cur[i] + self.spec.f(cur[i]));
            }
            dst[n - 1] = 0.0;
        }
    }

    fn conserving_into(&self, next: &mut BranchField) -> Result<()> {
        let h2 = self.grid.h() * self.grid.h();
        let dt2 = self.dt * self.dt;
        let c2 = self.params.c() * self.params.c();
        let n = self.grid.n();
        for branch in [Branch::One, Branch::Two] {
            let a = self.params.a(branch);
            let cur = self.newer.branch(branch);
            let old = self.older.branch(branch);
            let dst = next.branch_mut(branch);
            for i in 1..n - 1 {
                let lap = (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) / h2;
                let rhs = 2.0 * cur[i] - old[i] + dt2 * c2 * lap;
                // Leapfrog prediction as the Newton seed.
                let seed = rhs + dt2 * (self.spec.f(cur[i]) - a * cur[i]);
                dst[i] = self.solve_point(rhs, old[i], a, dt2, seed).map_err(|_| {
                    Error::NewtonDivergence {
                        step: self.step_index + 1,
                        branch: branch.index(),
                        index: i,
                    }
                })?;
            }
            dst[n - 1] = 0.0;
        }
        Ok(())
    }

    /// Solve `y - rhs + dt^2 * W(y, v) = 0` where `W` is the divided
    /// difference of the potential `V(s) = a s^2 / 2 - G(s)`.
    fn solve_point(
        &self,
        rhs: f64,
        v: f64,
        a: f64,
        dt2: f64,
        seed: f64,
    ) -> std::result::Result<f64, ()> {
        let vv = 0.5 * a * v * v - self.spec.g(v);
        let mut y = seed;
        for _ in 0..self.cfg.newton_max_iter {
            let d = y - v;
            let (w, w_y);
            if d.abs() > 1e-9 * (1.0 + y.abs() + v.abs()) {
                let vy = 0.5 * a * y * y - self.spec.g(y);
                w = (vy - vv) / d;
                let vp = a * y - self.spec.f(y);
                w_y = (vp * d - (vy - vv)) / (d * d);
            } else {
                let mid = 0.5 * (y + v);
                w = a * mid - self.spec.f(mid);
                w_y = 0.5 * (a - self.spec.f_prime(mid));
            }
            let phi = y - rhs + dt2 * w;
            let dphi = 1.0 + dt2 * w_y;
            if dphi == 0.0 || !phi.is_finite() {
                return Err(());
            }
            let step = phi / dphi;
            y -= step;
            if phi.abs() <= self.cfg.newton_tol * (1.0 + y.abs())
                && step.abs() <= 1e-10 * (1.0 + y.abs())
            {
                return Ok(y);
            }
        }
        Err(())
    }

    fn close_node(&self, next: &mut BranchField) -> Result<()> {
        let node = match self.cfg.node_closure {
            NodeClosure::OneSided => node_value(
                &next.branch(Branch::One)[1..],
                &next.branch(Branch::Two)[1..],
            ),
            NodeClosure::DynamicCell => {
                let h2 = self.grid.h() * self.grid.h();
                let dt2 = self.dt * self.dt;
                let c2 = self.params.c() * self.params.c();
                let u = self.newer.node();
                let v = self.older.node();
                let flux = (self.newer.branch(Branch::One)[1] + self.newer.branch(Branch::Two)[1]
                    - 2.0 * u)
                    / h2;
                let a_mean = 0.5 * (self.params.a1() + self.params.a2());
                let rhs = 2.0 * u - v + dt2 * c2 * flux;
                match self.cfg.scheme {
                    Scheme::Leapfrog => rhs + dt2 * (self.spec.f(u) - a_mean * u),
                    Scheme::Conserving => {
                        let seed = rhs + dt2 * (self.spec.f(u) - a_mean * u);
                        self.solve_point(rhs, v, a_mean, dt2, seed).map_err(|_| {
                            Error::NewtonDivergence {
                                step: self.step_index + 1,
                                branch: 0,
                                index: 0,
                            }
                        })?
                    }
                }
            }
        };
        next.set_node(node);
        Ok(())
    }

    /// Discrete energy of the current leapfrog pair at the half step.
    ///
    /// Kinetic: trapezoid-weighted difference quotient. Elastic: cell products
    /// of consecutive gradients. Dispersive and nonlinear: trapezoid-weighted
    /// averages of the two levels. This combination is the exact invariant of
    /// the conserving scheme (with the dynamic node closure) and drifts at
    /// `O(dt^2)` under plain leapfrog.
    pub fn energy(&self) -> EnergyReport {
        let h = self.grid.h();
        let n = self.grid.n();
        let dt = self.dt;
        let c2 = self.params.c() * self.params.c();
        let mut kinetic = 0.0;
        let mut elastic = 0.0;
        let mut dispersive = 0.0;
        let mut nonlinear = 0.0;
        for branch in [Branch::One, Branch::Two] {
            let a = self.params.a(branch);
            let new = self.newer.branch(branch);
            let old = self.older.branch(branch);
            for i in 0..n {
                let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                let v = (new[i] - old[i]) / dt;
                kinetic += 0.5 * w * v * v;
                dispersive += 0.25 * a * w * (new[i] * new[i] + old[i] * old[i]);
                nonlinear -= 0.5 * w * (self.spec.g(new[i]) + self.spec.g(old[i]));
            }
            for i in 0..n - 1 {
                elastic += 0.5 * c2 * (new[i + 1] - new[i]) * (old[i + 1] - old[i]) / h;
            }
        }
        EnergyReport {
            t: (self.step_index as f64 - 0.5) * dt,
            total: kinetic + elastic + dispersive + nonlinear,
            kinetic,
            elastic,
            dispersive,
            nonlinear,
        }
    }
}

/// Snapshots plus the per-step energy record of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: BranchGrid,
    pub dt: f64,
    pub scheme: Scheme,
    pub snapshots: Vec<(f64, BranchField)>,
    pub energies: Vec<EnergyReport>,
    pub admissibility_overridden: bool,
}

impl Trajectory {
    pub fn initial_energy(&self) -> f64 {
        self.energies.first().map_or(0.0, |e| e.total)
    }

    /// `max_t |E(t) - E(0)| / |E(0)|` over the recorded steps.
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.initial_energy();
        if e0 == 0.0 {
            return self
                .energies
                .iter()
                .map(|e| e.total.abs())
                .fold(0.0, f64::max);
        }
        self.energies
            .iter()
            .map(|e| (e.total - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    }

    /// Largest `1/2 ||phi||^2 / E(0)` over the run (repulsive bound check).
    pub fn max_norm_bound_ratio(&self) -> f64 {
        let e0 = self.initial_energy();
        if e0 == 0.0 {
            return 0.0;
        }
        self.energies
            .iter()
            .map(|e| e.norm_part() / e0)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub snapshot_times: Vec<f64>,
    /// Skip the admissibility gate (recorded in the trajectory).
    pub override_admissibility: bool,
}

/// March the problem to `t_end`, recording energies every step and snapshots
/// at the requested times (rounded to the nearest step).
///
/// Preconditions: the nonlinearity passes [`validate_nonlinearity`] over the
/// range reached by the datum (unless overridden), and the grid extent exceeds
/// `x_hi + c t_end + 10 h` so the Dirichlet far ends stay outside the light
/// cone. `dt` is snapped to an integer number of steps.
#[allow(clippy::too_many_arguments)]
pub fn run(
    datum: &InitialDatum,
    spec: &NonlinearitySpec,
    params: &PhysicsParams,
    grid: BranchGrid,
    dt: f64,
    t_end: f64,
    cfg: SolverConfig,
    opts: &RunOptions,
) -> Result<Trajectory> {
    if !opts.override_admissibility {
        let amp = 2.0 * datum.max_amplitude_hint() + 1.0;
        if let Err(reason) = validate_nonlinearity(spec, (-amp, amp), 401) {
            return Err(Error::InadmissibleNonlinearity(reason.to_string()));
        }
    }
    let required = datum.max_support_radius() + params.c() * t_end + 10.0 * grid.h();
    if grid.extent() <= required {
        return Err(Error::ExtentTooSmall {
            required,
            actual: grid.extent(),
        });
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Invalid(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    let n_steps = (t_end / dt).round().max(1.0) as usize;
    let dt = t_end / n_steps as f64;

    let mut solver = Solver::new(datum, params, spec, grid, dt, cfg)?;

    // Map requested snapshot times to step indices.
    let mut wanted: Vec<usize> = opts
        .snapshot_times
        .iter()
        .map(|&t| ((t / dt).round() as usize).min(n_steps))
        .collect();
    wanted.sort_unstable();
    let matches = |step: usize| wanted.iter().filter(|&&w| w == step).count();

    let mut snapshots = Vec::with_capacity(wanted.len());
    for _ in 0..matches(0) {
        snapshots.push((0.0, solver.previous().clone()));
    }
    let mut energies = Vec::with_capacity(n_steps);
    energies.push(solver.energy());
    for _ in 0..matches(1) {
        snapshots.push((solver.time(), solver.newest().clone()));
    }
    for step in 2..=n_steps {
        solver.step()?;
        energies.push(solver.energy());
        for _ in 0..matches(step) {
            snapshots.push((solver.time(), solver.newest().clone()));
        }
    }
    Ok(Trajectory {
        grid,
        dt,
        scheme: cfg.scheme,
        snapshots,
        energies,
        admissibility_overridden: opts.override_admissibility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;

    fn params() -> PhysicsParams {
        PhysicsParams::new(1.0, 1.0, 5.0).unwrap()
    }

    fn datum() -> InitialDatum {
        InitialDatum::single_bump(1.0, 1.5, 0.4).unwrap()
    }

    #[test]
    fn admissibility_gate() {
        let range = (-2.0, 2.0);
        assert!(validate_nonlinearity(&NonlinearitySpec::cubic(1.0), range, 201).is_ok());
        assert!(validate_nonlinearity(&NonlinearitySpec::linear(), range, 201).is_ok());

        let attractive = NonlinearitySpec::custom(
            "attractive-cubic",
            |u| u * u * u,
            |u| 3.0 * u * u,
            |w| 0.25 * w * w * w * w,
            false,
        );
        assert!(matches!(
            validate_nonlinearity(&attractive, range, 201),
            Err(RejectionReason::PositivePrimitive { .. })
        ));

        let quadratic = NonlinearitySpec::custom(
            "quadratic",
            |u| u * u,
            |u| 2.0 * u,
            |w| w * w * w / 3.0,
            false,
        );
        assert!(matches!(
            validate_nonlinearity(&quadratic, range, 201),
            Err(RejectionReason::PositivePrimitive { .. })
        ));

        let constant = NonlinearitySpec::custom("constant", |_| 1.0, |_| 0.0, |w| w, false);
        assert!(matches!(
            validate_nonlinearity(&constant, range, 201),
            Err(RejectionReason::NonzeroAtOrigin { .. })
        ));

        let wrong_primitive = NonlinearitySpec::custom(
            "mismatched",
            |u| -u * u * u,
            |u| -3.0 * u * u,
            |w| -w * w,
            true,
        );
        assert!(matches!(
            validate_nonlinearity(&wrong_primitive, range, 201),
            Err(RejectionReason::PrimitiveMismatch { .. })
        ));
    }

    #[test]
    fn node_value_pinned_cases() {
        assert_eq!(node_value(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!((node_value(&[1.0, 0.0], &[0.0, 0.0]) - 4.0 / 6.0).abs() < 1e-15);
        // Mirror-symmetric data: each one-sided derivative vanishes on its own.
        let u0 = node_value(&[0.9, 0.6], &[0.9, 0.6]);
        let h = 0.1;
        let deriv = (-3.0 * u0 + 4.0 * 0.9 - 0.6) / (2.0 * h);
        assert!(deriv.abs() < 1e-13);
    }

    #[test]
    fn zero_field_stays_zero() {
        let d = InitialDatum::new(Profile::zero(), Profile::zero()).unwrap();
        let grid = BranchGrid::new(1.0 / 64.0, 200).unwrap();
        let mut s = Solver::new(
            &d,
            &params(),
            &NonlinearitySpec::cubic(1.0),
            grid,
            1.0 / 128.0,
            SolverConfig::leapfrog(),
        )
        .unwrap();
        for _ in 0..50 {
            s.step().unwrap();
        }
        assert_eq!(s.newest().max_abs(), 0.0);
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let grid = BranchGrid::new(1.0 / 64.0, 200).unwrap();
        let r = Solver::new(
            &datum(),
            &params(),
            &NonlinearitySpec::linear(),
            grid,
            1.0 / 32.0,
            SolverConfig::leapfrog(),
        );
        assert!(matches!(r, Err(Error::CflViolation { .. })));
    }

    #[test]
    fn taylor_start_matches_expansion() {
        // First step against the exact Taylor value with analytic derivatives.
        let d = datum();
        let spec = NonlinearitySpec::cubic(1.0);
        let p = params();
        let mut errs = Vec::new();
        for lvl in [0, 1] {
            let h = 1.0 / (128 << lvl) as f64;
            let dt = 0.5 * h;
            let grid = BranchGrid::with_extent(h, 3.0).unwrap();
            let s = Solver::new(&d, &p, &spec, grid, dt, SolverConfig::leapfrog()).unwrap();
            let u1 = s.newest();
            let mut worst = 0.0f64;
            for i in 1..grid.n() - 1 {
                let x = grid.x(i);
                let f = d.f1.eval(x);
                let exact = f + 0.5
                    * dt
                    * dt
                    * (p.c() * p.c() * d.f1.eval_deriv2(x) - p.a1() * f + spec.f(f));
                worst = worst.max((u1.branch(Branch::One)[i] - exact).abs());
            }
            errs.push(worst);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 3.5, "start-up order {order}, errors {errs:?}");
    }

    #[test]
    fn energy_bookkeeping_identity() {
        let grid = BranchGrid::with_extent(1.0 / 128.0, 4.0).unwrap();
        let s = Solver::new(
            &datum(),
            &params(),
            &NonlinearitySpec::cubic(1.0),
            grid,
            1.0 / 256.0,
            SolverConfig::leapfrog(),
        )
        .unwrap();
        let e = s.energy();
        let sum = e.kinetic + e.elastic + e.dispersive + e.nonlinear;
        assert!((e.total - sum).abs() <= 1e-12 * e.total.abs().max(1.0));
        assert!(
            e.nonlinear >= 0.0,
            "repulsive G <= 0 makes -int G nonnegative"
        );
    }

    #[test]
    fn initial_energy_matches_direct_quadrature() {
        // Static bump with cubic F: E(0) = 1/2 int (c^2 f'^2 + a1 f^2) + 1/4 int f^4.
        let d = datum();
        let p = params();
        let h = 1.0 / 512.0;
        let grid = BranchGrid::with_extent(h, 4.0).unwrap();
        let s = Solver::new(
            &d,
            &p,
            &NonlinearitySpec::cubic(1.0),
            grid,
            0.5 * h,
            SolverConfig::leapfrog(),
        )
        .unwrap();
        let e = s.energy();
        // Independent quadrature with analytic derivatives, fine midpoint rule.
        let (lo, hi) = d.f1.support().unwrap();
        let m = 20000;
        let dx = (hi - lo) / m as f64;
        let mut exact = 0.0;
        for i in 0..m {
            let x = lo + (i as f64 + 0.5) * dx;
            let f = d.f1.eval(x);
            let fp = d.f1.eval_deriv(x);
            exact += dx * (0.5 * (p.c() * p.c() * fp * fp + p.a1() * f * f) + 0.25 * f.powi(4));
        }
        let rel = (e.total - exact).abs() / exact;
        assert!(rel < 1e-4, "relative energy mismatch {rel}");
    }

    #[test]
    fn node_continuity_holds_exactly_while_stepping() {
        let d = InitialDatum::single_bump(1.0, 0.8, 0.3).unwrap();
        let p = params();
        let grid = BranchGrid::with_extent(1.0 / 128.0, 2.5).unwrap();
        for cfg in [SolverConfig::leapfrog(), SolverConfig::conserving()] {
            let mut s = Solver::new(
                &d,
                &p,
                &NonlinearitySpec::cubic(1.0),
                grid,
                1.0 / 256.0,
                cfg,
            )
            .unwrap();
            for _ in 0..200 {
                s.step().unwrap();
                let f = s.newest();
                assert_eq!(f.branch(Branch::One)[0], f.branch(Branch::Two)[0]);
            }
        }
    }

    #[test]
    fn leapfrog_time_reversal() {
        let d = datum();
        let p = params();
        let h = 1.0 / 256.0;
        let grid = BranchGrid::with_extent(h, 3.5).unwrap();
        let spec = NonlinearitySpec::cubic(1.0);
        let mut s = Solver::new(&d, &p, &spec, grid, 0.5 * h, SolverConfig::leapfrog()).unwrap();
        let u0 = s.previous().clone();
        let u1 = s.newest().clone();
        let steps = 512;
        for _ in 0..steps {
            s.step().unwrap();
        }
        s.swap_pair();
        for _ in 0..steps {
            s.step().unwrap();
        }
        // After the reversed march the pair is (u1, u0) up to roundoff.
        let back = s.newest();
        let scale = u0.max_abs();
        let err = back.l2_distance(&u0) / u0.l2_norm().max(1e-300);
        assert!(err < 1e-8, "reversal error {err} (scale {scale})");
        let err1 = s.previous().l2_distance(&u1) / u1.l2_norm();
        assert!(err1 < 1e-8);
    }

    #[test]
    fn run_snaps_dt_and_records_snapshots() {
        let d = datum();
        let p = params();
        let grid = BranchGrid::with_extent(1.0 / 64.0, 3.2).unwrap();
        let traj = run(
            &d,
            &NonlinearitySpec::linear(),
            &p,
            grid,
            1.0 / 128.0,
            0.5,
            SolverConfig::leapfrog(),
            &RunOptions {
                snapshot_times: vec![0.0, 0.25, 0.5],
                override_admissibility: false,
            },
        )
        .unwrap();
        assert_eq!(traj.snapshots.len(), 3);
        assert_eq!(traj.energies.len(), 64);
        assert!((traj.snapshots[1].0 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn run_rejects_short_grid() {
        let d = datum();
        let p = params();
        let grid = BranchGrid::with_extent(1.0 / 64.0, 2.0).unwrap();
        let r = run(
            &d,
            &NonlinearitySpec::linear(),
            &p,
            grid,
            1.0 / 128.0,
            1.0,
            SolverConfig::leapfrog(),
            &RunOptions::default(),
        );
        assert!(matches!(r, Err(Error::ExtentTooSmall { .. })));
    }

    #[test]
    fn run_gates_inadmissible_nonlinearity() {
        let d = datum();
        let p = params();
        let grid = BranchGrid::with_extent(1.0 / 64.0, 3.2).unwrap();
        let attractive = NonlinearitySpec::custom(
            "attractive",
            |u| u * u * u,
            |u| 3.0 * u * u,
            |w| 0.25 * w * w * w * w,
            false,
        );
        let r = run(
            &d,
            &attractive,
            &p,
            grid,
            1.0 / 128.0,
            0.5,
            SolverConfig::leapfrog(),
            &RunOptions::default(),
        );
        assert!(matches!(r, Err(Error::InadmissibleNonlinearity(_))));
        let r = run(
            &d,
            &attractive,
            &p,
            grid,
            1.0 / 128.0,
            0.5,
            SolverConfig::leapfrog(),
            &RunOptions {
                snapshot_times: vec![],
                override_admissibility: true,
            },
        );
        assert!(r.is_ok());
        assert!(r.unwrap().admissibility_overridden);
    }

    #[test]
    fn conserving_scheme_conserves_through_node_traffic() {
        // Bump close to the node so the wave crosses it well before t_end.
        let d = InitialDatum::single_bump(1.0, 0.8, 0.3).unwrap();
        let p = params();
        let h = 1.0 / 256.0;
        let grid = BranchGrid::with_extent(h, 2.8).unwrap();
        let traj = run(
            &d,
            &NonlinearitySpec::cubic(1.0),
            &p,
            grid,
            0.5 * h,
            1.5,
            SolverConfig::conserving(),
            &RunOptions::default(),
        )
        .unwrap();
        let drift = traj.relative_energy_drift();
        assert!(drift <= 1e-9, "conserving-scheme energy drift {drift:.3e}");
    }

    #[test]
    fn conserving_newton_handles_strong_nonlinearity() {
        // Large amplitude and coupling: the per-point solves stay convergent
        // and the discrete invariant still holds to roundoff.
        let d = InitialDatum::single_bump(1.5, 0.8, 0.3).unwrap();
        let p = params();
        let h = 1.0 / 256.0;
        let grid = BranchGrid::with_extent(h, 2.8).unwrap();
        let traj = run(
            &d,
            &NonlinearitySpec::cubic(5.0),
            &p,
            grid,
            0.5 * h,
            1.2,
            SolverConfig::conserving(),
            &RunOptions::default(),
        )
        .unwrap();
        let drift = traj.relative_energy_drift();
        assert!(drift <= 1e-9, "strong-coupling drift {drift:.3e}");
        assert!(traj.max_norm_bound_ratio() <= 1.01);
    }

    #[test]
    fn leapfrog_energy_drift_is_small_through_node_traffic() {
        let d = InitialDatum::single_bump(1.0, 0.8, 0.3).unwrap();
        let p = params();
        let h = 1.0 / 256.0;
        let grid = BranchGrid::with_extent(h, 2.8).unwrap();
        let traj = run(
            &d,
            &NonlinearitySpec::cubic(1.0),
            &p,
            grid,
            0.5 * h,
            1.5,
            SolverConfig::leapfrog(),
            &RunOptions::default(),
        )
        .unwrap();
        let drift = traj.relative_energy_drift();
        assert!(drift <= 1e-3, "leapfrog energy drift {drift:.3e}");
        assert!(traj.max_norm_bound_ratio() <= 1.01);
    }
}
