//! Verification instruments: support extraction, light-cone checks, the
//! composition-operator Lipschitz probe, and the exponential-type bound on
//! transforms of compactly supported profiles.

use crate::error::{Error, Result};
use crate::fourier::GridFunction;
use crate::grid::BranchField;
use crate::nlsolver::NonlinearitySpec;
use crate::params::Branch;
use crate::profile::Profile;
use crate::spectral::profile_transform;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Numerical support of a field in the global coordinate.
#[derive(Debug, Clone, Copy)]
pub struct SupportReport {
    pub threshold_rel: f64,
    pub max_amplitude: f64,
    /// Smallest grid-aligned interval holding all samples above threshold;
    /// `None` for the zero field.
    pub interval: Option<(f64, f64)>,
    /// L2 mass of the (sub-threshold) samples outside the interval.
    pub tail_mass: f64,
}

pub fn support_interval(field: &BranchField, eps_rel: f64) -> SupportReport {
    assert!(
        eps_rel > 0.0 && eps_rel < 1.0,
        "threshold must be in (0, 1)"
    );
    let max_amplitude = field.max_abs();
    if max_amplitude == 0.0 {
        return SupportReport {
            threshold_rel: eps_rel,
            max_amplitude,
            interval: None,
            tail_mass: 0.0,
        };
    }
    let thr = eps_rel * max_amplitude;
    let grid = field.grid();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for branch in [Branch::One, Branch::Two] {
        for (i, &v) in field.branch(branch).iter().enumerate() {
            if v.abs() > thr {
                let x = grid.global_x(branch, i);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    if lo > hi {
        return SupportReport {
            threshold_rel: eps_rel,
            max_amplitude,
            interval: None,
            tail_mass: 0.0,
        };
    }
    let mut tail = 0.0;
    for branch in [Branch::One, Branch::Two] {
        for (i, &v) in field.branch(branch).iter().enumerate() {
            let x = grid.global_x(branch, i);
            if x < lo || x > hi {
                tail += grid.h() * v * v;
            }
        }
    }
    SupportReport {
        threshold_rel: eps_rel,
        max_amplitude,
        interval: Some((lo, hi)),
        tail_mass: tail.sqrt(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConeCheck {
    pub t: f64,
    pub support: Option<(f64, f64)>,
    pub cone: (f64, f64),
    pub pass: bool,
    /// How far the support protrudes past the cone (0 when inside).
    pub excess: f64,
    /// Largest `|u| / max|u|` among samples outside the cone.
    pub outside_rel: f64,
}

#[derive(Debug, Clone)]
pub struct CausalityReport {
    pub delta: f64,
    pub entries: Vec<ConeCheck>,
    /// Slope of the support edges against time, from a least-squares fit.
    pub measured_speed: f64,
    pub speed_limit: f64,
    pub worst_excess: f64,
    pub worst_outside_rel: f64,
    pub pass: bool,
}

/// Check every snapshot's support against the cone spread from `sigma` at
/// speed `c`, padded by `delta` (at least two cells).
pub fn causality_check(
    snapshots: &[(f64, BranchField)],
    sigma: (f64, f64),
    c: f64,
    eps_rel: f64,
    delta: f64,
) -> Result<CausalityReport> {
    if snapshots.is_empty() {
        return Err(Error::Invalid("no snapshots to check".into()));
    }
    let h = snapshots[0].1.grid().h();
    if delta < 2.0 * h {
        return Err(Error::Invalid(format!(
            "cone margin {delta} must be at least two cells (2h = {})",
            2.0 * h
        )));
    }
    let mut entries = Vec::with_capacity(snapshots.len());
    let mut right_edge = Vec::new();
    let mut left_edge = Vec::new();
    for (t, field) in snapshots {
        let sup = support_interval(field, eps_rel);
        let cone = (sigma.0 - c * t - delta, sigma.1 + c * t + delta);
        let (pass, excess) = match sup.interval {
            None => (true, 0.0),
            Some((lo, hi)) => {
                let e = (cone.0 - lo).max(hi - cone.1).max(0.0);
                (e <= 0.0, e)
            }
        };
        let mut outside = 0.0f64;
        if sup.max_amplitude > 0.0 {
            let grid = field.grid();
            for branch in [Branch::One, Branch::Two] {
                for (i, &v) in field.branch(branch).iter().enumerate() {
                    let x = grid.global_x(branch, i);
                    if x < cone.0 || x > cone.1 {
                        outside = outside.max(v.abs() / sup.max_amplitude);
                    }
                }
            }
        }
        if let Some((lo, hi)) = sup.interval {
            left_edge.push((*t, lo));
            right_edge.push((*t, hi));
        }
        entries.push(ConeCheck {
            t: *t,
            support: sup.interval,
            cone,
            pass,
            excess,
            outside_rel: outside,
        });
    }

    let slope = |pts: &[(f64, f64)]| -> f64 {
        if pts.len() < 2 {
            return 0.0;
        }
        let n = pts.len() as f64;
        let (st, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (tm, ym) = (st / n, sy / n);
        let num: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    };
    let measured_speed = slope(&right_edge).max(-slope(&left_edge)).max(0.0);
    let t_max = snapshots.iter().map(|s| s.0).fold(0.0f64, f64::max);
    let speed_limit = if t_max > 0.0 {
        c * (1.0 + 2.0 * h / (c * t_max))
    } else {
        c
    };
    let worst_excess = entries.iter().map(|e| e.excess).fold(0.0, f64::max);
    let worst_outside_rel = entries.iter().map(|e| e.outside_rel).fold(0.0, f64::max);
    let pass = entries.iter().all(|e| e.pass) && measured_speed <= speed_limit;
    Ok(CausalityReport {
        delta,
        entries,
        measured_speed,
        speed_limit,
        worst_excess,
        worst_outside_rel,
        pass,
    })
}

/// Second-order derivative samples of a grid function (centered inside,
/// one-sided at the ends).
pub fn grid_derivative(f: &GridFunction) -> GridFunction {
    let n = f.len();
    let dx = f.dx;
    let v = &f.values;
    let mut d = vec![0.0; n];
    if n >= 3 {
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx);
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
        }
    }
    GridFunction::new(f.x0, dx, d)
}

pub fn h1_norm(f: &GridFunction) -> f64 {
    let d = grid_derivative(f);
    (f.l2_norm().powi(2) + d.l2_norm().powi(2)).sqrt()
}

pub fn h2_norm(f: &GridFunction) -> f64 {
    let d = grid_derivative(f);
    let dd = grid_derivative(&d);
    (f.l2_norm().powi(2) + d.l2_norm().powi(2) + dd.l2_norm().powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct LipschitzReport {
    /// `||F o f - F o g||_{H^1}`.
    pub lhs: f64,
    /// `sup |F'|` over the joint amplitude range.
    pub m: f64,
    /// `sqrt(2) * max(sup_{|y| <= ||f||_inf} |F'|, ||g'||_2 * sup |F''|)`.
    pub m_prime: f64,
    pub h2_distance: f64,
    /// `(m + m_prime) * h2_distance`, with embedding constant one.
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

fn sup_abs_on(range: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut sup = 0.0f64;
    for i in 0..=n {
        let y = -range + 2.0 * range * i as f64 / n as f64;
        let v = f(y);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample(format!(
                "derivative sample at y = {y}"
            )));
        }
        sup = sup.max(v.abs());
    }
    Ok(sup)
}

/// Probe the composition-operator Lipschitz bound
/// `||F o f - F o g||_{H^1} <= (M + M') ||f - g||_{H^2}` on discrete
/// half-line profiles. The second derivative of `F` is sampled by finite
/// differences of `F'`.
pub fn lipschitz_probe(
    spec: &NonlinearitySpec,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<LipschitzReport> {
    if f.len() != g.len() || f.x0 != g.x0 || f.dx != g.dx {
        return Err(Error::Invalid("profiles live on different grids".into()));
    }
    let f_inf = f.max_abs();
    let y_max = f_inf.max(g.max_abs());

    let m = sup_abs_on(y_max, 4000, |y| spec.f_prime(y))?;
    let m1 = sup_abs_on(f_inf, 4000, |y| spec.f_prime(y))?;
    let dd = 1e-5 * (1.0 + y_max);
    let f_second_sup = sup_abs_on(y_max, 4000, |y| {
        (spec.f_prime(y + dd) - spec.f_prime(y - dd)) / (2.0 * dd)
    })?;
    let g_deriv_l2 = grid_derivative(g).l2_norm();
    let m_prime = std::f64::consts::SQRT_2 * m1.max(g_deriv_l2 * f_second_sup);

    let comp_diff = GridFunction::new(
        f.x0,
        f.dx,
        f.values
            .iter()
            .zip(&g.values)
            .map(|(&a, &b)| spec.f(a) - spec.f(b))
            .collect(),
    );
    let lhs = h1_norm(&comp_diff);
    let diff = GridFunction::new(
        f.x0,
        f.dx,
        f.values.iter().zip(&g.values).map(|(a, b)| a - b).collect(),
    );
    let h2_distance = h2_norm(&diff);
    let bound = (m + m_prime) * h2_distance;
    let ratio = if h2_distance > 0.0 {
        lhs / h2_distance
    } else {
        0.0
    };
    Ok(LipschitzReport {
        lhs,
        m,
        m_prime,
        h2_distance,
        bound,
        ratio,
        pass: lhs <= bound * (1.0 + 1e-9),
    })
}

#[derive(Debug, Clone)]
pub struct LipschitzAudit {
    pub total: usize,
    pub passes: usize,
    /// Smallest `bound / lhs` seen (how much slack the worst pair had).
    pub worst_margin: f64,
    pub reports: Vec<LipschitzReport>,
}

/// Randomized audit of [`lipschitz_probe`] over bump pairs drawn from a seeded
/// generator; deterministic for a fixed seed.
pub fn lipschitz_audit(spec: &NonlinearitySpec, seed: u64, pairs: usize) -> Result<LipschitzAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1025usize;
    let dx = 4.0 / (n - 1) as f64;
    let draw = |rng: &mut ChaCha8Rng| -> Result<GridFunction> {
        let amp: f64 = rng.gen_range(0.2..1.5);
        let w: f64 = rng.gen_range(0.2..0.6);
        let x0: f64 = rng.gen_range((w + 0.05)..2.8);
        let p = Profile::bump(amp, x0, w)?;
        Ok(GridFunction::sample(0.0, dx, n, |x| p.eval(x)))
    };
    let mut reports = Vec::with_capacity(pairs);
    let mut passes = 0;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..pairs {
        let f = draw(&mut rng)?;
        let g = draw(&mut rng)?;
        let rep = lipschitz_probe(spec, &f, &g)?;
        if rep.pass {
            passes += 1;
        }
        if rep.lhs > 0.0 {
            worst_margin = worst_margin.min(rep.bound / rep.lhs);
        }
        reports.push(rep);
    }
    Ok(LipschitzAudit {
        total: pairs,
        passes,
        worst_margin,
        reports,
    })
}

/// Exponential-type probe of the transform of a compactly supported profile.
#[derive(Debug, Clone)]
pub struct PwReport {
    /// Upper end of the profile support; the expected exponential type.
    pub r: f64,
    /// Least-squares slope of `ln |F f|` against `|z|` over the samples.
    pub fitted_type: f64,
    /// Smallest `C` with `|F f(z)| <= C exp(R |z|)` over the samples.
    pub fitted_prefactor: f64,
    /// `int |f|`, the bound on the real axis.
    pub l1_bound: f64,
    /// Largest real-axis modulus among the samples (type 0 direction).
    pub max_real_axis_mod: f64,
    pub pass: bool,
}

/// Imaginary-axis ladder reaching phase `eta * R` in `[60, 120]`, where the
/// algebraic prefactor no longer biases the slope fit beyond a few percent.
pub fn pw_ladder(r: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::new(0.0, (60.0 + 60.0 * j as f64 / (n - 1) as f64) / r))
        .collect()
}

/// Evaluate `F f1(z) = int f1(x) exp(-i z x) dx` on the samples (closed upper
/// half-plane), fit the growth, and compare the fitted type against the
/// support radius `R`.
pub fn pw_bound_check(f1: &Profile, samples: &[Complex64]) -> Result<PwReport> {
    let (_, r) = f1
        .support()
        .ok_or_else(|| Error::InvalidDatum("zero profile has no exponential type".into()))?;
    if samples.iter().any(|z| z.im < 0.0) {
        return Err(Error::Invalid(
            "samples must lie in the closed upper half-plane".into(),
        ));
    }
    let mut l1 = 0.0;
    if let Some((lo, hi)) = f1.support() {
        let m = 4000;
        let dx = (hi - lo) / m as f64;
        for i in 0..m {
            l1 += dx * f1.eval(lo + (i as f64 + 0.5) * dx).abs();
        }
    }
    let mut fit_pts = Vec::new();
    let mut prefactor = 0.0f64;
    let mut max_real = 0.0f64;
    for &z in samples {
        let v = profile_transform(f1, z).norm();
        if !v.is_finite() {
            return Err(Error::NonFiniteSample(format!("transform at z = {z}")));
        }
        if z.im == 0.0 {
            max_real = max_real.max(v);
        }
        if v > 0.0 {
            let az = z.norm();
            fit_pts.push((az, v.ln()));
            prefactor = prefactor.max(v * (-r * az).exp());
        }
    }
    let fitted_type = if fit_pts.len() >= 2 {
        let n = fit_pts.len() as f64;
        let (sx, sy): (f64, f64) = fit_pts
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (xm, ym) = (sx / n, sy / n);
        let num: f64 = fit_pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
        let den: f64 = fit_pts.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum();
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    } else {
        0.0
    };
    let pass = fitted_type <= r * 1.1 && max_real <= l1 * (1.0 + 1e-9);
    Ok(PwReport {
        r,
        fitted_type,
        fitted_prefactor: prefactor,
        l1_bound: l1,
        max_real_axis_mod: max_real,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BranchField, BranchGrid};

    #[test]
    fn zero_field_has_empty_support() {
        let grid = BranchGrid::new(0.05, 64).unwrap();
        let rep = support_interval(&BranchField::zeros(grid), 1e-8);
        assert!(rep.interval.is_none());
        assert_eq!(rep.tail_mass, 0.0);
    }

    #[test]
    fn indicator_bump_support_is_read_off() {
        let grid = BranchGrid::new(0.05, 64).unwrap();
        let f = BranchField::from_fns(
            grid,
            |x| if (1.0..=2.0).contains(&x) { 1.0 } else { 0.0 },
            |_| 0.0,
        )
        .unwrap();
        let rep = support_interval(&f, 1e-8);
        let (lo, hi) = rep.interval.unwrap();
        assert!((lo - 1.0).abs() <= 0.05 + 1e-12);
        assert!((hi - 2.0).abs() <= 0.05 + 1e-12);
    }

    #[test]
    fn support_interval_grows_as_threshold_shrinks() {
        let grid = BranchGrid::new(0.01, 400).unwrap();
        let f = BranchField::from_fns(
            grid,
            |x| {
                let y = (x - 1.5) / 0.4;
                if y.abs() < 1.0 {
                    (1.0 - y * y).powi(3)
                } else {
                    0.0
                }
            },
            |_| 0.0,
        )
        .unwrap();
        let mut prev = 0.0;
        for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
            let rep = support_interval(&f, eps);
            let (lo, hi) = rep.interval.unwrap();
            let len = hi - lo;
            assert!(len >= prev, "support must be monotone in the threshold");
            prev = len;
        }
    }

    #[test]
    fn causality_cone_at_t_zero_is_sigma_padded() {
        let grid = BranchGrid::new(0.01, 400).unwrap();
        let f = BranchField::from_fns(
            grid,
            |x| {
                let y = (x - 1.5) / 0.4;
                if y.abs() < 1.0 {
                    (1.0 - y * y).powi(3)
                } else {
                    0.0
                }
            },
            |_| 0.0,
        )
        .unwrap();
        let rep = causality_check(&[(0.0, f)], (1.1, 1.9), 1.0, 1e-8, 0.05).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.entries[0].cone, (1.05, 1.95));
    }

    #[test]
    fn causality_margin_must_cover_two_cells() {
        let grid = BranchGrid::new(0.05, 64).unwrap();
        let f = BranchField::zeros(grid);
        assert!(causality_check(&[(0.0, f)], (1.0, 2.0), 1.0, 1e-8, 0.05).is_err());
    }

    #[test]
    fn lipschitz_identical_profiles_give_zero() {
        let spec = NonlinearitySpec::cubic(1.0);
        let p = Profile::bump(1.0, 1.5, 0.4).unwrap();
        let f = GridFunction::sample(0.0, 4.0 / 1024.0, 1025, |x| p.eval(x));
        let rep = lipschitz_probe(&spec, &f, &f).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn lipschitz_scaled_pair_holds_with_margin() {
        let spec = NonlinearitySpec::cubic(1.0);
        let p = Profile::bump(1.0, 1.5, 0.4).unwrap();
        let f = GridFunction::sample(0.0, 4.0 / 1024.0, 1025, |x| p.eval(x));
        let g = GridFunction::sample(0.0, 4.0 / 1024.0, 1025, |x| 1.1 * p.eval(x));
        let rep = lipschitz_probe(&spec, &f, &g).unwrap();
        assert!(rep.pass, "lhs {} bound {}", rep.lhs, rep.bound);
        assert!(rep.ratio <= rep.m + rep.m_prime);
    }

    #[test]
    fn pw_type_matches_support_radius() {
        let p = Profile::bump(1.0, 1.5, 0.4).unwrap();
        let rep = pw_bound_check(&p, &pw_ladder(1.9, 25)).unwrap();
        assert!(rep.pass, "fitted type {} vs R {}", rep.fitted_type, rep.r);
        assert!((rep.fitted_type - rep.r).abs() <= 0.1 * rep.r);
    }

    #[test]
    fn pw_real_axis_is_bounded_by_l1() {
        let p = Profile::bump(0.7, 1.0, 0.3).unwrap();
        let samples: Vec<Complex64> = (1..=20)
            .map(|j| Complex64::new(j as f64 * 0.7, 0.0))
            .collect();
        let rep = pw_bound_check(&p, &samples).unwrap();
        assert!(rep.max_real_axis_mod <= rep.l1_bound * (1.0 + 1e-9));
    }

    #[test]
    fn pw_halved_support_halves_the_type() {
        let wide = Profile::bump(1.0, 1.5, 0.5).unwrap(); // R = 2.0
        let narrow = Profile::bump(1.0, 0.75, 0.25).unwrap(); // R = 1.0
        let t_wide = pw_bound_check(&wide, &pw_ladder(2.0, 25))
            .unwrap()
            .fitted_type;
        let t_narrow = pw_bound_check(&narrow, &pw_ladder(1.0, 25))
            .unwrap()
            .fitted_type;
        let ratio = t_narrow / t_wide;
        assert!((ratio - 0.5).abs() <= 0.05, "type ratio {ratio}");
    }
}
