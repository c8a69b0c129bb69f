//! Subcommand implementations. All outputs are deterministic for a fixed
//! config and seed; wall-clock timings are segregated into `timings.txt`.

use crate::config::{Mode, RunConfig};
use crate::output::{coefficients_csv, energy_csv, fields_csv, fmt_f64, OutputDir};
use anyhow::{bail, Context};
use kgtx_core::analysis::{
    causality_check, lipschitz_audit, pw_bound_check, pw_ladder, support_interval,
};
use kgtx_core::dispersion::{
    asymptote_check, reflection_coeff, reflection_table, s_composite, transmission_coeff,
    transmission_table,
};
use kgtx_core::fourier::{kg_fullline_propagate, GridFunction};
use kgtx_core::nlsolver::{
    run, validate_nonlinearity, NonlinearitySpec, RunOptions, SolverConfig, Trajectory,
};
use kgtx_core::spectral::{BandSolution, QuadSpec, TransformSolution};
use kgtx_core::{BranchGrid, PhysicsParams, Profile};
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exit-code contract: 0 = all checks pass, 1 = check failure,
/// 2 = configuration error, 3 = numerical abort (and unexpected I/O
/// failures).
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.chain().any(|c| c.is::<crate::config::ConfigError>()) {
        return 2;
    }
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<kgtx_core::Error>() {
            return match core {
                kgtx_core::Error::InvalidParams(_)
                | kgtx_core::Error::InvalidGrid(_)
                | kgtx_core::Error::InvalidDatum(_)
                | kgtx_core::Error::CflViolation { .. }
                | kgtx_core::Error::ExtentTooSmall { .. }
                | kgtx_core::Error::InadmissibleNonlinearity(_)
                | kgtx_core::Error::Invalid(_) => 2,
                _ => 3,
            };
        }
    }
    3
}

/// `KGTX_OUT` > `--out` > `out =` in the config > `./kgtx_out`.
pub fn resolve_out_dir(cli_out: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    if let Ok(env_out) = std::env::var("KGTX_OUT") {
        if !env_out.is_empty() {
            return PathBuf::from(env_out);
        }
    }
    cli_out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("kgtx_out"))
}

fn grid_for(cfg: &RunConfig) -> anyhow::Result<BranchGrid> {
    Ok(BranchGrid::with_extent(cfg.h, cfg.resolved_extent())?)
}

fn solver_config_for(mode: Mode) -> SolverConfig {
    match mode {
        Mode::Leapfrog => SolverConfig::leapfrog(),
        Mode::Conserving => SolverConfig::conserving(),
        Mode::SpectralLinear => unreachable!("spectral mode has no FD solver"),
    }
}

fn fd_trajectory(cfg: &RunConfig) -> anyhow::Result<Trajectory> {
    let params = cfg.params()?;
    let datum = cfg.datum()?;
    let grid = grid_for(cfg)?;
    let traj = run(
        &datum,
        &cfg.nonlinearity_spec(),
        &params,
        grid,
        cfg.resolved_dt(),
        cfg.t_end,
        solver_config_for(cfg.mode),
        &RunOptions {
            snapshot_times: cfg.snapshots.clone(),
            override_admissibility: false,
        },
    )?;
    Ok(traj)
}

fn write_fd_outputs(
    cfg: &RunConfig,
    traj: &Trajectory,
    out_dir: &Path,
    seed: u64,
    solve_secs: f64,
) -> anyhow::Result<()> {
    let mut out = OutputDir::create(out_dir)?;
    out.write("fields.csv", &fields_csv(&traj.snapshots))?;
    out.write("energy.csv", &energy_csv(&traj.energies))?;
    let summary = vec![
        format!("mode = {}", cfg.mode.as_str()),
        format!("steps = {}", traj.energies.len()),
        format!("dt_effective = {}", fmt_f64(traj.dt)),
        format!(
            "energy_drift_rel = {}",
            fmt_f64(traj.relative_energy_drift())
        ),
        format!(
            "norm_bound_ratio = {}",
            fmt_f64(traj.max_norm_bound_ratio())
        ),
        "status = completed".to_string(),
    ];
    out.finish(
        &cfg.canonical(),
        seed,
        &summary,
        &[("solve".to_string(), solve_secs)],
    )?;
    Ok(())
}

/// Finite-difference run: fields and per-step energies.
pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path, seed: u64) -> anyhow::Result<()> {
    if cfg.mode == Mode::SpectralLinear {
        bail!(crate::config::ConfigError {
            line: None,
            message: "simulate requires mode = leapfrog | conserving (use linear-spectral)".into(),
        });
    }
    let t0 = Instant::now();
    let traj = fd_trajectory(cfg)?;
    let solve_secs = t0.elapsed().as_secs_f64();
    write_fd_outputs(cfg, &traj, out_dir, seed, solve_secs)
}

/// Closed-form linear solution sampled on the configured grid, plus the
/// reflection/transmission coefficient table.
pub fn cmd_linear_spectral(cfg: &RunConfig, out_dir: &Path, seed: u64) -> anyhow::Result<()> {
    if cfg.mode != Mode::SpectralLinear {
        bail!(crate::config::ConfigError {
            line: None,
            message: "linear-spectral requires mode = spectral-linear".into(),
        });
    }
    let t0 = Instant::now();
    let params = cfg.params()?;
    let datum = cfg.datum()?;
    let grid = grid_for(cfg)?;
    let sol = TransformSolution::new(&datum, &params, &QuadSpec::default())?;
    let mut snapshots = Vec::new();
    for &t in &cfg.snapshots {
        snapshots.push((t, sol.eval(t, &grid)));
    }
    let solve_secs = t0.elapsed().as_secs_f64();

    let cut = params.cut_frequency();
    let omegas: Vec<f64> = (0..=800)
        .map(|j| -4.0 * cut + 8.0 * cut * j as f64 / 800.0)
        .collect();
    let refl = reflection_table(&params, &omegas)?;
    let trans = transmission_table(&params, &omegas)?;

    let mut out = OutputDir::create(out_dir)?;
    out.write("fields.csv", &fields_csv(&snapshots))?;
    out.write("coefficients.csv", &coefficients_csv(&refl, &trans))?;
    let summary = vec![
        format!("mode = {}", cfg.mode.as_str()),
        format!("omega_max = {}", fmt_f64(sol.omega_max())),
        format!("tail_estimate = {}", fmt_f64(sol.tail_estimate())),
        "status = completed".to_string(),
    ];
    out.finish(
        &cfg.canonical(),
        seed,
        &summary,
        &[("solve".to_string(), solve_secs)],
    )?;
    Ok(())
}

struct Referee {
    lines: Vec<String>,
    failures: usize,
}

impl Referee {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            failures: 0,
        }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        if !pass {
            self.failures += 1;
        }
        self.lines.push(format!("{verdict} {name}: {detail}"));
    }

    fn check_upper(&mut self, name: &str, measured: f64, bound: f64) {
        self.check(
            name,
            measured <= bound,
            format!("measured {measured:.3e}, bound {bound:.3e}"),
        );
    }
}

fn rel_l2_vs_spectral(fd: &kgtx_core::BranchField, sol: &TransformSolution, t: f64) -> f64 {
    let exact = sol.eval(t, &fd.grid());
    fd.l2_distance(&exact) / exact.l2_norm()
}

/// The full invariant suite. Returns the number of failed checks.
pub fn cmd_verify(cfg: &RunConfig, out_dir: &Path, seed: u64) -> anyhow::Result<usize> {
    let params = cfg.params()?;
    let datum = cfg.datum()?;
    let grid = grid_for(cfg)?;
    let cut = params.cut_frequency();
    let mut referee = Referee::new();
    let mut timings: Vec<(String, f64)> = Vec::new();
    let timed = |name: &str, t0: Instant, timings: &mut Vec<(String, f64)>| {
        timings.push((name.to_string(), t0.elapsed().as_secs_f64()));
    };

    // Dispersion exactness.
    let t0 = Instant::now();
    {
        let mut worst_piecewise = 0.0f64;
        let mut worst_identity = 0.0f64;
        for i in 0..1000 {
            let w = -4.0 * cut + 8.0 * cut * i as f64 / 999.0;
            let z = Complex64::new(w, 0.0);
            let s = s_composite(z, &params)?;
            let cw = params.c() * w;
            let k = params.k();
            let piecewise = if cw >= k {
                Complex64::new((cw * cw - k * k).sqrt(), 0.0)
            } else if cw <= -k {
                Complex64::new(-(cw * cw - k * k).sqrt(), 0.0)
            } else {
                Complex64::new(0.0, (k * k - cw * cw).sqrt())
            };
            worst_piecewise = worst_piecewise.max((s - piecewise).norm());
            let cr = reflection_coeff(z, &params)?;
            let tr = transmission_coeff(z, &params)?;
            worst_identity = worst_identity.max((cr + 1.0 - tr).norm());
        }
        referee.check_upper("dispersion-piecewise-agreement", worst_piecewise, 1e-12);
        referee.check_upper("reflection-transmission-identity", worst_identity, 1e-12);

        let mut worst_mod = 0.0f64;
        for i in 0..500 {
            let w = -0.999 * cut + 1.998 * cut * i as f64 / 499.0;
            let cr = reflection_coeff(Complex64::new(w, 0.0), &params)?;
            worst_mod = worst_mod.max((cr.norm() - 1.0).abs());
        }
        referee.check_upper("tunneling-total-reflection", worst_mod, 1e-12);
    }
    timed("dispersion", t0, &mut timings);

    let t0 = Instant::now();
    {
        let radii: Vec<f64> = (0..=30).map(|i| 0.5 * cut * 1.31f64.powi(i)).collect();
        let angles = [
            std::f64::consts::FRAC_PI_6,
            std::f64::consts::FRAC_PI_2,
            5.0 * std::f64::consts::FRAC_PI_6,
        ];
        let rep = asymptote_check(&params, &radii, &angles)?;
        referee.check(
            "coefficient-asymptotics",
            rep.pass,
            format!(
                "max modulus {:.3e}, tail monotone: {}, failures: {:?}",
                rep.max_modulus, rep.monotone_tail, rep.failures
            ),
        );
    }
    timed("asymptotics", t0, &mut timings);

    // Reduction oracles.
    let t0 = Instant::now();
    {
        let n = 1 << 15;
        let f = GridFunction::sample(-8.0, 16.0 / n as f64, n, |x| datum.f1.eval(x));
        // Not a multiple of the grid spacing: exercises off-grid reconstruction.
        let t = 1.2344321;
        let moved = kg_fullline_propagate(&f, t, 0.0, params.c())?;
        let mut worst = 0.0f64;
        for (j, v) in moved.values.iter().enumerate() {
            let x = moved.x(j);
            let exact =
                0.5 * (datum.f1.eval(x + params.c() * t) + datum.f1.eval(x - params.c() * t));
            worst = worst.max((v - exact).abs());
        }
        referee.check_upper("dalembert-reduction", worst, 1e-8);

        let eq = PhysicsParams::equal_coefficients(params.c(), params.a1())?;
        let sol = TransformSolution::new(
            &datum,
            &eq,
            &QuadSpec {
                omega_max: 200.0,
                ..QuadSpec::default()
            },
        )?;
        let free = kg_fullline_propagate(&f, 0.8, params.a1(), params.c())?;
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, &v) in free.values.iter().enumerate() {
            let xg = free.x(j);
            if xg.abs() > 3.0 {
                continue;
            }
            let ours = if xg >= 0.0 {
                sol.u1(0.8, xg)
            } else {
                sol.u2(0.8, -xg)
            };
            num += (ours - v) * (ours - v);
            den += v * v;
        }
        referee.check_upper("free-line-reduction", (num / den).sqrt(), 1e-3);
    }
    timed("reduction", t0, &mut timings);

    // Initial-condition reproduction by both representations.
    let t0 = Instant::now();
    let spectral = TransformSolution::new(&datum, &params, &QuadSpec::default())?;
    {
        let band = BandSolution::new(&datum, &params, &QuadSpec::default())?;
        let mut num_t = 0.0;
        let mut num_b = 0.0;
        let mut den = 0.0;
        for i in 0..grid.n() {
            let x = grid.x(i).max(1e-9);
            let want = datum.f1.eval(x);
            num_t += (spectral.u1(0.0, x) - want).powi(2);
            num_b += (band.u1(0.0, x) - want).powi(2);
            den += want * want;
        }
        referee.check_upper("initial-condition-transform", (num_t / den).sqrt(), 1e-3);
        referee.check_upper("initial-condition-band", (num_b / den).sqrt(), 1e-3);
    }
    timed("initial-condition", t0, &mut timings);

    // Cross-validation: linear FD against the spectral solution.
    let t0 = Instant::now();
    {
        let traj = run(
            &datum,
            &NonlinearitySpec::linear(),
            &params,
            grid,
            cfg.resolved_dt(),
            cfg.t_end,
            SolverConfig::leapfrog(),
            &RunOptions {
                snapshot_times: vec![cfg.t_end],
                override_admissibility: false,
            },
        )?;
        let rel = rel_l2_vs_spectral(&traj.snapshots[0].1, &spectral, cfg.t_end);
        referee.check_upper("fd-vs-spectral-cross-validation", rel, 1e-2);
    }
    timed("cross-validation", t0, &mut timings);

    // Energy conservation and the repulsive norm bound.
    let t0 = Instant::now();
    {
        let spec = cfg.nonlinearity_spec();
        let leap = run(
            &datum,
            &spec,
            &params,
            grid,
            cfg.resolved_dt(),
            cfg.t_end,
            SolverConfig::leapfrog(),
            &RunOptions::default(),
        )?;
        referee.check_upper(
            "energy-conservation-leapfrog",
            leap.relative_energy_drift(),
            1e-3,
        );
        referee.check_upper("norm-bound-leapfrog", leap.max_norm_bound_ratio(), 1.01);
        let cons = run(
            &datum,
            &spec,
            &params,
            grid,
            cfg.resolved_dt(),
            cfg.t_end,
            SolverConfig::conserving(),
            &RunOptions::default(),
        )?;
        referee.check_upper(
            "energy-conservation-conserving",
            cons.relative_energy_drift(),
            1e-9,
        );
        referee.check_upper("norm-bound-conserving", cons.max_norm_bound_ratio(), 1.01);
    }
    timed("energy", t0, &mut timings);

    // Causality at the unit Courant number (domain of dependence = light cone).
    let t0 = Instant::now();
    {
        let sigma = datum
            .f1
            .support()
            .unwrap_or((cfg.bump_center, cfg.bump_center));
        for (name, spec) in [
            ("causality-linear", NonlinearitySpec::linear()),
            ("causality-cubic", NonlinearitySpec::cubic(1.0)),
        ] {
            let mut scfg = SolverConfig::leapfrog();
            scfg.cfl_max = 1.0;
            let traj = run(
                &datum,
                &spec,
                &params,
                grid,
                grid.h() / params.c(),
                cfg.t_end,
                scfg,
                &RunOptions {
                    snapshot_times: cfg.snapshots.clone(),
                    override_admissibility: false,
                },
            )?;
            let rep = causality_check(
                &traj.snapshots,
                sigma,
                params.c(),
                cfg.eps_rel,
                cfg.resolved_delta(),
            )?;
            referee.check(
                name,
                rep.pass && rep.worst_outside_rel <= 1e-6,
                format!(
                    "worst excess {:.3e}, outside amplitude {:.3e} of max, speed {:.6} <= {:.6}",
                    rep.worst_excess, rep.worst_outside_rel, rep.measured_speed, rep.speed_limit
                ),
            );
        }
    }
    timed("causality", t0, &mut timings);

    // Admissibility gate.
    let t0 = Instant::now();
    {
        let range = (-2.0, 2.0);
        let ok = validate_nonlinearity(&NonlinearitySpec::cubic(1.0), range, 201).is_ok();
        let r1 = validate_nonlinearity(
            &NonlinearitySpec::custom(
                "attractive",
                |u| u * u * u,
                |u| 3.0 * u * u,
                |w| 0.25 * w * w * w * w,
                false,
            ),
            range,
            201,
        );
        let r2 = validate_nonlinearity(
            &NonlinearitySpec::custom(
                "quadratic",
                |u| u * u,
                |u| 2.0 * u,
                |w| w * w * w / 3.0,
                false,
            ),
            range,
            201,
        );
        let r3 = validate_nonlinearity(
            &NonlinearitySpec::custom("constant", |_| 1.0, |_| 0.0, |w| w, false),
            range,
            201,
        );
        let all =
            ok && matches!(
                r1,
                Err(kgtx_core::nlsolver::RejectionReason::PositivePrimitive { .. })
            ) && matches!(
                r2,
                Err(kgtx_core::nlsolver::RejectionReason::PositivePrimitive { .. })
            ) && matches!(
                r3,
                Err(kgtx_core::nlsolver::RejectionReason::NonzeroAtOrigin { .. })
            );
        referee.check(
            "admissibility-gate",
            all,
            format!(
                "repulsive cubic accepted: {ok}; rejections: {:?}, {:?}, {:?}",
                r1.err(),
                r2.err(),
                r3.err()
            ),
        );
    }
    timed("admissibility", t0, &mut timings);

    // Composition-operator Lipschitz bound, randomized audit.
    let t0 = Instant::now();
    {
        let audit = lipschitz_audit(&NonlinearitySpec::cubic(1.0), seed, 100)?;
        referee.check(
            "lipschitz-audit",
            audit.passes == audit.total,
            format!(
                "{}/{} pairs, worst margin {:.3}",
                audit.passes, audit.total, audit.worst_margin
            ),
        );
    }
    timed("lipschitz", t0, &mut timings);

    // Exponential-type bound for three bump widths.
    let t0 = Instant::now();
    {
        let mut all = true;
        let mut details = Vec::new();
        for scale in [1.0, 0.5, 0.25] {
            let profile = Profile::bump(
                cfg.bump_amplitude.max(0.1),
                cfg.bump_center * scale,
                cfg.bump_width * scale,
            )?;
            let r = profile.support().unwrap().1;
            let rep = pw_bound_check(&profile, &pw_ladder(r, 25))?;
            let ok = (rep.fitted_type - rep.r).abs() <= 0.1 * rep.r;
            all &= ok;
            details.push(format!("R={:.3}: type {:.3}", rep.r, rep.fitted_type));
        }
        referee.check("exponential-type", all, details.join("; "));
    }
    timed("exponential-type", t0, &mut timings);

    // Emit data and the report.
    let omegas: Vec<f64> = (0..=800)
        .map(|j| -4.0 * cut + 8.0 * cut * j as f64 / 800.0)
        .collect();
    let refl = reflection_table(&params, &omegas)?;
    let trans = transmission_table(&params, &omegas)?;

    let mut out = OutputDir::create(out_dir)?;
    out.write("coefficients.csv", &coefficients_csv(&refl, &trans))?;
    let mut report = String::new();
    for line in &referee.lines {
        report.push_str(line);
        report.push('\n');
    }
    report.push_str(&format!(
        "\n{} checks, {} failed\n",
        referee.lines.len(),
        referee.failures
    ));
    out.write("verify_report.txt", &report)?;

    let mut summary = vec![format!(
        "verify = {} checks, {} failed",
        referee.lines.len(),
        referee.failures
    )];
    summary.extend(referee.lines.clone());
    out.finish(&cfg.canonical(), seed, &summary, &timings)?;

    for line in &referee.lines {
        println!("{line}");
    }
    Ok(referee.failures)
}

/// Cartesian sweep. Cell `j` writes into `cell_NNN/`; the aggregate table has
/// one row per cell in axis-listed order, independent of the worker count.
pub fn cmd_sweep(
    template: &RunConfig,
    axes: &[(String, Vec<String>)],
    out_dir: &Path,
    seed: u64,
    jobs: usize,
) -> anyhow::Result<()> {
    if template.mode == Mode::SpectralLinear {
        bail!(crate::config::ConfigError {
            line: None,
            message: "sweep requires a finite-difference mode template".into(),
        });
    }
    if axes.is_empty() {
        bail!(crate::config::ConfigError {
            line: None,
            message: "sweep needs at least one --axis key=v1,v2,...".into(),
        });
    }
    let total: usize = axes.iter().map(|(_, vals)| vals.len()).product();
    if total == 0 {
        bail!(crate::config::ConfigError {
            line: None,
            message: "sweep axes must be non-empty".into(),
        });
    }

    // Build each cell's config by mixed-radix expansion of the cell index.
    let mut cells = Vec::with_capacity(total);
    for idx in 0..total {
        let mut cfg = template.clone();
        let mut rem = idx;
        let mut assignment = Vec::new();
        for (key, vals) in axes.iter().rev() {
            let v = &vals[rem % vals.len()];
            rem /= vals.len();
            assignment.push((key.clone(), v.clone()));
        }
        assignment.reverse();
        for (key, value) in &assignment {
            cfg.apply_override(key, value)
                .with_context(|| format!("cell {idx}"))?;
        }
        cells.push((idx, assignment, cfg));
    }

    let width = total.to_string().len().max(3);
    let t0 = Instant::now();
    let run_cell = |(idx, assignment, cfg): &(usize, Vec<(String, String)>, RunConfig)| -> anyhow::Result<(usize, String)> {
        let cell_dir = out_dir.join(format!("cell_{idx:0width$}"));
        let cell_t0 = Instant::now();
        let traj = fd_trajectory(cfg).with_context(|| format!("sweep cell {idx}"))?;
        let solve_secs = cell_t0.elapsed().as_secs_f64();
        write_fd_outputs(cfg, &traj, &cell_dir, seed, solve_secs)
            .with_context(|| format!("sweep cell {idx}"))?;
        let last = traj
            .snapshots
            .last()
            .map(|(_, f)| f.clone())
            .unwrap_or_else(|| kgtx_core::BranchField::zeros(traj.grid));
        let sup = support_interval(&last, cfg.eps_rel);
        let (lo, hi) = sup.interval.unwrap_or((0.0, 0.0));
        let vals: Vec<String> = assignment.iter().map(|(_, v)| v.clone()).collect();
        let row = format!(
            "{},{},{},{},{},{},{},{}\n",
            idx,
            vals.join(","),
            fmt_f64(traj.initial_energy()),
            fmt_f64(traj.energies.last().map_or(0.0, |e| e.total)),
            fmt_f64(traj.relative_energy_drift()),
            fmt_f64(last.max_abs()),
            fmt_f64(lo),
            fmt_f64(hi)
        );
        Ok((*idx, row))
    };

    let mut rows: Vec<(usize, String)> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building sweep worker pool")?;
        pool.install(|| {
            use rayon::prelude::*;
            cells
                .par_iter()
                .map(run_cell)
                .collect::<anyhow::Result<Vec<_>>>()
        })?
    } else {
        cells
            .iter()
            .map(run_cell)
            .collect::<anyhow::Result<Vec<_>>>()?
    };
    rows.sort_by_key(|(idx, _)| *idx);

    let keys: Vec<String> = axes.iter().map(|(k, _)| k.clone()).collect();
    let mut agg = format!(
        "cell,{},initial_energy,final_energy,energy_drift_rel,max_abs_final,support_lo,support_hi\n",
        keys.join(",")
    );
    for (_, row) in &rows {
        agg.push_str(row);
    }
    let mut out = OutputDir::create(out_dir)?;
    out.write("aggregate.csv", &agg)?;
    let summary = vec![
        format!("cells = {total}"),
        format!("axes = {}", keys.join(",")),
        "status = completed".to_string(),
    ];
    out.finish(
        &template.canonical(),
        seed,
        &summary,
        &[("sweep".to_string(), t0.elapsed().as_secs_f64())],
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_dir_precedence_without_env() {
        // KGTX_OUT is exercised end to end in the binary tests; here only the
        // flag > config > default chain (env mutation is not thread-safe).
        let mut cfg = crate::config::RunConfig::default();
        assert_eq!(
            resolve_out_dir(None, &cfg),
            std::path::PathBuf::from("kgtx_out")
        );
        cfg.out = Some(std::path::PathBuf::from("from_config"));
        assert_eq!(
            resolve_out_dir(None, &cfg),
            std::path::PathBuf::from("from_config")
        );
        assert_eq!(
            resolve_out_dir(Some(std::path::PathBuf::from("from_flag")), &cfg),
            std::path::PathBuf::from("from_flag")
        );
    }

    #[test]
    fn exit_codes_follow_the_contract() {
        let config_err = anyhow::Error::from(crate::config::ConfigError {
            line: Some(3),
            message: "a2 must exceed a1".into(),
        });
        assert_eq!(exit_code_for(&config_err), 2);

        let cfl = anyhow::Error::from(kgtx_core::Error::CflViolation {
            ratio: 1.2,
            limit: 0.9,
        });
        assert_eq!(exit_code_for(&cfl), 2);

        let blowup = anyhow::Error::from(kgtx_core::Error::AmplitudeGuard {
            step: 17,
            max: 1e3,
            limit: 10.0,
        });
        assert_eq!(exit_code_for(&blowup), 3);

        let newton = anyhow::Error::from(kgtx_core::Error::NewtonDivergence {
            step: 5,
            branch: 1,
            index: 40,
        });
        assert_eq!(exit_code_for(&newton), 3);

        // Context wrapping must not hide the classification.
        let wrapped = blow_up_with_context();
        assert_eq!(exit_code_for(&wrapped), 3);

        let io = anyhow::anyhow!("disk on fire");
        assert_eq!(exit_code_for(&io), 3);
    }

    fn blow_up_with_context() -> anyhow::Error {
        use anyhow::Context;
        let r: anyhow::Result<()> = Err(kgtx_core::Error::NonFiniteField { step: 2 }.into());
        r.context("sweep cell 4").unwrap_err()
    }
}
