//! The four experiment scenarios.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::config::{ExperimentConfig, Perturbation};
use super::output::{self, Row};
use super::selftest::operator_suite;
use super::{fan_out, Check};
use crate::diagnostics::{
    check_decay_envelope, check_growth_envelope, compare_average_to_effective, default_c_prime, envelope_constant,
    fill_combined, fit_rate, fitted_growth_constant, linear_fit,
};
use crate::dynamics::{default_dt, simulate, simulate_radial, ProbeSet, StepperConfig, Trajectory};
use crate::error::{Error, Result};
use crate::field::{FhnParams, Field, State};
use crate::geometry::{Grid, RadiusProfile};
use crate::pulse::{measure_speed, refractory_guard, step_initial_data, theoretical_fast_speed};

/// What a scenario hands back to [`super::run`].
pub(crate) struct Outcome {
    pub checks: Vec<Check>,
    pub results: Map<String, Value>,
    pub files: Vec<String>,
}

/// Step ignition with the optional refractory guard, on the axial grid.
pub fn base_state(cfg: &ExperimentConfig, grid: &Grid, params: FhnParams<f64>) -> Result<State<f64>> {
    let p = &cfg.pulse;
    let mut u = step_initial_data(grid, params, p.x_front_fraction * grid.length, p.amplitude)?;
    if let Some(g) = &p.guard {
        refractory_guard(&mut u, g.start_fraction * grid.length, grid.length, g.level, grid.dx());
    }
    Ok(u)
}

/// Azimuthal phase of the perturbation, drawn from the seed.
pub fn perturbation_phase(seed: u64, mode: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.gen_range(0.0..2.0 * PI / mode.max(1) as f64)
}

/// `lift(base) + amplitude·cos(n(θ − φ))` on the chosen component.
pub fn perturbed_state(
    base: &State<f64>,
    grid: &Grid,
    pert: &Perturbation,
    amplitude: f64,
    phase: f64,
) -> Result<State<f64>> {
    let mut u = base.lift(grid.ntheta);
    if amplitude == 0.0 {
        return Ok(u);
    }
    let n = pert.mode as f64;
    let bump = Field::surface_from_fn(grid, |_, th: f64| amplitude * (n * (th - phase)).cos());
    let target = if pert.component == 2 { &mut u.u2 } else { &mut u.u1 };
    *target = target.add(&bump);
    Ok(u)
}

fn stepper_config(cfg: &ExperimentConfig, base: &State<f64>) -> StepperConfig<f64> {
    let s = &cfg.stepper;
    StepperConfig {
        dt: s.dt.unwrap_or_else(|| default_dt(base)),
        scheme: s.scheme,
        tolerance: s.tolerance,
        max_iterations: s.max_iterations,
    }
}

fn probes(cfg: &ExperimentConfig, averages: bool) -> ProbeSet<f64> {
    ProbeSet {
        stride: cfg.probe_stride,
        lyapunov: true,
        averages,
        front_level: Some(cfg.pulse.level),
        snapshot_every: cfg.snapshot_every,
    }
}

fn write_snapshots(dir: &Path, prefix: &str, traj: &Trajectory<f64>, files: &mut Vec<String>) -> Result<()> {
    if traj.snapshots.is_empty() {
        return Ok(());
    }
    let sub = dir.join("snapshots");
    fs::create_dir_all(&sub)?;
    for (k, (_, u)) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshots/{prefix}_{k:05}.bin");
        output::write_snapshot(&dir.join(&name), u)?;
        files.push(name);
    }
    Ok(())
}

fn radial_rows(traj: &Trajectory<f64>) -> Vec<Row> {
    traj.lyapunov
        .iter()
        .zip(&traj.fronts)
        .map(|(s, &x)| Row {
            t: s.t,
            avg_h10: Some(s.avg_h10),
            pulse_x: x,
            ..Row::default()
        })
        .collect()
}

fn run_summary(traj: &Trajectory<f64>) -> Value {
    json!({
        "dt": traj.dt,
        "steps": traj.steps,
        "samples": traj.times.len(),
        "linear_iterations": traj.linear_iterations,
    })
}

pub(crate) fn operator_selftest(cfg: &ExperimentConfig, _dir: &Path) -> Result<Outcome> {
    let report = operator_suite(
        cfg.seed,
        cfg.selftest.profiles,
        cfg.selftest.pairs,
        cfg.thresholds.operator_tolerance,
    )?;
    let mut results = Map::new();
    results.insert(
        "operators".into(),
        serde_json::to_value(&report).expect("report serializes"),
    );
    Ok(Outcome {
        checks: report.checks(),
        results,
        files: Vec::new(),
    })
}

pub(crate) fn pulse_speed(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome> {
    let params = cfg.require_params()?;
    let grid = cfg.require_grid()?;
    let t_final = cfg.require_t_final()?;
    let profile = cfg.build_profile()?;
    let level = cfg.pulse.level;
    let alphas = cfg.pulse_alphas();

    let runs = fan_out(&alphas, |&alpha| -> Result<_> {
        let p = FhnParams::new(alpha, params.epsilon, params.gamma)?;
        let w0 = base_state(cfg, &grid, p)?;
        let traj = simulate_radial(&w0, &profile, &stepper_config(cfg, &w0), t_final, &probes(cfg, false))?;
        let m = measure_speed(&traj, level, grid.length)?;
        Ok((traj, m))
    });

    let mut checks = Vec::new();
    let mut files = Vec::new();
    let mut table = Vec::new();
    for (k, (alpha, run)) in alphas.iter().zip(runs).enumerate() {
        let (traj, m) = run?;
        let theory = theoretical_fast_speed(*alpha)?;
        let rel = (m.speed - theory).abs() / theory;
        checks.push(Check::at_most(
            &format!("pulse_speed[alpha={alpha}]"),
            rel,
            cfg.thresholds.speed_rel,
        ));

        let series = format!("pulse_{k}.csv");
        output::write_timeseries(&dir.join(&series), &radial_rows(&traj))?;
        let crossings: Vec<(f64, f64)> = traj
            .times
            .iter()
            .zip(&traj.fronts)
            .filter_map(|(&t, x)| x.map(|x| (t, x)))
            .collect();
        let cross = format!("crossings_{k}.csv");
        output::write_crossings(&dir.join(&cross), &crossings)?;
        write_snapshots(dir, &format!("pulse_{k}"), &traj, &mut files)?;
        table.push(json!({
            "alpha": alpha,
            "speed": m.speed,
            "theory": theory,
            "relative_error": rel,
            "intercept": m.intercept,
            "fit_residual": m.residual,
            "fit_window": [m.window.0, m.window.1],
            "fit_points": m.crossings.len(),
            "level": m.level,
            "run": run_summary(&traj),
            "timeseries": series,
            "crossings": cross,
        }));
        files.push(format!("pulse_{k}.csv"));
        files.push(format!("crossings_{k}.csv"));
    }
    let mut results = Map::new();
    results.insert("pulses".into(), Value::Array(table));
    Ok(Outcome { checks, results, files })
}

/// Decay rate, envelope constant at the reference rate and `X₀` envelope of one surface run.
fn decay_checks(
    cfg: &ExperimentConfig,
    traj: &Trajectory<f64>,
    profile: &RadiusProfile<f64>,
    params: &FhnParams<f64>,
    results: &mut Map<String, Value>,
) -> Result<Vec<Check>> {
    let th = &cfg.thresholds;
    let perp: Vec<(f64, f64)> = traj.lyapunov.iter().map(|s| (s.t, s.perp_h10)).collect();
    let reference = params.gamma * params.epsilon / 2.0;
    let fit = fit_rate(&perp, th.floor)?;
    let above: Vec<(f64, f64)> = perp.iter().copied().filter(|&(_, v)| v > th.floor).collect();
    let c_fit = envelope_constant(&above, reference);

    let sigma = 2.0 * (profile.thinness_ratio() / 4.0).min(params.gamma * params.epsilon);
    let x0: Vec<(f64, f64)> = traj.lyapunov.iter().map(|s| (s.t, s.x0)).collect();
    let env = check_decay_envelope(&x0, sigma, th.envelope_margin, th.floor);

    results.insert(
        "decay".into(),
        json!({
            "rate": fit.rate,
            "rate_reference": reference,
            "rate_threshold": th.rate_factor * reference,
            "fit_intercept": fit.intercept,
            "fit_window": [fit.window.0, fit.window.1],
            "fit_residual": fit.residual,
            "fit_points": fit.points,
            "envelope_constant": c_fit,
            "floor": th.floor,
        }),
    );
    results.insert(
        "x0_envelope".into(),
        json!({
            "sigma": sigma,
            "thinness_ratio": profile.thinness_ratio(),
            "margin": th.envelope_margin,
            "checked": env.checked,
            "first_violation": env.first_violation.map(|v| json!({"index": v.index, "t": v.t, "value": v.value, "bound": v.bound})),
        }),
    );
    Ok(vec![
        Check::at_least("decay_rate", fit.rate, th.rate_factor * reference),
        Check::at_most("envelope_constant", c_fit, th.envelope_c_max),
        Check::flag("x0_envelope", env.passed),
    ])
}

pub(crate) fn symmetrization(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome> {
    let params = cfg.require_params()?;
    let grid = cfg.require_grid()?;
    let t_final = cfg.require_t_final()?;
    let pert = cfg.require_perturbation()?;
    let profile = cfg.build_profile()?;

    let base = base_state(cfg, &grid, params)?;
    let phase = perturbation_phase(cfg.seed, pert.mode);
    let u0 = perturbed_state(&base, &grid, pert, pert.amplitude, phase)?;
    let mut traj = simulate(&u0, &profile, &stepper_config(cfg, &base), t_final, &probes(cfg, false))?;
    let c_prime = default_c_prime(&params);
    let k = fill_combined(&mut traj.lyapunov, c_prime, None);

    let mut rows = output::surface_rows(&traj.lyapunov);
    for (r, &x) in rows.iter_mut().zip(&traj.fronts) {
        r.pulse_x = x;
    }
    let mut files = vec!["timeseries.csv".to_string()];
    output::write_timeseries(&dir.join("timeseries.csv"), &rows)?;
    write_snapshots(dir, "surface", &traj, &mut files)?;

    let max_perp = traj.lyapunov.iter().map(|s| s.perp_h10).fold(0.0, f64::max);
    let mut results = Map::new();
    results.insert("run".into(), run_summary(&traj));
    results.insert("phase".into(), json!(phase));
    results.insert("c_prime".into(), json!(c_prime));
    results.insert("k".into(), json!(k));
    results.insert("max_perp_h10".into(), json!(max_perp));

    let checks = if pert.amplitude == 0.0 {
        vec![Check::at_most("radial_invariance", max_perp, cfg.thresholds.perp_max)]
    } else {
        decay_checks(cfg, &traj, &profile, &params, &mut results)?
    };
    Ok(Outcome { checks, results, files })
}

/// Sample closest to `t`, which must lie within half a step.
fn sample_at(times: &[f64], t: f64, dt: f64) -> Result<usize> {
    let (k, d) = times
        .iter()
        .enumerate()
        .map(|(k, &s)| (k, (s - t).abs()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if d > 0.5 * dt {
        return Err(Error::TimeGridMismatch(format!(
            "no sample near t = {t}; choose a probe stride that hits it"
        )));
    }
    Ok(k)
}

pub(crate) fn effective_comparison(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome> {
    let params = cfg.require_params()?;
    let grid = cfg.require_grid()?;
    let t_final = cfg.require_t_final()?;
    let pert = cfg.require_perturbation()?;
    let profile = cfg.build_profile()?;
    let amplitudes = cfg.comparison_amplitudes();
    let t_compare = cfg.comparison.t_compare;

    let base = base_state(cfg, &grid, params)?;
    // one step size for every run so the samples line up
    let step = stepper_config(cfg, &base);
    let phase = perturbation_phase(cfg.seed, pert.mode);
    let probes = probes(cfg, true);

    let effective = simulate_radial(&base, &profile, &step, t_final, &probes)?;
    let surfaces = fan_out(&amplitudes, |&delta| -> Result<_> {
        let u0 = perturbed_state(&base, &grid, pert, delta, phase)?;
        simulate(&u0, &profile, &step, t_final, &probes)
    });

    let mut files = vec!["effective.csv".to_string()];
    output::write_timeseries(&dir.join("effective.csv"), &radial_rows(&effective))?;
    let c_prime = default_c_prime(&params);
    let mut table = Vec::new();
    let mut points = Vec::new();
    for (k, (&delta, run)) in amplitudes.iter().zip(surfaces).enumerate() {
        let mut traj = run?;
        let gaps = compare_average_to_effective(&traj, &effective, &profile)?;
        let kk = fill_combined(&mut traj.lyapunov, c_prime, None);
        for (s, g) in traj.lyapunov.iter_mut().zip(&gaps) {
            s.gap_h10 = Some(g.gap_h10);
            s.y1 = Some(g.y1);
        }
        let mut rows = output::surface_rows(&traj.lyapunov);
        for (r, &x) in rows.iter_mut().zip(&traj.fronts) {
            r.pulse_x = x;
        }
        let name = format!("comparison_{k}.csv");
        output::write_timeseries(&dir.join(&name), &rows)?;
        files.push(name.clone());
        write_snapshots(dir, &format!("comparison_{k}"), &traj, &mut files)?;

        let idx = sample_at(&traj.times, t_compare, traj.dt)?;
        let gap = gaps[idx].gap_h10;
        points.push((delta.ln(), gap.ln()));

        let y: Vec<(f64, f64)> = gaps.iter().map(|g| (g.t, g.y1)).collect();
        let w: Vec<(f64, f64)> = traj.lyapunov.iter().map(|s| (s.t, s.w)).collect();
        let growth = fitted_growth_constant(&y, &w);
        let envelope = check_growth_envelope(&y, &w, growth * (1.0 + 1e-12), None)?;
        table.push(json!({
            "amplitude": delta,
            "gap_at_t_compare": gap,
            "t_sample": traj.times[idx],
            "growth_constant": growth,
            "growth_envelope_horizon": envelope.horizon,
            "k": kk,
            "run": run_summary(&traj),
            "timeseries": name,
        }));
    }
    let (slope, intercept, residual) = linear_fit(&points).ok_or(Error::InsufficientData {
        have: points.len(),
        need: 2,
    })?;
    let th = &cfg.thresholds;
    let mut results = Map::new();
    results.insert("phase".into(), json!(phase));
    results.insert("t_compare".into(), json!(t_compare));
    results.insert("effective_run".into(), run_summary(&effective));
    results.insert("amplitudes".into(), Value::Array(table));
    results.insert(
        "scaling".into(),
        json!({"slope": slope, "log_intercept": intercept, "fit_residual": residual}),
    );
    Ok(Outcome {
        checks: vec![Check::within(
            "gap_scaling_slope",
            slope,
            th.slope_target,
            th.slope_tolerance,
        )],
        results,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_has_zero_mean_and_requested_amplitude() {
        let grid = Grid::new(16, 16, 4.0).unwrap();
        let cfg = ExperimentConfig::new(super::super::config::Scenario::Symmetrization);
        let base = base_state(&cfg, &grid, FhnParams::new(0.25, 0.01, 0.01).unwrap()).unwrap();
        let pert = Perturbation {
            mode: 2,
            amplitude: 0.05,
            component: 1,
        };
        let u = perturbed_state(&base, &grid, &pert, 0.05, perturbation_phase(3, 2)).unwrap();
        let p = u.perp();
        assert!(p.u2.max_abs() == 0.0);
        assert!((p.u1.max_abs() - 0.05).abs() < 0.01);
        let diff = u.project_radial().sub(&base);
        assert!(diff.u1.max_abs() < 1e-15);
    }

    #[test]
    fn phase_is_deterministic() {
        assert_eq!(perturbation_phase(11, 1), perturbation_phase(11, 1));
        assert_ne!(perturbation_phase(11, 1), perturbation_phase(12, 1));
        assert!(perturbation_phase(5, 4) < PI / 2.0);
    }
}
