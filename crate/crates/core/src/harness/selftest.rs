//! Built-in verification suites: discrete operator invariants, envelope
//! checker soundness and time-step convergence.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Check;
use crate::diagnostics::{check_decay_envelope, check_growth_envelope};
use crate::dynamics::{Scheme, Stepper, StepperConfig};
use crate::error::Result;
use crate::field::{FhnParams, Field, State};
use crate::geometry::{build_profile, Grid, ProfileSpec, RadiusProfile};
use crate::operators::{field_inner, l2_norm_sq, laplacian, state_norm_sq};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorReport {
    pub profiles: usize,
    pub pairs: usize,
    /// Largest `|⟨f,Δg⟩ − ⟨Δf,g⟩| / (‖f‖‖g‖)`.
    pub symmetry_defect: f64,
    /// Largest `⟨f,Δf⟩ / ‖f‖²`; must not be positive.
    pub max_quadratic_form: f64,
    /// Largest relative error of the discrete azimuthal eigenvalue on constant profiles.
    pub eigenvalue_error: f64,
    pub tolerance: f64,
}

impl OperatorReport {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::at_most("self_adjointness", self.symmetry_defect, self.tolerance),
            Check::at_most("negativity", self.max_quadratic_form, 0.0),
            Check::at_most("azimuthal_eigenvalue", self.eigenvalue_error, self.tolerance),
        ]
    }
}

/// A random periodic profile: sinusoidal, Gaussian bump or tabulated, in turn.
pub fn random_profile(rng: &mut ChaCha8Rng, index: usize) -> Result<RadiusProfile<f64>> {
    let nx = rng.gen_range(24..=64);
    let ntheta = 2 * rng.gen_range(4..=12);
    let length = rng.gen_range(4.0..20.0);
    let grid = Grid::new(nx, ntheta, length)?;
    let r = rng.gen_range(0.5..1.5);
    let spec = match index % 3 {
        0 => ProfileSpec::sinusoidal_periods(r, rng.gen_range(0.0..0.4), rng.gen_range(1..=3)),
        1 => ProfileSpec::GaussianBump {
            base_radius: r,
            center: rng.gen_range(0.0..length),
            width: rng.gen_range(0.1..0.3) * length,
            height: rng.gen_range(-0.3..0.3) * r,
        },
        _ => {
            let (a, b) = (rng.gen_range(-0.2..0.2), rng.gen_range(-0.1..0.1));
            let samples = (0..nx)
                .map(|i| {
                    let x = 2.0 * PI * i as f64 / nx as f64;
                    r * (1.0 + a * x.cos() + b * (2.0 * x).sin())
                })
                .collect();
            ProfileSpec::Tabulated { samples }
        }
    };
    build_profile(&spec, &grid)
}

fn random_field(rng: &mut ChaCha8Rng, grid: &Grid) -> Result<Field<f64>> {
    let data = (0..grid.nx * grid.ntheta).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Field::from_surface_values(grid, data)
}

/// Self-adjointness and negativity on random profiles and fields, and the
/// azimuthal eigenvalue `−(2 − 2cos Δθ)/(Δθ² R²)` on constant profiles.
pub fn operator_suite(seed: u64, profiles: usize, pairs: usize, tolerance: f64) -> Result<OperatorReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symmetry_defect = 0.0_f64;
    let mut max_quadratic_form = f64::NEG_INFINITY;
    let mut eigenvalue_error = 0.0_f64;
    for p in 0..profiles {
        let profile = random_profile(&mut rng, p)?;
        let grid = profile.grid;
        for _ in 0..pairs {
            let f = random_field(&mut rng, &grid)?;
            let g = random_field(&mut rng, &grid)?;
            let lf = laplacian(&f, &profile)?;
            let lg = laplacian(&g, &profile)?;
            let scale = (l2_norm_sq(&f, &profile)? * l2_norm_sq(&g, &profile)?).sqrt();
            let defect = (field_inner(&f, &lg, &profile)? - field_inner(&lf, &g, &profile)?).abs() / scale;
            symmetry_defect = symmetry_defect.max(defect);
            let q = field_inner(&f, &lf, &profile)? / l2_norm_sq(&f, &profile)?;
            max_quadratic_form = max_quadratic_form.max(q);
        }

        let r = rng.gen_range(0.5..1.5);
        let constant: RadiusProfile<f64> = build_profile(&ProfileSpec::constant(r), &grid)?;
        let dth = grid.dtheta();
        let lambda = -(2.0 - 2.0 * dth.cos()) / (dth * dth * r * r);
        let f = Field::surface_from_fn(&grid, |_, th: f64| th.cos());
        let lf = laplacian(&f, &constant)?;
        let scale = lambda.abs() * f.max_abs();
        let err = lf
            .values()
            .iter()
            .zip(f.values())
            .map(|(&a, &b)| (a - lambda * b).abs())
            .fold(0.0, f64::max)
            / scale;
        eigenvalue_error = eigenvalue_error.max(err);
    }
    Ok(OperatorReport {
        profiles,
        pairs,
        symmetry_defect,
        max_quadratic_form,
        eigenvalue_error,
        tolerance,
    })
}

fn rk4(f: impl Fn(f64) -> f64, y0: f64, dt: f64, steps: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push((0.0, y));
    for k in 1..=steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * dt * k1);
        let k3 = f(y + 0.5 * dt * k2);
        let k4 = f(y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push((k as f64 * dt, y));
    }
    out
}

/// The checkers accept solutions of their equality ODEs and flag series
/// pushed 10% past the envelope at the first pushed sample.
pub fn envelope_soundness() -> Vec<Check> {
    let mut checks = Vec::new();

    let nu = 1.0;
    let x = rk4(|x| -x + 0.1 * x * x, 0.01, 0.01, 500);
    let report = check_decay_envelope(&x, nu, 0.0, 0.0);
    checks.push(Check::flag("decay_accepts_oracle", report.passed));
    let first = 137;
    let pushed: Vec<(f64, f64)> = x
        .iter()
        .enumerate()
        .map(|(k, &(t, v))| {
            (
                t,
                if k >= first {
                    1.1 * 2.0 * x[0].1 * (-nu * t).exp()
                } else {
                    v
                },
            )
        })
        .collect();
    let report = check_decay_envelope(&pushed, nu, 0.0, 0.0);
    checks.push(Check::flag(
        "decay_rejects_inflated",
        report.first_violation.map(|v| v.index) == Some(first),
    ));

    let (c, w, y0) = (1.0, 0.002, 0.01);
    let y = rk4(|y| c * (y + w), y0, 0.01, 400);
    let ws: Vec<(f64, f64)> = y.iter().map(|&(t, _)| (t, w)).collect();
    let report = check_growth_envelope(&y, &ws, c, None).expect("matching grids");
    checks.push(Check::flag(
        "growth_accepts_oracle",
        report.passed && report.checked == y.len(),
    ));
    let pushed: Vec<(f64, f64)> = y
        .iter()
        .enumerate()
        .map(|(k, &(t, v))| (t, if k >= first { 1.1 * (y0 + w) * (c * t).exp() } else { v }))
        .collect();
    let report = check_growth_envelope(&pushed, &ws, c, None).expect("matching grids");
    checks.push(Check::flag(
        "growth_rejects_inflated",
        report.first_violation.map(|v| v.index) == Some(first),
    ));
    checks
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub dts: Vec<f64>,
    /// `‖u_dt − u_{dt/2}‖` for consecutive pairs.
    pub differences: Vec<f64>,
    /// `log₂` of consecutive difference ratios.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn observed_order(&self) -> f64 {
        *self.orders.last().expect("at least three step sizes")
    }
}

/// Smooth surface data on an undulated cylinder, integrated to `t = 1` at
/// halving time steps; orders come from Richardson differences.
pub fn convergence_study(scheme: Scheme, dts: &[f64]) -> Result<ConvergenceReport> {
    let grid = Grid::new(32, 16, 2.0 * PI)?;
    let profile: RadiusProfile<f64> = build_profile(&ProfileSpec::sinusoidal_periods(1.0, 0.2, 1), &grid)?;
    let params = FhnParams::new(0.25, 0.1, 0.5)?;
    let u0 = State::new(
        Field::surface_from_fn(&grid, |x: f64, th: f64| 0.5 + 0.3 * x.cos() + 0.2 * th.sin() * x.sin()),
        Field::surface_from_fn(&grid, |x: f64, th: f64| 0.1 * (x + th).cos()),
        params,
    )?;
    let t_final = 1.0;
    let mut finals = Vec::with_capacity(dts.len());
    for &dt in dts {
        let steps = (t_final / dt).round() as usize;
        let cfg = StepperConfig {
            dt,
            scheme,
            tolerance: 1e-13,
            max_iterations: 5000,
        };
        let mut stepper = Stepper::new(&profile, cfg, &u0)?;
        let mut u = u0.clone();
        for _ in 0..steps {
            u = stepper.step(&u)?;
        }
        finals.push(u);
    }
    let differences: Vec<f64> = finals
        .windows(2)
        .map(|w| state_norm_sq(&w[0].sub(&w[1]), &profile).map(f64::sqrt))
        .collect::<Result<_>>()?;
    let orders = differences.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    Ok(ConvergenceReport {
        scheme,
        dts: dts.to_vec(),
        differences,
        orders,
    })
}
