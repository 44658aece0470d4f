//! Properties of the front-speed measurement on a short periodic line.

use undulant::pulse::{measure_speed, refractory_guard, step_initial_data, theoretical_fast_speed};
use undulant::{
    build_profile, simulate_radial, FhnParams, Grid, ProbeSet, Profile, ProfileSpec, Scheme, StepperConfig,
};

const LENGTH: f64 = 100.0;
const T_FINAL: f64 = 150.0;

/// Front speed from a step at `x = 5` with the seam guarded, after rolling the
/// initial data by `shift` cells.
fn speed(alpha: f64, nx: usize, dt: f64, shift: usize) -> f64 {
    let grid = Grid::new(nx, 8, LENGTH).unwrap();
    let profile: Profile = build_profile(&ProfileSpec::constant(1.0), &grid).unwrap();
    let params = FhnParams::new(alpha, 1e-4, 1e-4).unwrap();
    let mut w0 = step_initial_data(&grid, params, 5.0, 1.0).unwrap();
    refractory_guard(&mut w0, 0.95 * LENGTH, LENGTH, 0.3, grid.dx());
    for f in [&mut w0.u1, &mut w0.u2] {
        f.values_mut().rotate_right(shift);
    }
    let cfg = StepperConfig {
        dt,
        scheme: Scheme::ImexCn,
        tolerance: 1e-10,
        max_iterations: 200,
    };
    let probes = ProbeSet {
        stride: (1.0 / dt).round() as usize,
        lyapunov: false,
        front_level: Some(0.5),
        ..ProbeSet::default()
    };
    let traj = simulate_radial(&w0, &profile, &cfg, T_FINAL, &probes).unwrap();
    measure_speed(&traj, 0.5, LENGTH).unwrap().speed
}

#[test]
fn speed_decreases_with_alpha_and_matches_the_formula() {
    let speeds: Vec<f64> = [0.1, 0.2, 0.3].iter().map(|&a| speed(a, 1024, 0.05, 0)).collect();
    assert!(speeds[0] > speeds[1] && speeds[1] > speeds[2], "{speeds:?}");
    for (&a, &c) in [0.1, 0.2, 0.3].iter().zip(&speeds) {
        let theory = theoretical_fast_speed(a).unwrap();
        assert!((c - theory).abs() / theory <= 0.05, "alpha {a}: {c} vs {theory}");
    }
}

#[test]
fn speed_is_translation_invariant() {
    let a = speed(0.2, 1024, 0.05, 0);
    let b = speed(0.2, 1024, 0.05, 64);
    assert!((a - b).abs() / a <= 1e-3, "{a} vs {b}");
}

#[test]
fn refinement_changes_speed_within_tolerance() {
    let coarse = speed(0.2, 1024, 0.05, 0);
    let fine = speed(0.2, 2048, 0.025, 0);
    assert!((coarse - fine).abs() / fine <= 0.05, "{coarse} vs {fine}");
}
