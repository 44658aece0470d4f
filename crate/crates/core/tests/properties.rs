//! Randomized invariants of the discretization.

use proptest::prelude::*;

use undulant::diagnostics::lyapunov_x0;
use undulant::operators::{field_inner, l2_norm_sq, laplacian};
use undulant::snapshot::{read_state, write_state};
use undulant::{build_profile, FhnParams, Field, Grid, ProfileSpec, RadiusProfile, State};

fn setup(nx: usize, nt: usize, amp: f64, periods: u32) -> (Grid, RadiusProfile<f64>) {
    let grid = Grid::new(nx, nt, 10.0).unwrap();
    let profile = build_profile(&ProfileSpec::sinusoidal_periods(0.7, amp, periods), &grid).unwrap();
    (grid, profile)
}

fn field(grid: &Grid, values: &[f64]) -> Field<f64> {
    let n = grid.nx * grid.ntheta;
    Field::from_surface_values(grid, values.iter().cycle().take(n).copied().collect()).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0_f64, 7..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_is_self_adjoint_and_negative(
        nx in 8usize..40, nt in 8usize..20, amp in 0.0..0.5_f64, periods in 1u32..4,
        a in values(), b in values(),
    ) {
        let (grid, profile) = setup(nx, nt, amp, periods);
        let (f, g) = (field(&grid, &a), field(&grid, &b));
        let (lf, lg) = (laplacian(&f, &profile).unwrap(), laplacian(&g, &profile).unwrap());
        let scale = (l2_norm_sq(&f, &profile).unwrap() * l2_norm_sq(&g, &profile).unwrap()).sqrt().max(1e-300);
        let defect = (field_inner(&f, &lg, &profile).unwrap() - field_inner(&lf, &g, &profile).unwrap()).abs();
        prop_assert!(defect <= 1e-12 * scale);
        prop_assert!(field_inner(&f, &lf, &profile).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn average_and_perp_split_the_field(nx in 8usize..30, nt in 8usize..20, a in values()) {
        let (grid, _) = setup(nx, nt, 0.2, 1);
        let f = field(&grid, &a);
        let avg = f.project_radial();
        let rebuilt = avg.lift(nt).add(&f.perp());
        for (x, y) in rebuilt.values().iter().zip(f.values()) {
            prop_assert!((x - y).abs() <= 1e-14);
        }
        prop_assert!(f.perp().project_radial().max_abs() <= 1e-15);
        prop_assert_eq!(avg.lift(nt).project_radial(), avg.clone());
    }

    #[test]
    fn laplacian_preserves_radial_fields(nx in 8usize..40, amp in 0.0..0.5_f64, a in values()) {
        let (grid, profile) = setup(nx, 12, amp, 2);
        let radial = Field::from_radial_values(&grid, a.iter().cycle().take(nx).copied().collect()).unwrap();
        let l = laplacian(&radial.lift(12), &profile).unwrap();
        prop_assert!(l.perp().max_abs() <= 1e-12 * (1.0 + l.max_abs()));
    }

    #[test]
    fn x0_is_quadratic(scale in -3.0..3.0_f64, a in values(), b in values()) {
        let (grid, profile) = setup(16, 8, 0.3, 1);
        let params = FhnParams::new(0.25, 0.01, 0.5).unwrap();
        let u = State::new(field(&grid, &a), field(&grid, &b), params).unwrap();
        let x = lyapunov_x0(&u, &profile).unwrap();
        let xs = lyapunov_x0(&u.scaled(scale), &profile).unwrap();
        prop_assert!((xs - scale * scale * x).abs() <= 1e-12 * (1.0 + xs.abs()));
    }

    #[test]
    fn snapshot_round_trip_is_bitwise(nx in 8usize..20, nt in 8usize..12, a in values(), b in values()) {
        let grid = Grid::new(nx, nt, 5.0).unwrap();
        let params = FhnParams::new(0.1, 0.001, 0.001).unwrap();
        let u = State::new(field(&grid, &a), field(&grid, &b), params).unwrap();
        let mut bytes = Vec::new();
        write_state(&mut bytes, &u).unwrap();
        prop_assert_eq!(bytes.len(), 32 + 16 * nx * nt);
        let back = read_state(bytes.as_slice(), params).unwrap();
        prop_assert_eq!(back, u);
    }
}

#[test]
fn single_precision_matches_double() {
    let grid = Grid::new(32, 8, 10.0).unwrap();
    let spec = ProfileSpec::sinusoidal_periods(0.7, 0.2, 1);
    let p64: RadiusProfile<f64> = build_profile(&spec, &grid).unwrap();
    let p32: RadiusProfile<f32> = build_profile(&spec, &grid).unwrap();
    let f64_field = Field::surface_from_fn(&grid, |x: f64, th: f64| (0.6 * x).sin() + th.cos());
    let f32_field = Field::surface_from_fn(&grid, |x: f32, th: f32| (0.6 * x).sin() + th.cos());
    let l64 = laplacian(&f64_field, &p64).unwrap();
    let l32 = laplacian(&f32_field, &p32).unwrap();
    let scale = l64.max_abs();
    for (a, b) in l64.values().iter().zip(l32.values()) {
        assert!((a - f64::from(*b)).abs() <= 1e-4 * scale);
    }
}
