//! Pulse ignition data and traveling-front speed measurement.

use crate::diagnostics::linear_fit;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::field::{FhnParams, Field, State};
use crate::geometry::Grid;
use crate::scalar::Scalar;

/// Fraction of the run discarded as ignition transient.
pub const WINDOW_START: f64 = 0.3;
pub const WINDOW_END: f64 = 0.9;
/// Fronts closer than this fraction of `L` to the seam invalidate a fit.
pub const SEAM_MARGIN: f64 = 0.1;

/// `u₁ = amplitude·½(1 − tanh((x − x_front)/(4Δx)))`, `u₂ = 0`, on the axial grid.
pub fn step_initial_data<T: Scalar>(grid: &Grid, params: FhnParams<T>, x_front: T, amplitude: T) -> Result<State<T>> {
    let length = T::lit(grid.length);
    if !(x_front > T::zero() && x_front < length) {
        return Err(Error::DomainError(format!("x_front = {x_front} must lie in (0, L)")));
    }
    let width = T::lit(4.0 * grid.dx());
    let half = T::lit(0.5);
    let u1 = Field::radial_from_fn(grid, |x: T| {
        amplitude * half * (T::one() - ((x - x_front) / width).tanh())
    });
    Ok(State {
        u1,
        u2: Field::zeros_radial(grid),
        params,
    })
}

/// Sets `u₂ = level` on `[start, end)`. A recovery level above `max f` keeps
/// the medium unexcitable there, so ignition next to the periodic seam sends
/// a single front to the right.
pub fn refractory_guard<T: Scalar>(state: &mut State<T>, start: T, end: T, level: T, dx: T) {
    let nt = state.u2.ntheta();
    for (i, row) in state.u2.values_mut().chunks_mut(nt).enumerate() {
        let x = T::from_usize_lossy(i) * dx;
        if x >= start && x < end {
            row.iter_mut().for_each(|v| *v = level);
        }
    }
}

/// Rightmost descending crossing `u(x_i) ≥ level > u(x_{i+1})` of a radial
/// field, located by linear interpolation. The periodic pair `(N−1, 0)` is
/// included, giving positions in `[0, L)`.
pub fn front_position<T: Scalar>(u1: &Field<T>, level: T, dx: T) -> Option<T> {
    let v = u1.values();
    let n = v.len();
    let mut best: Option<T> = None;
    for i in 0..n {
        let ip = if i + 1 == n { 0 } else { i + 1 };
        let (a, b) = (v[i], v[ip]);
        if a >= level && b < level {
            let frac = (a - level) / (a - b);
            let x = (T::from_usize_lossy(i) + frac) * dx;
            best = Some(best.map_or(x, |m: T| m.max(x)));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseMeasurement<T> {
    pub level: T,
    /// `(t, x_front)` pairs inside the fit window.
    pub crossings: Vec<(T, T)>,
    pub speed: T,
    pub intercept: T,
    /// RMS residual of the linear fit, in length units.
    pub residual: T,
    pub window: (T, T),
}

/// Least-squares speed of a front series over `[0.3 T, 0.9 T]`.
pub fn fit_front_speed<T: Scalar>(
    series: &[(T, Option<T>)],
    t_final: T,
    length: T,
    level: T,
) -> Result<PulseMeasurement<T>> {
    let window = (T::lit(WINDOW_START) * t_final, T::lit(WINDOW_END) * t_final);
    let margin = T::lit(SEAM_MARGIN) * length;
    let mut crossings = Vec::new();
    for &(t, x) in series {
        if t < window.0 || t > window.1 {
            continue;
        }
        let Some(x) = x else { continue };
        if x < margin || x > length - margin {
            return Err(Error::WrapDetected {
                time: t.to_f64_lossy(),
                position: x.to_f64_lossy(),
            });
        }
        crossings.push((t, x));
    }
    if crossings.len() < 2 {
        return Err(Error::NoCrossing);
    }
    let (speed, intercept, residual) = linear_fit(&crossings).ok_or(Error::NoCrossing)?;
    Ok(PulseMeasurement {
        level,
        crossings,
        speed,
        intercept,
        residual,
        window,
    })
}

/// Speed of the tracked front of a run recorded with a front probe at `level`.
pub fn measure_speed<T: Scalar>(traj: &Trajectory<T>, level: T, length: T) -> Result<PulseMeasurement<T>> {
    match traj.front_level {
        Some(l) if l == level => {}
        _ => {
            return Err(Error::DomainError(format!(
                "trajectory did not track fronts at level {level}"
            )))
        }
    }
    let series: Vec<(T, Option<T>)> = traj.times.iter().copied().zip(traj.fronts.iter().copied()).collect();
    fit_front_speed(&series, traj.t_final(), length, level)
}

/// Leading-order fast pulse speed `(√2/2)(1 − 2α)`.
pub fn theoretical_fast_speed<T: Scalar>(alpha: T) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::lit(0.5)) {
        return Err(Error::DomainError(format!("alpha = {alpha} must lie in (0, 1/2)")));
    }
    Ok(T::FRAC_1_SQRT_2() * (T::one() - T::lit(2.0) * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(200, 8, 40.0).unwrap()
    }

    fn prm() -> FhnParams<f64> {
        FhnParams::new(0.25, 1e-3, 1e-3).unwrap()
    }

    #[test]
    fn step_data_shape() {
        let g = grid();
        let s = step_initial_data(&g, prm(), 10.0, 1.0).unwrap();
        assert!((s.u1.values()[0] - 1.0).abs() < 1e-6);
        assert!(s.u1.values()[100].abs() < 1e-6);
        assert!(s.u2.values().iter().all(|&v| v == 0.0));
        let z = step_initial_data(&g, prm(), 10.0, 0.0).unwrap();
        assert!(z.u1.values().iter().all(|&v| v == 0.0));
        assert!(step_initial_data(&g, prm(), 50.0, 1.0).is_err());
    }

    #[test]
    fn front_locator_interpolates() {
        let g = grid();
        let s = step_initial_data(&g, prm(), 10.1, 1.0).unwrap();
        let x = front_position(&s.u1, 0.5, g.dx()).unwrap();
        assert!((x - 10.1).abs() < 0.01);
        let flat = Field::constant_radial(&g, 0.0);
        assert!(front_position(&flat, 0.5, g.dx()).is_none());
    }

    #[test]
    fn exact_line_speed() {
        let s: Vec<(f64, Option<f64>)> = (0..=100).map(|k| (k as f64, Some(0.35 * k as f64 + 20.0))).collect();
        let m = fit_front_speed(&s, 100.0, 200.0, 0.5).unwrap();
        assert!((m.speed - 0.35).abs() < 1e-12);
        assert!(m.residual < 1e-12);
        assert_eq!(m.window, (30.0, 90.0));
    }

    #[test]
    fn wiggly_line_speed() {
        let s: Vec<(f64, Option<f64>)> = (0..=400)
            .map(|k| {
                let t = k as f64 * 0.5;
                (t, Some(0.35 * t + 0.01 * t.sin() + 30.0))
            })
            .collect();
        let m = fit_front_speed(&s, 200.0, 200.0, 0.5).unwrap();
        assert!((m.speed - 0.35).abs() < 0.01);
    }

    #[test]
    fn fit_errors() {
        let none: Vec<(f64, Option<f64>)> = (0..=10).map(|k| (k as f64, None)).collect();
        assert_eq!(fit_front_speed(&none, 10.0, 100.0, 0.5), Err(Error::NoCrossing));
        let near_seam: Vec<(f64, Option<f64>)> = (0..=10).map(|k| (k as f64, Some(95.0))).collect();
        assert!(matches!(
            fit_front_speed(&near_seam, 10.0, 100.0, 0.5),
            Err(Error::WrapDetected { .. })
        ));
    }

    #[test]
    fn fast_speed_formula() {
        assert!((theoretical_fast_speed(0.25_f64).unwrap() - 0.353_553_4).abs() < 1e-7);
        assert!((theoretical_fast_speed(0.1_f64).unwrap() - 0.565_685_4).abs() < 1e-7);
        let near = theoretical_fast_speed(0.499_999_f64).unwrap();
        assert!(near > 0.0 && near < 1e-5);
        assert!(theoretical_fast_speed(0.5_f64).is_err());
        assert!(theoretical_fast_speed(0.0_f64).is_err());
    }
}
