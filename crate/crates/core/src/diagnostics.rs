//! Lyapunov functionals along trajectories, rate fits, envelope checks and the
//! average-versus-effective comparison.
//!
//! With `u^⊥ = u − ū`:
//!
//! * `X₀ = ½‖u^⊥‖²`
//! * `X₁ = ½(‖∇u₁^⊥‖² + α‖u₁^⊥‖² + γ‖u₂^⊥‖²) = −½⟨u^⊥, A u^⊥⟩`
//! * `Y₁ = ½(‖∇v₁‖² + α‖v₁‖² + γ‖v₂‖²)` for `v = ū − w` (radial measure)
//! * `W = ‖u₁^⊥‖⁴_{H¹} + ‖u₁^⊥‖⁸_{H¹}`
//! * `X = X₁ + C′K⁴X₀`

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::field::{FhnParams, State};
use crate::geometry::RadiusProfile;
use crate::operators::{apply_a, gradient_form, h10_norm_sq, inner_product, l2_norm_sq};
use crate::scalar::Scalar;

/// Default sample floor below which decay fits ignore values.
pub const DEFAULT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample<T> {
    pub t: T,
    pub x0: T,
    pub x1: T,
    pub xc: Option<T>,
    pub y1: Option<T>,
    pub w: T,
    /// `‖u^⊥‖_{1,0}`
    pub perp_h10: T,
    /// `‖ū‖_{1,0}` in the surface measure.
    pub avg_h10: T,
    pub gap_h10: Option<T>,
}

pub fn lyapunov_x0<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    let p = u.perp();
    Ok(T::lit(0.5) * inner_product(&p, &p, profile)?)
}

/// `X₁` from the gradient form.
pub fn lyapunov_x1<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    let p = u.perp();
    dissipation_form(&p, profile)
}

/// `X₁` as `−½⟨u^⊥, A u^⊥⟩`.
pub fn lyapunov_x1_via_a<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    let p = u.perp();
    let ap = apply_a(&p, profile)?;
    Ok(-T::lit(0.5) * inner_product(&p, &ap, profile)?)
}

/// `½(‖∇v₁‖² + α‖v₁‖² + γ‖v₂‖²)` in the measure of `v`'s kind.
fn dissipation_form<T: Scalar>(v: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    let FhnParams { alpha, gamma, .. } = v.params;
    let grad = gradient_form(&v.u1, profile)?;
    let m1 = l2_norm_sq(&v.u1, profile)?;
    let m2 = l2_norm_sq(&v.u2, profile)?;
    Ok(T::lit(0.5) * (grad + alpha * m1 + gamma * m2))
}

/// `Y₁ = −½⟨A_d v, v⟩` for `v = ū − w`, both radial.
pub fn lyapunov_y1<T: Scalar>(ubar: &State<T>, w: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    if !ubar.is_radial() || !w.is_radial() {
        return Err(Error::ShapeMismatch("Y1 compares two radial states".into()));
    }
    ubar.ensure_compatible(w)?;
    dissipation_form(&ubar.sub(w), profile)
}

/// `‖u₁^⊥‖²_{H¹} = ‖∇u₁^⊥‖² + ‖u₁^⊥‖²`.
pub fn perp_h1_sq<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    let p = u.u1.perp();
    Ok(gradient_form(&p, profile)? + l2_norm_sq(&p, profile)?)
}

pub fn remainder_w<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    Ok(remainder_from_h1_sq(perp_h1_sq(u, profile)?))
}

/// `n⁴ + n⁸` given `n²`.
pub fn remainder_from_h1_sq<T: Scalar>(n2: T) -> T {
    let n4 = n2 * n2;
    n4 + n4 * n4
}

/// `C₂ = (11 − 5εγ²)/8`.
pub fn c2_constant<T: Scalar>(params: &FhnParams<T>) -> T {
    (T::lit(11.0) - T::lit(5.0) * params.epsilon * params.gamma * params.gamma) / T::lit(8.0)
}

/// Default `C′ = 2C₂/γ`.
pub fn default_c_prime<T: Scalar>(params: &FhnParams<T>) -> T {
    T::lit(2.0) * c2_constant(params) / params.gamma
}

/// `X = X₁ + C′K⁴X₀`.
pub fn combined_x<T: Scalar>(x0: T, x1: T, c_prime: T, k: T) -> T {
    let k2 = k * k;
    x1 + c_prime * k2 * k2 * x0
}

/// `‖v‖_{1,0}` of a radial state, scaled by `2π` to the surface measure.
pub fn radial_h10_lifted<T: Scalar>(v: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    if !v.is_radial() {
        return Err(Error::ShapeMismatch("expected a radial state".into()));
    }
    Ok((T::TAU() * h10_norm_sq(v, profile)?).max(T::zero()).sqrt())
}

/// All per-state quantities; `xc`, `y1`, `gap_h10` are filled in later.
pub fn sample<T: Scalar>(t: T, u: &State<T>, profile: &RadiusProfile<T>) -> Result<LyapunovSample<T>> {
    let (x0, x1, w, perp_h10) = if u.is_radial() {
        (T::zero(), T::zero(), T::zero(), T::zero())
    } else {
        let p = u.perp();
        let x0 = T::lit(0.5) * inner_product(&p, &p, profile)?;
        let x1 = dissipation_form(&p, profile)?;
        let w = remainder_w(u, profile)?;
        let perp_h10 = h10_norm_sq(&p, profile)?.max(T::zero()).sqrt();
        (x0, x1, w, perp_h10)
    };
    let avg_h10 = radial_h10_lifted(&u.project_radial(), profile)?;
    Ok(LyapunovSample {
        t,
        x0,
        x1,
        xc: None,
        y1: None,
        w,
        perp_h10,
        avg_h10,
        gap_h10: None,
    })
}

/// Fills `xc` with `C′K⁴X₀ + X₁`; `K` defaults to the observed `sup ‖ū‖_{1,0}`.
/// Returns the `K` used.
pub fn fill_combined<T: Scalar>(samples: &mut [LyapunovSample<T>], c_prime: T, k: Option<T>) -> T {
    let k = k.unwrap_or_else(|| samples.iter().fold(T::zero(), |m, s| m.max(s.avg_h10)));
    for s in samples {
        s.xc = Some(combined_x(s.x0, s.x1, c_prime, k));
    }
    k
}

/// Ordinary least squares `y ≈ slope·x + intercept`; returns the RMS residual too.
pub fn linear_fit<T: Scalar>(points: &[(T, T)]) -> Option<(T, T, T)> {
    if points.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(points.len());
    let mx = points.iter().map(|p| p.0).sum::<T>() / n;
    let my = points.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    if sxx == T::zero() {
        return None;
    }
    let sxy = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum::<T>();
    Some((slope, intercept, (ss / n).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit<T> {
    /// Negated slope of `log value` against time.
    pub rate: T,
    /// Intercept of `log value`.
    pub intercept: T,
    pub window: (T, T),
    /// RMS residual of the log fit.
    pub residual: T,
    pub floor: T,
    pub points: usize,
}

/// Exponential rate from a least-squares fit of `log value` over samples above `floor`.
pub fn fit_rate<T: Scalar>(series: &[(T, T)], floor: T) -> Result<RateFit<T>> {
    let pts: Vec<(T, T)> = series
        .iter()
        .filter(|(_, v)| *v > floor && v.is_finite())
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData {
            have: pts.len(),
            need: 5,
        });
    }
    let (slope, intercept, residual) = linear_fit(&pts).ok_or(Error::InsufficientData {
        have: pts.len(),
        need: 5,
    })?;
    Ok(RateFit {
        rate: -slope,
        intercept,
        window: (pts[0].0, pts[pts.len() - 1].0),
        residual,
        floor,
        points: pts.len(),
    })
}

/// Smallest `C` with `v(t) ≤ C e^{−rate·t} v(0)` over the series.
pub fn envelope_constant<T: Scalar>(series: &[(T, T)], rate: T) -> T {
    let Some(&(t0, v0)) = series.first() else {
        return T::zero();
    };
    if v0 <= T::zero() {
        return T::infinity();
    }
    series
        .iter()
        .map(|&(t, v)| v * (rate * (t - t0)).exp() / v0)
        .fold(T::zero(), T::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation<T> {
    pub index: usize,
    pub t: T,
    pub value: T,
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayEnvelopeReport<T> {
    pub passed: bool,
    pub rate: T,
    pub margin: T,
    pub checked: usize,
    /// Largest `value / (X(0) e^{−νt})` over checked samples; the envelope
    /// holds iff this is at most `2 + margin`.
    pub max_ratio: T,
    pub first_violation: Option<Violation<T>>,
}

/// Checks `X(t) ≤ (2 + margin) X(0) e^{−νt}` at every sample with `X > floor`.
pub fn check_decay_envelope<T: Scalar>(series: &[(T, T)], nu: T, margin: T, floor: T) -> DecayEnvelopeReport<T> {
    let mut report = DecayEnvelopeReport {
        passed: true,
        rate: nu,
        margin,
        checked: 0,
        max_ratio: T::zero(),
        first_violation: None,
    };
    let Some(&(t0, x0)) = series.first() else {
        return report;
    };
    let factor = T::lit(2.0) + margin;
    for (index, &(t, value)) in series.iter().enumerate() {
        if !(value > floor) {
            continue;
        }
        report.checked += 1;
        let base = x0 * (-nu * (t - t0)).exp();
        let bound = factor * base;
        if base > T::zero() {
            report.max_ratio = report.max_ratio.max(value / base);
        }
        if value > bound && report.first_violation.is_none() {
            report.passed = false;
            report.first_violation = Some(Violation { index, t, value, bound });
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthEnvelopeReport<T> {
    pub passed: bool,
    pub constant: T,
    /// Envelope `(Y(0) + sup_{s≤t} W(s)) e^{Ct}` at every sample.
    pub envelope: Vec<T>,
    /// Last sample time where the envelope is at most 1 (validity horizon).
    pub horizon: Option<T>,
    pub checked: usize,
    pub first_violation: Option<Violation<T>>,
}

/// Checks `Y(t) ≤ (Y(0) + sup_{s≤t} W(s)) e^{Ct}` on the longest prefix where
/// the envelope stays at most 1, optionally capped at `horizon`.
pub fn check_growth_envelope<T: Scalar>(
    y_series: &[(T, T)],
    w_series: &[(T, T)],
    c: T,
    horizon: Option<T>,
) -> Result<GrowthEnvelopeReport<T>> {
    if y_series.len() != w_series.len() {
        return Err(Error::TimeGridMismatch(format!(
            "{} Y samples vs {} W samples",
            y_series.len(),
            w_series.len()
        )));
    }
    let mut report = GrowthEnvelopeReport {
        passed: true,
        constant: c,
        envelope: Vec::with_capacity(y_series.len()),
        horizon: None,
        checked: 0,
        first_violation: None,
    };
    let Some(&(t0, y0)) = y_series.first() else {
        return Ok(report);
    };
    let mut sup_w = T::neg_infinity();
    let mut valid = true;
    for (index, (&(t, y), &(tw, w))) in y_series.iter().zip(w_series).enumerate() {
        if t != tw {
            return Err(Error::TimeGridMismatch(format!(
                "Y at t = {t} paired with W at t = {tw}"
            )));
        }
        sup_w = sup_w.max(w);
        let env = (y0 + sup_w) * (c * (t - t0)).exp();
        report.envelope.push(env);
        if horizon.is_some_and(|h| t > h) {
            valid = false;
        }
        if valid && env > T::one() {
            valid = false;
        }
        if !valid {
            continue;
        }
        report.horizon = Some(t);
        report.checked += 1;
        if y > env && report.first_violation.is_none() {
            report.passed = false;
            report.first_violation = Some(Violation {
                index,
                t,
                value: y,
                bound: env,
            });
        }
    }
    Ok(report)
}

/// Smallest `C` for which the growth envelope holds at every sample.
pub fn fitted_growth_constant<T: Scalar>(y_series: &[(T, T)], w_series: &[(T, T)]) -> T {
    let Some(&(t0, y0)) = y_series.first() else {
        return T::zero();
    };
    let mut sup_w = T::neg_infinity();
    let mut c = T::zero();
    for (&(t, y), &(_, w)) in y_series.iter().zip(w_series) {
        sup_w = sup_w.max(w);
        let base = y0 + sup_w;
        let dt = t - t0;
        if dt > T::zero() && y > base && base > T::zero() {
            c = c.max((y / base).ln() / dt);
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample<T> {
    pub t: T,
    /// `‖ū − w‖_{1,0}` with the `2π` azimuthal factor applied.
    pub gap_h10: T,
    pub y1: T,
}

/// Per-sample distance between the azimuthal average of a surface run and an
/// effective radial run.
pub fn compare_average_to_effective<T: Scalar>(
    surface: &Trajectory<T>,
    radial: &Trajectory<T>,
    profile: &RadiusProfile<T>,
) -> Result<Vec<GapSample<T>>> {
    if surface.times.len() != radial.times.len() {
        return Err(Error::TimeGridMismatch(format!(
            "{} vs {} samples",
            surface.times.len(),
            radial.times.len()
        )));
    }
    if surface.averages.len() != surface.times.len() || radial.averages.len() != radial.times.len() {
        return Err(Error::TimeGridMismatch(
            "both runs must record averages at every sample".into(),
        ));
    }
    let tol = T::lit(1e-9);
    surface
        .times
        .iter()
        .zip(&radial.times)
        .zip(surface.averages.iter().zip(&radial.averages))
        .map(|((&ts, &tr), (ubar, w))| {
            if (ts - tr).abs() > tol * ts.abs().max(T::one()) {
                return Err(Error::TimeGridMismatch(format!("t = {ts} vs t = {tr}")));
            }
            ubar.ensure_compatible(w)?;
            let v = ubar.sub(w);
            Ok(GapSample {
                t: ts,
                gap_h10: radial_h10_lifted(&v, profile)?,
                y1: dissipation_form(&v, profile)?,
            })
        })
        .collect()
}
