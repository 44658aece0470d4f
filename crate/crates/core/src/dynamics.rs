//! Semi-implicit time integration of the surface system and of the effective
//! radial system
//!
//! ```text
//! ∂_t u₁ = Δu₁ + f(u₁) − u₂,    ∂_t u₂ = ε(u₁ − γu₂).
//! ```
//!
//! Writing `f(v) = h(v) − αv`, the stiff linear part `Δ − α` is treated
//! implicitly and the cubic remainder `h` explicitly.
//!
//! * `imex_euler`: `(I − dt(Δ−α)) u₁ⁿ⁺¹ = u₁ⁿ + dt(h(u₁ⁿ) − u₂ⁿ)`, then
//!   `u₂ⁿ⁺¹ = (u₂ⁿ + dt ε u₁ⁿ⁺¹)/(1 + dt εγ)`. First order.
//! * `imex_cn`: an `imex_euler` predictor `u*`, then the trapezoidal corrector
//!   `(I − dt/2 (Δ−α)) u₁ⁿ⁺¹ = (I + dt/2 (Δ−α)) u₁ⁿ + dt/2 [N(uⁿ) + N(u*)]`
//!   with `N(u) = h(u₁) − u₂`, and the trapezoidal recovery update
//!   `u₂ⁿ⁺¹ = ((1 − dt εγ/2) u₂ⁿ + dt ε/2 (u₁ⁿ + u₁ⁿ⁺¹))/(1 + dt εγ/2)`.
//!   Second order.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, LyapunovSample};
use crate::error::{Error, Result};
use crate::field::{Field, FieldKind, State};
use crate::geometry::RadiusProfile;
use crate::operators::{cubic_remainder, cubic_remainder_slope, laplacian};
use crate::pulse;
use crate::scalar::Scalar;
use crate::solver::ImplicitSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ImexEuler,
    ImexCn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig<T> {
    pub dt: T,
    pub scheme: Scheme,
    /// Relative residual tolerance of the linear solves.
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Scalar> StepperConfig<T> {
    pub fn new(dt: T, scheme: Scheme) -> Self {
        Self {
            dt,
            scheme,
            tolerance: T::lit(1e-10),
            max_iterations: 2000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::InvalidStepper(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.tolerance > T::zero() && self.tolerance < T::lit(1e-4)) {
            return Err(Error::InvalidStepper(format!(
                "tolerance = {} must lie in (0, 1e-4)",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidStepper("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// `min(0.1, 0.25/(α + max|h'(u₁)|))` over the current field.
pub fn default_dt<T: Scalar>(u: &State<T>) -> T {
    let alpha = u.params.alpha;
    let slope =
        u.u1.values()
            .iter()
            .fold(T::zero(), |m, &v| m.max(cubic_remainder_slope(v, alpha).abs()));
    T::lit(0.1).min(T::lit(0.25) / (alpha + slope))
}

/// Reusable stepper holding the factored implicit systems for a fixed `dt`.
pub struct Stepper<'a, T> {
    profile: &'a RadiusProfile<T>,
    cfg: StepperConfig<T>,
    full: ImplicitSystem<'a, T>,
    half: Option<ImplicitSystem<'a, T>>,
    alpha: T,
    kind: FieldKind,
    /// Linear iterations spent so far.
    pub linear_iterations: usize,
}

impl<'a, T: Scalar> Stepper<'a, T> {
    pub fn new(profile: &'a RadiusProfile<T>, cfg: StepperConfig<T>, template: &State<T>) -> Result<Self> {
        cfg.validate()?;
        template.params.validate()?;
        template.ensure_on(profile)?;
        let alpha = template.params.alpha;
        let kind = template.kind();
        let full = ImplicitSystem::new(profile, kind, cfg.dt, alpha);
        let half = match cfg.scheme {
            Scheme::ImexEuler => None,
            Scheme::ImexCn => Some(ImplicitSystem::new(profile, kind, T::lit(0.5) * cfg.dt, alpha)),
        };
        Ok(Self {
            profile,
            cfg,
            full,
            half,
            alpha,
            kind,
            linear_iterations: 0,
        })
    }

    pub fn config(&self) -> &StepperConfig<T> {
        &self.cfg
    }

    fn check(&self, u: &State<T>) -> Result<()> {
        u.ensure_on(self.profile)?;
        if u.kind() != self.kind || u.params.alpha != self.alpha {
            return Err(Error::ParamMismatch(
                "state does not match the stepper it was built for".into(),
            ));
        }
        Ok(())
    }

    fn explicit_part(&self, u: &State<T>) -> Field<T> {
        let alpha = self.alpha;
        u.u1.zip_map(&u.u2, |a, b| cubic_remainder(a, alpha) - b)
    }

    fn euler(&mut self, u: &State<T>) -> Result<State<T>> {
        let dt = self.cfg.dt;
        let p = u.params;
        let n = self.explicit_part(u);
        let rhs = u.u1.zip_map(&n, |a, b| a + dt * b);
        let (u1, stats) = self
            .full
            .solve(&rhs, &u.u1, self.cfg.tolerance, self.cfg.max_iterations)?;
        self.linear_iterations += stats.iterations;
        let denom = T::one() + dt * p.epsilon * p.gamma;
        let u2 = u.u2.zip_map(&u1, |b, a| (b + dt * p.epsilon * a) / denom);
        Ok(State { u1, u2, params: p })
    }

    fn trapezoid(&mut self, u: &State<T>) -> Result<State<T>> {
        let dt = self.cfg.dt;
        let half_dt = T::lit(0.5) * dt;
        let p = u.params;
        let predicted = self.euler(u)?;
        let n0 = self.explicit_part(u);
        let n1 = self.explicit_part(&predicted);
        let lap = laplacian(&u.u1, self.profile)?;
        let alpha = self.alpha;
        let mut rhs = u.u1.clone();
        for (k, r) in rhs.values_mut().iter_mut().enumerate() {
            let a = u.u1.values()[k];
            *r = a + half_dt * (lap.values()[k] - alpha * a) + half_dt * (n0.values()[k] + n1.values()[k]);
        }
        let system = self.half.as_ref().expect("trapezoid system");
        let (u1, stats) = system.solve(&rhs, &predicted.u1, self.cfg.tolerance, self.cfg.max_iterations)?;
        self.linear_iterations += stats.iterations;
        let relax = half_dt * p.epsilon * p.gamma;
        let mut u2 = u.u2.clone();
        for (k, b) in u2.values_mut().iter_mut().enumerate() {
            let sum = u.u1.values()[k] + u1.values()[k];
            *b = ((T::one() - relax) * *b + half_dt * p.epsilon * sum) / (T::one() + relax);
        }
        Ok(State { u1, u2, params: p })
    }

    /// Advances `u` by one time step.
    pub fn step(&mut self, u: &State<T>) -> Result<State<T>> {
        self.check(u)?;
        let next = match self.cfg.scheme {
            Scheme::ImexEuler => self.euler(u)?,
            Scheme::ImexCn => self.trapezoid(u)?,
        };
        if !next.is_finite() {
            return Err(Error::NonFiniteState);
        }
        Ok(next)
    }
}

/// One step with a freshly built stepper. Prefer [`Stepper`] in loops.
pub fn step<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>, cfg: &StepperConfig<T>) -> Result<State<T>> {
    Stepper::new(profile, *cfg, u)?.step(u)
}

/// What to record along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSet<T> {
    /// Steps between samples. Sampling always includes `t = 0` and the final time.
    pub stride: usize,
    pub lyapunov: bool,
    /// Keep the azimuthal average `ū` (radial state) of every sample.
    pub averages: bool,
    /// Track the rightmost descending crossing of `ū₁` at this level.
    pub front_level: Option<T>,
    /// Store full states every this many samples.
    pub snapshot_every: Option<usize>,
}

impl<T> Default for ProbeSet<T> {
    fn default() -> Self {
        Self {
            stride: 1,
            lyapunov: true,
            averages: false,
            front_level: None,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub lyapunov: Vec<LyapunovSample<T>>,
    pub averages: Vec<State<T>>,
    pub front_level: Option<T>,
    pub fronts: Vec<Option<T>>,
    pub snapshots: Vec<(T, State<T>)>,
    pub final_state: State<T>,
    pub dt: T,
    pub steps: usize,
    pub linear_iterations: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn t_final(&self) -> T {
        *self.times.last().expect("trajectory has at least one sample")
    }
}

fn integrate<T: Scalar>(
    u0: &State<T>,
    profile: &RadiusProfile<T>,
    cfg: &StepperConfig<T>,
    t_final: T,
    probes: &ProbeSet<T>,
) -> Result<Trajectory<T>> {
    if !(t_final > T::zero() && t_final.is_finite()) {
        return Err(Error::InvalidStepper(format!("final time {t_final} must be positive")));
    }
    if probes.stride == 0 {
        return Err(Error::InvalidStepper("probe stride must be positive".into()));
    }
    // round up to a whole number of steps, then shrink dt to land on t_final
    let steps = (t_final / cfg.dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
    let dt = t_final / T::from_usize_lossy(steps);
    let cfg = StepperConfig { dt, ..*cfg };
    let mut stepper = Stepper::new(profile, cfg, u0)?;

    let mut traj = Trajectory {
        times: Vec::new(),
        lyapunov: Vec::new(),
        averages: Vec::new(),
        front_level: probes.front_level,
        fronts: Vec::new(),
        snapshots: Vec::new(),
        final_state: u0.clone(),
        dt,
        steps,
        linear_iterations: 0,
    };
    let record = |traj: &mut Trajectory<T>, t: T, u: &State<T>| -> Result<()> {
        let sample_index = traj.times.len();
        traj.times.push(t);
        if probes.lyapunov {
            traj.lyapunov.push(diagnostics::sample(t, u, profile)?);
        }
        let avg = if probes.averages || probes.front_level.is_some() {
            Some(u.project_radial())
        } else {
            None
        };
        if let Some(level) = probes.front_level {
            let a = avg.as_ref().expect("average computed");
            traj.fronts.push(pulse::front_position(&a.u1, level, profile.dx));
        }
        if probes.averages {
            traj.averages.push(avg.expect("average computed"));
        }
        if let Some(every) = probes.snapshot_every {
            if every > 0 && sample_index.is_multiple_of(every) {
                traj.snapshots.push((t, u.clone()));
            }
        }
        Ok(())
    };

    record(&mut traj, T::zero(), u0)?;
    let mut u = u0.clone();
    for k in 1..=steps {
        let t = T::from_usize_lossy(k) * dt;
        u = stepper.step(&u).map_err(|e| Error::AtTime {
            time: t.to_f64_lossy(),
            source: Box::new(e),
        })?;
        if k % probes.stride == 0 || k == steps {
            record(&mut traj, t, &u)?;
        }
    }
    traj.linear_iterations = stepper.linear_iterations;
    traj.final_state = u;
    Ok(traj)
}

/// Integrates the surface system to `t_final`.
pub fn simulate<T: Scalar>(
    u0: &State<T>,
    profile: &RadiusProfile<T>,
    cfg: &StepperConfig<T>,
    t_final: T,
    probes: &ProbeSet<T>,
) -> Result<Trajectory<T>> {
    if u0.is_radial() {
        return Err(Error::ShapeMismatch("simulate expects a surface state".into()));
    }
    integrate(u0, profile, cfg, t_final, probes)
}

/// Integrates the effective radial system to `t_final`.
pub fn simulate_radial<T: Scalar>(
    w0: &State<T>,
    profile: &RadiusProfile<T>,
    cfg: &StepperConfig<T>,
    t_final: T,
    probes: &ProbeSet<T>,
) -> Result<Trajectory<T>> {
    if !w0.is_radial() {
        return Err(Error::ShapeMismatch("simulate_radial expects a radial state".into()));
    }
    integrate(w0, profile, cfg, t_final, probes)
}
