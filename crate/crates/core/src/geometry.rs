//! Radius profiles of undulated cylinders and their discrete metric data.
//!
//! A surface of revolution around the x-axis is parametrized by `(x, θ)` with
//! radius `ρ(x)`. Its metric determinant is `g = (1 + ρ_x²) ρ²`, and the
//! Laplace–Beltrami operator in divergence form carries the coefficients
//! `ρ²/√g` (x-flux) and `(1 + ρ_x²)/√g` (θ-flux). Both are precomputed here.
//!
//! The axial coordinate is truncated to `[0, L)` with periodic wrap.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Periodic tensor grid on `[0, L) × [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ntheta: usize,
    /// Axial extent `L`.
    pub length: f64,
}

impl Grid {
    pub fn new(nx: usize, ntheta: usize, length: f64) -> Result<Self> {
        let grid = Self { nx, ntheta, length };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 8 {
            return Err(Error::InvalidGrid(format!("nx = {} < 8", self.nx)));
        }
        if self.ntheta < 8 {
            return Err(Error::InvalidGrid(format!("ntheta = {} < 8", self.ntheta)));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGrid(format!("length = {} must be positive", self.length)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.ntheta as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }
}

/// Description of a radius function `ρ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `ρ ≡ R`.
    Constant { base_radius: f64 },
    /// `ρ = R (1 + δ sin(k x))`. Give either the wavenumber `k` or the integer
    /// number of periods on `[0, L)`, in which case `k = 2π periods / L`.
    Sinusoidal {
        base_radius: f64,
        undulation_amplitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        undulation_wavenumber: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        periods: Option<u32>,
    },
    /// `ρ = R + h exp(-d²/(2w²))`, `d` the periodic distance to `center`.
    /// Negative heights give a constriction.
    GaussianBump {
        base_radius: f64,
        center: f64,
        width: f64,
        height: f64,
    },
    /// Node values `ρ_i`, one per axial grid node.
    Tabulated { samples: Vec<f64> },
}

impl ProfileSpec {
    pub fn constant(base_radius: f64) -> Self {
        Self::Constant { base_radius }
    }

    pub fn sinusoidal(base_radius: f64, amplitude: f64, wavenumber: f64) -> Self {
        Self::Sinusoidal {
            base_radius,
            undulation_amplitude: amplitude,
            undulation_wavenumber: Some(wavenumber),
            periods: None,
        }
    }

    pub fn sinusoidal_periods(base_radius: f64, amplitude: f64, periods: u32) -> Self {
        Self::Sinusoidal {
            base_radius,
            undulation_amplitude: amplitude,
            undulation_wavenumber: None,
            periods: Some(periods),
        }
    }

    /// Checks that only depend on the spec and the domain length.
    pub fn check(&self, length: f64) -> Result<()> {
        match self {
            Self::Constant { base_radius } => positive("base_radius", *base_radius),
            Self::Sinusoidal {
                base_radius,
                undulation_amplitude,
                ..
            } => {
                positive("base_radius", *base_radius)?;
                if !(undulation_amplitude.is_finite() && *undulation_amplitude >= 0.0) {
                    return Err(Error::InvalidProfile(format!(
                        "undulation_amplitude = {undulation_amplitude} must be >= 0"
                    )));
                }
                let k = self.sinusoidal_wavenumber(length)?;
                let cycles = k * length / (2.0 * PI);
                if (cycles - cycles.round()).abs() > 1e-9 * cycles.abs().max(1.0) {
                    return Err(Error::PeriodicityMismatch { wavenumber: k, length });
                }
                Ok(())
            }
            Self::GaussianBump { base_radius, width, .. } => {
                positive("base_radius", *base_radius)?;
                positive("width", *width)
            }
            Self::Tabulated { samples } => {
                if samples.iter().any(|s| !s.is_finite()) {
                    return Err(Error::InvalidProfile("tabulated sample is not finite".into()));
                }
                Ok(())
            }
        }
    }

    fn sinusoidal_wavenumber(&self, length: f64) -> Result<f64> {
        match self {
            Self::Sinusoidal {
                undulation_wavenumber,
                periods,
                ..
            } => match (undulation_wavenumber, periods) {
                (Some(k), None) => Ok(*k),
                (None, Some(m)) => Ok(2.0 * PI * f64::from(*m) / length),
                (Some(_), Some(_)) => Err(Error::InvalidProfile(
                    "give either undulation_wavenumber or periods, not both".into(),
                )),
                (None, None) => Err(Error::InvalidProfile(
                    "sinusoidal profile needs undulation_wavenumber or periods".into(),
                )),
            },
            _ => unreachable!("wavenumber requested for a non-sinusoidal profile"),
        }
    }

    /// Analytic `(ρ, ρ_x)` at `x`, or `None` for tabulated data.
    fn analytic(&self, x: f64, length: f64, wavenumber: f64) -> Option<(f64, f64)> {
        match self {
            Self::Constant { base_radius } => Some((*base_radius, 0.0)),
            Self::Sinusoidal {
                base_radius,
                undulation_amplitude,
                ..
            } => {
                let (s, c) = (wavenumber * x).sin_cos();
                Some((
                    base_radius * (1.0 + undulation_amplitude * s),
                    base_radius * undulation_amplitude * wavenumber * c,
                ))
            }
            Self::GaussianBump {
                base_radius,
                center,
                width,
                height,
            } => {
                let mut d = (x - center).rem_euclid(length);
                if d >= 0.5 * length {
                    d -= length;
                }
                let e = (-0.5 * d * d / (width * width)).exp();
                Some((base_radius + height * e, -height * d / (width * width) * e))
            }
            Self::Tabulated { .. } => None,
        }
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("{name} = {value} must be positive")))
    }
}

/// Node and face metric data of a radius profile on a grid.
///
/// Face `i` sits between nodes `i` and `i + 1` (mod `N_x`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusProfile<T> {
    pub grid: Grid,
    pub dx: T,
    pub dtheta: T,
    pub rho: Vec<T>,
    pub rho_x: Vec<T>,
    pub g: Vec<T>,
    pub sqrt_g: Vec<T>,
    pub inv_sqrt_g: Vec<T>,
    /// `ρ²/√g` at faces.
    pub face: Vec<T>,
    /// `(1 + ρ_x²)/√g` at nodes.
    pub node_b: Vec<T>,
    /// True when `ρ` is constant; the metric then has no axial variation.
    pub is_constant: bool,
}

/// Evaluates a profile spec on the grid nodes.
pub fn build_profile<T: Scalar>(spec: &ProfileSpec, grid: &Grid) -> Result<RadiusProfile<T>> {
    grid.validate()?;
    spec.check(grid.length)?;
    let nx = grid.nx;
    let dx = grid.dx();
    let length = grid.length;
    let wavenumber = match spec {
        ProfileSpec::Sinusoidal { .. } => spec.sinusoidal_wavenumber(length)?,
        _ => 0.0,
    };

    let (rho, rho_x, face_data): (Vec<f64>, Vec<f64>, Vec<(f64, f64)>) = match spec {
        ProfileSpec::Tabulated { samples } => {
            if samples.len() != nx {
                return Err(Error::ShapeMismatch(format!(
                    "tabulated profile has {} samples, grid has nx = {nx}",
                    samples.len()
                )));
            }
            let rho = samples.clone();
            let rho_x: Vec<f64> = (0..nx)
                .map(|i| (rho[(i + 1) % nx] - rho[(i + nx - 1) % nx]) / (2.0 * dx))
                .collect();
            let faces = (0..nx)
                .map(|i| {
                    let ip = (i + 1) % nx;
                    (0.5 * (rho[i] + rho[ip]), 0.5 * (rho_x[i] + rho_x[ip]))
                })
                .collect();
            (rho, rho_x, faces)
        }
        _ => {
            let nodes: Vec<(f64, f64)> = (0..nx)
                .map(|i| spec.analytic(grid.x(i), length, wavenumber).expect("analytic"))
                .collect();
            let faces = (0..nx)
                .map(|i| {
                    spec.analytic((i as f64 + 0.5) * dx, length, wavenumber)
                        .expect("analytic")
                })
                .collect();
            (
                nodes.iter().map(|p| p.0).collect(),
                nodes.iter().map(|p| p.1).collect(),
                faces,
            )
        }
    };

    for (node, &value) in rho.iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::NonPositiveRadius { node, value });
        }
    }
    for &(value, _) in &face_data {
        if !(value > 0.0) {
            return Err(Error::NonPositiveRadius {
                node: usize::MAX,
                value,
            });
        }
    }

    let is_constant = matches!(spec, ProfileSpec::Constant { .. });
    let to_t = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    let rho_t = to_t(&rho);
    let rho_x_t = to_t(&rho_x);
    let one = T::one();
    let g: Vec<T> = rho_t
        .iter()
        .zip(&rho_x_t)
        .map(|(&r, &rx)| (one + rx * rx) * r * r)
        .collect();
    let sqrt_g: Vec<T> = g.iter().map(|v| v.sqrt()).collect();
    let inv_sqrt_g: Vec<T> = sqrt_g.iter().map(|&s| one / s).collect();
    let node_b: Vec<T> = rho_x_t
        .iter()
        .zip(&sqrt_g)
        .map(|(&rx, &s)| (one + rx * rx) / s)
        .collect();
    let face: Vec<T> = face_data
        .iter()
        .map(|&(r, rx)| {
            let (r, rx) = (T::lit(r), T::lit(rx));
            // ρ²/√g with √g = ρ √(1 + ρ_x²)
            let sqrt_gf = r * (one + rx * rx).sqrt();
            r * r / sqrt_gf
        })
        .collect();

    Ok(RadiusProfile {
        grid: *grid,
        dx: T::lit(dx),
        dtheta: T::lit(grid.dtheta()),
        rho: rho_t,
        rho_x: rho_x_t,
        g,
        sqrt_g,
        inv_sqrt_g,
        face,
        node_b,
        is_constant,
    })
}

impl<T: Scalar> RadiusProfile<T> {
    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn ntheta(&self) -> usize {
        self.grid.ntheta
    }

    /// `r* = max ρ`, the thinness scale.
    pub fn max_radius(&self) -> T {
        self.rho.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_radius(&self) -> T {
        self.rho.iter().copied().fold(T::infinity(), T::min)
    }

    /// `c = 1 + ‖ρ_x‖²_∞`.
    pub fn slope_constant(&self) -> T {
        let m = self.rho_x.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        T::one() + m * m
    }

    /// `c / r*²`, the thin-cylinder contraction constant.
    pub fn thinness_ratio(&self) -> T {
        let r = self.max_radius();
        self.slope_constant() / (r * r)
    }

    /// Discrete first azimuthal eigenvalue `(2 - 2 cos Δθ)/Δθ²`.
    pub fn azimuthal_eigenvalue(&self, mode: usize) -> T {
        let n = T::from_usize_lossy(mode);
        let h = self.dtheta;
        (T::lit(2.0) - T::lit(2.0) * (n * h).cos()) / (h * h)
    }

    /// Discrete axial eigenvalue of `∂_x²` for `cos(2π m x / L)`.
    pub fn axial_eigenvalue(&self, mode: usize) -> T {
        let m = T::from_usize_lossy(mode);
        let l = T::lit(self.grid.length);
        let h = self.dx;
        (T::lit(2.0) - T::lit(2.0) * (T::lit(2.0) * T::PI() * m * h / l).cos()) / (h * h)
    }

    /// Surface area `Σ √g Δx Δθ`.
    pub fn area(&self) -> T {
        let nt = T::from_usize_lossy(self.ntheta());
        crate::scalar::pairwise_sum(self.nx(), &|i| self.sqrt_g[i]) * self.dx * self.dtheta * nt
    }
}
