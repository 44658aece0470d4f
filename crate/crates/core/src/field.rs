//! Scalar fields on the surface grid and on the axial grid, and the FHN state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Grid, RadiusProfile};
use crate::scalar::{pairwise_sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Values on the `N_x × N_θ` grid.
    Surface,
    /// Values on the `N_x` axial grid.
    Radial,
}

/// Row-major field: value `(i, j)` lives at `i * ntheta + j`.
///
/// Radial fields are stored with a single column, so stencil code can treat
/// both kinds uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    kind: FieldKind,
    nx: usize,
    ntheta: usize,
    data: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros_surface(grid: &Grid) -> Self {
        Self::from_data(
            FieldKind::Surface,
            grid.nx,
            grid.ntheta,
            vec![T::zero(); grid.nx * grid.ntheta],
        )
    }

    pub fn zeros_radial(grid: &Grid) -> Self {
        Self::from_data(FieldKind::Radial, grid.nx, 1, vec![T::zero(); grid.nx])
    }

    pub fn zeros_like(other: &Self) -> Self {
        Self::from_data(other.kind, other.nx, other.ntheta, vec![T::zero(); other.data.len()])
    }

    pub fn constant_surface(grid: &Grid, value: T) -> Self {
        Self::surface_from_fn(grid, |_, _| value)
    }

    pub fn constant_radial(grid: &Grid, value: T) -> Self {
        Self::radial_from_fn(grid, |_| value)
    }

    /// Samples `f(x, θ)` at the grid nodes.
    pub fn surface_from_fn(grid: &Grid, f: impl Fn(T, T) -> T) -> Self {
        let (dx, dth) = (T::lit(grid.dx()), T::lit(grid.dtheta()));
        let mut data = Vec::with_capacity(grid.nx * grid.ntheta);
        for i in 0..grid.nx {
            let x = T::from_usize_lossy(i) * dx;
            for j in 0..grid.ntheta {
                data.push(f(x, T::from_usize_lossy(j) * dth));
            }
        }
        Self::from_data(FieldKind::Surface, grid.nx, grid.ntheta, data)
    }

    pub fn radial_from_fn(grid: &Grid, f: impl Fn(T) -> T) -> Self {
        let dx = T::lit(grid.dx());
        let data = (0..grid.nx).map(|i| f(T::from_usize_lossy(i) * dx)).collect();
        Self::from_data(FieldKind::Radial, grid.nx, 1, data)
    }

    pub fn from_surface_values(grid: &Grid, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.nx * grid.ntheta {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {}x{} surface grid",
                data.len(),
                grid.nx,
                grid.ntheta
            )));
        }
        Ok(Self::from_data(FieldKind::Surface, grid.nx, grid.ntheta, data))
    }

    pub fn from_radial_values(grid: &Grid, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.nx {
            return Err(Error::ShapeMismatch(format!(
                "{} values for an axial grid of {} nodes",
                data.len(),
                grid.nx
            )));
        }
        Ok(Self::from_data(FieldKind::Radial, grid.nx, 1, data))
    }

    pub(crate) fn from_data(kind: FieldKind, nx: usize, ntheta: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), nx * ntheta);
        Self { kind, nx, ntheta, data }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn is_radial(&self) -> bool {
        self.kind == FieldKind::Radial
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Number of azimuthal columns; 1 for radial fields.
    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.ntheta + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ntheta..(i + 1) * self.ntheta]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.kind == other.kind && self.nx == other.nx && self.ntheta == other.ntheta
    }

    pub fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{:?} {}x{} vs {:?} {}x{}",
                self.kind, self.nx, self.ntheta, other.kind, other.nx, other.ntheta
            )))
        }
    }

    /// Checks the field lives on the profile's grid.
    pub fn ensure_on(&self, profile: &RadiusProfile<T>) -> Result<()> {
        let ok = self.nx == profile.nx()
            && match self.kind {
                FieldKind::Surface => self.ntheta == profile.ntheta(),
                FieldKind::Radial => self.ntheta == 1,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{:?} field {}x{} on a {}x{} grid",
                self.kind,
                self.nx,
                self.ntheta,
                profile.nx(),
                profile.ntheta()
            )))
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_data(
            self.kind,
            self.nx,
            self.ntheta,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert!(self.same_shape(other));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self::from_data(self.kind, self.nx, self.ntheta, data)
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Mean over the azimuthal index (identity on radial fields).
    pub fn project_radial(&self) -> Self {
        if self.is_radial() {
            return self.clone();
        }
        let nt = self.ntheta;
        let inv = T::one() / T::from_usize_lossy(nt);
        let data = (0..self.nx)
            .map(|i| {
                // offset by the first entry so θ-independent rows average exactly
                let row = self.row(i);
                let base = row[0];
                base + pairwise_sum(nt, &|j| row[j] - base) * inv
            })
            .collect();
        Self::from_data(FieldKind::Radial, self.nx, 1, data)
    }

    /// Constant-in-θ extension of a radial field to `ntheta` columns.
    pub fn lift(&self, ntheta: usize) -> Self {
        assert!(self.is_radial(), "lift expects a radial field");
        let mut data = Vec::with_capacity(self.nx * ntheta);
        for &v in &self.data {
            data.extend(std::iter::repeat_n(v, ntheta));
        }
        Self::from_data(FieldKind::Surface, self.nx, ntheta, data)
    }

    /// `f − lift(project_radial(f))`; zero for radial fields.
    pub fn perp(&self) -> Self {
        if self.is_radial() {
            return Self::zeros_like(self);
        }
        let avg = self.project_radial();
        let nt = self.ntheta;
        let mut out = self.clone();
        for i in 0..self.nx {
            let m = avg.data[i];
            for v in &mut out.data[i * nt..(i + 1) * nt] {
                *v -= m;
            }
        }
        out
    }
}

/// FitzHugh–Nagumo parameters: threshold `α`, timescale ratio `ε`, recovery coupling `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhnParams<T> {
    pub alpha: T,
    pub epsilon: T,
    pub gamma: T,
}

impl<T: Scalar> FhnParams<T> {
    pub fn new(alpha: T, epsilon: T, gamma: T) -> Result<Self> {
        let p = Self { alpha, epsilon, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let half = T::lit(0.5);
        if !(self.alpha > T::zero() && self.alpha < half) {
            return Err(Error::InvalidParams(format!(
                "alpha = {} must lie in (0, 1/2)",
                self.alpha
            )));
        }
        if !(self.epsilon > T::zero() && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if !(self.gamma > T::zero() && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma = {} must be positive", self.gamma)));
        }
        Ok(())
    }

    /// Soft warnings: the asymptotic regime assumes `ε, γ ≪ 1`.
    pub fn advisories(&self) -> Vec<String> {
        let mut out = Vec::new();
        let small = T::lit(0.1);
        if self.epsilon > small {
            out.push(format!("epsilon = {} is not small", self.epsilon));
        }
        if self.gamma > small {
            out.push(format!("gamma = {} is not small", self.gamma));
        }
        out
    }

    pub fn cast<U: Scalar>(&self) -> FhnParams<U> {
        FhnParams {
            alpha: U::lit(self.alpha.to_f64_lossy()),
            epsilon: U::lit(self.epsilon.to_f64_lossy()),
            gamma: U::lit(self.gamma.to_f64_lossy()),
        }
    }
}

/// The pair `u = (u₁, u₂)` with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub u1: Field<T>,
    pub u2: Field<T>,
    pub params: FhnParams<T>,
}

impl<T: Scalar> State<T> {
    pub fn new(u1: Field<T>, u2: Field<T>, params: FhnParams<T>) -> Result<Self> {
        u1.ensure_same_shape(&u2)?;
        Ok(Self { u1, u2, params })
    }

    pub fn zeros_surface(grid: &Grid, params: FhnParams<T>) -> Self {
        Self {
            u1: Field::zeros_surface(grid),
            u2: Field::zeros_surface(grid),
            params,
        }
    }

    pub fn zeros_radial(grid: &Grid, params: FhnParams<T>) -> Self {
        Self {
            u1: Field::zeros_radial(grid),
            u2: Field::zeros_radial(grid),
            params,
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.u1.kind()
    }

    pub fn is_radial(&self) -> bool {
        self.u1.is_radial()
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    pub fn ensure_on(&self, profile: &RadiusProfile<T>) -> Result<()> {
        self.u1.ensure_same_shape(&self.u2)?;
        self.u1.ensure_on(profile)
    }

    pub fn ensure_compatible(&self, other: &Self) -> Result<()> {
        self.u1.ensure_same_shape(&other.u1)?;
        self.u2.ensure_same_shape(&other.u2)?;
        if self.params.epsilon != other.params.epsilon {
            return Err(Error::ParamMismatch(format!(
                "epsilon {} vs {}",
                self.params.epsilon, other.params.epsilon
            )));
        }
        Ok(())
    }

    pub fn map_fields(&self, f: impl Fn(&Field<T>) -> Field<T>) -> Self {
        Self {
            u1: f(&self.u1),
            u2: f(&self.u2),
            params: self.params,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            u1: self.u1.sub(&other.u1),
            u2: self.u2.sub(&other.u2),
            params: self.params,
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map_fields(|f| f.scaled(s))
    }

    /// Azimuthal average `ū` as a radial state.
    pub fn project_radial(&self) -> Self {
        self.map_fields(Field::project_radial)
    }

    /// Non-radial remainder `u^⊥ = u − ū`.
    pub fn perp(&self) -> Self {
        self.map_fields(Field::perp)
    }

    pub fn lift(&self, ntheta: usize) -> Self {
        self.map_fields(|f| f.lift(ntheta))
    }
}
