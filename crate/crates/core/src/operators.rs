//! Discrete Laplace–Beltrami operator, radial Laplacian, weighted inner
//! products, the `H^{1,0}` norm and the linearization `A` at the rest state.
//!
//! The stencil is conservative:
//!
//! ```text
//! (Δf)_{ij} = (1/√g_i) [ (a_{i+½}(f_{i+1,j} − f_{ij}) − a_{i−½}(f_{ij} − f_{i−1,j}))/Δx²
//!                       + b_i (f_{i,j+1} − 2f_{ij} + f_{i,j−1})/Δθ² ]
//! ```
//!
//! with `a = ρ²/√g` on faces and `b = (1 + ρ_x²)/√g` on nodes, periodic in both
//! indices. Multiplying by `√g` gives a symmetric matrix, so `Δ` is
//! self-adjoint for the `√g`-weighted inner product.
//!
//! Surface measures carry `Δx Δθ`; radial measures carry only `Δx`, i.e. they
//! omit the `2π` of the azimuthal integral.

use crate::error::{Error, Result};
use crate::field::{FhnParams, Field, FieldKind, State};
use crate::geometry::RadiusProfile;
use crate::scalar::{pairwise_sum, Scalar};

/// Quadrature weight of one cell without the `√g` factor.
pub fn cell_measure<T: Scalar>(kind: FieldKind, profile: &RadiusProfile<T>) -> T {
    match kind {
        FieldKind::Surface => profile.dx * profile.dtheta,
        FieldKind::Radial => profile.dx,
    }
}

/// Flux form `√g Δf`, written into `out`. Symmetric in the Euclidean inner product.
pub(crate) fn flux_form_into<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>, out: &mut [T]) {
    let nx = f.nx();
    let nt = f.ntheta();
    let v = f.values();
    let inv_dx2 = T::one() / (profile.dx * profile.dx);
    let inv_dth2 = T::one() / (profile.dtheta * profile.dtheta);
    let two = T::lit(2.0);
    let radial = f.is_radial();
    for i in 0..nx {
        let im = if i == 0 { nx - 1 } else { i - 1 };
        let ip = if i + 1 == nx { 0 } else { i + 1 };
        let a_right = profile.face[i] * inv_dx2;
        let a_left = profile.face[im] * inv_dx2;
        let b = profile.node_b[i] * inv_dth2;
        let row = &v[i * nt..(i + 1) * nt];
        let row_m = &v[im * nt..(im + 1) * nt];
        let row_p = &v[ip * nt..(ip + 1) * nt];
        let out_row = &mut out[i * nt..(i + 1) * nt];
        for j in 0..nt {
            let c = row[j];
            let x_part = a_right * (row_p[j] - c) - a_left * (c - row_m[j]);
            if radial {
                out_row[j] = x_part;
            } else {
                let jm = if j == 0 { nt - 1 } else { j - 1 };
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                out_row[j] = x_part + b * (row[jp] - two * c + row[jm]);
            }
        }
    }
}

fn apply_laplacian<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>) -> Field<T> {
    let mut out = Field::zeros_like(f);
    let nt = f.ntheta();
    flux_form_into(f, profile, out.values_mut());
    for (i, row) in out.values_mut().chunks_mut(nt).enumerate() {
        let s = profile.inv_sqrt_g[i];
        for v in row {
            *v *= s;
        }
    }
    out
}

/// Discrete Laplace–Beltrami operator on a surface field.
pub fn laplace_beltrami<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>) -> Result<Field<T>> {
    if f.is_radial() {
        return Err(Error::ShapeMismatch("laplace_beltrami expects a surface field".into()));
    }
    f.ensure_on(profile)?;
    Ok(apply_laplacian(f, profile))
}

/// Radial part `(1/√g) ∂_x (ρ²/√g) ∂_x` on an axial field.
pub fn radial_laplacian<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>) -> Result<Field<T>> {
    if !f.is_radial() {
        return Err(Error::ShapeMismatch("radial_laplacian expects a radial field".into()));
    }
    f.ensure_on(profile)?;
    Ok(apply_laplacian(f, profile))
}

/// The Laplacian matching the field kind.
pub fn laplacian<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>) -> Result<Field<T>> {
    f.ensure_on(profile)?;
    Ok(apply_laplacian(f, profile))
}

/// `∫ f g dμ` for one component (no `ε` weighting).
pub fn field_inner<T: Scalar>(f: &Field<T>, g: &Field<T>, profile: &RadiusProfile<T>) -> Result<T> {
    f.ensure_same_shape(g)?;
    f.ensure_on(profile)?;
    Ok(field_inner_unchecked(f, g, profile))
}

pub(crate) fn field_inner_unchecked<T: Scalar>(f: &Field<T>, g: &Field<T>, profile: &RadiusProfile<T>) -> T {
    let nt = f.ntheta();
    let (a, b) = (f.values(), g.values());
    let s = pairwise_sum(a.len(), &|k| a[k] * b[k] * profile.sqrt_g[k / nt]);
    s * cell_measure(f.kind(), profile)
}

/// Unweighted `‖f‖²_{L²(dμ)}`.
pub fn l2_norm_sq<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>) -> Result<T> {
    field_inner(f, f, profile)
}

/// `⟨u, v⟩ = ∫ (u₁v₁ + ε⁻¹u₂v₂) dμ`.
pub fn inner_product<T: Scalar>(u: &State<T>, v: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    u.ensure_compatible(v)?;
    u.ensure_on(profile)?;
    let first = field_inner_unchecked(&u.u1, &v.u1, profile);
    let second = field_inner_unchecked(&u.u2, &v.u2, profile);
    Ok(first + second / u.params.epsilon)
}

/// State norm squared `‖u‖² = ⟨u, u⟩`.
pub fn state_norm_sq<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    inner_product(u, u, profile)
}

/// `⟨f, −Δf⟩` from the stencil.
pub fn dirichlet_form<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>) -> Result<T> {
    f.ensure_on(profile)?;
    let mut k = vec![T::zero(); f.len()];
    flux_form_into(f, profile, &mut k);
    let v = f.values();
    let s = pairwise_sum(v.len(), &|idx| v[idx] * k[idx]);
    Ok(-s * cell_measure(f.kind(), profile))
}

/// `‖∇f‖² = ∫ ((ρ²/g)|∂_x f|² + ((1+ρ_x²)/g)|∂_θ f|²) √g dx dθ` with forward
/// differences on faces.
pub fn gradient_form<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>) -> Result<T> {
    f.ensure_on(profile)?;
    Ok(axial_gradient_form(f, profile) + azimuthal_gradient_form(f, profile))
}

/// Axial part `Σ a_{i+½} (f_{i+1,j} − f_{ij})²/Δx² · measure`.
pub fn axial_gradient_form<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>) -> T {
    let nx = f.nx();
    let nt = f.ntheta();
    let v = f.values();
    let inv_dx2 = T::one() / (profile.dx * profile.dx);
    let s = pairwise_sum(v.len(), &|k| {
        let (i, j) = (k / nt, k % nt);
        let ip = if i + 1 == nx { 0 } else { i + 1 };
        let d = v[ip * nt + j] - v[k];
        profile.face[i] * d * d * inv_dx2
    });
    s * cell_measure(f.kind(), profile)
}

/// Azimuthal part `Σ b_i (f_{i,j+1} − f_{ij})²/Δθ² · ΔxΔθ`; zero for radial fields.
pub fn azimuthal_gradient_form<T: Scalar>(f: &Field<T>, profile: &RadiusProfile<T>) -> T {
    if f.is_radial() {
        return T::zero();
    }
    let nt = f.ntheta();
    let v = f.values();
    let inv_dth2 = T::one() / (profile.dtheta * profile.dtheta);
    let s = pairwise_sum(v.len(), &|k| {
        let (i, j) = (k / nt, k % nt);
        let jp = if j + 1 == nt { 0 } else { j + 1 };
        let d = v[i * nt + jp] - v[k];
        profile.node_b[i] * d * d * inv_dth2
    });
    s * cell_measure(f.kind(), profile)
}

/// `‖u‖²_{1,0} = ⟨u₁, −Δu₁⟩ + ε⁻¹‖u₂‖²`.
pub fn h10_norm_sq<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    u.ensure_on(profile)?;
    let d = dirichlet_form(&u.u1, profile)?;
    let m = field_inner_unchecked(&u.u2, &u.u2, profile);
    Ok(d + m / u.params.epsilon)
}

/// Same norm evaluated through the gradient form.
pub fn h10_norm_sq_gradient<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>) -> Result<T> {
    u.ensure_on(profile)?;
    let d = gradient_form(&u.u1, profile)?;
    let m = field_inner_unchecked(&u.u2, &u.u2, profile);
    Ok(d + m / u.params.epsilon)
}

/// Sharp discrete spectral-gap constant for the azimuthal part on zero-mean
/// fields: `⟨f, Δ_θ f⟩ ≤ −(λ₁ᵈ / max ρ²) ‖f‖²`.
pub fn azimuthal_gap<T: Scalar>(profile: &RadiusProfile<T>) -> T {
    let r = profile.max_radius();
    profile.azimuthal_eigenvalue(1) / (r * r)
}

/// `A u = (Δu₁ − αu₁ − u₂, εu₁ − εγu₂)`.
pub fn apply_a<T: Scalar>(u: &State<T>, profile: &RadiusProfile<T>) -> Result<State<T>> {
    u.ensure_on(profile)?;
    let FhnParams { alpha, epsilon, gamma } = u.params;
    let lap = apply_laplacian(&u.u1, profile);
    let mut first = lap;
    for ((o, &a), &b) in first.values_mut().iter_mut().zip(u.u1.values()).zip(u.u2.values()) {
        *o = *o - alpha * a - b;
    }
    let second = u.u1.zip_map(&u.u2, |a, b| epsilon * a - epsilon * gamma * b);
    Ok(State {
        u1: first,
        u2: second,
        params: u.params,
    })
}

/// FHN cubic `f(v) = −v(v − α)(v − 1)`.
#[inline]
pub fn cubic<T: Scalar>(v: T, alpha: T) -> T {
    -v * (v - alpha) * (v - T::one())
}

/// Nonlinear remainder `h(v) = −v³ + (α + 1)v²`, so that `f(v) = h(v) − αv`.
#[inline]
pub fn cubic_remainder<T: Scalar>(v: T, alpha: T) -> T {
    v * v * (alpha + T::one() - v)
}

/// `h'(v) = −3v² + 2(α + 1)v`.
#[inline]
pub fn cubic_remainder_slope<T: Scalar>(v: T, alpha: T) -> T {
    v * (T::lit(2.0) * (alpha + T::one()) - T::lit(3.0) * v)
}

/// `N(u) = (h(u₁), 0)`.
pub fn nonlinearity<T: Scalar>(u: &State<T>) -> State<T> {
    let alpha = u.params.alpha;
    State {
        u1: u.u1.map(|v| cubic_remainder(v, alpha)),
        u2: Field::zeros_like(&u.u2),
        params: u.params,
    }
}

/// Pointwise `f(u₁)`.
pub fn reaction<T: Scalar>(u: &State<T>) -> Field<T> {
    let alpha = u.params.alpha;
    u.u1.map(|v| cubic(v, alpha))
}
