//! Matrix-free preconditioned conjugate gradients for the implicit diffusion
//! solve `(I − c(Δ − α)) u = r`.
//!
//! Multiplying by the node weights `√g` turns the system into
//! `S u = √g r` with `S = √g (1 + cα) − c K` and `K = √g Δ` the symmetric flux
//! form. `S` is symmetric positive definite, so CG applies directly; the
//! iterates coincide with CG on the original operator in the `√g`-weighted
//! inner product.
//!
//! Surface systems are preconditioned with exact azimuthal line solves: each
//! axial row couples its `N_θ` unknowns through a circulant tridiagonal block
//! (the stiff `1/ρ²` direction), which is inverted with a cyclic Thomas sweep.

use crate::error::{Error, Result};
use crate::field::{Field, FieldKind};
use crate::geometry::RadiusProfile;
use crate::operators::flux_form_into;
use crate::scalar::{pairwise_dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Symmetric cyclic tridiagonal matrix, factored once for repeated solves
/// (Sherman–Morrison on a tridiagonal perturbation). `off[k]` couples rows
/// `k` and `k + 1 mod n`.
#[derive(Debug, Clone)]
struct CyclicTridiagonal<T> {
    off: Vec<T>,
    gamma: T,
    cprime: Vec<T>,
    inv_denom: Vec<T>,
    z: Vec<T>,
    z_factor: T,
}

impl<T: Scalar> CyclicTridiagonal<T> {
    fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        let n = diag.len();
        debug_assert!(n >= 3 && off.len() == n);
        let corner = off[n - 1];
        let gamma = -diag[0];
        let mut d = diag;
        d[0] -= gamma;
        d[n - 1] -= corner * corner / gamma;
        let mut cprime = vec![T::zero(); n];
        let mut inv_denom = vec![T::zero(); n];
        inv_denom[0] = T::one() / d[0];
        cprime[0] = off[0] * inv_denom[0];
        for k in 1..n {
            let denom = d[k] - off[k - 1] * cprime[k - 1];
            inv_denom[k] = T::one() / denom;
            cprime[k] = off[k] * inv_denom[k];
        }
        let mut this = Self {
            off,
            gamma,
            cprime,
            inv_denom,
            z: vec![T::zero(); n],
            z_factor: T::zero(),
        };
        let mut u = vec![T::zero(); n];
        u[0] = gamma;
        u[n - 1] = corner;
        let mut z = vec![T::zero(); n];
        this.thomas(&u, &mut z);
        this.z_factor = T::one() + z[0] + corner / gamma * z[n - 1];
        this.z = z;
        this
    }

    fn constant(d: T, e: T, n: usize) -> Self {
        Self::new(vec![d; n], vec![e; n])
    }

    fn thomas(&self, rhs: &[T], out: &mut [T]) {
        let n = rhs.len();
        out[0] = rhs[0] * self.inv_denom[0];
        for k in 1..n {
            out[k] = (rhs[k] - self.off[k - 1] * out[k - 1]) * self.inv_denom[k];
        }
        for k in (0..n - 1).rev() {
            out[k] -= self.cprime[k] * out[k + 1];
        }
    }

    fn solve(&self, rhs: &[T], out: &mut [T]) {
        let n = rhs.len();
        self.thomas(rhs, out);
        let f = (out[0] + self.off[n - 1] / self.gamma * out[n - 1]) / self.z_factor;
        for (o, &z) in out.iter_mut().zip(&self.z) {
            *o -= f * z;
        }
    }
}

/// Radial systems are cyclic tridiagonal and solved exactly; surface systems
/// use the exact azimuthal line solves of their `θ`-coupling plus the axial diagonal.
#[derive(Debug, Clone)]
enum Preconditioner<T> {
    Axial(CyclicTridiagonal<T>),
    Lines(Vec<CyclicTridiagonal<T>>),
}

/// The operator `I − c(Δ − α)` in symmetrized form, with its preconditioner.
#[derive(Debug, Clone)]
pub struct ImplicitSystem<'a, T> {
    profile: &'a RadiusProfile<T>,
    kind: FieldKind,
    ntheta: usize,
    shift: T,
    c: T,
    pre: Preconditioner<T>,
}

impl<'a, T: Scalar> ImplicitSystem<'a, T> {
    /// System for `(I − c(Δ − α))` on fields of `kind`.
    pub fn new(profile: &'a RadiusProfile<T>, kind: FieldKind, c: T, alpha: T) -> Self {
        let nx = profile.nx();
        let shift = T::one() + c * alpha;
        let inv_dx2 = T::one() / (profile.dx * profile.dx);
        let inv_dth2 = T::one() / (profile.dtheta * profile.dtheta);
        let axial_diag = |i: usize| {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            profile.sqrt_g[i] * shift + c * (profile.face[i] + profile.face[im]) * inv_dx2
        };
        let (ntheta, pre) = match kind {
            FieldKind::Radial => {
                let diag = (0..nx).map(axial_diag).collect();
                let off = profile.face.iter().map(|&a| -c * a * inv_dx2).collect();
                (1, Preconditioner::Axial(CyclicTridiagonal::new(diag, off)))
            }
            FieldKind::Surface => {
                let nt = profile.ntheta();
                let lines = (0..nx)
                    .map(|i| {
                        let b = c * profile.node_b[i] * inv_dth2;
                        CyclicTridiagonal::constant(axial_diag(i) + T::lit(2.0) * b, -b, nt)
                    })
                    .collect();
                (nt, Preconditioner::Lines(lines))
            }
        };
        Self {
            profile,
            kind,
            ntheta,
            shift,
            c,
            pre,
        }
    }

    fn apply(&self, x: &Field<T>, out: &mut [T]) {
        flux_form_into(x, self.profile, out);
        let nt = self.ntheta;
        for (i, (orow, xrow)) in out.chunks_mut(nt).zip(x.values().chunks(nt)).enumerate() {
            let w = self.profile.sqrt_g[i] * self.shift;
            for (o, &v) in orow.iter_mut().zip(xrow) {
                *o = w * v - self.c * *o;
            }
        }
    }

    fn precondition(&self, r: &[T], out: &mut [T]) {
        match &self.pre {
            Preconditioner::Axial(system) => system.solve(r, out),
            Preconditioner::Lines(lines) => {
                let nt = self.ntheta;
                for ((line, rrow), orow) in lines.iter().zip(r.chunks(nt)).zip(out.chunks_mut(nt)) {
                    line.solve(rrow, orow);
                }
            }
        }
    }

    /// Solves `(I − c(Δ − α)) x = rhs`, starting from `guess`.
    pub fn solve(
        &self,
        rhs: &Field<T>,
        guess: &Field<T>,
        tolerance: T,
        max_iterations: usize,
    ) -> Result<(Field<T>, SolveStats)> {
        debug_assert_eq!(rhs.kind(), self.kind);
        let nt = self.ntheta;
        let n = rhs.len();
        let mut b = rhs.values().to_vec();
        for (i, row) in b.chunks_mut(nt).enumerate() {
            let w = self.profile.sqrt_g[i];
            for v in row {
                *v *= w;
            }
        }
        let b_norm = pairwise_dot(&b, &b).sqrt();
        if !b_norm.is_finite() {
            return Err(Error::NonFiniteState);
        }
        if b_norm == T::zero() {
            return Ok((
                Field::zeros_like(rhs),
                SolveStats {
                    iterations: 0,
                    relative_residual: 0.0,
                },
            ));
        }

        let mut x = guess.clone();
        let mut r = vec![T::zero(); n];
        self.apply(&x, &mut r);
        for (ri, &bi) in r.iter_mut().zip(&b) {
            *ri = bi - *ri;
        }
        let mut z = vec![T::zero(); n];
        self.precondition(&r, &mut z);
        let mut p = Field::from_data(rhs.kind(), rhs.nx(), nt, z.clone());
        let mut q = vec![T::zero(); n];
        let mut rz = pairwise_dot(&r, &z);
        let threshold = tolerance * b_norm;

        for it in 0..=max_iterations {
            let r_norm = pairwise_dot(&r, &r).sqrt();
            if r_norm <= threshold {
                return Ok((
                    x,
                    SolveStats {
                        iterations: it,
                        relative_residual: (r_norm / b_norm).to_f64_lossy(),
                    },
                ));
            }
            if it == max_iterations || !r_norm.is_finite() {
                return Err(Error::LinearSolveDiverged {
                    iterations: it,
                    residual: (r_norm / b_norm).to_f64_lossy(),
                });
            }
            self.apply(&p, &mut q);
            let pq = pairwise_dot(p.values(), &q);
            let step = rz / pq;
            for (xi, &pi) in x.values_mut().iter_mut().zip(p.values()) {
                *xi += step * pi;
            }
            for (ri, &qi) in r.iter_mut().zip(&q) {
                *ri -= step * qi;
            }
            self.precondition(&r, &mut z);
            let rz_new = pairwise_dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, &zi) in p.values_mut().iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        unreachable!("loop returns on its last iteration")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_profile, Grid, ProfileSpec};
    use crate::operators::laplacian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cyclic_tridiagonal_matches_dense_product() {
        let n = 9;
        let d: Vec<f64> = (0..n).map(|k| 4.0 + (k as f64).cos()).collect();
        let e: Vec<f64> = (0..n).map(|k| -1.0 - 0.3 * (k as f64 * 1.3).sin()).collect();
        let m = CyclicTridiagonal::new(d.clone(), e.clone());
        let rhs: Vec<f64> = (0..n).map(|k| (k as f64 * 0.7).sin()).collect();
        let mut x = vec![0.0; n];
        m.solve(&rhs, &mut x);
        for k in 0..n {
            let km = (k + n - 1) % n;
            let kp = (k + 1) % n;
            let ax = d[k] * x[k] + e[km] * x[km] + e[k] * x[kp];
            assert!((ax - rhs[k]).abs() < 1e-13);
        }
    }

    fn residual(profile: &RadiusProfile<f64>, x: &Field<f64>, rhs: &Field<f64>, c: f64, alpha: f64) -> f64 {
        let lap = laplacian(x, profile).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..x.len() {
            let v = x.values()[k] - c * (lap.values()[k] - alpha * x.values()[k]);
            worst = worst.max((v - rhs.values()[k]).abs());
        }
        worst
    }

    #[test]
    fn solves_surface_and_radial_systems() {
        let grid = Grid::new(40, 16, 8.0).unwrap();
        let profile: RadiusProfile<f64> = build_profile(&ProfileSpec::sinusoidal_periods(0.2, 0.25, 2), &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rhs = Field::from_surface_values(&grid, (0..640).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let sys = ImplicitSystem::new(&profile, FieldKind::Surface, 0.1, 0.25);
        let (x, stats) = sys.solve(&rhs, &Field::zeros_like(&rhs), 1e-12, 500).unwrap();
        assert!(stats.iterations < 100, "{stats:?}");
        assert!(residual(&profile, &x, &rhs, 0.1, 0.25) < 1e-9);

        let rhs = Field::from_radial_values(&grid, (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let sys = ImplicitSystem::new(&profile, FieldKind::Radial, 0.1, 0.25);
        let (x, stats) = sys.solve(&rhs, &rhs, 1e-12, 500).unwrap();
        assert!(stats.iterations <= 2, "{stats:?}");
        assert!(residual(&profile, &x, &rhs, 0.1, 0.25) < 1e-10);
    }

    #[test]
    fn zero_rhs_gives_exact_zero() {
        let grid = Grid::new(16, 16, 2.0).unwrap();
        let profile: RadiusProfile<f64> = build_profile(&ProfileSpec::constant(0.5), &grid).unwrap();
        let sys = ImplicitSystem::new(&profile, FieldKind::Surface, 0.5, 0.1);
        let z = Field::zeros_surface(&grid);
        let (x, stats) = sys.solve(&z, &Field::constant_surface(&grid, 1.0), 1e-10, 10).unwrap();
        assert_eq!(stats.iterations, 0);
        assert!(x.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reports_divergence_when_iterations_run_out() {
        let grid = Grid::new(64, 16, 2.0).unwrap();
        let profile: RadiusProfile<f64> = build_profile(&ProfileSpec::sinusoidal_periods(0.5, 0.3, 1), &grid).unwrap();
        let rhs = Field::surface_from_fn(&grid, |x: f64, t: f64| (3.0 * x).sin() * t.cos() + x);
        let sys = ImplicitSystem::new(&profile, FieldKind::Surface, 10.0, 0.1);
        let err = sys.solve(&rhs, &Field::zeros_like(&rhs), 1e-14, 1).unwrap_err();
        assert!(matches!(err, Error::LinearSolveDiverged { .. }));
    }
}
