//! Reaction-diffusion dynamics of the FitzHugh–Nagumo system on thin,
//! axially undulated cylinders.
//!
//! The core is generic over the scalar type (`f32` or `f64`). The aliases at
//! the crate root fix it to `f64`, which is what the harness and the CLI use.
//!
//! ```
//! use undulant::{build_profile, Grid, ProfileSpec, Profile};
//!
//! let grid = Grid::new(64, 16, 10.0).unwrap();
//! let profile: Profile = build_profile(&ProfileSpec::constant(1.0), &grid).unwrap();
//! assert!((profile.area() - 20.0 * std::f64::consts::PI).abs() < 1e-9);
//! ```

// `!(a > b)` is used to let NaN fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod geometry;
pub mod harness;
pub mod operators;
pub mod pulse;
pub mod scalar;
pub mod snapshot;
mod solver;

pub use dynamics::{simulate, simulate_radial, ProbeSet, Scheme, Stepper, StepperConfig, Trajectory};
pub use error::{Error, Result};
pub use field::{FhnParams, Field, FieldKind, State};
pub use geometry::{build_profile, Grid, ProfileSpec, RadiusProfile};
pub use scalar::Scalar;
pub use solver::SolveStats;

pub type Profile = RadiusProfile<f64>;
pub type Field64 = Field<f64>;
pub type State64 = State<f64>;
pub type Params = FhnParams<f64>;
pub type Config64 = StepperConfig<f64>;
pub type Trajectory64 = Trajectory<f64>;
