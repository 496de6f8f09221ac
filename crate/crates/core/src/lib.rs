//! Simulator for the spherically symmetric phase-field model of martensitic
//! phase transitions driven by configurational forces.
//!
//! The radial problem couples the quasi-static elasticity equation
//!
//! ```text
//! u_xx + (2/x) u_x - (2/x²) u = (λ/μ) S_x + b/μ
//! ```
//!
//! on `(a, d)` with the κ-regularized order-parameter equation
//!
//! ```text
//! S_t - cν |S_x|_κ S_xx = -F (|S_x|_κ - κ),   |p|_κ = sqrt(κ² + p²)
//! ```
//!
//! Both unknowns vanish at `x = a` and `x = d`. The crate provides the
//! discretization ([`grid`], [`elasticity`], [`order_parameter`]), the
//! coupled time loop ([`simulator`]), run-time monitors for the a-priori
//! estimates and κ-refinement studies ([`diagnostics`]), and a residual
//! check that lifted radial fields satisfy the 3D equations ([`reduction3d`]).

pub mod config;
pub mod diagnostics;
pub mod elasticity;
pub mod error;
pub mod grid;
pub mod io;
pub mod material;
pub mod order_parameter;
pub mod reduction3d;
pub mod simulator;
pub mod tridiag;

pub use error::{Error, Result};
