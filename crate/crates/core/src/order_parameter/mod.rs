//! Order-parameter equation with κ-regularized gradient modulus:
//!
//! ```text
//! S_t − cν |S_x|_κ S_xx = −𝓕·(|S_x|_κ − κ)
//! ```

mod data;
mod mollifier;

pub use data::{smoothstep, BodyForce, InitialData};
pub use mollifier::{MollifierKernel, MollifierState};

use crate::error::{Error, Result};
use crate::grid::{d1, ScalarField};
use crate::material::{double_well, MaterialParams};
use crate::tridiag::Tridiagonal;

/// `|p|_κ = √(κ² + p²)`
#[inline]
pub fn abs_kappa(p: f64, kappa: f64) -> f64 {
    kappa.hypot(p)
}

/// `∫₀ᵖ |y|_κ dy = ½(p|p|_κ + κ² asinh(p/κ))`, which reduces to `½p|p|`
/// at `κ = 0`.
///
/// `asinh(p/κ) = log((p + |p|_κ)/κ)`; the `asinh` form avoids the
/// cancellation in `p + |p|_κ` for large negative `p`.
#[inline]
pub fn primitive_abs_kappa(p: f64, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return 0.5 * p * p.abs();
    }
    0.5 * (p * abs_kappa(p, kappa) + kappa * kappa * (p / kappa).asinh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    pub kappa: f64,
    /// Width of the temporal mollifier; defaults to `kappa`.
    pub kappa_m: f64,
    pub dt: f64,
    pub theta: f64,
}

impl RegularizationParams {
    pub fn new(kappa: f64, dt: f64) -> Self {
        Self {
            kappa,
            kappa_m: kappa,
            dt,
            theta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::validation("kappa must lie in (0,1]"));
        }
        if !(self.kappa_m >= 0.0 && self.kappa_m.is_finite()) {
            return Err(Error::validation("kappa_m must be finite and nonnegative"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation("dt must be positive"));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::validation("theta must lie in [0.5,1]"));
        }
        Ok(())
    }
}

/// Pointwise configurational force
///
/// ```text
/// 𝓕₁ = c(−λ(u_x + 2u/x) + e·S + ψ̂′(S)),   𝓕 = 𝓕₁ − (2cν/x)·S_x
/// ```
pub fn compute_calf(
    u: &ScalarField,
    u_x: &ScalarField,
    s: &ScalarField,
    s_x: &ScalarField,
    params: &MaterialParams,
) -> ScalarField {
    let grid = *s.grid();
    let p = params;
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.x(i);
            let (uv, ux, sv, sx) = (
                u.values()[i],
                u_x.values()[i],
                s.values()[i],
                s_x.values()[i],
            );
            let f1 = p.c
                * (-p.lambda * (ux + 2.0 * uv / x) + p.e * sv + double_well(sv, p.well_weight).1);
            f1 - 2.0 * p.c * p.nu / x * sx
        })
        .collect();
    ScalarField::from_raw(grid, values)
}

/// Frozen coefficients of `S_t = a S_xx − v S_x + r`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearCoefficients {
    pub diffusivity: Vec<f64>,
    pub velocity: Vec<f64>,
    pub source: Vec<f64>,
}

impl LinearCoefficients {
    /// `a S_xx + r` with no transport.
    pub fn diffusion(diffusivity: Vec<f64>, source: Vec<f64>) -> Self {
        let velocity = vec![0.0; diffusivity.len()];
        Self {
            diffusivity,
            velocity,
            source,
        }
    }
}

/// Upwind transport plus 3-point diffusion at interior node `i`, as
/// `(lower, diag, upper)` weights of `a d2 − v D_up`.
fn interior_stencil(a: f64, v: f64, h: f64) -> (f64, f64, f64) {
    let (dif, adv) = (a / (h * h), v / h);
    if v >= 0.0 {
        (dif + adv, -2.0 * dif - adv, dif)
    } else {
        (dif, -2.0 * dif + adv, dif - adv)
    }
}

/// θ-scheme with homogeneous Dirichlet values:
///
/// ```text
/// (I − θ dt Lₕ) Sⁿ⁺¹ = (I + (1 − θ) dt Lₕ) Sⁿ + dt r
/// ```
///
/// `Lₕ = a d2 − v D_up` with first-order upwinding of the transport term.
/// For `θ = 1` the matrix is an M-matrix with unit row sums, so
/// `max|Sⁿ⁺¹| ≤ max|Sⁿ + dt r|`.
pub fn theta_step(
    s: &ScalarField,
    coeffs: &LinearCoefficients,
    dt: f64,
    theta: f64,
) -> Result<ScalarField> {
    let grid = *s.grid();
    let n = grid.len();
    let h = grid.h();
    let v = s.values();

    let mut m = Tridiagonal::with_size(n);
    let mut rhs = vec![0.0; n];
    m.diag[0] = 1.0;
    m.diag[n - 1] = 1.0;
    for i in 1..n - 1 {
        let (lo, di, up) = interior_stencil(coeffs.diffusivity[i], coeffs.velocity[i], h);
        m.lower[i] = -theta * dt * lo;
        m.diag[i] = 1.0 - theta * dt * di;
        m.upper[i] = -theta * dt * up;
        let explicit = lo * v[i - 1] + di * v[i] + up * v[i + 1];
        rhs[i] = v[i] + dt * ((1.0 - theta) * explicit + coeffs.source[i]);
    }
    let mut next = m.solve(&rhs)?;
    next[0] = 0.0;
    next[n - 1] = 0.0;
    Ok(ScalarField::from_raw(grid, next))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub c: f64,
    pub nu: f64,
    pub kappa: f64,
    pub dt: f64,
    pub theta: f64,
    /// Largest accepted L∞ change of `S` in one step; `None` disables it.
    pub guard: Option<f64>,
}

/// Frozen coefficients of one order-parameter step.
///
/// The reaction `−𝓕(|S_x|_κ − κ)` is carried as transport `−v S_x` with
/// `v = 𝓕 S_x/(|S_x|_κ + κ)`, using `|p|_κ − κ = p²/(|p|_κ + κ)`. It
/// vanishes wherever `S_x` does, so discrete extrema are not pushed outward.
pub fn step_coefficients(
    s: &ScalarField,
    f: &ScalarField,
    params: &StepParams,
) -> LinearCoefficients {
    let s_x = d1(s);
    let kappa = params.kappa;
    let diffusivity = s_x
        .values()
        .iter()
        .map(|&p| params.c * params.nu * abs_kappa(p, kappa))
        .collect();
    let velocity = s_x
        .values()
        .iter()
        .zip(f.values())
        .map(|(&p, &fv)| fv * p / (abs_kappa(p, kappa) + kappa))
        .collect();
    LinearCoefficients {
        diffusivity,
        velocity,
        source: vec![0.0; s.grid().len()],
    }
}

/// One semi-implicit step of the order-parameter equation starting at time
/// `t`, with all coefficients frozen at the current state.
pub fn step(s: &ScalarField, f: &ScalarField, params: &StepParams, t: f64) -> Result<ScalarField> {
    let coeffs = step_coefficients(s, f, params);
    let next = theta_step(s, &coeffs, params.dt, params.theta)?;
    let increment = next.max_abs_diff(s);
    if !next.is_finite() || params.guard.is_some_and(|g| !(increment <= g)) {
        return Err(Error::StepRejected {
            t,
            increment,
            guard: params.guard.unwrap_or(f64::INFINITY),
        });
    }
    Ok(next)
}
