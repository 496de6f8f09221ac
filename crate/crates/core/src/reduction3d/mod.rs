//! Residual check that radial fields lifted to 3D by
//!
//! ```text
//! u(x) = û(r) x/r,   S(x) = Ŝ(r),   b(x) = b̂(r) x/r,   r = |x|
//! ```
//!
//! satisfy the 3D balance `div T = b` with `T = D(ε(∇u) − ε̄S)` and the 3D
//! order-parameter equation `S_t + c(ψ_S − νΔS)|∇S| = 0`.
//!
//! Derivatives are nested second-order central differences with step `h3`
//! in an orthonormal frame `(x/r, t₁, t₂)` attached to each sample point.
//! Radial fields are symmetric about that axis, so the residual at `Rx`
//! equals the residual at `x` for every rotation `R`, up to rounding.

mod spline;

pub use spline::CubicSpline;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::material::{
    check_tensor_assumptions, free_energy_ds, scalar_coefficients, ElasticityTensor, Mat3,
    MaterialParams, MisfitStrain,
};

pub type Vec3 = [f64; 3];

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function of the radius: either interpolated from nodal values or given
/// in closed form together with its derivative.
#[derive(Clone)]
pub enum RadialProfile {
    Spline(CubicSpline),
    Analytic { f: RadialFn, df: RadialFn },
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RadialProfile::Spline(s) => f.debug_tuple("Spline").field(s).finish(),
            RadialProfile::Analytic { .. } => f.write_str("Analytic"),
        }
    }
}

impl RadialProfile {
    pub fn from_field(field: &ScalarField) -> Result<Self> {
        Ok(RadialProfile::Spline(CubicSpline::interpolate(field)?))
    }

    pub fn analytic(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RadialProfile::Analytic {
            f: Arc::new(f),
            df: Arc::new(df),
        }
    }

    pub fn zero() -> Self {
        Self::analytic(|_| 0.0, |_| 0.0)
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::Spline(s) => s.eval(r).map(|v| v.0),
            RadialProfile::Analytic { f, .. } => Ok(f(r)),
        }
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::Spline(s) => s.eval(r).map(|v| v.1),
            RadialProfile::Analytic { df, .. } => Ok(df(r)),
        }
    }
}

/// Radial profiles of `û, Ŝ, b̂` on the shell `a < r < d`, with the tensors
/// they are lifted with.
#[derive(Debug, Clone)]
pub struct RadialLift {
    pub a: f64,
    pub d: f64,
    pub u: RadialProfile,
    pub s: RadialProfile,
    pub b: RadialProfile,
    tensor: ElasticityTensor,
    misfit: MisfitStrain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedFields {
    pub u: Vec3,
    pub s: f64,
    pub b: Vec3,
}

fn norm(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn axpy(x: &Vec3, alpha: f64, e: &Vec3) -> Vec3 {
    [
        x[0] + alpha * e[0],
        x[1] + alpha * e[1],
        x[2] + alpha * e[2],
    ]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl RadialLift {
    /// Fails with `AssumptionViolated` unless the tensors satisfy the
    /// conditions under which the radial reduction holds.
    pub fn new(
        a: f64,
        d: f64,
        u: RadialProfile,
        s: RadialProfile,
        b: RadialProfile,
        tensor: ElasticityTensor,
        misfit: MisfitStrain,
    ) -> Result<Self> {
        let report = check_tensor_assumptions(&tensor, &misfit);
        if !report.reduction_conditions_hold() {
            return Err(Error::AssumptionViolated(Box::new(report)));
        }
        Ok(Self {
            a,
            d,
            u,
            s,
            b,
            tensor,
            misfit,
        })
    }

    /// Lift of one saved frame.
    pub fn from_frames(
        u: &ScalarField,
        s: &ScalarField,
        b: &ScalarField,
        tensor: ElasticityTensor,
        misfit: MisfitStrain,
    ) -> Result<Self> {
        let g = u.grid();
        Self::new(
            g.a(),
            g.d(),
            RadialProfile::from_field(u)?,
            RadialProfile::from_field(s)?,
            RadialProfile::from_field(b)?,
            tensor,
            misfit,
        )
    }

    pub fn tensor(&self) -> &ElasticityTensor {
        &self.tensor
    }

    pub fn misfit(&self) -> &MisfitStrain {
        &self.misfit
    }

    fn radius(&self, x: &Vec3) -> Result<f64> {
        let r = norm(x);
        if !(r > self.a && r < self.d) {
            return Err(Error::OutOfDomain {
                value: r,
                lo: self.a,
                hi: self.d,
            });
        }
        Ok(r)
    }

    pub fn lift(&self, x: &Vec3) -> Result<LiftedFields> {
        let r = self.radius(x)?;
        let (u, b) = (self.u.value(r)? / r, self.b.value(r)? / r);
        Ok(LiftedFields {
            u: [u * x[0], u * x[1], u * x[2]],
            s: self.s.value(r)?,
            b: [b * x[0], b * x[1], b * x[2]],
        })
    }

    fn u_at(&self, x: &Vec3) -> Result<Vec3> {
        self.lift(x).map(|f| f.u)
    }

    fn s_at(&self, x: &Vec3) -> Result<f64> {
        self.radius(x).and_then(|r| self.s.value(r))
    }

    /// `ε(∇u)` at `y` by central differences along `frame`.
    fn strain(&self, y: &Vec3, frame: &[Vec3; 3], h: f64) -> Result<Mat3> {
        let mut grad = [[0.0; 3]; 3];
        for e in frame {
            let up = self.u_at(&axpy(y, h, e))?;
            let um = self.u_at(&axpy(y, -h, e))?;
            for i in 0..3 {
                let du = (up[i] - um[i]) / (2.0 * h);
                for j in 0..3 {
                    grad[i][j] += du * e[j];
                }
            }
        }
        let mut eps = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                eps[i][j] = 0.5 * (grad[i][j] + grad[j][i]);
            }
        }
        Ok(eps)
    }

    /// `T = D(ε(∇u) − ε̄S)` at `y`.
    fn stress(&self, y: &Vec3, frame: &[Vec3; 3], h: f64) -> Result<Mat3> {
        let mut x = self.strain(y, frame, h)?;
        let s = self.s_at(y)?;
        for (row, bar) in x.iter_mut().zip(self.misfit.matrix()) {
            for (v, b) in row.iter_mut().zip(bar) {
                *v -= b * s;
            }
        }
        Ok(self.tensor.apply(&x))
    }

    /// `|div T − b|` at `x`, with `(div T)_l = Σ_k ∂_k T_kl`.
    pub fn elasticity_residual_at(&self, x: &Vec3, h3: f64) -> Result<f64> {
        let frame = local_frame(x);
        let mut div = [0.0; 3];
        for e in &frame {
            let tp = self.stress(&axpy(x, h3, e), &frame, h3)?;
            let tm = self.stress(&axpy(x, -h3, e), &frame, h3)?;
            for l in 0..3 {
                for k in 0..3 {
                    div[l] += e[k] * (tp[k][l] - tm[k][l]) / (2.0 * h3);
                }
            }
        }
        let b = self.lift(x)?.b;
        Ok(norm(&[div[0] - b[0], div[1] - b[1], div[2] - b[2]]))
    }

    /// `(ψ_S(ε(∇u), S) − νΔS)·c·|∇S|` at `x`, the spatial part of the
    /// order-parameter equation.
    pub fn order_operator_at(&self, x: &Vec3, h3: f64, params: &MaterialParams) -> Result<f64> {
        let frame = local_frame(x);
        let s0 = self.s_at(x)?;
        let mut lap = 0.0;
        let mut grad_sq = 0.0;
        for e in &frame {
            let sp = self.s_at(&axpy(x, h3, e))?;
            let sm = self.s_at(&axpy(x, -h3, e))?;
            lap += (sp - 2.0 * s0 + sm) / (h3 * h3);
            grad_sq += ((sp - sm) / (2.0 * h3)).powi(2);
        }
        let eps = self.strain(x, &frame, h3)?;
        let psi_s = free_energy_ds(&eps, s0, &self.tensor, &self.misfit, params.well_weight);
        Ok(params.c * (psi_s - params.nu * lap) * grad_sq.sqrt())
    }

    /// `|Dε(∇u)·ε̄ − λ(û_r + 2û/r)|` at `x`, with `û_r` from the profile.
    pub fn identity_residual_at(&self, x: &Vec3, h3: f64) -> Result<f64> {
        let r = self.radius(x)?;
        let lambda = scalar_coefficients(&self.tensor, &self.misfit)?.lambda;
        let eps = self.strain(x, &local_frame(x), h3)?;
        let lhs = self.tensor.contract(&eps, self.misfit.matrix());
        let rhs = lambda * (self.u.derivative(r)? + 2.0 * self.u.value(r)? / r);
        Ok((lhs - rhs).abs())
    }
}

/// Orthonormal frame whose first axis is `x/|x|`. The tangents are built
/// from the coordinate axis least aligned with `x`.
pub fn local_frame(x: &Vec3) -> [Vec3; 3] {
    let r = norm(x);
    let e1 = [x[0] / r, x[1] / r, x[2] / r];
    let k = (0..3)
        .min_by(|&i, &j| e1[i].abs().total_cmp(&e1[j].abs()))
        .unwrap_or(0);
    let mut axis = [0.0; 3];
    axis[k] = 1.0;
    let t = cross(&e1, &axis);
    let nt = norm(&t);
    let e2 = [t[0] / nt, t[1] / nt, t[2] / nt];
    let e3 = cross(&e1, &e2);
    [e1, e2, e3]
}

fn max_over(points: &[Vec3], f: impl Fn(&Vec3) -> Result<f64>) -> Result<f64> {
    points.iter().try_fold(0.0, |m, x| Ok(f64::max(m, f(x)?)))
}

pub fn elasticity_residuals(lift: &RadialLift, points: &[Vec3], h3: f64) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|x| lift.elasticity_residual_at(x, h3))
        .collect()
}

/// Max of `|div T − b|` over the sample points.
pub fn residual_elasticity_3d(lift: &RadialLift, points: &[Vec3], h3: f64) -> Result<f64> {
    max_over(points, |x| lift.elasticity_residual_at(x, h3))
}

pub fn order_residuals(
    now: &RadialLift,
    next: &RadialLift,
    params: &MaterialParams,
    points: &[Vec3],
    h3: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|x| {
            let st = (next.s_at(x)? - now.s_at(x)?) / dt;
            Ok((st + now.order_operator_at(x, h3, params)?).abs())
        })
        .collect()
}

/// Max of `|S_t + c(ψ_S − νΔS)|∇S||` over the sample points, with a forward
/// difference between the two lifts in time. Only `c`, `ν` and the well
/// weight are read from `params`; the elastic part comes from the tensors.
pub fn residual_order_3d(
    now: &RadialLift,
    next: &RadialLift,
    params: &MaterialParams,
    points: &[Vec3],
    h3: f64,
    dt: f64,
) -> Result<f64> {
    let r = order_residuals(now, next, params, points, h3, dt)?;
    Ok(r.into_iter().fold(0.0, f64::max))
}

/// Max of `|Dε(∇u)·ε̄ − λ(û_r + 2û/r)|` over the sample points.
pub fn identity_residual(lift: &RadialLift, points: &[Vec3], h3: f64) -> Result<f64> {
    max_over(points, |x| lift.identity_residual_at(x, h3))
}

/// Right-hand side `Ŝ_t = −(−cνŜ_rr + 𝓕)|Ŝ_r|` of the reduced equation at
/// `κ = 0`, from radial values and derivatives.
#[allow(clippy::too_many_arguments)]
pub fn reduced_order_rate(
    r: f64,
    s: f64,
    s_r: f64,
    s_rr: f64,
    u: f64,
    u_r: f64,
    params: &MaterialParams,
) -> f64 {
    let p = params;
    let well = crate::material::double_well(s, p.well_weight).1;
    let f = p.c * (-p.lambda * (u_r + 2.0 * u / r) + p.e * s + well) - 2.0 * p.c * p.nu * s_r / r;
    -(-p.c * p.nu * s_rr + f) * s_r.abs()
}

/// `count` points with radius uniform in `[a + margin, d − margin]` and
/// direction uniform on the sphere, reproducible from `seed`.
pub fn sample_shell_points(a: f64, d: f64, margin: f64, count: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.random_range(a + margin..d - margin);
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let rho = (1.0 - z * z).sqrt();
            [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
        })
        .collect()
}

/// Rotation by `angle` about `axis` (Rodrigues).
pub fn rotation(axis: Vec3, angle: f64) -> Mat3 {
    let n = norm(&axis);
    let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

pub fn rotate(points: &[Vec3], rot: &Mat3) -> Vec<Vec3> {
    points
        .iter()
        .map(|p| {
            let mut q = [0.0; 3];
            for (qi, row) in q.iter_mut().zip(rot) {
                *qi = row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
            }
            q
        })
        .collect()
}
