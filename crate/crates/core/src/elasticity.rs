//! Radial elasticity: `u_xx + (2/x)u_x − (2/x²)u = 𝓖` with `u(a) = u(d) = 0`.
//!
//! Multiplying by `x²` gives the Sturm–Liouville form `L[u] = (x² u′)′ − 2u`.
//! Its homogeneous solutions are `x` and `x⁻²`; the kernel is assembled from
//! the combinations that vanish at either end.
//!
//! Two solution paths are provided. [`solve_direct`] assembles the 3-point
//! finite-difference system and eliminates it in O(n); it is the path used
//! inside the time loop. [`solve_via_green`] integrates the closed-form Green
//! function against the data and serves as an independent check.

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::material::MaterialParams;
use crate::tridiag::Tridiagonal;

/// `x − r³/x²`: solves `L[u] = 0` and vanishes at `x = r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousSolution {
    root: f64,
}

impl HomogeneousSolution {
    pub fn vanishing_at(root: f64) -> Self {
        Self { root }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        x - self.root.powi(3) / (x * x)
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        1.0 + 2.0 * self.root.powi(3) / x.powi(3)
    }

    #[inline]
    pub fn second_derivative(&self, x: f64) -> f64 {
        -6.0 * self.root.powi(3) / x.powi(4)
    }
}

/// `(u₁, u₂)` with `u₁(a) = 0`, `u₂(d) = 0`.
pub fn homogeneous_solutions(a: f64, d: f64) -> (HomogeneousSolution, HomogeneousSolution) {
    (
        HomogeneousSolution::vanishing_at(a),
        HomogeneousSolution::vanishing_at(d),
    )
}

/// `L[f](x) = x² f″ + 2x f′ − 2f` from pointwise derivative values.
#[inline]
pub fn sturm_liouville(x: f64, f: f64, df: f64, d2f: f64) -> f64 {
    x * x * d2f + 2.0 * x * df - 2.0 * f
}

/// Closed-form Green function of `L` with homogeneous Dirichlet conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenKernel {
    a: f64,
    d: f64,
    left: HomogeneousSolution,
    right: HomogeneousSolution,
    /// `p(x)·W(u₁, u₂)(x) = 3(d³ − a³)`, independent of `x`.
    normalization: f64,
}

impl GreenKernel {
    pub fn new(a: f64, d: f64) -> Result<Self> {
        if !(a > 0.0 && a < d) {
            return Err(Error::validation("Green kernel requires 0 < a < d"));
        }
        let (left, right) = homogeneous_solutions(a, d);
        Ok(Self {
            a,
            d,
            left,
            right,
            normalization: 3.0 * (d.powi(3) - a.powi(3)),
        })
    }

    pub fn for_grid(grid: &Grid) -> Self {
        Self::new(grid.a(), grid.d()).expect("grid bounds are valid")
    }

    pub fn left(&self) -> &HomogeneousSolution {
        &self.left
    }

    pub fn right(&self) -> &HomogeneousSolution {
        &self.right
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `x²·(u₁u₂′ − u₁′u₂)` evaluated at `x`; should equal
    /// [`normalization`](Self::normalization) everywhere.
    pub fn wronskian_product(&self, x: f64) -> f64 {
        let (l, r) = (&self.left, &self.right);
        x * x * (l.value(x) * r.derivative(x) - l.derivative(x) * r.value(x))
    }

    fn check(&self, v: f64) -> Result<()> {
        if v < self.a || v > self.d || v.is_nan() {
            return Err(Error::OutOfDomain {
                value: v,
                lo: self.a,
                hi: self.d,
            });
        }
        Ok(())
    }

    /// `G(x, y) = u₁(min)·u₂(max) / (p W)`.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        Ok(self.left.value(lo) * self.right.value(hi) / self.normalization)
    }

    /// `∂G/∂x` for `x ≠ y`; at `x = y` the limit from above is returned.
    pub fn dx(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(if x < y {
            self.left.derivative(x) * self.right.value(y)
        } else {
            self.left.value(y) * self.right.derivative(x)
        } / self.normalization)
    }

    /// `∂²G/∂x²` for `x ≠ y`.
    pub fn dxx(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(if x < y {
            self.left.second_derivative(x) * self.right.value(y)
        } else {
            self.left.value(y) * self.right.second_derivative(x)
        } / self.normalization)
    }

    /// `∂G/∂y` for `y ≠ x`; at `y = x` the limit from above is returned.
    pub fn dy(&self, x: f64, y: f64) -> Result<f64> {
        self.dx(y, x)
    }
}

/// Pointwise `𝓖 = (λ/μ)·S_x + b/μ`.
pub fn compute_calg(s_x: &ScalarField, b: &ScalarField, params: &MaterialParams) -> ScalarField {
    let (lam, mu) = (params.lambda, params.mu);
    s_x.zip_map(b, |_, sx, bv| lam / mu * sx + bv / mu)
}

/// The finite-difference elasticity system with each interior row scaled by
/// `h²`:
///
/// ```text
/// (1 − h/xᵢ) u_{i−1} − (2 + 2h²/xᵢ²) uᵢ + (1 + h/xᵢ) u_{i+1} = h² 𝓖ᵢ
/// ```
///
/// Boundary rows are the identity.
pub fn elasticity_matrix(grid: &Grid) -> Tridiagonal {
    let n = grid.len();
    let h = grid.h();
    let mut m = Tridiagonal::with_size(n);
    m.diag[0] = 1.0;
    m.diag[n - 1] = 1.0;
    for i in 1..n - 1 {
        let x = grid.x(i);
        m.lower[i] = 1.0 - h / x;
        m.diag[i] = -(2.0 + 2.0 * h * h / (x * x));
        m.upper[i] = 1.0 + h / x;
    }
    m
}

fn elasticity_rhs(calg: &ScalarField) -> Vec<f64> {
    let h2 = calg.grid().h().powi(2);
    let n = calg.values().len();
    let mut rhs: Vec<f64> = calg.values().iter().map(|g| h2 * g).collect();
    rhs[0] = 0.0;
    rhs[n - 1] = 0.0;
    rhs
}

/// Solves the discrete elasticity equation with zero Dirichlet data.
pub fn solve_direct(calg: &ScalarField) -> Result<ScalarField> {
    let m = elasticity_matrix(calg.grid());
    let mut u = m.solve(&elasticity_rhs(calg))?;
    let n = u.len();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    Ok(ScalarField::from_raw(*calg.grid(), u))
}

/// Max-norm residual of `u` in the `h²`-scaled discrete system.
pub fn discrete_residual(u: &ScalarField, calg: &ScalarField) -> f64 {
    elasticity_matrix(u.grid()).residual(u.values(), &elasticity_rhs(calg))
}

/// Evaluates
///
/// ```text
/// u(x) = (1/μ)∫G y² b dy − (λ/μ)∫2G y S dy − (λ/μ)∫G_y y² S dy
/// ```
///
/// at every node by trapezoidal quadrature split at `y = x`. On each side the
/// kernel factorizes (`G = u₁(y)u₂(x)/pW` below the diagonal, `u₁(x)u₂(y)/pW`
/// above it), so the per-node integrals reduce to running prefix and suffix
/// sums and the whole evaluation is O(n).
pub fn solve_via_green(
    kernel: &GreenKernel,
    s_moll: &ScalarField,
    b: &ScalarField,
    params: &MaterialParams,
) -> ScalarField {
    let grid = *s_moll.grid();
    let n = grid.len();
    let h = grid.h();
    let (inv_mu, lam_mu) = (1.0 / params.mu, params.lambda / params.mu);
    let (u1, u2) = (kernel.left(), kernel.right());

    let integrand = |sol: &HomogeneousSolution, j: usize| {
        let y = grid.x(j);
        let (s, bv) = (s_moll.values()[j], b.values()[j]);
        inv_mu * sol.value(y) * y * y * bv
            - lam_mu * (2.0 * sol.value(y) * y + sol.derivative(y) * y * y) * s
    };
    let below: Vec<f64> = (0..n).map(|j| integrand(u1, j)).collect();
    let above: Vec<f64> = (0..n).map(|j| integrand(u2, j)).collect();

    let mut prefix = vec![0.0; n];
    for i in 1..n {
        prefix[i] = prefix[i - 1] + 0.5 * h * (below[i - 1] + below[i]);
    }
    let mut suffix = vec![0.0; n];
    for i in (0..n - 1).rev() {
        suffix[i] = suffix[i + 1] + 0.5 * h * (above[i] + above[i + 1]);
    }

    let norm = kernel.normalization();
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            let x = grid.x(i);
            (u2.value(x) * prefix[i] + u1.value(x) * suffix[i]) / norm
        })
        .collect();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    ScalarField::from_raw(grid, u)
}

/// Summary of the kernel's defining properties on a set of sample pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenReport {
    pub symmetry_max: f64,
    pub boundary_max: f64,
    /// `|J − 1/y²|` for the Richardson-extrapolated finite-difference jump.
    pub jump_error_max: f64,
    /// `|L[G(·, y)](x)|` off the diagonal.
    pub residual_max: f64,
    /// Spread of `p·W` over the sample abscissae.
    pub wronskian_spread: f64,
}

/// Jump of `∂G/∂x` across `x = y` measured at offset `delta`.
pub fn derivative_jump(kernel: &GreenKernel, y: f64, delta: f64) -> Result<f64> {
    Ok(kernel.dx(y + delta, y)? - kernel.dx(y - delta, y)?)
}

/// `count` pairs `(x, y)` drawn uniformly from the open square `(a, d)²`,
/// reproducible from `seed`.
pub fn sample_pairs(a: f64, d: f64, count: usize, seed: u64) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let lo = a + 1e-3 * (d - a);
    let hi = d - 1e-3 * (d - a);
    (0..count)
        .map(|_| (rng.random_range(lo..hi), rng.random_range(lo..hi)))
        .collect()
}

/// Checks symmetry, boundary vanishing, derivative jump and the homogeneous
/// equation for every `(x, y)` in `pairs`. Jump offsets `delta` and
/// `delta/2` are combined by Richardson extrapolation.
pub fn verify_green(kernel: &GreenKernel, pairs: &[(f64, f64)], delta: f64) -> Result<GreenReport> {
    let mut r = GreenReport {
        symmetry_max: 0.0,
        boundary_max: 0.0,
        jump_error_max: 0.0,
        residual_max: 0.0,
        wronskian_spread: 0.0,
    };
    let (a, d) = (kernel.a, kernel.d);
    let (mut w_lo, mut w_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pairs {
        r.symmetry_max = r
            .symmetry_max
            .max((kernel.eval(x, y)? - kernel.eval(y, x)?).abs());
        r.boundary_max = r
            .boundary_max
            .max(kernel.eval(a, y)?.abs())
            .max(kernel.eval(d, y)?.abs());
        if y - delta > a && y + delta < d {
            let j1 = derivative_jump(kernel, y, delta)?;
            let j2 = derivative_jump(kernel, y, 0.5 * delta)?;
            let extrapolated = 2.0 * j2 - j1;
            r.jump_error_max = r.jump_error_max.max((extrapolated - 1.0 / (y * y)).abs());
        }
        if x != y {
            let res = sturm_liouville(x, kernel.eval(x, y)?, kernel.dx(x, y)?, kernel.dxx(x, y)?);
            r.residual_max = r.residual_max.max(res.abs());
        }
        for v in [x, y] {
            let w = kernel.wronskian_product(v);
            w_lo = w_lo.min(w);
            w_hi = w_hi.max(w);
        }
    }
    if w_hi >= w_lo {
        r.wronskian_spread = w_hi - w_lo;
    }
    Ok(r)
}
