use std::f64::consts::PI;

use crate::grid::{d1, trapezoid_nonuniform, Grid, ScalarField, Trajectory};
use crate::material::MaterialParams;
use crate::order_parameter::compute_calf;

pub(super) const DEFAULT_MODES: usize = 5;

/// `φ(t, x) = A cos(πt/2T) sin(mπ(x − a)/(d − a))`: vanishes at both ends of
/// the interval and at `t = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub mode: usize,
    pub amplitude: f64,
    pub t_end: f64,
}

impl TestFunction {
    fn eta(&self, t: f64) -> (f64, f64) {
        let w = 0.5 * PI / self.t_end;
        ((w * t).cos(), -w * (w * t).sin())
    }

    fn space(&self, grid: &Grid, x: f64) -> (f64, f64) {
        let k = self.mode as f64 * PI / grid.length();
        let arg = k * (x - grid.a());
        (arg.sin(), k * arg.cos())
    }

    /// `(φ, φ_t, φ_x)` at `(t, x)`.
    pub fn eval(&self, grid: &Grid, t: f64, x: f64) -> (f64, f64, f64) {
        let (e, et) = self.eta(t);
        let (s, sx) = self.space(grid, x);
        let a = self.amplitude;
        (a * e * s, a * et * s, a * e * sx)
    }
}

/// Modes 1..=5 with unit amplitude.
pub fn default_test_set(t_end: f64) -> Vec<TestFunction> {
    (1..=DEFAULT_MODES)
        .map(|mode| TestFunction {
            mode,
            amplitude: 1.0,
            t_end,
        })
        .collect()
}

/// Residual of the weak formulation (divergence form, `κ = 0`)
///
/// ```text
/// (S, φ_t) − (cν/2)(|S_x| S_x, φ_x) − (𝓕|S_x|, φ) + (S₀, φ(0))
/// ```
///
/// for each test function, with space-time trapezoidal quadrature over the
/// saved frames. `𝓕` is rebuilt from the saved `u`.
pub fn weak_residual(
    traj: &Trajectory,
    params: &MaterialParams,
    tests: &[TestFunction],
) -> Vec<f64> {
    let Some(grid) = traj.grid().copied() else {
        return vec![0.0; tests.len()];
    };
    let frames: Vec<(ScalarField, ScalarField, ScalarField)> = traj
        .s
        .iter()
        .zip(&traj.u)
        .map(|(s, u)| {
            let sx = d1(s);
            let f = compute_calf(u, &d1(u), s, &sx, params);
            (s.clone(), sx, f)
        })
        .collect();
    let half_cnu = 0.5 * params.c * params.nu;

    tests
        .iter()
        .map(|phi| {
            if phi.amplitude == 0.0 {
                return 0.0;
            }
            let per_time: Vec<f64> = traj
                .times
                .iter()
                .zip(&frames)
                .map(|(&t, (s, sx, f))| {
                    let integrand: Vec<f64> = (0..grid.len())
                        .map(|i| {
                            let (p, pt, px) = phi.eval(&grid, t, grid.x(i));
                            let (sv, q, fv) = (s.values()[i], sx.values()[i], f.values()[i]);
                            sv * pt - half_cnu * q.abs() * q * px - fv * q.abs() * p
                        })
                        .collect();
                    ScalarField::from_raw(grid, integrand).integral()
                })
                .collect();
            let initial = ScalarField::from_fn(grid, |x| phi.eval(&grid, traj.times[0], x).0);
            trapezoid_nonuniform(&traj.times, &per_time) + traj.s[0].inner(&initial)
        })
        .collect()
}
