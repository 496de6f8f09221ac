//! Run-time monitors for the a-priori estimates, the weak-solution residual,
//! κ-refinement studies and manufactured-solution convergence checks.
//!
//! Every monitor is a pure function of a trajectory and the run config, so
//! recomputing from persisted frames reproduces the stored values exactly.

mod mms;
mod study;
mod weak;

pub use mms::{mms_convergence, MmsFamily, MmsResult};
pub use study::{kappa_distances, kappa_study, run_study, StudyOutcome, StudyRow, StudyTable};
pub use weak::{default_test_set, weak_residual, TestFunction};

use crate::config::SimulationConfig;
use crate::error::Result;
use crate::grid::{d1, d2, Exponent, ScalarField, Trajectory};
use crate::order_parameter::{abs_kappa, primitive_abs_kappa};

/// Margin by which `max|S|` over the run exceeds `max|S₀|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPrinciple {
    pub margin: f64,
    pub pass: bool,
}

pub const MAX_PRINCIPLE_TOL: f64 = 1e-8;

pub fn max_principle_check(traj: &Trajectory) -> MaxPrinciple {
    let Some(first) = traj.s.first() else {
        return MaxPrinciple {
            margin: 0.0,
            pass: true,
        };
    };
    let initial = first.norm_linf();
    let overall = traj
        .s
        .iter()
        .map(ScalarField::norm_linf)
        .fold(0.0, f64::max);
    let margin = overall - initial;
    MaxPrinciple {
        margin,
        pass: margin <= MAX_PRINCIPLE_TOL,
    }
}

/// `‖S_x(t)‖²` and `∫₀ᵗ∫ |S_x|_κ S_xx²` at every saved time, with constants of
/// the differential bound `d/dt ‖S_x‖² ≤ C₁‖S_x‖² + C₂` fitted to the data.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMonitor {
    pub grad_sq: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub sup_grad_sq: f64,
    pub c1: f64,
    pub c2: f64,
    pub dissipation_nondecreasing: bool,
}

pub fn energy_monitor(traj: &Trajectory, kappa: f64) -> EnergyMonitor {
    let grad_sq: Vec<f64> = traj.s.iter().map(|s| d1(s).norm_l2().powi(2)).collect();
    let density: Vec<f64> = traj
        .s
        .iter()
        .map(|s| {
            let sx = d1(s);
            let sxx = d2(s);
            sx.zip_map(&sxx, |_, p, q| abs_kappa(p, kappa) * q * q)
                .integral()
        })
        .collect();
    let dissipation = cumulative_trapezoid(&traj.times, &density);

    let rates: Vec<(f64, f64)> = (1..traj.len())
        .map(|k| {
            (
                grad_sq[k - 1],
                (grad_sq[k] - grad_sq[k - 1]) / (traj.times[k] - traj.times[k - 1]),
            )
        })
        .collect();
    let c1 = least_squares_slope(&rates).max(0.0);
    let c2 = rates.iter().map(|(g, r)| r - c1 * g).fold(0.0, f64::max);

    EnergyMonitor {
        sup_grad_sq: grad_sq.iter().copied().fold(0.0, f64::max),
        dissipation_nondecreasing: dissipation.windows(2).all(|w| w[1] >= w[0]),
        grad_sq,
        dissipation,
        c1,
        c2,
    }
}

/// Space-time norms from the a-priori estimates, over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriNorms {
    /// `‖S_t‖_{L^{4/3}(Q)}`
    pub st_l43: f64,
    /// `‖S_x‖_{L^{8/3}(0,T; L^∞)}`
    pub sx_l83_linf: f64,
    /// `‖(|S_x| S_x)_x‖_{L^{4/3}(Q)}`
    pub flux_x_l43: f64,
    /// `‖∫₀^{S_x} |y|_κ dy‖_{L^{4/3}(0,T; W^{1,4/3})}`
    pub primitive_w143: f64,
}

impl AprioriNorms {
    pub fn is_finite(&self) -> bool {
        [
            self.st_l43,
            self.sx_l83_linf,
            self.flux_x_l43,
            self.primitive_w143,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Cumulative a-priori norms at every saved time.
#[derive(Debug, Clone, PartialEq)]
pub struct AprioriSeries {
    pub st_l43: Vec<f64>,
    pub sx_l83_linf: Vec<f64>,
    pub flux_x_l43: Vec<f64>,
    pub primitive_w143: Vec<f64>,
}

pub fn apriori_series(traj: &Trajectory, kappa: f64) -> AprioriSeries {
    let p43 = Exponent::FourThirds.value();
    let p83 = Exponent::EightThirds.value();
    let times = &traj.times;

    // S_t as the difference quotient, constant on each interval
    let mut st_acc = vec![0.0; traj.len()];
    for k in 1..traj.len() {
        let dt = times[k] - times[k - 1];
        let q = traj.s[k].zip_map(&traj.s[k - 1], |_, a, b| ((a - b) / dt).abs().powf(p43));
        st_acc[k] = st_acc[k - 1] + dt * q.integral();
    }

    let mut sx_inf = Vec::with_capacity(traj.len());
    let mut flux = Vec::with_capacity(traj.len());
    let mut prim = Vec::with_capacity(traj.len());
    for s in &traj.s {
        let sx = d1(s);
        sx_inf.push(sx.norm_linf().powf(p83));
        let half_flux = sx.map(|p| 0.5 * p * p.abs());
        flux.push(
            d1(&half_flux)
                .map(|v| 2.0 * v)
                .norm_lq(Exponent::FourThirds)
                .powf(p43),
        );
        let pr = sx.map(|p| primitive_abs_kappa(p, kappa));
        let w = pr.norm_lq(Exponent::FourThirds).powf(p43)
            + d1(&pr).norm_lq(Exponent::FourThirds).powf(p43);
        prim.push(w);
    }
    let root = |v: Vec<f64>, p: f64| v.into_iter().map(|x| x.powf(1.0 / p)).collect::<Vec<_>>();
    AprioriSeries {
        st_l43: root(st_acc, p43),
        sx_l83_linf: root(cumulative_trapezoid(times, &sx_inf), p83),
        flux_x_l43: root(cumulative_trapezoid(times, &flux), p43),
        primitive_w143: root(cumulative_trapezoid(times, &prim), p43),
    }
}

pub fn apriori_norms(traj: &Trajectory, kappa: f64) -> AprioriNorms {
    let s = apriori_series(traj, kappa);
    let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
    AprioriNorms {
        st_l43: last(&s.st_l43),
        sx_l83_linf: last(&s.sx_l83_linf),
        flux_x_l43: last(&s.flux_x_l43),
        primitive_w143: last(&s.primitive_w143),
    }
}

/// `sin²(mπξ)`, `m = 1..=modes`, scaled to unit discrete H² norm. Each
/// vanishes with its first derivative at both ends.
pub fn default_dual_basis(grid: &crate::grid::Grid, modes: usize) -> Vec<ScalarField> {
    (1..=modes)
        .map(|m| {
            let phi = ScalarField::from_fn(*grid, |x| {
                let xi = (x - grid.a()) / grid.length();
                (m as f64 * std::f64::consts::PI * xi).sin().powi(2)
            });
            normalize_h2(&phi)
        })
        .collect()
}

/// Scales `phi` to unit discrete H² norm; the zero function stays zero.
pub fn normalize_h2(phi: &ScalarField) -> ScalarField {
    let norm =
        (phi.norm_l2().powi(2) + d1(phi).norm_l2().powi(2) + d2(phi).norm_l2().powi(2)).sqrt();
    if norm == 0.0 {
        phi.clone()
    } else {
        phi.map(|v| v / norm)
    }
}

/// Cumulative `sup_φ Σ_k |(gᵏ⁺¹ − gᵏ, φ)|` with `g = ½S_x|S_x|`. A lower
/// bound proxy for the `L¹(0,t; H⁻²)` norm of `g_t`, not the norm itself.
pub fn dual_norm_series(traj: &Trajectory, basis: &[ScalarField]) -> Vec<f64> {
    let g: Vec<ScalarField> = traj
        .s
        .iter()
        .map(|s| d1(s).map(|p| 0.5 * p * p.abs()))
        .collect();
    let mut acc = vec![0.0; basis.len()];
    let mut out = vec![0.0; traj.len()];
    for k in 1..traj.len() {
        let dg = g[k].axpby(1.0, &g[k - 1], -1.0);
        for (a, phi) in acc.iter_mut().zip(basis) {
            *a += dg.inner(phi).abs();
        }
        out[k] = acc.iter().copied().fold(0.0, f64::max);
    }
    out
}

pub fn dual_norm_estimate(traj: &Trajectory, basis: &[ScalarField]) -> f64 {
    dual_norm_series(traj, basis).last().copied().unwrap_or(0.0)
}

/// Everything the monitors report for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub times: Vec<f64>,
    pub max_abs_s: Vec<f64>,
    pub energy: EnergyMonitor,
    pub apriori: AprioriSeries,
    /// Labelled "proxy": a lower bound for the dual norm.
    pub dual_proxy: Vec<f64>,
    pub elasticity_discrepancy: Vec<f64>,
    pub max_principle: MaxPrinciple,
    /// One value per function of [`default_test_set`].
    pub weak_residual: Vec<f64>,
}

impl DiagnosticsReport {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_norms(&self) -> AprioriNorms {
        let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
        AprioriNorms {
            st_l43: last(&self.apriori.st_l43),
            sx_l83_linf: last(&self.apriori.sx_l83_linf),
            flux_x_l43: last(&self.apriori.flux_x_l43),
            primitive_w143: last(&self.apriori.primitive_w143),
        }
    }

    pub fn weak_residual_max(&self) -> f64 {
        self.weak_residual
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn total_dissipation(&self) -> f64 {
        self.energy.dissipation.last().copied().unwrap_or(0.0)
    }

    pub fn all_finite(&self) -> bool {
        let series = [
            &self.max_abs_s,
            &self.energy.grad_sq,
            &self.energy.dissipation,
            &self.apriori.st_l43,
            &self.apriori.sx_l83_linf,
            &self.apriori.flux_x_l43,
            &self.apriori.primitive_w143,
            &self.dual_proxy,
            &self.elasticity_discrepancy,
            &self.weak_residual,
        ];
        series.iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

pub const DUAL_BASIS_MODES: usize = 4;

pub fn report(traj: &Trajectory, config: &SimulationConfig) -> Result<DiagnosticsReport> {
    let params = config.params()?;
    let kappa = config.kappa;
    let weak = match traj.grid() {
        Some(_) if traj.len() >= 2 => {
            let t_end = traj.final_time().unwrap_or(config.t_end);
            weak_residual(traj, &params, &default_test_set(t_end))
        }
        _ => vec![0.0; weak::DEFAULT_MODES],
    };
    let dual_proxy = match traj.grid() {
        Some(g) => dual_norm_series(traj, &default_dual_basis(g, DUAL_BASIS_MODES)),
        None => Vec::new(),
    };
    Ok(DiagnosticsReport {
        times: traj.times.clone(),
        max_abs_s: traj.s.iter().map(ScalarField::norm_linf).collect(),
        energy: energy_monitor(traj, kappa),
        apriori: apriori_series(traj, kappa),
        dual_proxy,
        elasticity_discrepancy: traj.elasticity_discrepancy.clone(),
        max_principle: max_principle_check(traj),
        weak_residual: weak,
    })
}

fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; t.len()];
    for k in 1..t.len() {
        out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    }
    out
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(steps: &[f64], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(errors)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    least_squares_slope(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn traj(f: impl Fn(f64, f64) -> f64, n: usize, times: &[f64]) -> Trajectory {
        let g = Grid::new(1.0, 2.0, n).unwrap();
        let mut t = Trajectory::new();
        for &time in times {
            let mut s = ScalarField::from_fn(g, |x| f(time, x));
            s.pin_boundary();
            t.push(time, s, ScalarField::zeros(g), 0.0);
        }
        t
    }

    #[test]
    fn zero_run_monitors_vanish() {
        let t = traj(|_, _| 0.0, 17, &[0.0, 0.1, 0.2]);
        let mp = max_principle_check(&t);
        assert_eq!(mp.margin, 0.0);
        assert!(mp.pass);
        let e = energy_monitor(&t, 0.5);
        assert!(e.grad_sq.iter().chain(&e.dissipation).all(|&v| v == 0.0));
        let n = apriori_norms(&t, 0.5);
        assert_eq!(
            (n.st_l43, n.sx_l83_linf, n.flux_x_l43, n.primitive_w143),
            (0.0, 0.0, 0.0, 0.0)
        );
        let g = t.grid().copied().unwrap();
        assert_eq!(dual_norm_estimate(&t, &default_dual_basis(&g, 3)), 0.0);
    }

    #[test]
    fn growth_beyond_initial_max_fails() {
        let t = traj(
            |time, x| (1.0 + time) * (std::f64::consts::PI * (x - 1.0)).sin(),
            33,
            &[0.0, 0.5],
        );
        let mp = max_principle_check(&t);
        assert!((mp.margin - 0.5).abs() < 1e-12);
        assert!(!mp.pass);
    }

    #[test]
    fn st_norm_of_linear_growth() {
        // S = t·sin(π(x−1)): S_t = sin, ‖S_t‖_{4/3}^{4/3} = T ∫ |sin|^{4/3}
        let t = traj(
            |time, x| time * (std::f64::consts::PI * (x - 1.0)).sin(),
            2001,
            &[0.0, 0.5, 1.0],
        );
        let n = apriori_norms(&t, 0.1);
        let s = ScalarField::from_fn(*t.grid().unwrap(), |x| {
            (std::f64::consts::PI * (x - 1.0))
                .sin()
                .abs()
                .powf(4.0 / 3.0)
        });
        let expected = s.integral().powf(0.75);
        assert!((n.st_l43 - expected).abs() < 1e-10);
    }

    #[test]
    fn sx_mixed_norm_closed_form() {
        // S = sin(π(x−1)) constant in time: ‖S_x‖_∞ = π, ‖·‖_{L^{8/3}(0,1)} = π
        let t = traj(
            |_, x| (std::f64::consts::PI * (x - 1.0)).sin(),
            401,
            &[0.0, 0.25, 1.0],
        );
        let n = apriori_norms(&t, 0.1);
        assert!((n.sx_l83_linf - std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn series_are_monotone() {
        let t = traj(
            |time, x| (1.0 - time) * (std::f64::consts::PI * (x - 1.0)).sin().powi(3),
            65,
            &[0.0, 0.1, 0.2, 0.3, 0.4],
        );
        let s = apriori_series(&t, 0.25);
        for v in [&s.st_l43, &s.sx_l83_linf, &s.flux_x_l43, &s.primitive_w143] {
            assert!(v.windows(2).all(|w| w[1] >= w[0]));
        }
        let e = energy_monitor(&t, 0.25);
        assert!(e.dissipation_nondecreasing);
        assert!(e.grad_sq.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn dual_basis_is_normalized() {
        let g = Grid::new(1.0, 2.0, 129).unwrap();
        for phi in default_dual_basis(&g, 3) {
            let norm =
                (phi.norm_l2().powi(2) + d1(&phi).norm_l2().powi(2) + d2(&phi).norm_l2().powi(2))
                    .sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!(phi.is_dirichlet_zero() || phi.values()[0].abs() < 1e-30);
        }
        let zero = normalize_h2(&ScalarField::zeros(g));
        assert_eq!(zero.norm_linf(), 0.0);
    }
}
