use rayon::prelude::*;

use crate::config::StudyConfig;
use crate::error::{Error, Result};
use crate::grid::{d1, norm_lp_lq, Exponent, ScalarField, Trajectory};
use crate::order_parameter::primitive_abs_kappa;
use crate::simulator::{run, RunResult, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub kappa: f64,
    pub h: f64,
    pub dt: f64,
    /// `‖½S_x|S_x|(κ) − ½S_x|S_x|(κ_ref)‖_{L^{4/3}(0,T; L²)}`; NaN when the
    /// member grids differ.
    pub d_kappa: f64,
    /// Same distance with `∫₀^{S_x}|y|_κ dy` in place of `½S_x|S_x|(κ)`.
    pub d_primitive: f64,
    pub max_principle_margin: f64,
    pub sup_energy: f64,
    pub dissipation: f64,
    pub weak_residual_max: f64,
    pub st_l43: f64,
    pub sx_l83_linf: f64,
    pub flux_x_l43: f64,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    pub reference: usize,
    /// `D_κ` strictly decreasing over the members before the reference.
    pub strictly_decreasing: bool,
}

impl StudyTable {
    pub fn distances(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.d_kappa).collect()
    }
}

pub struct StudyOutcome {
    pub table: StudyTable,
    pub runs: Vec<RunResult>,
}

fn half_flux(s: &ScalarField) -> ScalarField {
    d1(s).map(|p| 0.5 * p * p.abs())
}

/// `(D_κ, D_primitive)` of every member against member `reference`.
pub fn kappa_distances(
    trajs: &[&Trajectory],
    kappas: &[f64],
    reference: usize,
) -> Result<Vec<(f64, f64)>> {
    let r = trajs[reference];
    let ref_flux: Vec<ScalarField> = r.s.iter().map(half_flux).collect();
    trajs
        .iter()
        .zip(kappas)
        .map(|(t, &kappa)| {
            if t.grid() != r.grid() || t.times != r.times {
                return Err(Error::MismatchedGrids);
            }
            let diff = |f: &dyn Fn(&ScalarField) -> ScalarField| -> Vec<ScalarField> {
                t.s.iter()
                    .zip(&ref_flux)
                    .map(|(s, g)| f(s).axpby(1.0, g, -1.0))
                    .collect()
            };
            let d = diff(&half_flux);
            let dp = diff(&|s: &ScalarField| d1(s).map(|p| primitive_abs_kappa(p, kappa)));
            Ok((
                norm_lp_lq(&t.times, &d, Exponent::FourThirds, Exponent::Two),
                norm_lp_lq(&t.times, &dp, Exponent::FourThirds, Exponent::Two),
            ))
        })
        .collect()
}

/// Runs the members, at most `threads` at a time (`None`: one per logical
/// processor).
pub fn run_study(study: &StudyConfig, threads: Option<usize>) -> Result<StudyOutcome> {
    study.validate()?;
    let members: Vec<_> = (0..study.kappas.len()).map(|i| study.member(i)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::validation(format!("cannot start worker threads: {e}")))?;
    let runs = pool.install(|| members.into_par_iter().map(run).collect::<Result<Vec<_>>>())?;
    let table = tabulate(study, &runs)?;
    Ok(StudyOutcome { table, runs })
}

pub fn kappa_study(study: &StudyConfig, threads: Option<usize>) -> Result<StudyTable> {
    run_study(study, threads).map(|o| o.table)
}

fn tabulate(study: &StudyConfig, runs: &[RunResult]) -> Result<StudyTable> {
    let trajs: Vec<&Trajectory> = runs.iter().map(|r| &r.trajectory).collect();
    let all_complete = runs.iter().all(|r| r.status == Status::Completed);
    let distances = if all_complete {
        match kappa_distances(&trajs, &study.kappas, study.reference) {
            Ok(d) => d,
            Err(Error::MismatchedGrids) if study.is_refining() => {
                vec![(f64::NAN, f64::NAN); runs.len()]
            }
            Err(e) => return Err(e),
        }
    } else {
        vec![(f64::NAN, f64::NAN); runs.len()]
    };
    let rows: Vec<StudyRow> = runs
        .iter()
        .zip(&distances)
        .map(|(r, &(d_kappa, d_primitive))| {
            let norms = r.diagnostics.final_norms();
            StudyRow {
                kappa: r.config.kappa,
                h: r.config.grid.h(),
                dt: r.config.effective_dt(),
                d_kappa,
                d_primitive,
                max_principle_margin: r.diagnostics.max_principle.margin,
                sup_energy: r.diagnostics.energy.sup_grad_sq,
                dissipation: r.diagnostics.total_dissipation(),
                weak_residual_max: r.diagnostics.weak_residual_max(),
                st_l43: norms.st_l43,
                sx_l83_linf: norms.sx_l83_linf,
                flux_x_l43: norms.flux_x_l43,
                completed: r.status == Status::Completed,
            }
        })
        .collect();
    let before: Vec<f64> = rows[..study.reference].iter().map(|r| r.d_kappa).collect();
    let strictly_decreasing = !before.is_empty()
        && before.windows(2).all(|w| w[1] < w[0])
        && before.iter().all(|d| d.is_finite());
    Ok(StudyTable {
        rows,
        reference: study.reference,
        strictly_decreasing,
    })
}
