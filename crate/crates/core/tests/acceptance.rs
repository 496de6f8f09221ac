//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use confsim_core::config::{SimulationConfig, StudyConfig};
use confsim_core::diagnostics::{self, fitted_order, kappa_study, run_study};
use confsim_core::elasticity::{
    compute_calg, sample_pairs, solve_direct, solve_via_green, verify_green, GreenKernel,
};
use confsim_core::grid::{d1, Grid, ScalarField};
use confsim_core::io;
use confsim_core::material::{ElasticityTensor, MaterialParams, MisfitStrain};
use confsim_core::order_parameter::{primitive_abs_kappa, BodyForce, InitialData};
use confsim_core::reduction3d::{
    elasticity_residuals, order_residuals, reduced_order_rate, rotate, rotation,
    sample_shell_points, RadialLift, RadialProfile,
};
use confsim_core::simulator::{run, Simulation, Status};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn green_properties() -> Verdict {
    let kernel = GreenKernel::new(1.0, 2.0).unwrap();
    let r = verify_green(&kernel, &sample_pairs(1.0, 2.0, 20, 17), 1e-4).unwrap();
    let pass = r.symmetry_max < 1e-12
        && r.boundary_max < 1e-14
        && r.jump_error_max < 1e-6
        && r.residual_max < 1e-8;
    verdict(
        pass,
        format!(
            "symmetry {:.1e}, boundary {:.1e}, jump {:.1e}, residual {:.1e}",
            r.symmetry_max, r.boundary_max, r.jump_error_max, r.residual_max
        ),
    )
}

fn elasticity_cross_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = Grid::new(1.0, 2.0, 129).unwrap();
    let kernel = GreenKernel::for_grid(&grid);
    let tol = f64::max(1e-6, 5.0 * grid.h() * grid.h());
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p = MaterialParams {
            c: 1.0,
            nu: 0.1,
            mu: rng.random_range(0.5..2.0),
            lambda: rng.random_range(-1.0..1.0),
            e: 0.0,
            well_weight: 1.0,
        };
        let amp: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let coef: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let s = ScalarField::from_fn(grid, |x| {
            (1..=3)
                .map(|k| amp[k - 1] * (k as f64 * PI * (x - 1.0)).sin())
                .sum()
        });
        let b = ScalarField::from_fn(grid, |x| coef[0] + coef[1] * x + coef[2] * (2.0 * x).cos());
        let direct = solve_direct(&compute_calg(&d1(&s), &b, &p)).unwrap();
        let green = solve_via_green(&kernel, &s, &b, &p);
        worst = worst.max(direct.max_abs_diff(&green));
    }

    // u = sin(π(x − 1)) over three halvings
    let ns = [33, 65, 129, 257];
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for n in ns {
        let g = Grid::new(1.0, 2.0, n).unwrap();
        let calg = ScalarField::from_fn(g, |x| {
            let (s, c) = (PI * (x - 1.0)).sin_cos();
            -PI * PI * s + 2.0 * PI * c / x - 2.0 * s / (x * x)
        });
        let u = solve_direct(&calg).unwrap();
        hs.push(g.h());
        errs.push(u.max_abs_diff(&ScalarField::from_fn(g, |x| (PI * (x - 1.0)).sin())));
    }
    let order = fitted_order(&hs, &errs);
    verdict(
        worst < tol && (order - 2.0).abs() <= 0.2,
        format!("max direct/Green gap {worst:.2e} (tol {tol:.2e}), manufactured order {order:.3}"),
    )
}

fn plateau() -> InitialData {
    InitialData::Plateau {
        amplitude: 0.9,
        center: None,
        half_width: None,
        shoulder: None,
    }
}

fn maximum_principle() -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut all_complete = true;
    for kappa in [0.5, 0.25, 0.125] {
        for initial in [InitialData::Bump { amplitude: 0.9 }, plateau()] {
            for body in [BodyForce::Zero, BodyForce::Constant { value: 1.0 }] {
                let r = run(SimulationConfig {
                    kappa,
                    initial: initial.clone(),
                    body,
                    ..SimulationConfig::default()
                })
                .unwrap();
                all_complete &= r.completed();
                worst = worst.max(r.diagnostics.max_principle.margin);
            }
        }
    }
    verdict(
        all_complete && worst <= 1e-8,
        format!("12 runs, largest margin {worst:.2e}"),
    )
}

fn kappa_sweep() -> Vec<diagnostics::DiagnosticsReport> {
    [0.5, 0.25, 0.125, 0.0625]
        .iter()
        .map(|&kappa| {
            let r = run(SimulationConfig {
                kappa,
                ..SimulationConfig::default()
            })
            .unwrap();
            assert!(r.completed());
            r.diagnostics
        })
        .collect()
}

fn energy_uniformity(sweep: &[diagnostics::DiagnosticsReport]) -> Verdict {
    let sup: Vec<f64> = sweep.iter().map(|d| d.energy.sup_grad_sq).collect();
    let diss: Vec<f64> = sweep.iter().map(|d| d.total_dissipation()).collect();
    let finite = sup.iter().chain(&diss).all(|v| v.is_finite() && *v > 0.0);
    let monotone = sweep.iter().all(|d| d.energy.dissipation_nondecreasing);
    let (a, b) = (spread(&sup), spread(&diss));
    verdict(
        finite && monotone && a < 2.0 && b < 2.0,
        format!("sup |S_x|^2 spread {a:.4}, dissipation spread {b:.4}"),
    )
}

fn apriori_uniformity(sweep: &[diagnostics::DiagnosticsReport]) -> Verdict {
    let norms: Vec<_> = sweep.iter().map(|d| d.final_norms()).collect();
    let st: Vec<f64> = norms.iter().map(|n| n.st_l43).collect();
    let sx: Vec<f64> = norms.iter().map(|n| n.sx_l83_linf).collect();
    let fl: Vec<f64> = norms.iter().map(|n| n.flux_x_l43).collect();
    let finite = st
        .iter()
        .chain(&sx)
        .chain(&fl)
        .all(|v| v.is_finite() && *v > 0.0);
    let (a, b, c) = (spread(&st), spread(&sx), spread(&fl));
    verdict(
        finite && a < 2.0 && b < 2.0 && c < 2.0,
        format!("spreads: S_t {a:.4}, S_x {b:.4}, flux_x {c:.4}"),
    )
}

fn kappa_convergence() -> Verdict {
    let study = StudyConfig::with_base(SimulationConfig::default());
    let table = kappa_study(&study, None).unwrap();
    let d = table.distances();
    verdict(
        table.strictly_decreasing && d.len() == 5,
        format!(
            "D = {}",
            d.iter()
                .map(|v| format!("{v:.3e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn weak_residual_refinement() -> Verdict {
    let mut study = StudyConfig::with_base(SimulationConfig::default());
    study.kappas = vec![0.125, 0.0625, 0.03125];
    study.h_factor = 2;
    study.dt_factor = 2.0;
    study.reference = 2;
    let outcome = run_study(&study, None).unwrap();
    let r: Vec<f64> = outcome
        .table
        .rows
        .iter()
        .map(|row| row.weak_residual_max)
        .collect();
    let complete = outcome.table.rows.iter().all(|row| row.completed);
    let decreasing = r.windows(2).all(|w| w[1] < w[0]);
    verdict(
        complete && decreasing && r[2] < 1e-3,
        format!(
            "max residual {}",
            r.iter()
                .map(|v| format!("{v:.3e}"))
                .collect::<Vec<_>>()
                .join(" -> ")
        ),
    )
}

fn u_hat(r: f64) -> (f64, f64, f64) {
    (
        0.1 * (2.0 * r).sin(),
        0.2 * (2.0 * r).cos(),
        -0.4 * (2.0 * r).sin(),
    )
}

fn s_hat(r: f64) -> (f64, f64, f64) {
    (
        0.5 + 0.3 * (3.0 * r).sin(),
        0.9 * (3.0 * r).cos(),
        -2.7 * (3.0 * r).sin(),
    )
}

fn reduction() -> Verdict {
    let tensor = ElasticityTensor::diagonal(1.3);
    let misfit = MisfitStrain::isotropic(0.1);
    let p = MaterialParams::from_tensor(1.0, 0.1, 1.0, &tensor, &misfit).unwrap();
    let b = move |r: f64| {
        let (u, ur, urr) = u_hat(r);
        p.mu * (urr + 2.0 * ur / r - 2.0 * u / (r * r)) - p.lambda * s_hat(r).1
    };
    let now = RadialLift::new(
        1.0,
        2.0,
        RadialProfile::analytic(|r| u_hat(r).0, |r| u_hat(r).1),
        RadialProfile::analytic(|r| s_hat(r).0, |r| s_hat(r).1),
        RadialProfile::analytic(b, |_| f64::NAN),
        tensor,
        misfit,
    )
    .unwrap();
    let dt = 1e-3;
    let mut next = now.clone();
    next.s = RadialProfile::analytic(
        move |r| {
            let (u, ur, _) = u_hat(r);
            let (s, sr, srr) = s_hat(r);
            s + dt * reduced_order_rate(r, s, sr, srr, u, ur, &p)
        },
        |_| f64::NAN,
    );

    let pts = sample_shell_points(1.0, 2.0, 0.1, 50, 23);
    let turned = rotate(&pts, &rotation([0.4, -1.0, 2.0], 2.2));
    let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    let hs = [0.02, 0.01, 0.005];
    let mut el = Vec::new();
    let mut or = Vec::new();
    let mut rot_gap: f64 = 0.0;
    for h in hs {
        let e = elasticity_residuals(&now, &pts, h).unwrap();
        let o = order_residuals(&now, &next, &p, &pts, h, dt).unwrap();
        let er = elasticity_residuals(&now, &turned, h).unwrap();
        let or_ = order_residuals(&now, &next, &p, &turned, h, dt).unwrap();
        for (x, y) in e.iter().zip(&er).chain(o.iter().zip(&or_)) {
            rot_gap = rot_gap.max((x - y).abs());
        }
        el.push(max(e));
        or.push(max(o));
    }
    let rates = |v: &[f64]| {
        v.windows(2)
            .map(|w| (w[0] / w[1]).log2())
            .collect::<Vec<_>>()
    };
    let (re, ro) = (rates(&el), rates(&or));
    let pass = re.iter().chain(&ro).all(|&r| r >= 1.5) && rot_gap < 1e-10;
    verdict(
        pass,
        format!(
            "elasticity rates {:.2}, {:.2}; order rates {:.2}, {:.2}; rotation gap {rot_gap:.1e}",
            re[0], re[1], ro[0], ro[1]
        ),
    )
}

/// Adaptive Simpson quadrature of `f` on `[lo, hi]`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (simpson(f, a, m), simpson(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
            return l + r + (l + r - whole) / 15.0;
        }
        recurse(f, a, m, l, 0.5 * tol, depth - 1) + recurse(f, m, b, r, 0.5 * tol, depth - 1)
    }
    recurse(f, lo, hi, simpson(f, lo, hi), tol, 50)
}

fn primitive_closed_form() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p: f64 = rng.random_range(-10.0..10.0);
        let kappa: f64 = rng.random_range(1e-3..1.0);
        let f = move |y: f64| (kappa * kappa + y * y).sqrt();
        let q = adaptive_simpson(&f, 0.0, p, 1e-13);
        worst = worst.max((primitive_abs_kappa(p, kappa) - q).abs());
    }
    verdict(
        worst < 1e-10,
        format!("max deviation {worst:.2e} at 100 random (p, kappa)"),
    )
}

fn determinism_and_persistence() -> Verdict {
    let cfg = SimulationConfig {
        kappa: 0.25,
        t_end: 0.01,
        ..SimulationConfig::default()
    };
    let whole = run(cfg.clone()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let mut sim = Simulation::new(cfg.clone()).unwrap();
    sim.advance_to(cfg.n_steps() / 2 + 1).unwrap();
    let snap = dir.path().join("snapshot.bin");
    fs::write(&snap, sim.snapshot()).unwrap();
    drop(sim);
    let mut resumed = Simulation::restore(&fs::read(&snap).unwrap()).unwrap();
    resumed.run_to_end().unwrap();
    let split = resumed.finish().unwrap();
    let split_equal = split.trajectory == whole.trajectory
        && io::diagnostics_csv(&split.diagnostics) == io::diagnostics_csv(&whole.diagnostics)
        && split.status == Status::Completed;

    let out = dir.path().join("run");
    io::write_run(&out, &whole).unwrap();
    let traj = io::read_trajectory(&out).unwrap();
    let config = io::read_meta(&out.join("meta.txt")).unwrap();
    let report = diagnostics::report(&traj, &config).unwrap();
    let recomputed = io::diagnostics_csv(&report)
        == fs::read_to_string(out.join("diagnostics.csv")).unwrap()
        && io::summary_text(&report) == fs::read_to_string(out.join("summary.csv")).unwrap();
    verdict(
        split_equal && recomputed,
        format!(
            "split run identical: {split_equal}, diagnostics from frames identical: {recomputed}"
        ),
    )
}

fn main() -> ExitCode {
    let sweep = kappa_sweep();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("Green-function properties", Box::new(green_properties)),
        (
            "elasticity cross-oracle and order",
            Box::new(elasticity_cross_oracle),
        ),
        ("maximum principle", Box::new(maximum_principle)),
        (
            "energy bound uniform in kappa",
            Box::new(|| energy_uniformity(&sweep)),
        ),
        (
            "a-priori norms uniform in kappa",
            Box::new(|| apriori_uniformity(&sweep)),
        ),
        ("kappa convergence of the flux", Box::new(kappa_convergence)),
        ("weak-solution residual", Box::new(weak_residual_refinement)),
        ("3D reduction residuals", Box::new(reduction)),
        ("closed-form primitive", Box::new(primitive_closed_form)),
        (
            "determinism and persistence",
            Box::new(determinism_and_persistence),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<36} {}  {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
