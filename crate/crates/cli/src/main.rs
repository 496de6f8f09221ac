//! `confsim`: runs, κ-studies and verification reports for the radial
//! phase-field model.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 for numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use confsim_core::config::{num, parse_config_with_overrides, MaterialSource, StudyConfig};
use confsim_core::diagnostics::{mms_convergence, run_study, MmsFamily};
use confsim_core::elasticity::{sample_pairs, verify_green, GreenKernel};
use confsim_core::io;
use confsim_core::material::MaterialParams;
use confsim_core::reduction3d::{
    identity_residual, residual_elasticity_3d, residual_order_3d, sample_shell_points, RadialLift,
};
use confsim_core::simulator::{run, Status};
use confsim_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "confsim",
    version,
    about = "Spherically symmetric phase-field simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Key-value config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Override a config entry, e.g. `--set time.dt=1e-4`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write frames, diagnostics and meta.txt
    Run(ConfigArgs),
    /// Run a κ-study and write study.csv
    Study(ConfigArgs),
    /// Report the Green kernel's properties on random sample pairs
    VerifyGreen {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        d: f64,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        /// Offset of the one-sided derivatives across the diagonal
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Lift the last two frames of a run to 3D and print residuals
    CheckReduction {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1e-2)]
        h3: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Observed convergence orders of the manufactured-solution cases
    Mms {
        /// One of elasticity, parabolic-space, parabolic-time,
        /// exact-polynomial; all when omitted
        #[arg(long)]
        family: Option<String>,
    },
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Validation(format!("override `{s}` is not KEY=VALUE")))
        })
        .collect()
}

fn load(args: &ConfigArgs) -> Result<confsim_core::config::ParsedConfig> {
    let text = fs::read_to_string(&args.config)?;
    parse_config_with_overrides(&text, &parse_overrides(&args.overrides)?)
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("CONFSIM_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "CONFSIM_THREADS must be a positive integer (got `{v}`)"
                ))
            }),
        Err(_) => Ok(None),
    }
}

/// Outcome of a command that finished without an error value but failed
/// numerically.
enum Outcome {
    Ok,
    Numerical(String),
}

fn cmd_run(args: &ConfigArgs) -> Result<Outcome> {
    let config = load(args)?.into_simulation()?;
    let result = run(config)?;
    io::write_run(&args.out, &result)?;
    let d = &result.diagnostics;
    println!("frames          {}", result.trajectory.len());
    println!(
        "final time      {}",
        num(*result.trajectory.times.last().unwrap_or(&0.0))
    );
    println!(
        "max principle   margin {} ({})",
        num(d.max_principle.margin),
        pass(d.max_principle.pass)
    );
    println!("sup |S_x|^2     {}", num(d.energy.sup_grad_sq));
    println!("weak residual   {}", num(d.weak_residual_max()));
    println!("output          {}", args.out.display());
    Ok(match result.status {
        Status::Completed => Outcome::Ok,
        Status::StepRejected { t } => Outcome::Numerical(format!(
            "step rejected at t = {}: {}",
            num(t),
            result.failure.as_deref().unwrap_or("")
        )),
    })
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn study_meta(study: &StudyConfig) -> String {
    let coupling = if study.is_refining() {
        format!(
            "member i uses h/{}^i and dt/{}^i",
            study.h_factor,
            num(study.dt_factor)
        )
    } else {
        "fixed h and dt".to_string()
    };
    format!(
        "# study_hash = {}\n# refinement = {}\n{}",
        study.hash(),
        coupling,
        study.echo()
    )
}

fn cmd_study(args: &ConfigArgs) -> Result<Outcome> {
    let study = load(args)?.into_study();
    let outcome = run_study(&study, threads()?)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("study.csv"), io::study_csv(&outcome.table))?;
    fs::write(args.out.join("meta.txt"), study_meta(&study))?;
    for (i, r) in outcome.runs.iter().enumerate() {
        io::write_run(&args.out.join(format!("member_{i}")), r)?;
    }
    println!(
        "{:>12} {:>12} {:>12} {:>24} {:>24}",
        "kappa", "h", "dt", "D_kappa", "sup_energy"
    );
    for r in &outcome.table.rows {
        println!(
            "{:>12} {:>12} {:>12} {:>24} {:>24}",
            format!("{:.6}", r.kappa),
            format!("{:.3e}", r.h),
            format!("{:.3e}", r.dt),
            num(r.d_kappa),
            num(r.sup_energy)
        );
    }
    println!(
        "D_kappa strictly decreasing: {}",
        outcome.table.strictly_decreasing
    );
    let failed: Vec<String> = outcome
        .runs
        .iter()
        .filter(|r| !r.completed())
        .map(|r| format!("kappa = {}", num(r.config.kappa)))
        .collect();
    Ok(if failed.is_empty() {
        Outcome::Ok
    } else {
        Outcome::Numerical(format!("members did not complete: {}", failed.join(", ")))
    })
}

fn cmd_verify_green(a: f64, d: f64, pairs: usize, delta: f64, seed: u64) -> Result<Outcome> {
    let kernel = GreenKernel::new(a, d)?;
    let r = verify_green(&kernel, &sample_pairs(a, d, pairs, seed), delta)?;
    let rows = [
        ("symmetry |G(x,y) - G(y,x)|", r.symmetry_max, 1e-12),
        ("boundary |G(a,y)|, |G(d,y)|", r.boundary_max, 1e-14),
        ("jump |J - 1/y^2|", r.jump_error_max, 1e-6),
        ("residual |L G(.,y)|", r.residual_max, 1e-8),
    ];
    println!(
        "{:<30} {:>24} {:>10}  result",
        "property", "max", "tolerance"
    );
    for (name, v, tol) in rows {
        println!(
            "{:<30} {:>24} {:>10.0e}  {}",
            name,
            num(v),
            tol,
            pass(v < tol)
        );
    }
    println!("{:<30} {:>24}", "spread of p*W", num(r.wronskian_spread));
    Ok(Outcome::Ok)
}

fn cmd_check_reduction(dir: &Path, samples: usize, h3: f64, seed: u64) -> Result<Outcome> {
    if !(h3 > 0.0 && h3.is_finite()) {
        return Err(Error::Validation("h3 must be positive".into()));
    }
    let config = io::read_meta(&dir.join("meta.txt"))?;
    let traj = io::read_trajectory(dir)?;
    let MaterialSource::Tensor { spec, misfit } = &config.material else {
        return Err(Error::Validation(
            "check-reduction needs a run configured with an elasticity tensor".into(),
        ));
    };
    if traj.len() < 2 {
        return Err(Error::Validation(
            "check-reduction needs at least two saved frames".into(),
        ));
    }
    let tensor = spec.build();
    let grid = config.grid;
    let k = traj.len() - 1;
    let lift = |i: usize| {
        let b = config.body.field(&grid, traj.times[i]);
        RadialLift::from_frames(&traj.u[i], &traj.s[i], &b, tensor.clone(), *misfit)
    };
    let (now, next) = (lift(k - 1)?, lift(k)?);
    let params: MaterialParams = config.params()?;
    let dt = traj.times[k] - traj.times[k - 1];

    println!(
        "frames t = {} -> {}, {} sample points",
        num(traj.times[k - 1]),
        num(traj.times[k]),
        samples
    );
    println!(
        "order residual is measured against the kappa = 0 equation; the run used kappa = {}",
        num(config.kappa)
    );
    println!(
        "{:>12} {:>24} {:>24} {:>24}",
        "h3", "elasticity", "order", "identity"
    );
    for level in 0..3 {
        let h = h3 / f64::from(1u32 << level);
        let margin = 0.05 * (grid.d() - grid.a()) + 2.0 * h3;
        if grid.a() + margin >= grid.d() - margin {
            return Err(Error::Validation("h3 is too large for the shell".into()));
        }
        let pts = sample_shell_points(grid.a(), grid.d(), margin, samples, seed);
        println!(
            "{:>12} {:>24} {:>24} {:>24}",
            format!("{h:.4e}"),
            num(residual_elasticity_3d(&now, &pts, h)?),
            num(residual_order_3d(&now, &next, &params, &pts, h, dt)?),
            num(identity_residual(&now, &pts, h)?)
        );
    }
    Ok(Outcome::Ok)
}

fn cmd_mms(family: Option<&str>) -> Result<Outcome> {
    let families = match family {
        None => MmsFamily::ALL.to_vec(),
        Some(name) => vec![MmsFamily::parse(name)
            .ok_or_else(|| Error::Validation(format!("unknown family `{name}`")))?],
    };
    for f in families {
        let r = mms_convergence(f)?;
        let mut line = format!("{:<18}", f.name());
        for e in &r.errors {
            let _ = write!(line, " {:>12.4e}", e);
        }
        if r.slope_defined {
            let _ = write!(line, "  fitted order {:.3}", r.fitted);
        } else {
            line.push_str("  exact to rounding, no order");
        }
        println!("{line}");
    }
    Ok(Outcome::Ok)
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Study(args) => cmd_study(&args),
        Command::VerifyGreen {
            a,
            d,
            pairs,
            delta,
            seed,
        } => cmd_verify_green(a, d, pairs, delta, seed),
        Command::CheckReduction {
            run,
            samples,
            h3,
            seed,
        } => cmd_check_reduction(&run, samples, h3, seed),
        Command::Mms { family } => cmd_mms(family.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
