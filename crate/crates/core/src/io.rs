//! Plain-text persistence of frames, trajectories and reports.
//!
//! Every number is written with 17 significant digits, so reading a file
//! back yields bit-identical values.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{num, parse_config, SimulationConfig};
use crate::diagnostics::{DiagnosticsReport, StudyTable};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, Trajectory};
use crate::simulator::{RunResult, Status};

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Two columns `x,value` under a `# t = …` header.
pub fn frame_text(t: f64, field: &ScalarField) -> String {
    let mut out = format!("# t = {}\nx,value\n", num(t));
    for (x, v) in field.grid().nodes().zip(field.values()) {
        let _ = writeln!(out, "{},{}", num(x), num(*v));
    }
    out
}

pub fn write_frame(path: &Path, t: f64, field: &ScalarField) -> Result<()> {
    fs::write(path, frame_text(t, field))?;
    Ok(())
}

pub fn read_frame(path: &Path) -> Result<(f64, ScalarField)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let t = lines
        .next()
        .and_then(|l| l.strip_prefix("# t = "))
        .and_then(|v| v.trim().parse::<f64>().ok())
        .ok_or_else(|| format_err(path, "missing `# t = ` header"))?;
    if lines.next() != Some("x,value") {
        return Err(format_err(path, "missing `x,value` header"));
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in lines.enumerate() {
        let (x, v) = line
            .split_once(',')
            .and_then(|(x, v)| Some((x.trim().parse::<f64>().ok()?, v.trim().parse::<f64>().ok()?)))
            .ok_or_else(|| format_err(path, format!("bad row {}", i + 3)))?;
        xs.push(x);
        vs.push(v);
    }
    if xs.len() < 3 {
        return Err(format_err(path, "a frame needs at least 3 nodes"));
    }
    let grid = Grid::new(xs[0], xs[xs.len() - 1], xs.len())?;
    if grid.nodes().zip(&xs).any(|(a, b)| a != *b) {
        return Err(format_err(path, "nodes are not uniformly spaced"));
    }
    Ok((t, ScalarField::from_values(grid, vs)?))
}

/// Step number of saved frame `k`, used in frame file names.
fn frame_paths(dir: &Path, step: usize) -> (PathBuf, PathBuf) {
    let frames = dir.join("frames");
    (
        frames.join(format!("S_{step}.csv")),
        frames.join(format!("u_{step}.csv")),
    )
}

/// `frames/S_<step>.csv`, `frames/u_<step>.csv` and `frames/index.csv`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory, steps: &[usize]) -> Result<()> {
    fs::create_dir_all(dir.join("frames"))?;
    let mut index = String::from("step,t,discrepancy,s_file,u_file\n");
    for k in 0..traj.len() {
        let (sp, up) = frame_paths(dir, steps[k]);
        write_frame(&sp, traj.times[k], &traj.s[k])?;
        write_frame(&up, traj.times[k], &traj.u[k])?;
        let _ = writeln!(
            index,
            "{},{},{},S_{}.csv,u_{}.csv",
            steps[k],
            num(traj.times[k]),
            num(traj.elasticity_discrepancy[k]),
            steps[k],
            steps[k]
        );
    }
    fs::write(dir.join("frames").join("index.csv"), index)?;
    Ok(())
}

pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let index_path = dir.join("frames").join("index.csv");
    let text = fs::read_to_string(&index_path)?;
    let mut traj = Trajectory::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(format_err(&index_path, format!("bad index row `{line}`")));
        }
        let gap = cols[2]
            .parse::<f64>()
            .map_err(|_| format_err(&index_path, "bad discrepancy"))?;
        let (ts, s) = read_frame(&dir.join("frames").join(cols[3]))?;
        let (tu, u) = read_frame(&dir.join("frames").join(cols[4]))?;
        if ts != tu {
            return Err(format_err(&index_path, "S and u frames disagree on t"));
        }
        traj.push(ts, s, u, gap);
    }
    Ok(traj)
}

fn status_text(status: Status) -> String {
    match status {
        Status::Completed => "completed".into(),
        Status::StepRejected { t } => format!("step-rejected at t = {}", num(t)),
    }
}

/// Config hash and status as comments, followed by the config echo.
pub fn meta_text(config: &SimulationConfig, status: Status) -> String {
    format!(
        "# config_hash = {}\n# status = {}\n{}",
        config.hash(),
        status_text(status),
        config.echo()
    )
}

/// Reads `meta.txt` and checks the stored hash against the echoed config.
pub fn read_meta(path: &Path) -> Result<SimulationConfig> {
    let text = fs::read_to_string(path)?;
    let hash = text
        .lines()
        .find_map(|l| l.strip_prefix("# config_hash = "))
        .ok_or_else(|| format_err(path, "missing config hash"))?
        .trim()
        .to_string();
    let config = parse_config(&text)?.into_simulation()?;
    if config.hash() != hash {
        return Err(format_err(
            path,
            "config hash does not match the echoed config",
        ));
    }
    Ok(config)
}

pub const DIAGNOSTICS_HEADER: &str =
    "t,max_abs_s,grad_sq,dissipation,st_l43,sx_l83_linf,flux_x_l43,\
primitive_w143,dual_proxy,elasticity_discrepancy";

pub fn diagnostics_csv(report: &DiagnosticsReport) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for k in 0..report.len() {
        let row = [
            report.times[k],
            report.max_abs_s[k],
            report.energy.grad_sq[k],
            report.energy.dissipation[k],
            report.apriori.st_l43[k],
            report.apriori.sx_l83_linf[k],
            report.apriori.flux_x_l43[k],
            report.apriori.primitive_w143[k],
            report.dual_proxy[k],
            report.elasticity_discrepancy[k],
        ];
        out.push_str(&row.iter().map(|&v| num(v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Summary monitors that are not time series.
pub fn summary_text(report: &DiagnosticsReport) -> String {
    let mut out = String::new();
    let mp = &report.max_principle;
    let e = &report.energy;
    let n = report.final_norms();
    let _ = writeln!(out, "max_principle_margin,{}", num(mp.margin));
    let _ = writeln!(out, "max_principle_pass,{}", mp.pass);
    let _ = writeln!(out, "sup_grad_sq,{}", num(e.sup_grad_sq));
    let _ = writeln!(out, "energy_c1,{}", num(e.c1));
    let _ = writeln!(out, "energy_c2,{}", num(e.c2));
    let _ = writeln!(
        out,
        "dissipation_nondecreasing,{}",
        e.dissipation_nondecreasing
    );
    let _ = writeln!(out, "st_l43,{}", num(n.st_l43));
    let _ = writeln!(out, "sx_l83_linf,{}", num(n.sx_l83_linf));
    let _ = writeln!(out, "flux_x_l43,{}", num(n.flux_x_l43));
    let _ = writeln!(out, "primitive_w143,{}", num(n.primitive_w143));
    let _ = writeln!(
        out,
        "dual_proxy,{}",
        num(report.dual_proxy.last().copied().unwrap_or(0.0))
    );
    for (m, r) in report.weak_residual.iter().enumerate() {
        let _ = writeln!(out, "weak_residual_{},{}", m + 1, num(*r));
    }
    out
}

/// Step numbers of the saved frames of a run.
pub fn saved_steps(config: &SimulationConfig, traj: &Trajectory) -> Vec<usize> {
    let dt = config.effective_dt();
    traj.times
        .iter()
        .map(|&t| {
            if t == config.t_end {
                config.n_steps()
            } else {
                (t / dt).round() as usize
            }
        })
        .collect()
}

/// Writes frames, `diagnostics.csv`, `summary.csv` and `meta.txt` into `dir`.
pub fn write_run(dir: &Path, result: &RunResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_trajectory(
        dir,
        &result.trajectory,
        &saved_steps(&result.config, &result.trajectory),
    )?;
    fs::write(
        dir.join("diagnostics.csv"),
        diagnostics_csv(&result.diagnostics),
    )?;
    fs::write(dir.join("summary.csv"), summary_text(&result.diagnostics))?;
    fs::write(
        dir.join("meta.txt"),
        meta_text(&result.config, result.status),
    )?;
    Ok(())
}

pub const STUDY_HEADER: &str =
    "kappa,h,dt,D_kappa,max_principle_margin,sup_energy,weak_residual_max,\
D_primitive,dissipation,st_l43,sx_l83_linf,flux_x_l43,completed";

pub fn study_csv(table: &StudyTable) -> String {
    let mut out = String::from(STUDY_HEADER);
    out.push('\n');
    for r in &table.rows {
        let nums = [
            r.kappa,
            r.h,
            r.dt,
            r.d_kappa,
            r.max_principle_margin,
            r.sup_energy,
            r.weak_residual_max,
            r.d_primitive,
            r.dissipation,
            r.st_l43,
            r.sx_l83_linf,
            r.flux_x_l43,
        ];
        out.push_str(&nums.iter().map(|&v| num(v)).collect::<Vec<_>>().join(","));
        let _ = writeln!(out, ",{}", r.completed);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::run;

    #[test]
    fn frame_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(1.0, 2.0, 17).unwrap();
        let f = ScalarField::from_fn(g, |x| (x * 3.3).sin() / 7.0);
        let p = dir.path().join("f.csv");
        write_frame(&p, 0.1 + 0.2, &f).unwrap();
        let (t, back) = read_frame(&p).unwrap();
        assert_eq!(t, 0.1 + 0.2);
        assert_eq!(back, f);
    }

    #[test]
    fn run_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimulationConfig {
            grid: Grid::new(1.0, 2.0, 17).unwrap(),
            t_end: 0.003,
            dt: 1e-3,
            save_every: 2,
            ..SimulationConfig::default()
        };
        let r = run(cfg.clone()).unwrap();
        write_run(dir.path(), &r).unwrap();
        assert_eq!(read_trajectory(dir.path()).unwrap(), r.trajectory);
        assert_eq!(read_meta(&dir.path().join("meta.txt")).unwrap(), cfg);
        assert!(dir.path().join("frames/S_3.csv").exists());
    }

    #[test]
    fn tampered_meta_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimulationConfig::default();
        let text = meta_text(&cfg, Status::Completed).replace("grid.n = 129", "grid.n = 65");
        let p = dir.path().join("meta.txt");
        fs::write(&p, text).unwrap();
        assert!(matches!(read_meta(&p), Err(Error::Format { .. })));
    }
}
