//! Coupled time loop: mollify → elasticity → force → order-parameter step.

use crate::config::{ElasticityPath, SimulationConfig};
use crate::diagnostics::{self, DiagnosticsReport};
use crate::elasticity::{compute_calg, solve_direct, solve_via_green, GreenKernel};
use crate::error::{Error, Result};
use crate::grid::{d1, ScalarField, Trajectory};
use crate::material::MaterialParams;
use crate::order_parameter::{compute_calf, step, MollifierState, StepParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Completed,
    /// The step starting at `t` was rejected; frames up to `t` are kept.
    StepRejected {
        t: f64,
    },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: SimulationConfig,
    pub trajectory: Trajectory,
    pub diagnostics: DiagnosticsReport,
    pub status: Status,
    /// The error behind a rejected step.
    pub failure: Option<String>,
}

impl RunResult {
    pub fn completed(&self) -> bool {
        self.status == Status::Completed
    }
}

/// Resumable state of one run.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimulationConfig,
    params: MaterialParams,
    kernel: GreenKernel,
    mollifier: MollifierState,
    /// Index of the current time level; `S^step` is the front of the
    /// mollifier buffer.
    step: usize,
    trajectory: Trajectory,
    status: Option<Status>,
    failure: Option<String>,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        let params = config.validate()?;
        let s0 = config.initial.field(&config.grid);
        let reg = config.regularization();
        let mollifier = MollifierState::with_initial(&s0, reg.kappa_m, config.effective_dt());
        Ok(Self {
            kernel: GreenKernel::for_grid(&config.grid),
            config,
            params,
            mollifier,
            step: 0,
            trajectory: Trajectory::new(),
            status: None,
            failure: None,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.config.time_of(self.step)
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn is_finished(&self) -> bool {
        self.status.is_some()
    }

    pub fn current(&self) -> &ScalarField {
        self.mollifier
            .frames()
            .next()
            .expect("mollifier buffer is never empty")
    }

    /// Displacement driven by the mollified order parameter at the current
    /// level, and the discrepancy to the Green solve when both paths run.
    fn displacement(&self, t: f64) -> Result<(ScalarField, f64)> {
        let s_moll = self.mollifier.mollify()?;
        let b = self.config.body.field(&self.config.grid, t);
        let direct = || solve_direct(&compute_calg(&d1(&s_moll), &b, &self.params));
        Ok(match self.config.path {
            ElasticityPath::Direct => (direct()?, 0.0),
            ElasticityPath::Green => (
                solve_via_green(&self.kernel, &s_moll, &b, &self.params),
                0.0,
            ),
            ElasticityPath::Both => {
                let u = direct()?;
                let g = solve_via_green(&self.kernel, &s_moll, &b, &self.params);
                let gap = u.max_abs_diff(&g);
                (u, gap)
            }
        })
    }

    fn step_params(&self) -> StepParams {
        StepParams {
            c: self.params.c,
            nu: self.params.nu,
            kappa: self.config.kappa,
            dt: self.config.effective_dt(),
            theta: self.config.theta,
            guard: self.config.guard,
        }
    }

    /// Advances one time level. Returns `false` once the run has ended.
    pub fn advance(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        let n_steps = self.config.n_steps();
        let k = self.step;
        let t = self.config.time_of(k);
        let (u, gap) = self.displacement(t)?;
        let s = self.current().clone();
        let save = k % self.config.save_every == 0 || k == n_steps;
        if save {
            self.trajectory.push(t, s.clone(), u.clone(), gap);
        }
        if k == n_steps {
            self.status = Some(Status::Completed);
            return Ok(false);
        }
        let f = compute_calf(&u, &d1(&u), &s, &d1(&s), &self.params);
        match step(&s, &f, &self.step_params(), t) {
            Ok(next) => {
                self.mollifier.push(next);
                self.step += 1;
                Ok(true)
            }
            Err(err @ Error::StepRejected { .. }) | Err(err @ Error::SingularSystem { .. }) => {
                if !save {
                    self.trajectory.push(t, s, u, gap);
                }
                self.status = Some(Status::StepRejected { t });
                self.failure = Some(err.to_string());
                Ok(false)
            }
            Err(other) => Err(other),
        }
    }

    /// Advances until step `k` is reached or the run ends.
    pub fn advance_to(&mut self, k: usize) -> Result<()> {
        while self.step < k && self.advance()? {}
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while self.advance()? {}
        Ok(())
    }

    pub fn finish(mut self) -> Result<RunResult> {
        self.run_to_end()?;
        let diagnostics = diagnostics::report(&self.trajectory, &self.config)?;
        Ok(RunResult {
            config: self.config,
            trajectory: self.trajectory,
            diagnostics,
            status: self.status.expect("finished run has a status"),
            failure: self.failure,
        })
    }

    pub fn snapshot(&self) -> Vec<u8> {
        snapshot::encode(self)
    }

    pub fn restore(bytes: &[u8]) -> Result<Self> {
        snapshot::decode(bytes)
    }
}

pub fn run(config: SimulationConfig) -> Result<RunResult> {
    Simulation::new(config)?.finish()
}

pub const SNAPSHOT_VERSION: u32 = 1;

mod snapshot {
    //! `CSNP` | version u32 | payload | SHA-256 of everything before it.
    //! Integers and floats are little endian.

    use sha2::{Digest, Sha256};

    use super::*;
    use crate::config::{hash_text, parse_config};

    const MAGIC: &[u8; 4] = b"CSNP";

    struct Writer(Vec<u8>);

    impl Writer {
        fn u64(&mut self, v: usize) {
            self.0.extend_from_slice(&(v as u64).to_le_bytes());
        }
        fn f64(&mut self, v: f64) {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
        fn field(&mut self, f: &ScalarField) {
            for &v in f.values() {
                self.f64(v);
            }
        }
        fn bytes(&mut self, b: &[u8]) {
            self.u64(b.len());
            self.0.extend_from_slice(b);
        }
    }

    pub fn encode(sim: &Simulation) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.0.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        let echo = sim.config.echo();
        w.bytes(echo.as_bytes());
        w.bytes(hash_text(&echo).as_bytes());
        w.u64(sim.step);
        w.u64(sim.mollifier.frames().len());
        for f in sim.mollifier.frames() {
            w.field(f);
        }
        let traj = &sim.trajectory;
        w.u64(traj.len());
        for k in 0..traj.len() {
            w.f64(traj.times[k]);
            w.f64(traj.elasticity_discrepancy[k]);
            w.field(&traj.s[k]);
            w.field(&traj.u[k]);
        }
        let digest = Sha256::digest(&w.0);
        w.0.extend_from_slice(&digest);
        w.0
    }

    struct Reader<'a> {
        buf: &'a [u8],
        pos: usize,
    }

    fn corrupt(message: &str) -> Error {
        Error::Format {
            path: "<snapshot>".into(),
            message: message.into(),
        }
    }

    impl Reader<'_> {
        fn take(&mut self, n: usize) -> Result<&[u8]> {
            let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
            let end = end.ok_or_else(|| corrupt("truncated payload"))?;
            let out = &self.buf[self.pos..end];
            self.pos = end;
            Ok(out)
        }
        fn u64(&mut self) -> Result<usize> {
            let b = self.take(8)?;
            Ok(u64::from_le_bytes(b.try_into().unwrap()) as usize)
        }
        fn f64(&mut self) -> Result<f64> {
            let b = self.take(8)?;
            Ok(f64::from_le_bytes(b.try_into().unwrap()))
        }
        fn field(&mut self, grid: crate::grid::Grid) -> Result<ScalarField> {
            let values = (0..grid.len())
                .map(|_| self.f64())
                .collect::<Result<Vec<_>>>()?;
            Ok(ScalarField::from_raw(grid, values))
        }
        fn text(&mut self) -> Result<String> {
            let n = self.u64()?;
            String::from_utf8(self.take(n)?.to_vec()).map_err(|_| corrupt("invalid utf-8"))
        }
    }

    pub fn decode(bytes: &[u8]) -> Result<Simulation> {
        if bytes.len() < MAGIC.len() + 4 + 32 || &bytes[..4] != MAGIC {
            return Err(corrupt("not a snapshot"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::ChecksumMismatch);
        }
        let version = u32::from_le_bytes(body[4..8].try_into().unwrap());
        if version != SNAPSHOT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: SNAPSHOT_VERSION,
            });
        }
        let mut r = Reader { buf: body, pos: 8 };
        let echo = r.text()?;
        let hash = r.text()?;
        if hash_text(&echo) != hash {
            return Err(Error::ChecksumMismatch);
        }
        let config = parse_config(&echo)?.into_simulation()?;
        let mut sim = Simulation::new(config)?;
        let grid = sim.config.grid;
        sim.step = r.u64()?;
        let n_frames = r.u64()?;
        let frames = (0..n_frames)
            .map(|_| r.field(grid))
            .collect::<Result<Vec<_>>>()?;
        let reg = sim.config.regularization();
        sim.mollifier = MollifierState::from_frames(reg.kappa_m, sim.config.effective_dt(), frames);
        let n_saved = r.u64()?;
        for _ in 0..n_saved {
            let t = r.f64()?;
            let gap = r.f64()?;
            let s = r.field(grid)?;
            let u = r.field(grid)?;
            sim.trajectory.push(t, s, u, gap);
        }
        if r.pos != body.len() {
            return Err(corrupt("trailing bytes"));
        }
        if sim.step > sim.config.n_steps() {
            return Err(corrupt("step beyond the end of the run"));
        }
        Ok(sim)
    }
}
