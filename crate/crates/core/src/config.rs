//! Run and study configuration.
//!
//! Config files are flat `section.key = value` lines; `#` starts a comment.
//! Unknown keys, duplicate keys and keys that do not apply to the selected
//! family are rejected. Lists are comma separated. Omitted keys take the
//! defaults of [`SimulationConfig::default`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::material::{MaterialParams, MisfitStrain, TensorSpec};
use crate::order_parameter::{BodyForce, InitialData, RegularizationParams};

/// Which elasticity solver feeds the force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElasticityPath {
    Direct,
    Green,
    /// Direct solve drives the run; the Green solve is evaluated alongside
    /// and the discrepancy recorded.
    Both,
}

impl ElasticityPath {
    fn name(self) -> &'static str {
        match self {
            ElasticityPath::Direct => "direct",
            ElasticityPath::Green => "green",
            ElasticityPath::Both => "both",
        }
    }
}

/// Source of the elastic scalars `μ, λ, e`.
#[derive(Debug, Clone, PartialEq)]
pub enum MaterialSource {
    Tensor {
        spec: TensorSpec,
        misfit: MisfitStrain,
    },
    Scalars {
        mu: f64,
        lambda: f64,
        e: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub grid: Grid,
    pub c: f64,
    pub nu: f64,
    pub well_weight: f64,
    pub material: MaterialSource,
    pub kappa: f64,
    /// Mollifier width; `None` ties it to `kappa`.
    pub kappa_m: Option<f64>,
    pub dt: f64,
    pub theta: f64,
    pub t_end: f64,
    /// Largest accepted L∞ change of `S` per step.
    pub guard: Option<f64>,
    pub save_every: usize,
    pub initial: InitialData,
    pub body: BodyForce,
    pub path: ElasticityPath,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            grid: Grid::new(1.0, 2.0, 129).expect("default grid"),
            c: 1.0,
            nu: 0.1,
            well_weight: 1.0,
            material: MaterialSource::Tensor {
                spec: TensorSpec::Diagonal { mu0: 1.0 },
                misfit: MisfitStrain::isotropic(0.1),
            },
            kappa: 0.25,
            kappa_m: None,
            dt: 2.5e-4,
            theta: 1.0,
            t_end: 0.05,
            guard: Some(0.5),
            save_every: 4,
            initial: InitialData::Bump { amplitude: 0.9 },
            body: BodyForce::Zero,
            path: ElasticityPath::Direct,
        }
    }
}

impl SimulationConfig {
    pub fn params(&self) -> Result<MaterialParams> {
        let p = match &self.material {
            MaterialSource::Tensor { spec, misfit } => MaterialParams::from_tensor(
                self.c,
                self.nu,
                self.well_weight,
                &spec.build(),
                misfit,
            )
            .map_err(|e| match e {
                Error::AssumptionViolated(report) => Error::validation(format!(
                    "elasticity tensor fails the reduction conditions: {report}"
                )),
                other => other,
            })?,
            MaterialSource::Scalars { mu, lambda, e } => MaterialParams {
                c: self.c,
                nu: self.nu,
                mu: *mu,
                lambda: *lambda,
                e: *e,
                well_weight: self.well_weight,
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn regularization(&self) -> RegularizationParams {
        RegularizationParams {
            kappa: self.kappa,
            kappa_m: self.kappa_m.unwrap_or(self.kappa),
            dt: self.dt,
            theta: self.theta,
        }
    }

    /// Number of time steps; `dt` is shrunk so that they land on `t_end`.
    pub fn n_steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let nearest = ratio.round();
        let n = if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
            nearest
        } else {
            ratio.ceil()
        };
        (n as usize).max(1)
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_end / self.n_steps() as f64
    }

    /// Time of step `k`; the last step lands exactly on `t_end`.
    pub fn time_of(&self, k: usize) -> f64 {
        if k >= self.n_steps() {
            self.t_end
        } else {
            k as f64 * self.effective_dt()
        }
    }

    pub fn validate(&self) -> Result<MaterialParams> {
        let params = self.params()?;
        self.regularization().validate()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::validation("t_end must be positive"));
        }
        if self.save_every == 0 {
            return Err(Error::validation("save_every must be at least 1"));
        }
        if let Some(g) = self.guard {
            if !(g > 0.0) {
                return Err(Error::validation("guard must be positive"));
            }
        }
        self.initial.validate(&self.grid)?;
        self.body.validate()?;
        Ok(params)
    }

    /// Canonical `key = value` text; parses back to an identical config.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Hex SHA-256 of [`SimulationConfig::echo`].
    pub fn hash(&self) -> String {
        hash_text(&self.echo())
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e: Vec<(&'static str, String)> = vec![
            ("grid.a", num(self.grid.a())),
            ("grid.d", num(self.grid.d())),
            ("grid.n", self.grid.len().to_string()),
            ("material.c", num(self.c)),
            ("material.nu", num(self.nu)),
            ("material.well_weight", num(self.well_weight)),
        ];
        match &self.material {
            MaterialSource::Tensor { spec, misfit } => {
                match spec {
                    TensorSpec::Diagonal { mu0 } => {
                        e.push(("material.tensor", "diagonal".into()));
                        e.push(("material.mu0", num(*mu0)));
                    }
                    TensorSpec::Isotropic {
                        lame_lambda,
                        lame_mu,
                    } => {
                        e.push(("material.tensor", "isotropic".into()));
                        e.push(("material.lame_lambda", num(*lame_lambda)));
                        e.push(("material.lame_mu", num(*lame_mu)));
                    }
                    TensorSpec::Explicit(entries) => {
                        e.push(("material.tensor", "explicit".into()));
                        e.push(("material.entries", list(entries.iter().copied())));
                    }
                }
                e.push((
                    "material.misfit_matrix",
                    list(misfit.matrix().iter().flatten().copied()),
                ));
            }
            MaterialSource::Scalars { mu, lambda, e: ev } => {
                e.push(("material.tensor", "none".into()));
                e.push(("material.mu", num(*mu)));
                e.push(("material.lambda", num(*lambda)));
                e.push(("material.e", num(*ev)));
            }
        }
        e.push(("regularization.kappa", num(self.kappa)));
        e.push((
            "regularization.kappa_m",
            self.kappa_m.map_or("auto".into(), num),
        ));
        e.push(("time.dt", num(self.dt)));
        e.push(("time.theta", num(self.theta)));
        e.push(("time.t_end", num(self.t_end)));
        e.push(("time.guard", self.guard.map_or("none".into(), num)));
        e.push(("output.save_every", self.save_every.to_string()));
        match &self.initial {
            InitialData::Zero => e.push(("initial.family", "zero".into())),
            InitialData::Bump { amplitude } => {
                e.push(("initial.family", "bump".into()));
                e.push(("initial.amplitude", num(*amplitude)));
            }
            InitialData::Plateau {
                amplitude,
                center,
                half_width,
                shoulder,
            } => {
                let opt = |v: &Option<f64>| v.map_or("auto".into(), num);
                e.push(("initial.family", "plateau".into()));
                e.push(("initial.amplitude", num(*amplitude)));
                e.push(("initial.center", opt(center)));
                e.push(("initial.half_width", opt(half_width)));
                e.push(("initial.shoulder", opt(shoulder)));
            }
        }
        match &self.body {
            BodyForce::Zero => e.push(("body.family", "zero".into())),
            BodyForce::Constant { value } => {
                e.push(("body.family", "constant".into()));
                e.push(("body.value", num(*value)));
            }
            BodyForce::Polynomial { coeffs } => {
                e.push(("body.family", "polynomial".into()));
                e.push(("body.coeffs", list(coeffs.iter().copied())));
            }
            BodyForce::Ramp { value, tau } => {
                e.push(("body.family", "ramp".into()));
                e.push(("body.value", num(*value)));
                e.push(("body.tau", num(*tau)));
            }
        }
        e.push(("elasticity.path", self.path.name().into()));
        e
    }
}

/// κ-refinement study: one member run per κ.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub base: SimulationConfig,
    /// Strictly decreasing values in (0, 1].
    pub kappas: Vec<f64>,
    /// Member `i` uses `h / h_factorⁱ`; 1 keeps the grid fixed.
    pub h_factor: usize,
    /// Member `i` uses `dt / dt_factorⁱ`; 1 keeps the step fixed.
    pub dt_factor: f64,
    /// Index of the reference member (default: the smallest κ).
    pub reference: usize,
}

impl StudyConfig {
    pub fn with_base(base: SimulationConfig) -> Self {
        Self {
            base,
            kappas: vec![0.5, 0.25, 0.125, 0.0625, 0.03125],
            h_factor: 1,
            dt_factor: 1.0,
            reference: 4,
        }
    }

    pub fn is_refining(&self) -> bool {
        self.h_factor != 1 || self.dt_factor != 1.0
    }

    /// Config of member `i`. The mollifier width follows κ unless the base
    /// config fixes it.
    pub fn member(&self, i: usize) -> SimulationConfig {
        let mut cfg = self.base.clone();
        cfg.kappa = self.kappas[i];
        let g = &self.base.grid;
        let n = (g.len() - 1) * self.h_factor.pow(i as u32) + 1;
        cfg.grid = Grid::new(g.a(), g.d(), n).expect("refined grid");
        cfg.dt = self.base.dt / self.dt_factor.powi(i as i32);
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.kappas.is_empty() {
            return Err(Error::validation("study.kappas must not be empty"));
        }
        if self.kappas.iter().any(|&k| !(k > 0.0 && k <= 1.0)) {
            return Err(Error::validation("kappa must lie in (0,1]"));
        }
        if self.kappas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::validation(
                "study.kappas must be strictly decreasing",
            ));
        }
        if self.h_factor == 0 || !(self.dt_factor >= 1.0 && self.dt_factor.is_finite()) {
            return Err(Error::validation(
                "study refinement factors must be at least 1",
            ));
        }
        if self.reference >= self.kappas.len() {
            return Err(Error::validation("study.reference out of range"));
        }
        for i in 0..self.kappas.len() {
            self.member(i).validate()?;
        }
        Ok(())
    }

    pub fn echo(&self) -> String {
        let mut out = self.base.echo();
        let _ = writeln!(out, "study.kappas = {}", list(self.kappas.iter().copied()));
        let _ = writeln!(out, "study.h_factor = {}", self.h_factor);
        let _ = writeln!(out, "study.dt_factor = {}", num(self.dt_factor));
        let _ = writeln!(out, "study.reference = {}", self.reference);
        out
    }

    pub fn hash(&self) -> String {
        hash_text(&self.echo())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedConfig {
    Simulation(SimulationConfig),
    Study(StudyConfig),
}

impl ParsedConfig {
    pub fn into_simulation(self) -> Result<SimulationConfig> {
        match self {
            ParsedConfig::Simulation(c) => Ok(c),
            ParsedConfig::Study(_) => Err(Error::validation(
                "study.* keys are only valid for the study command",
            )),
        }
    }

    /// A plain simulation config becomes a study with default κ sequence.
    pub fn into_study(self) -> StudyConfig {
        match self {
            ParsedConfig::Simulation(c) => StudyConfig::with_base(c),
            ParsedConfig::Study(s) => s,
        }
    }
}

pub fn hash_text(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// 17 significant digits; round-trips every finite `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn list(values: impl Iterator<Item = f64>) -> String {
    values.map(num).collect::<Vec<_>>().join(", ")
}

const KEYS: &[&str] = &[
    "grid.a",
    "grid.d",
    "grid.n",
    "material.c",
    "material.nu",
    "material.well_weight",
    "material.tensor",
    "material.mu0",
    "material.lame_lambda",
    "material.lame_mu",
    "material.entries",
    "material.misfit",
    "material.misfit_matrix",
    "material.mu",
    "material.lambda",
    "material.e",
    "regularization.kappa",
    "regularization.kappa_m",
    "time.dt",
    "time.theta",
    "time.t_end",
    "time.guard",
    "output.save_every",
    "initial.family",
    "initial.amplitude",
    "initial.center",
    "initial.half_width",
    "initial.shoulder",
    "body.family",
    "body.value",
    "body.coeffs",
    "body.tau",
    "elasticity.path",
    "study.kappas",
    "study.h_factor",
    "study.dt_factor",
    "study.reference",
];

pub fn known_keys() -> &'static [&'static str] {
    KEYS
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    column: usize,
}

/// Parsed but not yet interpreted key/value lines.
struct Table {
    entries: BTreeMap<String, Entry>,
    used: std::collections::BTreeSet<String>,
}

impl Table {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let column = content.len() - content.trim_start().len() + 1;
                return Err(Error::Parse {
                    line,
                    column,
                    message: "expected `key = value`".into(),
                });
            };
            let key = content[..eq].trim();
            let key_col = content.len() - content.trim_start().len() + 1;
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    column: key_col,
                    message: "missing key".into(),
                });
            }
            if !KEYS.contains(&key) {
                return Err(Error::Parse {
                    line,
                    column: key_col,
                    message: format!("unknown key `{key}`"),
                });
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            let column = eq + 2 + (after.len() - after.trim_start().len());
            if value.is_empty() {
                return Err(Error::Parse {
                    line,
                    column,
                    message: format!("missing value for `{key}`"),
                });
            }
            let entry = Entry {
                value: value.to_string(),
                line,
                column,
            };
            if entries.insert(key.to_string(), entry).is_some() {
                return Err(Error::Parse {
                    line,
                    column: key_col,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self {
            entries,
            used: Default::default(),
        })
    }

    fn apply_overrides(&mut self, overrides: &[(String, String)]) -> Result<()> {
        for (key, value) in overrides {
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::validation(format!(
                    "override references unknown key `{key}`"
                )));
            }
            self.entries.insert(
                key.clone(),
                Entry {
                    value: value.trim().to_string(),
                    line: 0,
                    column: 0,
                },
            );
        }
        Ok(())
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }

    fn raw(&mut self, key: &str) -> Option<Entry> {
        let e = self.entries.get(key).cloned();
        if e.is_some() {
            self.used.insert(key.to_string());
        }
        e
    }

    fn error(entry: &Entry, message: String) -> Error {
        Error::Parse {
            line: entry.line,
            column: entry.column,
            message,
        }
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(e) => parse_f64(&e.value)
                .ok_or_else(|| Self::error(&e, format!("`{key}` expects a number"))),
        }
    }

    /// Number, or `word` for `None`.
    fn opt_f64(&mut self, key: &str, word: &str, default: Option<f64>) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(default),
            Some(e) if e.value == word => Ok(None),
            Some(e) => parse_f64(&e.value)
                .map(Some)
                .ok_or_else(|| Self::error(&e, format!("`{key}` expects a number or `{word}`"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse()
                .map_err(|_| Self::error(&e, format!("`{key}` expects a nonnegative integer"))),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|s| parse_f64(s.trim()))
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| {
                    Self::error(
                        &e,
                        format!("`{key}` expects a comma-separated list of numbers"),
                    )
                }),
        }
    }

    fn word(&mut self, key: &str, default: &str, choices: &[&str]) -> Result<String> {
        match self.raw(key) {
            None => Ok(default.to_string()),
            Some(e) if choices.contains(&e.value.as_str()) => Ok(e.value),
            Some(e) => Err(Self::error(
                &e,
                format!("`{key}` must be one of {}", choices.join(", ")),
            )),
        }
    }

    /// Every present key must have been consumed by the chosen families.
    fn finish(&self) -> Result<()> {
        for (key, e) in &self.entries {
            if !self.used.contains(key) {
                return Err(Self::error(
                    e,
                    format!("`{key}` does not apply to the selected options"),
                ));
            }
        }
        Ok(())
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn fixed<const N: usize>(values: Vec<f64>, key: &str) -> Result<[f64; N]> {
    values.try_into().map_err(|v: Vec<f64>| {
        Error::validation(format!("`{key}` needs {N} values, got {}", v.len()))
    })
}

pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, then replaces values with `overrides` before validation.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ParsedConfig> {
    let mut t = Table::parse(text)?;
    t.apply_overrides(overrides)?;
    let is_study = t.has_prefix("study.");
    let def = SimulationConfig::default();

    let a = t.f64("grid.a", def.grid.a())?;
    let d = t.f64("grid.d", def.grid.d())?;
    let n = t.usize("grid.n", def.grid.len())?;
    if !(a < d) {
        return Err(Error::validation("a<d"));
    }
    let grid = Grid::new(a, d, n)?;

    let c = t.f64("material.c", def.c)?;
    let nu = t.f64("material.nu", def.nu)?;
    let well_weight = t.f64("material.well_weight", def.well_weight)?;
    let tensor = t.word(
        "material.tensor",
        "diagonal",
        &["diagonal", "isotropic", "explicit", "none"],
    )?;
    let material = if tensor == "none" {
        MaterialSource::Scalars {
            mu: t.f64("material.mu", 1.0)?,
            lambda: t.f64("material.lambda", 0.0)?,
            e: t.f64("material.e", 0.0)?,
        }
    } else {
        let spec = match tensor.as_str() {
            "diagonal" => TensorSpec::Diagonal {
                mu0: t.f64("material.mu0", 1.0)?,
            },
            "isotropic" => TensorSpec::Isotropic {
                lame_lambda: t.f64("material.lame_lambda", 1.0)?,
                lame_mu: t.f64("material.lame_mu", 1.0)?,
            },
            _ => {
                let entries = t.list("material.entries")?.ok_or_else(|| {
                    Error::validation("material.tensor = explicit needs material.entries")
                })?;
                TensorSpec::Explicit(Box::new(fixed::<81>(entries, "material.entries")?))
            }
        };
        let scalar = t.opt_f64("material.misfit", "none", None)?;
        let matrix = t.list("material.misfit_matrix")?;
        let misfit = match (scalar, matrix) {
            (Some(_), Some(_)) => {
                return Err(Error::validation(
                    "give either material.misfit or material.misfit_matrix",
                ));
            }
            (Some(s), None) => MisfitStrain::isotropic(s),
            (None, Some(m)) => {
                let m = fixed::<9>(m, "material.misfit_matrix")?;
                MisfitStrain::new([[m[0], m[1], m[2]], [m[3], m[4], m[5]], [m[6], m[7], m[8]]])?
            }
            (None, None) => MisfitStrain::isotropic(0.1),
        };
        MaterialSource::Tensor { spec, misfit }
    };

    let kappa = t.f64("regularization.kappa", def.kappa)?;
    let kappa_m = t.opt_f64("regularization.kappa_m", "auto", None)?;
    let dt = t.f64("time.dt", def.dt)?;
    let theta = t.f64("time.theta", def.theta)?;
    let t_end = t.f64("time.t_end", def.t_end)?;
    let guard = t.opt_f64("time.guard", "none", def.guard)?;
    let save_every = t.usize("output.save_every", def.save_every)?;

    let family = t.word("initial.family", "bump", &["zero", "bump", "plateau"])?;
    let initial = match family.as_str() {
        "zero" => InitialData::Zero,
        "bump" => InitialData::Bump {
            amplitude: t.f64("initial.amplitude", def.initial.amplitude())?,
        },
        _ => InitialData::Plateau {
            amplitude: t.f64("initial.amplitude", def.initial.amplitude())?,
            center: t.opt_f64("initial.center", "auto", None)?,
            half_width: t.opt_f64("initial.half_width", "auto", None)?,
            shoulder: t.opt_f64("initial.shoulder", "auto", None)?,
        },
    };

    let body_family = t.word(
        "body.family",
        "zero",
        &["zero", "constant", "polynomial", "ramp"],
    )?;
    let body = match body_family.as_str() {
        "zero" => BodyForce::Zero,
        "constant" => BodyForce::Constant {
            value: t.f64("body.value", 0.0)?,
        },
        "polynomial" => BodyForce::Polynomial {
            coeffs: t.list("body.coeffs")?.unwrap_or_else(|| vec![0.0]),
        },
        _ => BodyForce::Ramp {
            value: t.f64("body.value", 0.0)?,
            tau: t.f64("body.tau", 1.0)?,
        },
    };

    let path = match t
        .word("elasticity.path", "direct", &["direct", "green", "both"])?
        .as_str()
    {
        "direct" => ElasticityPath::Direct,
        "green" => ElasticityPath::Green,
        _ => ElasticityPath::Both,
    };

    let config = SimulationConfig {
        grid,
        c,
        nu,
        well_weight,
        material,
        kappa,
        kappa_m,
        dt,
        theta,
        t_end,
        guard,
        save_every,
        initial,
        body,
        path,
    };

    let parsed = if is_study {
        let mut study = StudyConfig::with_base(config);
        if let Some(k) = t.list("study.kappas")? {
            study.reference = k.len().saturating_sub(1);
            study.kappas = k;
        }
        study.h_factor = t.usize("study.h_factor", 1)?;
        study.dt_factor = t.f64("study.dt_factor", 1.0)?;
        study.reference = t.usize("study.reference", study.reference)?;
        t.finish()?;
        study.validate()?;
        ParsedConfig::Study(study)
    } else {
        t.finish()?;
        config.validate()?;
        ParsedConfig::Simulation(config)
    };
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(text: &str) -> SimulationConfig {
        parse_config(text).unwrap().into_simulation().unwrap()
    }

    #[test]
    fn empty_config_gives_defaults() {
        let c = sim("# nothing\n\n");
        assert_eq!(c, SimulationConfig::default());
        let p = c.params().unwrap();
        assert_eq!((p.mu, p.c, p.nu), (1.0, 1.0, 0.1));
        assert!((p.lambda - 0.1).abs() < 1e-15);
        assert!((p.e - 0.03).abs() < 1e-15);
    }

    #[test]
    fn echo_round_trips() {
        let text = "grid.n = 65\nregularization.kappa = 0.125\ninitial.family = plateau\ninitial.center = 1.4\n\
                    body.family = ramp\nbody.value = 0.3\nbody.tau = 0.01\ntime.guard = none\nelasticity.path = both\n";
        let c = sim(text);
        let again = sim(&c.echo());
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        assert_ne!(c.hash(), SimulationConfig::default().hash());

        let s = sim("material.tensor = none\nmaterial.mu = 2\nmaterial.lambda = -0.5\nbody.family = polynomial\nbody.coeffs = 1, 2, 3");
        assert_eq!(s, sim(&s.echo()));
    }

    #[test]
    fn kappa_out_of_range() {
        let err = parse_config("regularization.kappa = 1.5").unwrap_err();
        assert!(
            matches!(&err, Error::Validation(m) if m.contains("kappa must lie in (0,1]")),
            "{err}"
        );
    }

    #[test]
    fn reversed_interval() {
        let err = parse_config("grid.a = 2\ngrid.d = 1").unwrap_err();
        assert!(
            matches!(&err, Error::Validation(m) if m.contains("a<d")),
            "{err}"
        );
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_config("grid.a = 1\n  grid.bogus = 3\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        match parse_config("grid.a = one") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 10)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("grid.a"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_config("grid.a = 1\ngrid.a = 1"),
            Err(Error::Parse { .. })
        ));
        // key belonging to an unselected family
        assert!(matches!(
            parse_config("body.tau = 2"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn isotropic_tensor_is_rejected() {
        let err = parse_config("material.tensor = isotropic").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn overrides_replace_values() {
        let parsed =
            parse_config_with_overrides("grid.n = 33", &[("grid.n".into(), "17".into())]).unwrap();
        assert_eq!(parsed.into_simulation().unwrap().grid.len(), 17);
        assert!(parse_config_with_overrides("", &[("grid.m".into(), "1".into())]).is_err());
    }

    #[test]
    fn study_keys_make_a_study() {
        let parsed = parse_config("study.kappas = 0.5, 0.25, 0.125").unwrap();
        let ParsedConfig::Study(s) = parsed.clone() else {
            panic!()
        };
        assert_eq!(s.reference, 2);
        assert_eq!(s.base, SimulationConfig::default());
        assert!(parsed.into_simulation().is_err());
        let again = parse_config(&s.echo()).unwrap();
        assert_eq!(again, ParsedConfig::Study(s));
        assert!(parse_config("study.kappas = 0.25, 0.5").is_err());
    }

    #[test]
    fn study_members_refine() {
        let mut s = StudyConfig::with_base(SimulationConfig::default());
        s.h_factor = 2;
        s.dt_factor = 2.0;
        let m = s.member(2);
        assert_eq!(m.grid.len(), 513);
        assert_eq!(m.dt, s.base.dt / 4.0);
        assert_eq!(m.kappa, 0.125);
    }

    #[test]
    fn step_count_lands_on_t_end() {
        let mut c = SimulationConfig::default();
        assert_eq!(c.n_steps(), 200);
        assert_eq!(c.time_of(200), c.t_end);
        c.dt = 3e-4;
        assert_eq!(c.n_steps(), 167);
        assert!(c.effective_dt() <= c.dt);
    }
}
