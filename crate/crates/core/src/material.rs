//! Elasticity tensor, misfit strain and the scalar material coefficients of
//! the radial model.
//!
//! Tensor entries are stored positionally: `entry(i, j, k, l)` is the
//! coefficient `D_{ij}^{kl}` that maps the strain component `(i, j)` into the
//! stress component `(k, l)`:
//!
//! ```text
//! (D ε)_{kl} = Σ_{ij} D_{ij}^{kl} ε_{ij}
//! ```
//!
//! Indices are zero based in code and one based in reports.

use std::fmt;

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

/// Absolute tolerance used by every assumption check.
pub const ASSUMPTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticityTensor {
    entries: Box<[f64; 81]>,
}

#[inline]
fn flat(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

impl ElasticityTensor {
    pub fn zeros() -> Self {
        Self {
            entries: Box::new([0.0; 81]),
        }
    }

    /// Builds the tensor from 81 entries in `(i, j, k, l)` row-major order.
    pub fn from_entries(entries: [f64; 81]) -> Self {
        Self {
            entries: Box::new(entries),
        }
    }

    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.entries[flat(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// `D_{ij}^{kl} = μ₀` when `k = j` and `i = l`, zero otherwise.
    pub fn diagonal(mu0: f64) -> Self {
        Self::from_fn(|i, j, k, l| if k == j && i == l { mu0 } else { 0.0 })
    }

    /// Standard isotropic tensor `λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk)`.
    pub fn isotropic(lame_lambda: f64, lame_mu: f64) -> Self {
        Self::from_fn(|i, j, k, l| {
            lame_lambda * delta(i, j) * delta(k, l)
                + lame_mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k))
        })
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.entries[flat(i, j, k, l)]
    }

    pub fn entries(&self) -> &[f64; 81] {
        &self.entries
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut t = self.clone();
        t.entries.iter_mut().for_each(|v| *v *= alpha);
        t
    }

    /// `(D x)_{kl} = Σ_{ij} D_{ij}^{kl} x_{ij}`.
    pub fn apply(&self, x: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for k in 0..3 {
            for l in 0..3 {
                let mut acc = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        acc += self.entry(i, j, k, l) * x[i][j];
                    }
                }
                out[k][l] = acc;
            }
        }
        out
    }

    /// Bilinear form `D x · y`.
    pub fn contract(&self, x: &Mat3, y: &Mat3) -> f64 {
        dot(&self.apply(x), y)
    }

    /// Positive definiteness of the quadratic form `D ε · ε` on symmetric
    /// matrices, tested by a Cholesky factorization in an orthonormal basis
    /// of the six-dimensional space of symmetric 3×3 matrices.
    pub fn is_positive_definite(&self) -> bool {
        let basis = symmetric_basis();
        let mut m = [[0.0; 6]; 6];
        for a in 0..6 {
            for b in 0..6 {
                m[a][b] = 0.5
                    * (self.contract(&basis[a], &basis[b]) + self.contract(&basis[b], &basis[a]));
            }
        }
        let scale = m.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
        if scale == 0.0 {
            return false;
        }
        let mut l = [[0.0; 6]; 6];
        for a in 0..6 {
            for b in 0..=a {
                let mut s = m[a][b];
                for c in 0..b {
                    s -= l[a][c] * l[b][c];
                }
                if a == b {
                    if s <= ASSUMPTION_TOL * scale {
                        return false;
                    }
                    l[a][a] = s.sqrt();
                } else {
                    l[a][b] = s / l[b][b];
                }
            }
        }
        true
    }
}

fn symmetric_basis() -> [Mat3; 6] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = [[[0.0; 3]; 3]; 6];
    for (n, (i, j)) in [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]
        .into_iter()
        .enumerate()
    {
        if i == j {
            basis[n][i][i] = 1.0;
        } else {
            basis[n][i][j] = r;
            basis[n][j][i] = r;
        }
    }
    basis
}

pub fn dot(a: &Mat3, b: &Mat3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += a[i][j] * b[i][j];
        }
    }
    acc
}

/// Stress-free transformation strain; always symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisfitStrain(Mat3);

impl MisfitStrain {
    pub fn new(m: Mat3) -> Result<Self> {
        for i in 0..3 {
            for j in 0..i {
                if (m[i][j] - m[j][i]).abs() > ASSUMPTION_TOL {
                    return Err(Error::validation(format!(
                        "misfit strain must be symmetric: entry ({},{}) = {} but ({},{}) = {}",
                        i + 1,
                        j + 1,
                        m[i][j],
                        j + 1,
                        i + 1,
                        m[j][i]
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn zero() -> Self {
        Self([[0.0; 3]; 3])
    }

    /// `s · I`
    pub fn isotropic(s: f64) -> Self {
        Self([[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s]])
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }
}

/// The individual conditions the radial reduction places on `D` and `ε̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `D_{kl}^{ij} = D^{kl}_{ij} = D_{lk}^{ij} = D_{kl}^{ji}`
    Symmetry,
    /// `D_{ij}^{kl} = 0` if `k ≠ j`
    VanishOffJ,
    /// `D_{ij}^{jl} = 0` if `i ≠ l`, and `D_{ij}^{jl}` independent of `j`
    ContractedDiagonal,
    /// `C_{ll} = D_{lj}^{jl}` independent of `l` (its value is μ)
    ShearCoefficient,
    /// `E_{kl} = Σ_{ij} D_{ij}^{kl} ε̄_{ij} = 0` for `k ≠ l`
    MisfitOffDiagonal,
    /// `E_{kk}` independent of `k` (its value is λ)
    MisfitDiagonal,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::Symmetry,
        Condition::VanishOffJ,
        Condition::ContractedDiagonal,
        Condition::ShearCoefficient,
        Condition::MisfitOffDiagonal,
        Condition::MisfitDiagonal,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Condition::Symmetry => "symmetry D_kl^ij = D^kl_ij = D_lk^ij = D_kl^ji",
            Condition::VanishOffJ => "D_ij^kl = 0 for k != j",
            Condition::ContractedDiagonal => "D_ij^jl = 0 for i != l, independent of j",
            Condition::ShearCoefficient => "C_ll = D_lj^jl independent of l",
            Condition::MisfitOffDiagonal => "E_kl = 0 for k != l",
            Condition::MisfitDiagonal => "E_kk independent of k",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// One-based index tuple of the first offending entry.
    pub indices: Vec<usize>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub violation: Option<Violation>,
}

impl ConditionCheck {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub checks: Vec<ConditionCheck>,
    /// Informational; not one of the six reduction conditions.
    pub positive_definite: bool,
}

impl AssumptionReport {
    pub fn check(&self, c: Condition) -> &ConditionCheck {
        self.checks
            .iter()
            .find(|k| k.condition == c)
            .expect("every condition is checked")
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(ConditionCheck::holds)
    }

    /// The conditions the radial reduction actually uses: everything except
    /// the entrywise symmetry, which together with the vanishing conditions
    /// admits only the zero tensor.
    pub fn reduction_conditions_hold(&self) -> bool {
        self.checks
            .iter()
            .filter(|k| k.condition != Condition::Symmetry)
            .all(ConditionCheck::holds)
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.violation {
                None => writeln!(f, "  [pass] {}", c.condition.label())?,
                Some(v) => writeln!(
                    f,
                    "  [FAIL] {} (first violation at {:?}, |deviation| = {:e})",
                    c.condition.label(),
                    v.indices,
                    v.magnitude
                )?,
            }
        }
        write!(
            f,
            "  positive definite on symmetric matrices: {}",
            self.positive_definite
        )
    }
}

fn first_violation<I>(candidates: I) -> Option<Violation>
where
    I: IntoIterator<Item = (Vec<usize>, f64)>,
{
    candidates
        .into_iter()
        .find(|(_, dev)| dev.abs() > ASSUMPTION_TOL)
        .map(|(idx, dev)| Violation {
            indices: idx.into_iter().map(|i| i + 1).collect(),
            magnitude: dev.abs(),
        })
}

fn quads() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..81).map(|n| (n / 27, (n / 9) % 3, (n / 3) % 3, n % 3))
}

/// `E_{kl} = Σ_{ij} D_{ij}^{kl} ε̄_{ij}`
pub fn misfit_contraction(d: &ElasticityTensor, eps_bar: &MisfitStrain) -> Mat3 {
    d.apply(eps_bar.matrix())
}

pub fn check_tensor_assumptions(d: &ElasticityTensor, eps_bar: &MisfitStrain) -> AssumptionReport {
    let e = |i, j, k, l| d.entry(i, j, k, l);

    let symmetry = first_violation(quads().map(|(i, j, k, l)| {
        let base = e(k, l, i, j);
        let dev = [e(i, j, k, l), e(l, k, i, j), e(k, l, j, i)]
            .into_iter()
            .map(|v| v - base)
            .fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
        (vec![k, l, i, j], dev)
    }));

    let vanish_off_j = first_violation(
        quads()
            .filter(|&(_, j, k, _)| k != j)
            .map(|(i, j, k, l)| (vec![i, j, k, l], e(i, j, k, l))),
    );

    let contracted = first_violation(quads().filter(|&(_, j, k, _)| k == j).map(|(i, j, _, l)| {
        if i != l {
            (vec![i, j, j, l], e(i, j, j, l))
        } else {
            (vec![i, j, j, l], e(i, j, j, l) - e(i, 0, 0, l))
        }
    }));

    let shear = first_violation((0..3).map(|l| (vec![l], e(l, 0, 0, l) - e(0, 0, 0, 0))));

    let ekl = misfit_contraction(d, eps_bar);
    let misfit_off = first_violation(
        (0..9)
            .map(|n| (n / 3, n % 3))
            .filter(|(k, l)| k != l)
            .map(|(k, l)| (vec![k, l], ekl[k][l])),
    );
    let misfit_diag = first_violation((0..3).map(|k| (vec![k, k], ekl[k][k] - ekl[0][0])));

    let checks = Condition::ALL
        .into_iter()
        .zip([
            symmetry,
            vanish_off_j,
            contracted,
            shear,
            misfit_off,
            misfit_diag,
        ])
        .map(|(condition, violation)| ConditionCheck {
            condition,
            violation,
        })
        .collect();

    AssumptionReport {
        checks,
        positive_definite: d.is_positive_definite(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCoefficients {
    pub mu: f64,
    pub lambda: f64,
    /// `D ε̄ · ε̄`
    pub e: f64,
}

/// Extracts `(μ, λ, D ε̄ · ε̄)`. Fails unless every condition used by the
/// radial reduction holds.
pub fn scalar_coefficients(
    d: &ElasticityTensor,
    eps_bar: &MisfitStrain,
) -> Result<ScalarCoefficients> {
    let report = check_tensor_assumptions(d, eps_bar);
    if !report.reduction_conditions_hold() {
        return Err(Error::AssumptionViolated(Box::new(report)));
    }
    let ekl = misfit_contraction(d, eps_bar);
    Ok(ScalarCoefficients {
        mu: d.entry(0, 0, 0, 0),
        lambda: ekl[0][0],
        e: d.contract(eps_bar.matrix(), eps_bar.matrix()),
    })
}

/// Where the elasticity tensor of a configuration comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorSpec {
    Explicit(Box<[f64; 81]>),
    Diagonal { mu0: f64 },
    Isotropic { lame_lambda: f64, lame_mu: f64 },
}

impl TensorSpec {
    pub fn build(&self) -> ElasticityTensor {
        match self {
            TensorSpec::Explicit(e) => ElasticityTensor::from_entries(**e),
            TensorSpec::Diagonal { mu0 } => ElasticityTensor::diagonal(*mu0),
            TensorSpec::Isotropic {
                lame_lambda,
                lame_mu,
            } => ElasticityTensor::isotropic(*lame_lambda, *lame_mu),
        }
    }
}

/// Double-well potential `W S² (1 − S)²` and its derivative.
#[inline]
pub fn double_well(s: f64, well_weight: f64) -> (f64, f64) {
    let one_minus = 1.0 - s;
    let value = well_weight * s * s * one_minus * one_minus;
    let derivative = well_weight * (2.0 * s * one_minus * one_minus - 2.0 * s * s * one_minus);
    (value, derivative)
}

fn elastic_part(eps: &Mat3, s: f64, eps_bar: &MisfitStrain) -> Mat3 {
    let mut x = *eps;
    for (row, bar_row) in x.iter_mut().zip(eps_bar.matrix()) {
        for (v, b) in row.iter_mut().zip(bar_row) {
            *v -= b * s;
        }
    }
    x
}

/// `ψ(ε, S) = ½ D(ε − ε̄S)·(ε − ε̄S) + ψ̂(S)`
pub fn free_energy(
    eps: &Mat3,
    s: f64,
    d: &ElasticityTensor,
    eps_bar: &MisfitStrain,
    well_weight: f64,
) -> f64 {
    let x = elastic_part(eps, s, eps_bar);
    0.5 * d.contract(&x, &x) + double_well(s, well_weight).0
}

/// `∂ψ/∂S`, i.e. `−½(D x·ε̄ + D ε̄·x) + ψ̂′(S)` with `x = ε − ε̄S`.
pub fn free_energy_ds(
    eps: &Mat3,
    s: f64,
    d: &ElasticityTensor,
    eps_bar: &MisfitStrain,
    well_weight: f64,
) -> f64 {
    let x = elastic_part(eps, s, eps_bar);
    let bar = eps_bar.matrix();
    -0.5 * (d.contract(&x, bar) + d.contract(bar, &x)) + double_well(s, well_weight).1
}

/// Scalar coefficients entering the radial equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub c: f64,
    pub nu: f64,
    pub mu: f64,
    pub lambda: f64,
    pub e: f64,
    pub well_weight: f64,
}

impl MaterialParams {
    pub fn from_tensor(
        c: f64,
        nu: f64,
        well_weight: f64,
        d: &ElasticityTensor,
        eps_bar: &MisfitStrain,
    ) -> Result<Self> {
        let k = scalar_coefficients(d, eps_bar)?;
        let p = Self {
            c,
            nu,
            mu: k.mu,
            lambda: k.lambda,
            e: k.e,
            well_weight,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c", self.c),
            ("nu", self.nu),
            ("mu", self.mu),
            ("well_weight", self.well_weight),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!(
                    "{name} must be positive (got {v})"
                )));
            }
        }
        if !self.lambda.is_finite() {
            return Err(Error::validation("lambda must be finite"));
        }
        if !(self.e.is_finite() && self.e >= 0.0) {
            return Err(Error::validation(format!(
                "e must be nonnegative (got {})",
                self.e
            )));
        }
        Ok(())
    }
}
