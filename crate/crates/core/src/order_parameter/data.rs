use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// Initial order parameter `S₀`, vanishing at both ends of the interval.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    /// `A sin(π(x − a)/(d − a))`
    Bump {
        amplitude: f64,
    },
    /// `A` on `|x − center| ≤ half_width`, falling to zero over a C∞
    /// shoulder of the given width on each side. Unset geometry is filled
    /// from the grid by [`InitialData::resolved`].
    Plateau {
        amplitude: f64,
        center: Option<f64>,
        half_width: Option<f64>,
        shoulder: Option<f64>,
    },
}

/// `exp(−1/z)` for `z > 0`, else 0.
fn flat_ramp(z: f64) -> f64 {
    if z > 0.0 {
        (-1.0 / z).exp()
    } else {
        0.0
    }
}

/// C∞ transition from 0 (z ≤ 0) to 1 (z ≥ 1).
pub fn smoothstep(z: f64) -> f64 {
    let (l, r) = (flat_ramp(z), flat_ramp(1.0 - z));
    l / (l + r)
}

impl InitialData {
    pub fn amplitude(&self) -> f64 {
        match self {
            InitialData::Zero => 0.0,
            InitialData::Bump { amplitude } | InitialData::Plateau { amplitude, .. } => *amplitude,
        }
    }

    /// Plateau geometry with defaults: centered, half width and shoulders
    /// each 15% of the interval.
    pub fn resolved(&self, grid: &Grid) -> Self {
        match *self {
            InitialData::Plateau {
                amplitude,
                center,
                half_width,
                shoulder,
            } => InitialData::Plateau {
                amplitude,
                center: Some(center.unwrap_or(0.5 * (grid.a() + grid.d()))),
                half_width: Some(half_width.unwrap_or(0.15 * grid.length())),
                shoulder: Some(shoulder.unwrap_or(0.15 * grid.length())),
            },
            ref other => other.clone(),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !self.amplitude().is_finite() {
            return Err(Error::validation("initial amplitude must be finite"));
        }
        if let InitialData::Plateau {
            center: Some(c),
            half_width: Some(w),
            shoulder: Some(s),
            ..
        } = self.resolved(grid)
        {
            if !(w >= 0.0 && s > 0.0) {
                return Err(Error::validation(
                    "plateau needs half_width >= 0 and shoulder > 0",
                ));
            }
            if c - w - s < grid.a() || c + w + s > grid.d() {
                return Err(Error::validation("plateau support must lie inside [a,d]"));
            }
        }
        Ok(())
    }

    pub fn eval(&self, grid: &Grid, x: f64) -> f64 {
        match self.resolved(grid) {
            InitialData::Zero => 0.0,
            InitialData::Bump { amplitude } => {
                amplitude * (PI * (x - grid.a()) / grid.length()).sin()
            }
            InitialData::Plateau {
                amplitude,
                center: Some(c),
                half_width: Some(w),
                shoulder: Some(s),
            } => amplitude * smoothstep((w + s - (x - c).abs()) / s),
            InitialData::Plateau { .. } => unreachable!("resolved plateau has full geometry"),
        }
    }

    /// Nodal values with both boundary nodes pinned to zero.
    pub fn field(&self, grid: &Grid) -> ScalarField {
        let resolved = self.resolved(grid);
        let mut f = ScalarField::from_fn(*grid, |x| resolved.eval(grid, x));
        f.pin_boundary();
        f
    }
}

/// Radial body force `b(t, x)`; continuous with continuous `b_t`.
#[derive(Debug, Clone, PartialEq)]
pub enum BodyForce {
    Zero,
    Constant {
        value: f64,
    },
    /// `Σₖ coeffs[k] xᵏ`
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `value (1 − e^{−t/τ})`
    Ramp {
        value: f64,
        tau: f64,
    },
}

impl BodyForce {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            BodyForce::Zero => true,
            BodyForce::Constant { value } => value.is_finite(),
            BodyForce::Polynomial { coeffs } => {
                !coeffs.is_empty() && coeffs.iter().all(|c| c.is_finite())
            }
            BodyForce::Ramp { value, tau } => value.is_finite() && *tau > 0.0 && tau.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(
                "body force parameters must be finite (ramp needs tau > 0)",
            ))
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            BodyForce::Zero => 0.0,
            BodyForce::Constant { value } => *value,
            BodyForce::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            BodyForce::Ramp { value, tau } => value * -(-t / tau).exp_m1(),
        }
    }

    pub fn field(&self, grid: &Grid, t: f64) -> ScalarField {
        ScalarField::from_fn(*grid, |x| self.eval(t, x))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BodyForce::Zero => true,
            BodyForce::Constant { value } | BodyForce::Ramp { value, .. } => *value == 0.0,
            BodyForce::Polynomial { coeffs } => coeffs.iter().all(|&c| c == 0.0),
        }
    }
}
