//! Uniform radial grid, nodal fields, finite-difference operators and the
//! discrete norms used by the monitors.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    d: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, d: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && d.is_finite()) {
            return Err(Error::validation("grid bounds must be finite"));
        }
        if a <= 0.0 {
            return Err(Error::validation("grid requires 0 < a"));
        }
        if a >= d {
            return Err(Error::validation("grid requires a < d"));
        }
        if n < 3 {
            return Err(Error::validation("grid requires at least 3 nodes"));
        }
        Ok(Self {
            a,
            d,
            n,
            h: (d - a) / (n - 1) as f64,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.d - self.a
    }

    /// Node `i`; the last node is exactly `d`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.d
        } else {
            self.a + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Same interval with `(n − 1)·factor + 1` nodes.
    pub fn refined(&self, factor: usize) -> Self {
        Self::new(self.a, self.d, (self.n - 1) * factor + 1).expect("refinement keeps a valid grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::validation(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "field value at node {i} is not finite"
            )));
        }
        Ok(Self { grid, values })
    }

    /// Used internally where finiteness is checked elsewhere.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn is_dirichlet_zero(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.values.len() - 1] == 0.0
    }

    pub fn pin_boundary(&mut self) {
        let n = self.values.len();
        self.values[0] = 0.0;
        self.values[n - 1] = 0.0;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination with the node coordinate available.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (&a, &b))| f(self.grid.x(i), a, b))
            .collect();
        Self::from_raw(self.grid, values)
    }

    /// `alpha·self + beta·other`
    pub fn axpby(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        self.zip_map(other, |_, a, b| alpha * a + beta * b)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_lq(Exponent::Two)
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn norm_lq(&self, q: Exponent) -> f64 {
        match q {
            Exponent::Infinity => self.norm_linf(),
            _ => {
                let q = q.value();
                trapezoid(self.grid.h(), self.values.iter().map(|v| v.abs().powf(q))).powf(1.0 / q)
            }
        }
    }

    /// Trapezoidal `∫ f dx`.
    pub fn integral(&self) -> f64 {
        trapezoid(self.grid.h(), self.values.iter().copied())
    }

    /// Trapezoidal `∫ f g dx`.
    pub fn inner(&self, other: &Self) -> f64 {
        trapezoid(
            self.grid.h(),
            self.values.iter().zip(&other.values).map(|(a, b)| a * b),
        )
    }
}

/// Composite trapezoidal rule on uniformly spaced samples.
pub fn trapezoid(h: f64, samples: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, v) in samples.enumerate() {
        acc += if i == 0 || i + 1 == n { 0.5 * v } else { v };
    }
    acc * h
}

/// Trapezoidal rule on arbitrary abscissae.
pub fn trapezoid_nonuniform(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// First derivative: central differences inside, second-order one-sided
/// differences at the two end nodes. Exact for quadratics.
pub fn d1(f: &ScalarField) -> ScalarField {
    let v = f.values();
    let n = v.len();
    let h = f.grid().h();
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    ScalarField::from_raw(*f.grid(), out)
}

/// Second derivative by the 3-point stencil at interior nodes.
///
/// End values are one-sided extrapolations (4-point, exact for cubics, when
/// `n ≥ 4`; copied from the neighbour otherwise). Solvers never read them.
pub fn d2(f: &ScalarField) -> ScalarField {
    let v = f.values();
    let n = v.len();
    let h2 = f.grid().h() * f.grid().h();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
    if n >= 4 {
        out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
        out[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    } else {
        out[0] = out[1];
        out[n - 1] = out[n - 2];
    }
    ScalarField::from_raw(*f.grid(), out)
}

/// Norm exponents supported by the mixed space-time norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    FourThirds,
    Two,
    EightThirds,
    Infinity,
}

impl Exponent {
    pub fn from_f64(p: f64) -> Result<Self> {
        const TOL: f64 = 1e-12;
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if (p - 4.0 / 3.0).abs() < TOL {
            Ok(Exponent::FourThirds)
        } else if (p - 2.0).abs() < TOL {
            Ok(Exponent::Two)
        } else if (p - 8.0 / 3.0).abs() < TOL {
            Ok(Exponent::EightThirds)
        } else {
            Err(Error::UnsupportedExponent(p))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::FourThirds => 4.0 / 3.0,
            Exponent::Two => 2.0,
            Exponent::EightThirds => 8.0 / 3.0,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

/// `‖f‖_{L^p(0,T; L^q(Ω))}` by trapezoidal quadrature in space and time.
pub fn norm_lp_lq(times: &[f64], frames: &[ScalarField], p: Exponent, q: Exponent) -> f64 {
    debug_assert_eq!(times.len(), frames.len());
    let spatial: Vec<f64> = frames.iter().map(|f| f.norm_lq(q)).collect();
    match p {
        Exponent::Infinity => spatial.iter().fold(0.0, |m, &v| f64::max(m, v)),
        _ => {
            let p = p.value();
            let powered: Vec<f64> = spatial.iter().map(|v| v.powf(p)).collect();
            trapezoid_nonuniform(times, &powered).powf(1.0 / p)
        }
    }
}

/// Saved frames of a run: `S` and `u` at each save time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub s: Vec<ScalarField>,
    pub u: Vec<ScalarField>,
    /// Max discrepancy between the two elasticity solution paths at each
    /// saved frame; zero when only one path is evaluated.
    pub elasticity_discrepancy: Vec<f64>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self {
            times: Vec::new(),
            s: Vec::new(),
            u: Vec::new(),
            elasticity_discrepancy: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, s: ScalarField, u: ScalarField, discrepancy: f64) {
        self.times.push(t);
        self.s.push(s);
        self.u.push(u);
        self.elasticity_discrepancy.push(discrepancy);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.s.first().map(ScalarField::grid)
    }

    pub fn final_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Frames with `t ≤ t_max`.
    pub fn truncated(&self, t_max: f64) -> Self {
        let k = self.times.iter().take_while(|&&t| t <= t_max).count();
        Self {
            times: self.times[..k].to_vec(),
            s: self.s[..k].to_vec(),
            u: self.u[..k].to_vec(),
            elasticity_discrepancy: self.elasticity_discrepancy[..k].to_vec(),
        }
    }

    /// Checks that times start at 0, increase strictly and that every frame
    /// is finite with homogeneous Dirichlet values.
    pub fn validate(&self) -> Result<()> {
        if self.times.first() != Some(&0.0) {
            return Err(Error::validation("trajectory must start at t = 0"));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("trajectory times must increase strictly"));
        }
        if self.s.len() != self.times.len() || self.u.len() != self.times.len() {
            return Err(Error::validation("trajectory frame count mismatch"));
        }
        for f in self.s.iter().chain(&self.u) {
            if !f.is_finite() || !f.is_dirichlet_zero() {
                return Err(Error::validation(
                    "trajectory frame is not finite with zero boundary values",
                ));
            }
        }
        Ok(())
    }

    pub fn s_norm(&self, p: Exponent, q: Exponent) -> f64 {
        norm_lp_lq(&self.times, &self.s, p, q)
    }
}

impl Default for Trajectory {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid {
        Grid::new(1.0, 2.0, n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 10).is_err());
        assert!(Grid::new(2.0, 1.0, 10).is_err());
        assert!(Grid::new(1.0, 2.0, 2).is_err());
        let g = grid(11);
        assert_eq!(g.x(0), 1.0);
        assert_eq!(g.x(10), 2.0);
        assert!(g
            .nodes()
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] > w[0]));
    }

    #[test]
    fn d1_exact_on_constants_and_linears() {
        let g = grid(17);
        let c = ScalarField::from_fn(g, |_| 3.5);
        assert!(d1(&c).norm_linf() == 0.0);
        let lin = ScalarField::from_fn(g, |x| x);
        assert!(d1(&lin).values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let quad = ScalarField::from_fn(g, |x| x * x);
        for (i, v) in d1(&quad).values().iter().enumerate() {
            assert!((v - 2.0 * g.x(i)).abs() < 1e-11);
        }
    }

    fn d1_cubic_error(n: usize) -> f64 {
        let g = grid(n);
        let f = ScalarField::from_fn(g, |x| x * x * x);
        let exact = ScalarField::from_fn(g, |x| 3.0 * x * x);
        d1(&f).max_abs_diff(&exact)
    }

    #[test]
    fn d1_second_order_on_cubic() {
        let e1 = d1_cubic_error(101);
        let e2 = d1_cubic_error(201);
        let rate = (e1 / e2).log2();
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn d2_exact_on_quadratics() {
        let g = grid(9);
        assert!(d2(&ScalarField::from_fn(g, |x| 2.0 * x - 1.0)).norm_linf() < 1e-10);
        let q = d2(&ScalarField::from_fn(g, |x| x * x));
        assert!(q.values().iter().all(|v| (v - 2.0).abs() < 1e-10));
    }

    #[test]
    fn d2_second_order_on_sine() {
        let err = |n| {
            let g = grid(n);
            let e = d2(&ScalarField::from_fn(g, f64::sin));
            (1..n - 1).fold(0.0, |m: f64, i| m.max((e.values()[i] + g.x(i).sin()).abs()))
        };
        let rate = (err(51) / err(101)).log2();
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = grid(1001);
        let z = ScalarField::zeros(g);
        assert_eq!(z.norm_l2(), 0.0);
        assert_eq!(z.norm_linf(), 0.0);
        let one = ScalarField::from_fn(g, |_| 1.0);
        assert!((one.norm_l2() - 1.0).abs() < 1e-14);
        assert_eq!(one.norm_linf(), 1.0);
        let x = ScalarField::from_fn(g, |x| x);
        assert!((x.norm_l2() - (7.0f64 / 3.0).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!(Exponent::from_f64(4.0 / 3.0).unwrap(), Exponent::FourThirds);
        assert_eq!(
            Exponent::from_f64(f64::INFINITY).unwrap(),
            Exponent::Infinity
        );
        assert!(matches!(
            Exponent::from_f64(3.0),
            Err(Error::UnsupportedExponent(_))
        ));
    }

    #[test]
    fn mixed_norms() {
        let g = grid(101);
        let f = ScalarField::from_fn(g, |x| (x - 1.0) * (2.0 - x));
        let frames = vec![f.clone(), f.map(|v| -3.0 * v)];
        let times = [0.0, 0.5];
        let m = norm_lp_lq(&times, &frames, Exponent::Infinity, Exponent::Infinity);
        assert_eq!(m, 3.0 * f.norm_linf());

        // Constant-in-time field over (0, T): L²(L²) = sqrt(T)·‖f‖.
        let t_end = 0.7;
        let two = norm_lp_lq(
            &[0.0, t_end],
            &[f.clone(), f.clone()],
            Exponent::Two,
            Exponent::Two,
        );
        assert!((two - t_end.sqrt() * f.norm_l2()).abs() < 1e-14);

        let zeros = vec![ScalarField::zeros(g); 3];
        for p in [
            Exponent::FourThirds,
            Exponent::Two,
            Exponent::EightThirds,
            Exponent::Infinity,
        ] {
            assert_eq!(norm_lp_lq(&[0.0, 0.1, 0.2], &zeros, p, Exponent::Two), 0.0);
        }
    }

    #[test]
    fn quadrature_norm_converges() {
        let exact = 0.5f64.sqrt();
        let err = |n| {
            let g = grid(n);
            let f = ScalarField::from_fn(g, |x| (std::f64::consts::PI * (x - 1.0)).sin());
            (f.norm_l2() - exact).abs()
        };
        // Periodic-like integrand: the trapezoid rule is very accurate here,
        // so measure a non-periodic one as well.
        assert!(err(65) < 1e-10);
        let err2 = |n| {
            let g = grid(n);
            let f = ScalarField::from_fn(g, |x| x.exp());
            let ex = ((4.0f64.exp() - 2.0f64.exp()) / 2.0).sqrt();
            (f.norm_l2() - ex).abs()
        };
        let rate = (err2(33) / err2(65)).log2();
        assert!(rate >= 1.9, "rate {rate}");
    }

    #[test]
    fn truncation_is_monotone() {
        let g = grid(21);
        let mut tr = Trajectory::new();
        for k in 0..5 {
            let f = ScalarField::from_fn(g, |x| (k as f64 + 1.0) * (x - 1.0) * (2.0 - x));
            tr.push(k as f64 * 0.1, f, ScalarField::zeros(g), 0.0);
        }
        let full = tr.s_norm(Exponent::FourThirds, Exponent::Two);
        let part = tr
            .truncated(0.25)
            .s_norm(Exponent::FourThirds, Exponent::Two);
        assert!(part < full);
        assert!(tr.validate().is_ok());
    }

    proptest! {
        #[test]
        fn difference_operators_are_linear(
            alpha in -5.0f64..5.0,
            beta in -5.0f64..5.0,
            f in proptest::collection::vec(-1.0f64..1.0, 12),
            g in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let gr = grid(12);
            let f = ScalarField::from_values(gr, f).unwrap();
            let g = ScalarField::from_values(gr, g).unwrap();
            let comb = f.axpby(alpha, &g, beta);
            for op in [d1 as fn(&ScalarField) -> ScalarField, d2] {
                let lhs = op(&comb);
                let rhs = op(&f).axpby(alpha, &op(&g), beta);
                let scale = 1.0 + rhs.norm_linf();
                prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
            }
        }
    }
}
