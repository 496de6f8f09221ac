use crate::error::{Error, Result};
use crate::grid::{d1, ScalarField};
use crate::tridiag::Tridiagonal;

/// Clamped cubic spline through nodal values on a uniform grid. End slopes
/// come from the second-order one-sided differences of [`d1`].
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    a: f64,
    h: f64,
    values: Vec<f64>,
    /// Second derivatives at the nodes.
    moments: Vec<f64>,
}

impl CubicSpline {
    pub fn interpolate(field: &ScalarField) -> Result<Self> {
        let g = field.grid();
        let n = g.len();
        let h = g.h();
        let y = field.values();
        let slopes = d1(field);
        let (s0, s1) = (slopes.values()[0], slopes.values()[n - 1]);

        let mut m = Tridiagonal::with_size(n);
        let mut rhs = vec![0.0; n];
        m.diag[0] = 2.0;
        m.upper[0] = 1.0;
        rhs[0] = 6.0 / h * ((y[1] - y[0]) / h - s0);
        for i in 1..n - 1 {
            m.lower[i] = 1.0;
            m.diag[i] = 4.0;
            m.upper[i] = 1.0;
            rhs[i] = 6.0 / (h * h) * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
        }
        m.lower[n - 1] = 1.0;
        m.diag[n - 1] = 2.0;
        rhs[n - 1] = 6.0 / h * (s1 - (y[n - 1] - y[n - 2]) / h);
        Ok(Self {
            a: g.a(),
            h,
            values: y.to_vec(),
            moments: m.solve(&rhs)?,
        })
    }

    pub fn lo(&self) -> f64 {
        self.a
    }

    pub fn hi(&self) -> f64 {
        self.a + self.h * (self.values.len() - 1) as f64
    }

    fn locate(&self, r: f64) -> Result<(usize, f64)> {
        let (lo, hi) = (self.lo(), self.hi());
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfDomain { value: r, lo, hi });
        }
        let i = (((r - lo) / self.h) as usize).min(self.values.len() - 2);
        Ok((i, r - (lo + i as f64 * self.h)))
    }

    /// `(value, first derivative)` at `r`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let (i, s) = self.locate(r)?;
        let h = self.h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let t = h - s;
        let value = m0 * t * t * t / (6.0 * h)
            + m1 * s * s * s / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * t
            + (y1 / h - m1 * h / 6.0) * s;
        let slope = -m0 * t * t / (2.0 * h) + m1 * s * s / (2.0 * h) - (y0 / h - m0 * h / 6.0)
            + (y1 / h - m1 * h / 6.0);
        Ok((value, slope))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn reproduces_nodes_and_cubics() {
        let g = Grid::new(1.0, 2.0, 11).unwrap();
        let f = ScalarField::from_fn(g, |x| x * x * x - 2.0 * x);
        let s = CubicSpline::interpolate(&f).unwrap();
        for (i, x) in g.nodes().enumerate() {
            assert!((s.eval(x).unwrap().0 - f.values()[i]).abs() < 1e-13);
        }
        // one-sided end slopes are exact for quadratics only, so test one
        let q = ScalarField::from_fn(g, |x| 3.0 * x * x - x);
        let sq = CubicSpline::interpolate(&q).unwrap();
        for r in [1.03, 1.37, 1.91] {
            let (v, d) = sq.eval(r).unwrap();
            assert!((v - (3.0 * r * r - r)).abs() < 1e-12);
            assert!((d - (6.0 * r - 1.0)).abs() < 1e-11);
        }
        assert!(s.eval(0.99).is_err());
    }

    #[test]
    fn fourth_order_on_smooth_data() {
        let err = |n| {
            let g = Grid::new(1.0, 2.0, n).unwrap();
            let s = CubicSpline::interpolate(&ScalarField::from_fn(g, f64::sin)).unwrap();
            (0..500)
                .map(|k| 1.0 + k as f64 / 499.0)
                .map(|r| (s.eval(r).unwrap().0 - r.sin()).abs())
                .fold(0.0, f64::max)
        };
        // clamped with second-order end slopes: at least third order
        assert!((err(17) / err(33)).log2() > 2.8);
    }
}
