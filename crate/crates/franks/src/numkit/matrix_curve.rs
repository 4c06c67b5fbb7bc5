//! Time-dependent n×n matrices with entrywise [`SmoothFn`] structure.

use nalgebra::DMatrix;

use super::smooth::SmoothFn;

/// An n×n matrix of smooth functions sharing one domain.
#[derive(Debug, Clone)]
pub struct MatrixCurve {
    n: usize,
    domain: (f64, f64),
    /// Row-major entries.
    entries: Vec<SmoothFn>,
}

impl MatrixCurve {
    pub fn new(n: usize, domain: (f64, f64), entries: Vec<SmoothFn>) -> MatrixCurve {
        assert_eq!(entries.len(), n * n);
        MatrixCurve { n, domain, entries }
    }

    /// Constant-in-time curve.
    pub fn constant(domain: (f64, f64), m: &DMatrix<f64>) -> MatrixCurve {
        let n = m.nrows();
        assert_eq!(n, m.ncols());
        let entries = (0..n * n)
            .map(|idx| SmoothFn::constant(domain, m[(idx / n, idx % n)]))
            .collect();
        MatrixCurve { n, domain, entries }
    }

    /// Build each entry from a closure `(i, j) -> SmoothFn`.
    pub fn from_fn(
        n: usize,
        domain: (f64, f64),
        mut f: impl FnMut(usize, usize) -> SmoothFn,
    ) -> MatrixCurve {
        let entries = (0..n * n).map(|idx| f(idx / n, idx % n)).collect();
        MatrixCurve { n, domain, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn entry(&self, i: usize, j: usize) -> &SmoothFn {
        &self.entries[i * self.n + j]
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).value(t))
    }

    pub fn eval_deriv(&self, t: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).deriv(t))
    }

    pub fn eval_deriv2(&self, t: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).deriv2(t))
    }

    /// Entrywise sum.
    pub fn add(&self, other: &MatrixCurve) -> MatrixCurve {
        assert_eq!(self.n, other.n);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect();
        MatrixCurve {
            n: self.n,
            domain: self.domain,
            entries,
        }
    }

    /// Entrywise scalar multiple.
    pub fn scale(&self, c: f64) -> MatrixCurve {
        let entries = self.entries.iter().map(|e| e.scale(c)).collect();
        MatrixCurve {
            n: self.n,
            domain: self.domain,
            entries,
        }
    }

    /// Restrict to a subinterval with a time shift: the result evaluated at
    /// `t` equals `self` at `t0 + t`.
    pub fn shifted(&self, t0: f64, len: f64) -> MatrixCurve {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let e = e.clone();
                SmoothFn::from_jet2((0.0, len), e.provenance(), move |t| e.jet2(t0 + t))
            })
            .collect();
        MatrixCurve {
            n: self.n,
            domain: (0.0, len),
            entries,
        }
    }

    /// Flatten the entry closures into cubic-Hermite tables on a uniform
    /// grid. Evaluation of deep algebraic combinations then costs O(1) per
    /// entry; the grid must resolve the narrowest feature of the curve.
    pub fn tabulate(&self, steps: usize) -> MatrixCurve {
        use std::sync::Arc;
        let (t0, t1) = self.domain;
        let h = (t1 - t0) / steps as f64;
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let mut f = Vec::with_capacity(steps + 1);
                let mut df = Vec::with_capacity(steps + 1);
                let mut ddf = Vec::with_capacity(steps + 1);
                for i in 0..=steps {
                    let j = e.jet2(t0 + h * i as f64);
                    f.push(j.f);
                    df.push(j.df);
                    ddf.push(j.ddf);
                }
                let table = Arc::new((f, df, ddf));
                SmoothFn::from_jet2(self.domain, e.provenance(), move |t| {
                    let (f, df, ddf) = &*table;
                    let s = (t - t0) / h;
                    let i = (s.floor() as isize).clamp(0, steps as isize - 1) as usize;
                    let u = s - i as f64;
                    let hermite = |y0: f64, y1: f64, m0: f64, m1: f64| {
                        let (m0, m1) = (m0 * h, m1 * h);
                        let u2 = u * u;
                        let u3 = u2 * u;
                        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
                            + (u3 - 2.0 * u2 + u) * m0
                            + (-2.0 * u3 + 3.0 * u2) * y1
                            + (u3 - u2) * m1
                    };
                    super::jet::Jet2::new(
                        hermite(f[i], f[i + 1], df[i], df[i + 1]),
                        hermite(df[i], df[i + 1], ddf[i], ddf[i + 1]),
                        ddf[i] * (1.0 - u) + ddf[i + 1] * u,
                    )
                })
            })
            .collect();
        MatrixCurve {
            n: self.n,
            domain: self.domain,
            entries,
        }
    }

    /// Worst asymmetry `max_t ‖M(t) − M(t)ᵀ‖` over a uniform grid.
    pub fn symmetry_defect(&self, grid_points: usize) -> f64 {
        let (t0, t1) = self.domain;
        let mut worst = 0.0f64;
        for g in 0..grid_points.max(2) {
            let t = t0 + (t1 - t0) * g as f64 / (grid_points.max(2) - 1) as f64;
            let m = self.eval(t);
            worst = worst.max(super::symplectic::max_col_sum(&(&m - m.transpose())));
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_curve_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        let c = MatrixCurve::constant((0.0, 1.0), &m);
        assert_eq!(c.eval(0.3), m);
        assert_eq!(c.eval_deriv(0.3), DMatrix::zeros(2, 2));
        assert!(c.symmetry_defect(17) < 1e-12);
    }

    #[test]
    fn shifted_curve_translates_time() {
        let c = MatrixCurve::from_fn(1, (0.0, 1.0), |_, _| {
            SmoothFn::sinusoid((0.0, 1.0), 1.0, 1.0, 0.0)
        });
        let s = c.shifted(0.25, 0.5);
        assert!((s.eval(0.1)[(0, 0)] - (0.35f64).sin()).abs() < 1e-15);
        assert_eq!(s.domain(), (0.0, 0.5));
    }

    #[test]
    fn add_and_scale_are_entrywise() {
        let a = MatrixCurve::constant((0.0, 1.0), &DMatrix::from_element(2, 2, 1.0));
        let b = a.scale(2.0).add(&a);
        assert_eq!(b.eval(0.5), DMatrix::from_element(2, 2, 3.0));
    }
}
