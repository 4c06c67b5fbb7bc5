//! Classical fixed-step RK4 with dense output.
//!
//! Every node state and right-hand-side value is stored; between nodes the
//! solution is evaluated by cubic Hermite interpolation on the stored data.
//! This keeps nested integrals (e.g. `∫ a⁻²`) re-integration free and makes
//! solutions cheap to query at arbitrary times.
//!
//! The step count is the caller's choice; [`steps_for`] implements the
//! default density of 4096 steps per unit time (rounded up to an even
//! count, so that node grids support composite Simpson weights).

use crate::error::{Error, Result};

/// Default number of RK4 steps per unit time.
pub const STEPS_PER_UNIT: usize = 4096;

/// Step count for an interval of length `len` at the default density,
/// always even and at least 2.
pub fn steps_for(len: f64) -> usize {
    let n = (len.abs() * STEPS_PER_UNIT as f64).ceil() as usize;
    (n.max(2) + 1) & !1
}

/// Dense RK4 solution: all nodes with their derivatives.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    t0: f64,
    h: f64,
    dim: usize,
    nodes: usize,
    /// Node states, row-major `nodes × dim`.
    ys: Vec<f64>,
    /// RHS at the nodes (same layout).
    fs: Vec<f64>,
}

impl DenseSolution {
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h * (self.nodes - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn node_time(&self, i: usize) -> f64 {
        self.t0 + self.h * i as f64
    }

    pub fn node_state(&self, i: usize) -> &[f64] {
        &self.ys[i * self.dim..(i + 1) * self.dim]
    }

    pub fn node_rhs(&self, i: usize) -> &[f64] {
        &self.fs[i * self.dim..(i + 1) * self.dim]
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        let n = self.nodes - 1;
        let s = (t - self.t0) / self.h;
        let i = (s.floor() as isize).clamp(0, n as isize - 1) as usize;
        (i, s - i as f64)
    }

    /// State at `t` by cubic Hermite interpolation.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let (i, u) = self.segment(t);
        let mut out = vec![0.0; self.dim];
        self.eval_into(i, u, &mut out);
        out
    }

    /// Component `c` at `t`.
    pub fn eval_component(&self, t: f64, c: usize) -> f64 {
        let (i, u) = self.segment(t);
        self.hermite(i, u, c).0
    }

    /// Component value and its time derivative at `t`.
    pub fn eval_component_with_deriv(&self, t: f64, c: usize) -> (f64, f64) {
        let (i, u) = self.segment(t);
        self.hermite(i, u, c)
    }

    fn eval_into(&self, i: usize, u: f64, out: &mut [f64]) {
        for c in 0..self.dim {
            out[c] = self.hermite(i, u, c).0;
        }
    }

    /// Cubic Hermite value and derivative on segment `i` at local coordinate
    /// `u ∈ [0, 1]`.
    fn hermite(&self, i: usize, u: f64, c: usize) -> (f64, f64) {
        let y0 = self.ys[i * self.dim + c];
        let y1 = self.ys[(i + 1) * self.dim + c];
        let m0 = self.fs[i * self.dim + c] * self.h;
        let m1 = self.fs[(i + 1) * self.dim + c] * self.h;
        let u2 = u * u;
        let u3 = u2 * u;
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1;
        let dv = ((6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * m1)
            / self.h;
        (v, dv)
    }

    /// Second derivative of the interpolant (one-sided limit at nodes).
    pub fn eval_component_deriv2(&self, t: f64, c: usize) -> f64 {
        let (i, u) = self.segment(t);
        let y0 = self.ys[i * self.dim + c];
        let y1 = self.ys[(i + 1) * self.dim + c];
        let m0 = self.fs[i * self.dim + c] * self.h;
        let m1 = self.fs[(i + 1) * self.dim + c] * self.h;
        ((12.0 * u - 6.0) * y0
            + (6.0 * u - 4.0) * m0
            + (-12.0 * u + 6.0) * y1
            + (6.0 * u - 2.0) * m1)
            / (self.h * self.h)
    }
}

/// Integrate `y' = rhs(t, y)` from `y0` over `interval` with `steps` RK4
/// steps, storing dense output.
///
/// The right-hand side is arbitrary code; every Jacobi, Riccati and
/// quadrature solve in this crate goes through here.
pub fn integrate<F>(rhs: F, y0: &[f64], interval: (f64, f64), steps: usize) -> Result<DenseSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    assert!(steps >= 1, "need at least one step");
    let (t0, t1) = interval;
    let dim = y0.len();
    let h = (t1 - t0) / steps as f64;

    let mut ys = Vec::with_capacity((steps + 1) * dim);
    let mut fs = Vec::with_capacity((steps + 1) * dim);

    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    rhs(t0, &y, &mut k1);
    ys.extend_from_slice(&y);
    fs.extend_from_slice(&k1);

    for i in 0..steps {
        let t = t0 + h * i as f64;

        for c in 0..dim {
            tmp[c] = y[c] + 0.5 * h * k1[c];
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for c in 0..dim {
            tmp[c] = y[c] + 0.5 * h * k2[c];
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for c in 0..dim {
            tmp[c] = y[c] + h * k3[c];
        }
        rhs(t + h, &tmp, &mut k4);

        for c in 0..dim {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        let t_next = t0 + h * (i + 1) as f64;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        rhs(t_next, &y, &mut k1);
        ys.extend_from_slice(&y);
        fs.extend_from_slice(&k1);
    }

    Ok(DenseSolution {
        t0,
        h,
        dim,
        nodes: steps + 1,
        ys,
        fs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rhs_stays_put() {
        let sol = integrate(|_, _, dy| dy[0] = 0.0, &[1.0], (0.0, 1.0), 16).unwrap();
        assert_eq!(sol.eval(1.0)[0], 1.0);
    }

    #[test]
    fn harmonic_oscillator_endpoint() {
        // y'' = -y, y(0) = 1, y'(0) = 0 → y(1) = cos 1
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[1.0, 0.0],
            (0.0, 1.0),
            steps_for(1.0),
        )
        .unwrap();
        assert!((sol.eval(1.0)[0] - 1f64.cos()).abs() < 1e-9);
        assert!((sol.eval(1.0)[1] + 1f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn hyperbolic_growth_endpoint() {
        // y'' = y, y(0) = 1, y'(0) = 0 → y(1) = cosh 1
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = y[0];
            },
            &[1.0, 0.0],
            (0.0, 1.0),
            steps_for(1.0),
        )
        .unwrap();
        assert!((sol.eval(1.0)[0] - 1f64.cosh()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_between_nodes() {
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[0.0, 1.0],
            (0.0, 1.0),
            64,
        )
        .unwrap();
        // Query off-node points against sin(t).
        for i in 0..50 {
            let t = 0.013 + i as f64 * 0.019;
            assert!((sol.eval_component(t, 0) - t.sin()).abs() < 1e-7);
            let (_, d) = sol.eval_component_with_deriv(t, 0);
            assert!((d - t.cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn fourth_order_richardson_ratio() {
        // Halving the step divides the endpoint error by ~16 on a smooth
        // problem; the ratio is measured away from the roundoff floor.
        let run = |steps: usize| {
            integrate(
                |_, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -y[0];
                },
                &[1.0, 0.0],
                (0.0, 1.0),
                steps,
            )
            .unwrap()
            .eval(1.0)[0]
        };
        let exact = 1f64.cos();
        let e1 = (run(64) - exact).abs();
        let e2 = (run(128) - exact).abs();
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn non_finite_state_is_reported() {
        // y' = y² from y(0) = 1 blows up before t = 1.5.
        let err = integrate(|_, y, dy| dy[0] = y[0] * y[0], &[1.0], (0.0, 1.5), 64).unwrap_err();
        assert_eq!(err.name(), "NonFiniteState");
    }

    #[test]
    fn steps_for_is_even_and_dense() {
        assert_eq!(steps_for(1.0) % 2, 0);
        assert!(steps_for(1.0) >= 4096);
        assert!(steps_for(0.1) >= 410);
        assert_eq!(steps_for(0.1) % 2, 0);
    }
}
