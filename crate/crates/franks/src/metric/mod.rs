//! Metric synthesis on the Fermi strip.
//!
//! A surface metric with the axis as a geodesic takes the form
//! `g = J(t,x)² dt² + dx²` in Fermi coordinates, with `J_t` the transverse
//! Jacobi factor solving `J'' + K J = 0` in `x` from `J(0) = 1`,
//! `J'(0) = 0`. Prescribing the curvature therefore synthesizes the metric
//! line by line, and two metrics interpolate through a bump in `x`
//! supported in a width-η tube.
//!
//! Strip norms are taken over transverse derivatives (`∂x`, `∂xx`): the
//! tube estimates control exactly the growth of `Ĵ − J` away from the
//! axis, and the Gauss curvature of charts in this form is `−J_xx / J`.

use std::io::Write;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jacobi::{solve_jacobi_scalar_steps, ScalarSolution};
use crate::numkit::bump::plateau;
use crate::numkit::jet::{Jet2, Jet4};
use crate::numkit::{grid_cr_norm, quad, MatrixCurve, SmoothFn};

/// Transverse Jacobi factors below this trigger [`Error::FocalPoint`].
pub const FOCAL_THRESHOLD: f64 = 1e-3;

/// Default strip half-width.
pub const DEFAULT_X_MAX: f64 = 0.5;

/// Default number of synthesized t-gridlines.
pub const DEFAULT_T_LINES: usize = 1025;

/// ODE steps per transverse half-line.
const X_STEPS: usize = 512;

/// The scaled plateau bump `φ_η(x) = φ(x/η)`: 1 on `|x| ≤ η/4`, 0 on
/// `|x| ≥ η`.
#[derive(Debug, Clone, Copy)]
pub struct BumpFunction {
    pub eta: f64,
}

impl BumpFunction {
    pub fn new(eta: f64) -> BumpFunction {
        assert!(eta > 0.0);
        BumpFunction { eta }
    }

    /// 4-jet in `x` of the scaled bump.
    pub fn jet(&self, x: f64) -> Jet4 {
        plateau(Jet4::affine(x, 1.0 / self.eta, 0.0))
    }

    /// `(C⁰, C¹, C²)` norms of the unscaled profile `φ`, measured once.
    pub fn base_norms() -> (f64, f64, f64) {
        static NORMS: OnceLock<(f64, f64, f64)> = OnceLock::new();
        *NORMS.get_or_init(|| {
            let f = SmoothFn::from_jet4((-1.0, 1.0), |x| plateau(Jet4::variable(x)));
            let n = crate::numkit::grid_norms(&f, 8193);
            (n.c0, n.c1, n.c2)
        })
    }

    /// Scaled norms; C¹ and C² grow like `η⁻¹` and `η⁻²`.
    pub fn scaled_norm_bounds(&self) -> (f64, f64, f64) {
        let (c0, c1, c2) = Self::base_norms();
        (c0, c1 / self.eta, c2 / (self.eta * self.eta))
    }
}

/// One synthesized transverse line: dense solutions to the right and left
/// of the axis.
#[derive(Debug, Clone)]
struct Line {
    right: ScalarSolution,
    left: ScalarSolution,
}

impl Line {
    fn j_jet(&self, x: f64) -> Jet2 {
        let sol = if x >= 0.0 { &self.right } else { &self.left };
        let (j, jx) = sol.pair(x);
        // J'' = −K J from the transverse equation.
        let k = sol.curvature().value(x);
        Jet2::new(j, jx, -k * j)
    }
}

/// Grid geometry shared by the charts of one experiment.
#[derive(Debug, Clone, Copy)]
pub struct ChartGrid {
    pub x_max: f64,
    pub t_lines: usize,
}

impl Default for ChartGrid {
    fn default() -> Self {
        ChartGrid {
            x_max: DEFAULT_X_MAX,
            t_lines: DEFAULT_T_LINES,
        }
    }
}

#[derive(Clone, Debug)]
enum ChartKind {
    /// Synthesized from a curvature profile.
    Synthesized { lines: Vec<Line> },
    /// Tube interpolation `[(1−φ_η)J + φ_η Ĵ]²` of two charts.
    Blended {
        base: Box<MetricChart>,
        hat: Box<MetricChart>,
        bump: BumpFunction,
    },
}

/// Metric components `g₀₀(t,x) = J²`, `g₁₁ = 1`, `g₀₁ = 0` on the Fermi
/// strip, with transverse derivative access to order 2.
#[derive(Clone, Debug)]
pub struct MetricChart {
    grid: ChartGrid,
    /// Curvature along the axis, `t ↦ K(t, 0)`.
    axis_curvature: SmoothFn,
    kind: ChartKind,
}

impl MetricChart {
    pub fn grid(&self) -> ChartGrid {
        self.grid
    }

    pub fn t_at(&self, i: usize) -> f64 {
        let (t0, t1) = self.axis_curvature.domain();
        t0 + (t1 - t0) * i as f64 / (self.grid.t_lines - 1) as f64
    }

    pub fn axis_curvature(&self) -> &SmoothFn {
        &self.axis_curvature
    }

    /// Tube width if this chart is an interpolation.
    pub fn tube_width(&self) -> Option<f64> {
        match &self.kind {
            ChartKind::Synthesized { .. } => None,
            ChartKind::Blended { bump, .. } => Some(bump.eta),
        }
    }

    /// Transverse Jacobi factor `(J, ∂x J, ∂xx J)` on gridline `i`.
    pub fn j_jet(&self, i: usize, x: f64) -> Jet2 {
        match &self.kind {
            ChartKind::Synthesized { lines } => lines[i].j_jet(x),
            ChartKind::Blended { base, hat, bump } => {
                let phi = bump.jet(x);
                if phi.d[0] == 0.0 && phi.d[1] == 0.0 && phi.d[2] == 0.0 {
                    // Identically outside the tube: exactly the base chart.
                    return base.j_jet(i, x);
                }
                let j = base.j_jet(i, x);
                let jh = hat.j_jet(i, x);
                let delta = jh.sub(j);
                j.add(phi.jet2().mul(delta))
            }
        }
    }

    /// `(g₀₀, ∂x g₀₀, ∂xx g₀₀)` on gridline `i`.
    pub fn g00_jet(&self, i: usize, x: f64) -> Jet2 {
        let j = self.j_jet(i, x);
        j.mul(j)
    }

    /// Gauss curvature measured from chart values only, by fourth-order
    /// central differences of `J` in `x` — an oracle independent of the
    /// synthesis route.
    pub fn gauss_curvature_fd(&self, i: usize, x: f64, h: f64) -> f64 {
        let j = |x: f64| self.j_jet(i, x).f;
        let jxx = (-j(x + 2.0 * h) + 16.0 * j(x + h) - 30.0 * j(x) + 16.0 * j(x - h)
            - j(x - 2.0 * h))
            / (12.0 * h * h);
        -jxx / j(x)
    }

    /// Max over the t-grid of `|K_fd(t, 0) − target(t)|`.
    pub fn axis_curvature_error(&self, target: &SmoothFn) -> f64 {
        let h = match self.tube_width() {
            // Keep the stencil inside the inner plateau of the tube.
            Some(eta) => (eta / 16.0).min(1e-3),
            None => 1e-3,
        };
        let mut worst = 0.0f64;
        for i in 0..self.grid.t_lines {
            let t = self.t_at(i);
            let err = (self.gauss_curvature_fd(i, 0.0, h) - target.value(t)).abs();
            worst = worst.max(err);
        }
        worst
    }

    /// Worst violation of the Fermi axis property: `g₀₀(t,0) = 1` and
    /// `∂x g₀₀(t,0) = 0`.
    pub fn fermi_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.grid.t_lines {
            let g = self.g00_jet(i, 0.0);
            worst = worst.max((g.f - 1.0).abs()).max(g.df.abs());
        }
        worst
    }

    /// Plain-text tabular dump: header, then comma-separated rows of
    /// `(t, x, g₀₀, ∂g₀₀, ∂²g₀₀)` at 17 significant digits.
    pub fn export_csv<W: Write>(&self, x_samples: usize, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,g00,dg00_dx,d2g00_dx2")?;
        for i in 0..self.grid.t_lines {
            let t = self.t_at(i);
            for sx in 0..x_samples {
                let x =
                    -self.grid.x_max + 2.0 * self.grid.x_max * sx as f64 / (x_samples - 1) as f64;
                let g = self.g00_jet(i, x);
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    t, x, g.f, g.df, g.ddf
                )?;
            }
        }
        Ok(())
    }
}

/// Synthesize the chart realizing transverse curvature `K(t, x) = k̂(t)`
/// (the constant-in-x extension of an axis curvature profile).
pub fn surface_metric_from_curvature(k_hat: &SmoothFn, grid: ChartGrid) -> Result<MetricChart> {
    let (t0, t1) = k_hat.domain();
    let mut lines = Vec::with_capacity(grid.t_lines);
    for i in 0..grid.t_lines {
        let t = t0 + (t1 - t0) * i as f64 / (grid.t_lines - 1) as f64;
        let k_here = k_hat.value(t);
        let kx_r = SmoothFn::constant((0.0, grid.x_max), k_here);
        let kx_l = SmoothFn::constant((0.0, -grid.x_max), k_here);
        let right = solve_jacobi_scalar_steps(&kx_r, 1.0, 0.0, (0.0, grid.x_max), X_STEPS)?;
        let left = solve_jacobi_scalar_steps(&kx_l, 1.0, 0.0, (0.0, -grid.x_max), X_STEPS)?;
        for sol in [&right, &left] {
            let (min_abs, x_min) = sol.min_abs();
            if min_abs < FOCAL_THRESHOLD {
                return Err(Error::FocalPoint { t, x: x_min });
            }
        }
        lines.push(Line { right, left });
    }
    Ok(MetricChart {
        grid,
        axis_curvature: k_hat.clone(),
        kind: ChartKind::Synthesized { lines },
    })
}

/// Interpolate two charts through a width-η tube:
/// `g̃₀₀ = [(1−φ_η)J + φ_η Ĵ]²`, other components unchanged.
pub fn interpolate_metric(base: &MetricChart, hat: &MetricChart, eta: f64) -> Result<MetricChart> {
    if eta > base.grid.x_max {
        return Err(Error::WidthExceedsChart {
            eta,
            x_max: base.grid.x_max,
        });
    }
    assert_eq!(
        base.grid.t_lines, hat.grid.t_lines,
        "charts must share grids"
    );
    Ok(MetricChart {
        grid: base.grid,
        axis_curvature: hat.axis_curvature.clone(),
        kind: ChartKind::Blended {
            base: Box::new(base.clone()),
            hat: Box::new(hat.clone()),
            bump: BumpFunction::new(eta),
        },
    })
}

/// Measured tube norms of `Δ = Ĵ − J` with their curvature-scaled bounds.
#[derive(Debug, Clone, Copy)]
pub struct DeltaEstimates {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub bound_c0: f64,
    pub bound_c1: f64,
    pub bound_c2: f64,
}

/// Cumulative transverse norms of `Ĵ − J` over the tube `|x| < η`, checked
/// against `2η²‖Δk‖`, `2η‖Δk‖`, `2‖Δk‖`.
pub fn delta_estimates(base: &MetricChart, hat: &MetricChart, eta: f64) -> Result<DeltaEstimates> {
    if eta > base.grid.x_max {
        return Err(Error::WidthExceedsChart {
            eta,
            x_max: base.grid.x_max,
        });
    }
    let dk = grid_cr_norm(
        &hat.axis_curvature.sub(&base.axis_curvature),
        0,
        crate::numkit::NORM_GRID,
    );
    let (mut m0, mut m1, mut m2) = (0.0f64, 0.0f64, 0.0f64);
    let x_samples = 129;
    for i in 0..base.grid.t_lines {
        for sx in 0..x_samples {
            let x = -eta + 2.0 * eta * sx as f64 / (x_samples - 1) as f64;
            let d = hat.j_jet(i, x).sub(base.j_jet(i, x));
            m0 = m0.max(d.f.abs());
            m1 = m1.max(d.df.abs());
            m2 = m2.max(d.ddf.abs());
        }
    }
    let est = DeltaEstimates {
        c0: m0,
        c1: m0.max(m1),
        c2: m0.max(m1).max(m2),
        bound_c0: 2.0 * eta * eta * dk,
        bound_c1: 2.0 * eta * dk,
        bound_c2: 2.0 * dk,
    };
    for (which, measured, bound) in [
        ("tube C0", est.c0, est.bound_c0),
        ("tube C1", est.c1, est.bound_c1),
        ("tube C2", est.c2, est.bound_c2),
    ] {
        if measured > bound {
            return Err(Error::EstimateViolated {
                which,
                measured,
                bound,
            });
        }
    }
    Ok(est)
}

/// Grid C² norm (transverse convention) of `g̃₀₀ − g₀₀` over the strip.
///
/// Sampling refines inside the bump transition band, where the x-scale is
/// set by η rather than by the strip.
pub fn c2_distance(blended: &MetricChart, base: &MetricChart) -> f64 {
    let eta = blended.tube_width().unwrap_or(blended.grid.x_max);
    let mut xs: Vec<f64> = Vec::new();
    let uniform = 257;
    for sx in 0..uniform {
        xs.push(-base.grid.x_max + 2.0 * base.grid.x_max * sx as f64 / (uniform - 1) as f64);
    }
    // Transition bands ±[η/4, η].
    for side in [-1.0, 1.0] {
        for sx in 0..=128 {
            xs.push(side * eta * (0.25 + 0.75 * sx as f64 / 128.0));
        }
    }
    let mut worst = 0.0f64;
    for i in 0..base.grid.t_lines {
        for &x in &xs {
            let d = blended.g00_jet(i, x).sub(base.g00_jet(i, x));
            worst = worst.max(d.f.abs()).max(d.df.abs()).max(d.ddf.abs());
        }
    }
    worst
}

/// The η-independent C² bound `8‖φ‖_{C²}‖k̃ − k‖_{C⁰}`.
pub fn c2_distance_bound(base: &MetricChart, hat: &MetricChart) -> f64 {
    let (_, _, phi_c2) = BumpFunction::base_norms();
    let dk = grid_cr_norm(
        &hat.axis_curvature.sub(&base.axis_curvature),
        0,
        crate::numkit::NORM_GRID,
    );
    8.0 * phi_c2 * dk
}

/// Largest `|x|` with `g̃₀₀ ≠ g₀₀` (bit-exact comparison).
pub fn support_radius(blended: &MetricChart, base: &MetricChart) -> f64 {
    let mut worst = 0.0f64;
    let samples = 2049;
    for i in (0..base.grid.t_lines).step_by(8) {
        for sx in 0..samples {
            let x = -base.grid.x_max + 2.0 * base.grid.x_max * sx as f64 / (samples - 1) as f64;
            if blended.g00_jet(i, x).f != base.g00_jet(i, x).f {
                worst = worst.max(x.abs());
            }
        }
    }
    worst
}

/// Log–log slopes of the tube norms against η.
pub fn tube_scaling(
    base: &MetricChart,
    hat: &MetricChart,
    etas: &[f64],
) -> Result<(f64, f64, Vec<DeltaEstimates>)> {
    let mut c0s = Vec::with_capacity(etas.len());
    let mut c1s = Vec::with_capacity(etas.len());
    let mut all = Vec::with_capacity(etas.len());
    for &eta in etas {
        let est = delta_estimates(base, hat, eta)?;
        c0s.push(est.c0);
        c1s.push(est.c1);
        all.push(est);
    }
    let (s0, _) = crate::numkit::fit::fit_loglog(etas, &c0s);
    let (s1, _) = crate::numkit::fit::fit_loglog(etas, &c1s);
    Ok((s0, s1, all))
}

/// Simpson mass of a profile over its domain.
pub fn profile_mass(f: &SmoothFn, panels: usize) -> f64 {
    let (a, b) = f.domain();
    quad::simpson(|t| f.value(t), a, b, panels)
}

/// Quadratic-model chart for the higher-dimensional strip:
/// `g₀₀(t; x) = 1 − R_{kl}(t) xᵏ xˡ`, optionally carrying a curvature
/// increment `ΔR` blended through a radial tube bump.
pub struct HdChart {
    n: usize,
    r: MatrixCurve,
    delta_r: Option<MatrixCurve>,
    bump: Option<BumpFunction>,
}

impl HdChart {
    pub fn new(r: &MatrixCurve) -> HdChart {
        HdChart {
            n: r.n(),
            r: r.clone(),
            delta_r: None,
            bump: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Install the curvature increment: `g¹₀₀ = g₀₀ − ΔR_{kl} xᵏ xˡ`
    /// (full double sum), so that second transverse derivatives report
    /// `−2(R + ΔR)`.
    pub fn with_delta_r(&self, delta_r: &MatrixCurve) -> HdChart {
        assert_eq!(delta_r.n(), self.n);
        HdChart {
            n: self.n,
            r: self.r.clone(),
            delta_r: Some(delta_r.clone()),
            bump: self.bump,
        }
    }

    /// Blend the increment through a radial bump of width η:
    /// `g̃ = φ_η(‖x‖) g¹ + (1 − φ_η(‖x‖)) g`.
    pub fn with_tube(&self, eta: f64) -> HdChart {
        HdChart {
            n: self.n,
            r: self.r.clone(),
            delta_r: self.delta_r.clone(),
            bump: Some(BumpFunction::new(eta)),
        }
    }

    pub fn g00(&self, t: f64, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        let r = self.r.eval(t);
        let mut q = 0.0;
        for k in 0..self.n {
            for l in 0..self.n {
                q += r[(k, l)] * x[k] * x[l];
            }
        }
        let mut g = 1.0 - q;
        if let Some(dr) = &self.delta_r {
            let drm = dr.eval(t);
            let mut dq = 0.0;
            for k in 0..self.n {
                for l in 0..self.n {
                    dq += drm[(k, l)] * x[k] * x[l];
                }
            }
            let weight = match &self.bump {
                Some(b) => {
                    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    b.jet(norm).d[0]
                }
                None => 1.0,
            };
            g -= weight * dq;
        }
        g
    }

    /// Central second differences of `g₀₀` at the axis; reproduces
    /// `−2(R + ΔR)(t)` for charts carrying an increment.
    pub fn second_x_differences(&self, t: f64, h: f64) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(n, n);
        let center = self.g00(t, &vec![0.0; n]);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    let mut xp = vec![0.0; n];
                    xp[i] = h;
                    let mut xm = vec![0.0; n];
                    xm[i] = -h;
                    out[(i, i)] = (self.g00(t, &xp) - 2.0 * center + self.g00(t, &xm)) / (h * h);
                } else {
                    let mut xpp = vec![0.0; n];
                    xpp[i] = h;
                    xpp[j] = h;
                    let mut xpm = vec![0.0; n];
                    xpm[i] = h;
                    xpm[j] = -h;
                    let mut xmp = vec![0.0; n];
                    xmp[i] = -h;
                    xmp[j] = h;
                    let mut xmm = vec![0.0; n];
                    xmm[i] = -h;
                    xmm[j] = -h;
                    out[(i, j)] = (self.g00(t, &xpp) - self.g00(t, &xpm) - self.g00(t, &xmp)
                        + self.g00(t, &xmm))
                        / (4.0 * h * h);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> ChartGrid {
        ChartGrid {
            x_max: 0.5,
            t_lines: 65,
        }
    }

    #[test]
    fn flat_curvature_gives_flat_strip() {
        let k = SmoothFn::zero((0.0, 1.0));
        let chart = surface_metric_from_curvature(&k, small_grid()).unwrap();
        for i in [0, 32, 64] {
            for x in [-0.4, -0.1, 0.0, 0.2, 0.5] {
                let g = chart.g00_jet(i, x);
                assert_eq!(g.f, 1.0);
                assert_eq!(g.df, 0.0);
            }
        }
        assert_eq!(chart.fermi_defect(), 0.0);
    }

    #[test]
    fn unit_curvature_gives_cosine_squared() {
        let k = SmoothFn::constant((0.0, 1.0), 1.0);
        let chart = surface_metric_from_curvature(&k, small_grid()).unwrap();
        let g = chart.g00_jet(10, 0.1);
        let expect = (0.1f64).cos().powi(2);
        assert!((g.f - expect).abs() < 1e-8, "{} vs {expect}", g.f);
    }

    #[test]
    fn gauss_curvature_oracle_matches_input() {
        let tau = 2.0 * std::f64::consts::PI;
        let k = SmoothFn::sinusoid((0.0, 1.0), 0.8, tau, 0.4);
        let chart = surface_metric_from_curvature(&k, small_grid()).unwrap();
        // Constant-in-x synthesis: curvature matches the profile on the
        // whole strip, not just the axis.
        for i in [0, 20, 40, 64] {
            let t = chart.t_at(i);
            for x in [-0.3, 0.0, 0.25] {
                let measured = chart.gauss_curvature_fd(i, x, 1e-3);
                assert!(
                    (measured - k.value(t)).abs() < 1e-6,
                    "t={t} x={x}: {measured} vs {}",
                    k.value(t)
                );
            }
        }
        assert!(chart.axis_curvature_error(&k) < 1e-7);
    }

    #[test]
    fn focal_point_is_reported() {
        let k = SmoothFn::constant((0.0, 1.0), 10.0);
        let err = surface_metric_from_curvature(&k, small_grid()).unwrap_err();
        assert_eq!(err.name(), "FocalPoint");
    }

    #[test]
    fn interpolation_with_itself_is_identity() {
        let k = SmoothFn::constant((0.0, 1.0), 0.3);
        let chart = surface_metric_from_curvature(&k, small_grid()).unwrap();
        let blended = interpolate_metric(&chart, &chart, 0.2).unwrap();
        for i in [0, 30, 64] {
            for x in [-0.45, -0.15, 0.0, 0.1, 0.19, 0.3] {
                let d = blended.g00_jet(i, x).sub(chart.g00_jet(i, x));
                assert_eq!(d.f, 0.0);
                assert_eq!(d.df, 0.0);
            }
        }
    }

    #[test]
    fn interpolation_support_is_exactly_the_tube() {
        let k = SmoothFn::zero((0.0, 1.0));
        let k_hat = SmoothFn::constant((0.0, 1.0), 0.01);
        let g = surface_metric_from_curvature(&k, small_grid()).unwrap();
        let g_hat = surface_metric_from_curvature(&k_hat, small_grid()).unwrap();
        let eta = 0.2;
        let blended = interpolate_metric(&g, &g_hat, eta).unwrap();
        assert!(support_radius(&blended, &g) <= eta);
        // Inside the inner plateau the chart IS the target chart.
        for i in [0, 33] {
            for x in [-0.04, 0.0, 0.049] {
                let d = blended.g00_jet(i, x).sub(g_hat.g00_jet(i, x));
                assert_eq!(d.f, 0.0);
            }
        }
    }

    #[test]
    fn width_exceeding_chart_is_rejected() {
        let k = SmoothFn::zero((0.0, 1.0));
        let g = surface_metric_from_curvature(&k, small_grid()).unwrap();
        assert_eq!(
            interpolate_metric(&g, &g, 0.7).unwrap_err().name(),
            "WidthExceedsChart"
        );
    }

    #[test]
    fn blended_axis_curvature_is_the_target() {
        let tau = 2.0 * std::f64::consts::PI;
        let k = SmoothFn::sinusoid((0.0, 1.0), 1.0, tau, 0.0);
        let k_hat = k.add(&SmoothFn::constant((0.0, 1.0), 0.02));
        let g = surface_metric_from_curvature(&k, small_grid()).unwrap();
        let g_hat = surface_metric_from_curvature(&k_hat, small_grid()).unwrap();
        for eta in [0.2, 0.05] {
            let blended = interpolate_metric(&g, &g_hat, eta).unwrap();
            assert!(
                blended.axis_curvature_error(&k_hat) < 1e-6,
                "eta {eta}: {}",
                blended.axis_curvature_error(&k_hat)
            );
        }
    }

    #[test]
    fn identical_charts_have_zero_estimates() {
        let k = SmoothFn::constant((0.0, 1.0), 0.4);
        let g = surface_metric_from_curvature(&k, small_grid()).unwrap();
        let est = delta_estimates(&g, &g, 0.1).unwrap();
        assert_eq!((est.c0, est.c1, est.c2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn tube_estimates_hold_for_small_deltas() {
        let k = SmoothFn::zero((0.0, 1.0));
        let bumpy = SmoothFn::from_jet4((0.0, 1.0), |t| {
            crate::numkit::bump::bump01_wide(Jet4::affine(t, 4.0, -1.0)).scale(0.01 / 0.779)
        });
        let g = surface_metric_from_curvature(&k, small_grid()).unwrap();
        let g_hat = surface_metric_from_curvature(&bumpy, small_grid()).unwrap();
        let est = delta_estimates(&g, &g_hat, 0.1).unwrap();
        assert!(est.c0 <= 2e-4);
        assert!(est.c1 <= 2e-3);
        assert!(est.c2 <= 2e-2);
        // Halving η quarters the C⁰ norm (within 30%).
        let est_half = delta_estimates(&g, &g_hat, 0.05).unwrap();
        let ratio = est.c0 / est_half.c0;
        assert!((ratio - 4.0).abs() < 1.2, "ratio {ratio}");
    }

    #[test]
    fn c2_distance_zero_for_identity() {
        let k = SmoothFn::constant((0.0, 1.0), 0.2);
        let g = surface_metric_from_curvature(&k, small_grid()).unwrap();
        let blended = interpolate_metric(&g, &g, 0.1).unwrap();
        assert_eq!(c2_distance(&blended, &g), 0.0);
    }

    #[test]
    fn c2_distance_is_eta_independent_and_bounded() {
        let k = SmoothFn::zero((0.0, 1.0));
        let k_hat = SmoothFn::constant((0.0, 1.0), 0.01);
        let g = surface_metric_from_curvature(&k, small_grid()).unwrap();
        let g_hat = surface_metric_from_curvature(&k_hat, small_grid()).unwrap();
        let bound = c2_distance_bound(&g, &g_hat);
        let mut ds = Vec::new();
        for eta in [0.2, 0.1, 0.05] {
            let blended = interpolate_metric(&g, &g_hat, eta).unwrap();
            let d = c2_distance(&blended, &g);
            assert!(d <= bound, "eta {eta}: {d} > {bound}");
            ds.push(d);
        }
        let hi = ds.iter().cloned().fold(0.0f64, f64::max);
        let lo = ds.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 2.0, "spread {}", hi / lo);
    }

    #[test]
    fn export_format_is_stable() {
        let k = SmoothFn::zero((0.0, 1.0));
        let g = surface_metric_from_curvature(
            &k,
            ChartGrid {
                x_max: 0.5,
                t_lines: 3,
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        g.export_csv(3, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x,g00,dg00_dx,d2g00_dx2");
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), 5);
        assert!(row.contains('e'));
    }

    #[test]
    fn hd_second_differences_reproduce_curvature() {
        let r0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -1.0]);
        let dr0 = DMatrix::from_row_slice(2, 2, &[0.02, -0.01, -0.01, 0.05]);
        let r = MatrixCurve::constant((0.0, 1.0), &r0);
        let dr = MatrixCurve::constant((0.0, 1.0), &dr0);
        let base = HdChart::new(&r);
        let fd = base.second_x_differences(0.3, 1e-3);
        let expect = -2.0 * &r0;
        assert!(crate::numkit::max_col_sum(&(fd - &expect)) < 1e-6);

        let with = base.with_delta_r(&dr);
        let fd2 = with.second_x_differences(0.3, 1e-3);
        let expect2 = -2.0 * (&r0 + &dr0);
        assert!(crate::numkit::max_col_sum(&(fd2 - &expect2)) < 1e-6);

        // Through the tube the axis behavior is identical.
        let tubed = with.with_tube(0.1);
        let fd3 = tubed.second_x_differences(0.3, 1e-3);
        assert!(crate::numkit::max_col_sum(&(fd3 - &expect2)) < 1e-6);
        // Outside the tube the metric is the base quadratic model.
        let x = [0.2, 0.0];
        assert_eq!(tubed.g00(0.3, &x), base.g00(0.3, &x));
    }

    #[test]
    fn bump_norms_scale_with_eta() {
        let (c0, c1, c2) = BumpFunction::base_norms();
        assert_eq!(c0, 1.0);
        assert!(c1 > 1.0 && c2 > c1);
        let b = BumpFunction::new(0.1);
        let (s0, s1, s2) = b.scaled_norm_bounds();
        assert_eq!(s0, 1.0);
        assert!((s1 - c1 * 10.0).abs() < 1e-12);
        assert!((s2 - c2 * 100.0).abs() < 1e-12);
    }
}
