//! The higher-dimensional (n ≥ 2) perturbation mechanism.
//!
//! Symmetric perturbations `ψ` of the Riccati transport `U_A = A'A⁻¹`
//! correspond exactly to symmetric curvature increments
//! `ΔR = −ψ' − U_Aψ − ψU_A − ψ²`. Three time-profile families target the
//! `A'`, `A` and `B` blocks of the window map; a fourth — two canceling
//! copies of the third separated in time — picks up the rotation of the
//! dynamics and produces antisymmetric `A`-block changes proportional to
//! the eigenvalue gaps of `R`. Together they span all `2n² + n` chart
//! coordinates of Sp(n) at a point where `R` has distinct eigenvalues.

pub mod eigen;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jacobi::{
    dp_from_curvature, dp_from_curvature_steps, fundamental_matrix_on, riccati_transport,
    CurvatureProfile, RiccatiCurve,
};
use crate::numkit::bump::{bump01_wide, smooth_step};
use crate::numkit::fit::fit_loglog;
use crate::numkit::jet::Jet4;
use crate::numkit::{max_col_sum, MatrixCurve, Provenance, SmoothFn, SymplecticMap};

/// Default floor for the eigenvalue-separation functional.
pub const H_MIN_DEFAULT: f64 = 1e-6;

/// Forward-difference step per coefficient for the chart Jacobian.
pub const JACOBIAN_FD_STEP: f64 = 1e-5;

/// Coefficient-ball radius over which the chart map is validated; enters
/// the published realization radius.
pub const COEFF_RANGE: f64 = 4.0;

const NEWTON_TOL: f64 = 1e-10;
const RESIDUAL_CONTRACT: f64 = 1e-8;
const MAX_NEWTON: usize = 50;

/// Samples across the narrowest profile feature.
const FEATURE_SAMPLES: f64 = 96.0;

/// Step count resolving features of width `feature` on a length-`len`
/// interval; never below the default per-unit density.
fn feature_steps(len: f64, feature: f64) -> usize {
    let fine = (len / feature * FEATURE_SAMPLES).ceil() as usize;
    let n = fine.max(crate::numkit::steps_for(len));
    (n + 1) & !1
}

// ---------------------------------------------------------------------
// Time-profile families
// ---------------------------------------------------------------------

/// The three short-time profile families.
///
/// With window scale δ (and writing `Ψ(t) = ∫₀ᵗ ψ`):
///
/// - `H1` on `(0, δ³]`: ramp with `ψ(δ³) = εδ³` — drives `A'`.
/// - `H2` on `(0, δ^{3/2})`: bump with `∫ψ = εδ³` — drives `A`.
/// - `H3` on `(0, δ)`: up-down wave with `∫ψ = 0`, `∫∫ψ = εδ³` — drives `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HdFamily {
    H1,
    H2,
    H3,
}

impl HdFamily {
    pub const ALL: [HdFamily; 3] = [HdFamily::H1, HdFamily::H2, HdFamily::H3];

    pub fn name(self) -> &'static str {
        match self {
            HdFamily::H1 => "H1",
            HdFamily::H2 => "H2",
            HdFamily::H3 => "H3",
        }
    }

    /// Support width as a function of δ.
    pub fn width(self, delta: f64) -> f64 {
        match self {
            HdFamily::H1 => delta.powi(3),
            HdFamily::H2 => delta.powf(1.5),
            HdFamily::H3 => delta,
        }
    }
}

/// Declarative description of one family member.
#[derive(Debug, Clone)]
pub struct HdPsiSpec {
    pub family: HdFamily,
    pub epsilon: f64,
    pub delta: f64,
    /// Symmetric slot `(i, j)`, `i ≤ j`.
    pub indices: (usize, usize),
    /// Left edge of the support inside the window.
    pub time_offset: f64,
}

/// Normalization masses of the unit shapes, computed once.
fn shape_masses() -> (f64, f64) {
    use std::sync::OnceLock;
    static MASSES: OnceLock<(f64, f64)> = OnceLock::new();
    *MASSES.get_or_init(|| {
        // mass of the H2 bump shape on (0,1)
        let m2 =
            crate::numkit::quad::simpson(|u| bump01_wide(Jet4::variable(u)).d[0], 0.0, 1.0, 8192);
        // double integral of the H3 wave shape: ∫₀¹ W(u) du with W = ∫₀ᵘ w,
        // w(u) = β(2u) − β(2(u − 1/2))
        let w = |u: f64| {
            bump01_wide(Jet4::variable(2.0 * u)).d[0]
                - bump01_wide(Jet4::variable(2.0 * u - 1.0)).d[0]
        };
        let n = 16385;
        let h = 1.0 / (n - 1) as f64;
        let values: Vec<f64> = (0..n).map(|i| w(h * i as f64)).collect();
        let cum = crate::numkit::quad::cumulative_integral(&values, h);
        let d2 = crate::numkit::quad::integral(&cum, h);
        (m2, d2)
    })
}

/// Unit-ε 4-jet of a family shape at window-local time `t`, for window
/// scale δ.
fn hd_shape_jet(family: HdFamily, delta: f64, t: f64) -> Jet4 {
    match family {
        HdFamily::H1 => {
            let w = delta.powi(3);
            // δ³·step(t/w); value δ³ at t = w.
            smooth_step(Jet4::affine(t, 1.0 / w, 0.0)).scale(w)
        }
        HdFamily::H2 => {
            let w = delta.powf(1.5);
            let (m2, _) = shape_masses();
            // ∫₀ʷ ψ = δ³  ⇒  amplitude δ³/(w·mass)
            bump01_wide(Jet4::affine(t, 1.0 / w, 0.0)).scale(delta.powi(3) / (w * m2))
        }
        HdFamily::H3 => {
            let w = delta;
            let (_, d2) = shape_masses();
            // ∫∫ ψ = c·w²·D = δ³  ⇒  c = δ/D
            let up = bump01_wide(Jet4::affine(t, 2.0 / w, 0.0));
            let down = bump01_wide(Jet4::affine(t, 2.0 / w, -1.0));
            up.sub(down).scale(delta / d2)
        }
    }
}

/// Build one family member as a scalar profile on `[0, domain_len]`,
/// supported in `[time_offset, time_offset + width(δ)]`, scaled by ε.
pub fn build_hd_psi(spec: &HdPsiSpec, domain_len: f64) -> Result<SmoothFn> {
    let HdPsiSpec {
        family,
        epsilon,
        delta,
        time_offset,
        ..
    } = *spec;
    assert!(epsilon > 0.0 && delta > 0.0);
    let psi = SmoothFn::from_jet4((0.0, domain_len), move |t| {
        hd_shape_jet(family, delta, t - time_offset).scale(epsilon)
    });
    verify_hd_psi(spec, &psi)?;
    Ok(psi)
}

/// Published norm constant per family: the achieved ratios in
/// `‖ψ₁‖_{C¹} ≤ Cε`, `‖ψ₂‖_{C⁰} ≤ Cεδ^{3/2}`, `‖ψ₃‖_{C⁰} ≤ Cεδ`,
/// measured once on the unit shapes.
pub fn hd_c_constant(family: HdFamily) -> f64 {
    use std::sync::OnceLock;
    static CONSTS: OnceLock<[f64; 3]> = OnceLock::new();
    let all = CONSTS.get_or_init(|| {
        let (m2, d2) = shape_masses();
        let grid = 8193;
        let step = SmoothFn::from_jet4((0.0, 1.0), |u| smooth_step(Jet4::variable(u)));
        let c1_h1 = crate::numkit::grid_cr_norm(&step, 1, grid);
        let bump = SmoothFn::from_jet4((0.0, 1.0), |u| bump01_wide(Jet4::variable(u)));
        let c_h2 = crate::numkit::grid_cr_norm(&bump, 0, grid) / m2;
        let wave = SmoothFn::from_jet4((0.0, 1.0), |u| {
            bump01_wide(Jet4::variable(2.0 * u)).sub(bump01_wide(Jet4::variable(2.0 * u - 1.0)))
        });
        let c_h3 = crate::numkit::grid_cr_norm(&wave, 0, grid) / d2;
        [c1_h1, c_h2, c_h3]
    });
    match family {
        HdFamily::H1 => all[0],
        HdFamily::H2 => all[1],
        HdFamily::H3 => all[2],
    }
}

fn verify_hd_psi(spec: &HdPsiSpec, psi: &SmoothFn) -> Result<()> {
    let eps = spec.epsilon;
    let delta = spec.delta;
    let d3 = delta.powi(3);
    let t0 = spec.time_offset;
    let w = spec.family.width(delta);
    let fam = spec.family.name();
    let violation = |constraint: &'static str, detail: f64| Error::ConstraintViolation {
        family: fam,
        constraint,
        detail,
    };
    // Support: zero for t ≤ t0 always; the ramp family H1 ends its domain
    // at the plateau (it is only ever evaluated up to t0 + w, the window
    // end), so the right side is checked for H2/H3 only.
    let mut outside = vec![t0 - 1e-9, t0 - 0.1 * w];
    if spec.family != HdFamily::H1 {
        outside.push(t0 + w + 1e-9);
        outside.push(t0 + 1.1 * w);
    }
    for s in outside {
        if psi.value(s) != 0.0 {
            return Err(violation("support", psi.value(s)));
        }
    }
    match spec.family {
        HdFamily::H1 => {
            let end = psi.value(t0 + w);
            if (end - eps * d3).abs() > 1e-14 + 1e-10 * eps * d3 {
                return Err(violation("endpoint value", end - eps * d3));
            }
            let sup = sup_on(psi, t0, t0 + w);
            if sup > eps * d3 * (1.0 + 1e-9) {
                return Err(violation("c0 bound", sup));
            }
        }
        HdFamily::H2 => {
            if psi.value(t0 + w) != 0.0 {
                return Err(violation("endpoint value", psi.value(t0 + w)));
            }
            let integral = crate::numkit::quad::simpson(|s| psi.value(s), t0, t0 + w, 6000);
            if (integral - eps * d3).abs() > 1e-10 * (1.0 + eps * d3) {
                return Err(violation("integral", integral - eps * d3));
            }
            let sup = sup_on(psi, t0, t0 + w);
            if sup > hd_c_constant(HdFamily::H2) * eps * delta.powf(1.5) * (1.0 + 1e-9) {
                return Err(violation("c0 bound", sup));
            }
        }
        HdFamily::H3 => {
            let integral = crate::numkit::quad::simpson(|s| psi.value(s), t0, t0 + w, 6000);
            if integral.abs() > 1e-10 * (1.0 + eps * delta) {
                return Err(violation("integral", integral));
            }
            // ∫∫ via cumulative Simpson
            let n = 4097;
            let h = w / (n - 1) as f64;
            let values: Vec<f64> = (0..n).map(|i| psi.value(t0 + h * i as f64)).collect();
            let cum = crate::numkit::quad::cumulative_integral(&values, h);
            let dd = crate::numkit::quad::integral(&cum, h);
            if (dd - eps * d3).abs() > 1e-9 * (1.0 + eps * d3) {
                return Err(violation("double integral", dd - eps * d3));
            }
            let sup = sup_on(psi, t0, t0 + w);
            if sup > hd_c_constant(HdFamily::H3) * eps * delta * (1.0 + 1e-9) {
                return Err(violation("c0 bound", sup));
            }
        }
    }
    Ok(())
}

fn sup_on(f: &SmoothFn, a: f64, b: f64) -> f64 {
    let mut m = 0.0f64;
    for i in 0..=2048 {
        let t = a + (b - a) * i as f64 / 2048.0;
        m = m.max(f.value(t).abs());
    }
    m
}

/// The symmetric matrix profile `ψ^{ij}(t)`: entries `(i,j)` and `(j,i)`
/// carry the scalar profile.
pub fn symmetric_slot_curve(n: usize, i: usize, j: usize, psi: &SmoothFn) -> MatrixCurve {
    let domain = psi.domain();
    MatrixCurve::from_fn(n, domain, |r, c| {
        if (r, c) == (i, j) || (r, c) == (j, i) {
            psi.clone()
        } else {
            SmoothFn::zero(domain)
        }
    })
}

// ---------------------------------------------------------------------
// Curvature increment from a Riccati perturbation
// ---------------------------------------------------------------------

/// Curvature increment `ΔR = −ψ' − Uψ − ψU − ψ²` making `U + ψ` the
/// Riccati transport of `R + ΔR`. Symmetric whenever `ψ` is.
pub fn delta_r_from_psi(u: &RiccatiCurve, psi: &MatrixCurve) -> MatrixCurve {
    delta_r_from_u_curve(&u.as_matrix_curve(), psi)
}

/// As [`delta_r_from_psi`], with the transport already in curve form
/// (typically tabulated for speed).
pub fn delta_r_from_u_curve(u_curve: &MatrixCurve, psi: &MatrixCurve) -> MatrixCurve {
    let n = psi.n();
    let domain = psi.domain();
    let u_curve = u_curve.clone();
    MatrixCurve::from_fn(n, domain, |r, c| {
        let u_curve = u_curve.clone();
        let psi = psi.clone();
        SmoothFn::from_jet2(domain, Provenance::AlgebraicCombination, move |t| {
            let um = u_curve.eval(t);
            let ud = u_curve.eval_deriv(t);
            let udd = u_curve.eval_deriv2(t);
            let pm = psi.eval(t);
            let pd = psi.eval_deriv(t);
            let pdd = psi.eval_deriv2(t);
            let value = -&pd - &um * &pm - &pm * &um - &pm * &pm;
            let d1 = -&pdd
                - (&ud * &pm + &um * &pd)
                - (&pd * &um + &pm * &ud)
                - (&pd * &pm + &pm * &pd);
            // third derivative of ψ from its 4-jet entries
            let pddd = DMatrix::from_fn(n, n, |a, b| {
                psi.entry(a, b).jet4(t).map(|j| j.d[3]).unwrap_or(0.0)
            });
            let d2 = -&pddd
                - (&udd * &pm + (&ud * &pd) * 2.0 + &um * &pdd)
                - (&pdd * &um + (&pd * &ud) * 2.0 + &pm * &udd)
                - (&pdd * &pm + (&pd * &pd) * 2.0 + &pm * &pdd);
            crate::numkit::Jet2::new(value[(r, c)], d1[(r, c)], d2[(r, c)])
        })
    })
}

// ---------------------------------------------------------------------
// Perturbation schemes
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    I,
    II,
    III,
    IV,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::I,
        SchemeKind::II,
        SchemeKind::III,
        SchemeKind::IV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::I => "I",
            SchemeKind::II => "II",
            SchemeKind::III => "III",
            SchemeKind::IV => "IV",
        }
    }

    pub fn family(self) -> HdFamily {
        match self {
            SchemeKind::I => HdFamily::H1,
            SchemeKind::II => HdFamily::H2,
            SchemeKind::III | SchemeKind::IV => HdFamily::H3,
        }
    }
}

/// One placed perturbation over the window `[0, d]`.
///
/// Schemes I–III are the d-scaled families right-aligned at the window
/// end; scheme IV is the difference of two H3 copies, one at the window
/// start and one ending at the window end.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationScheme {
    pub kind: SchemeKind,
    pub i: usize,
    pub j: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub d: f64,
}

impl PerturbationScheme {
    pub fn new(kind: SchemeKind, i: usize, j: usize, epsilon: f64, delta: f64, d: f64) -> Self {
        assert!(i <= j, "slot indices must satisfy i ≤ j");
        assert!(delta < d, "need δ < d");
        if kind == SchemeKind::IV {
            assert!(i < j, "the rotation scheme needs an off-diagonal slot");
        }
        PerturbationScheme {
            kind,
            i,
            j,
            epsilon,
            delta,
            d,
        }
    }

    /// Support width of the active profile.
    pub fn width(&self) -> f64 {
        self.kind.family().width(self.delta)
    }

    /// Measurement window `[lo, hi] ⊆ [0, d]`.
    pub fn window(&self) -> (f64, f64) {
        match self.kind {
            SchemeKind::IV => (0.0, self.d),
            _ => (self.d - self.width(), self.d),
        }
    }

    /// Scalar time profile on `[0, d]`.
    pub fn scalar_profile(&self) -> SmoothFn {
        let PerturbationScheme {
            kind,
            epsilon,
            delta,
            d,
            ..
        } = *self;
        match kind {
            SchemeKind::I | SchemeKind::II | SchemeKind::III => {
                let fam = kind.family();
                let offset = d - fam.width(delta);
                SmoothFn::from_jet4((0.0, d), move |t| {
                    hd_shape_jet(fam, delta, t - offset).scale(epsilon * d)
                })
            }
            SchemeKind::IV => {
                let offset = d - delta;
                SmoothFn::from_jet4((0.0, d), move |t| {
                    hd_shape_jet(HdFamily::H3, delta, t)
                        .sub(hd_shape_jet(HdFamily::H3, delta, t - offset))
                        .scale(epsilon)
                })
            }
        }
    }

    /// The placed symmetric matrix profile.
    pub fn psi_matrix(&self, n: usize) -> MatrixCurve {
        symmetric_slot_curve(n, self.i, self.j, &self.scalar_profile())
    }

    /// Leading-order prediction for the window-map change, given the
    /// eigenvalues of `R` at the window (used by scheme IV only).
    pub fn predicted_delta_dp(&self, n: usize, lambdas: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        let lead = self.epsilon * self.delta.powi(3) * self.d;
        let (i, j) = (self.i, self.j);
        match self.kind {
            SchemeKind::I => {
                out[(n + i, j)] = lead;
                out[(n + j, i)] = lead;
            }
            SchemeKind::II => {
                out[(i, j)] = lead;
                out[(j, i)] = lead;
            }
            SchemeKind::III => {
                out[(i, n + j)] = -2.0 * lead;
                out[(j, n + i)] = -2.0 * lead;
            }
            SchemeKind::IV => {
                // ΔA = −2εδ³(d−δ)·E·I(λ): entry (i,j) carries λ_j, (j,i)
                // carries λ_i; antisymmetric part (i,j) is εδ³(d−δ)(λ_i−λ_j).
                let scale = 2.0 * self.epsilon * self.delta.powi(3) * (self.d - self.delta);
                out[(i, j)] = -scale * lambdas[j];
                out[(j, i)] = -scale * lambdas[i];
            }
        }
        out
    }

    /// Block excluded from remainder norms: the unconstrained entries of
    /// the same order as the leading term.
    fn excluded_block(&self) -> Option<(usize, usize)> {
        match self.kind {
            // B' block for II and IV
            SchemeKind::II | SchemeKind::IV => Some((1, 1)),
            _ => None,
        }
    }
}

/// Measured vs predicted window-map change for one scheme.
#[derive(Debug, Clone)]
pub struct DpDelta {
    pub measured: DMatrix<f64>,
    pub predicted: DMatrix<f64>,
    /// Max-column-sum of (measured − predicted) with the scheme's
    /// unconstrained block zeroed.
    pub remainder: f64,
}

/// Re-solve the window with and without the scheme's curvature increment
/// and compare against the leading-order prediction.
///
/// `r` is the curvature over `[0, 1]` (or at least `[0, d]`) in the frame
/// diagonalizing `R(0)`; scheme IV's prediction reads eigenvalues off the
/// diagonal of `R(0)`.
pub fn dp_delta_measure(scheme: &PerturbationScheme, r: &MatrixCurve) -> Result<DpDelta> {
    let n = r.n();
    let d = scheme.d;
    let r_window = r.shifted(0.0, d);
    let u = riccati_transport(&r_window, &DMatrix::zeros(n, n), (0.0, d))?;
    let psi = scheme.psi_matrix(n);
    let delta_r = delta_r_from_psi(&u, &psi);
    let perturbed = r_window.add(&delta_r);

    let (lo, hi) = scheme.window();
    let steps = feature_steps(hi - lo, scheme.width());
    let base_dp = window_map(&r_window, lo, hi, steps)?;
    let new_dp = window_map(&perturbed, lo, hi, steps)?;
    let measured = new_dp.matrix() - base_dp.matrix();

    let lambdas: Vec<f64> = (0..n).map(|i| r.eval(0.0)[(i, i)]).collect();
    let predicted = scheme.predicted_delta_dp(n, &lambdas);

    let mut diff = &measured - &predicted;
    if let Some((br, bc)) = scheme.excluded_block() {
        for i in 0..n {
            for j in 0..n {
                diff[(br * n + i, bc * n + j)] = 0.0;
            }
        }
    }
    Ok(DpDelta {
        measured,
        predicted,
        remainder: max_col_sum(&diff),
    })
}

fn window_map(r: &MatrixCurve, lo: f64, hi: f64, steps: usize) -> Result<SymplecticMap> {
    let shifted = r.shifted(lo, hi - lo);
    dp_from_curvature_steps(&CurvatureProfile::Matrix(shifted), 0.0, hi - lo, steps)
}

/// How remainder fits anchor the profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchoring {
    /// As placed in the scheme: right-aligned, scaled by `d = √δ`.
    Scheme,
    /// The bare short-window setup: start-anchored on `[0, width]`,
    /// unscaled.
    Local,
}

/// Fitted log–log exponent of a scheme's remainder against δ.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub slope: f64,
    pub deltas: Vec<f64>,
    pub remainders: Vec<f64>,
}

/// Block-specific remainder magnitudes fitted against δ.
///
/// Under the local anchoring the remainder per family is the block the
/// short-window expansion bounds: the whole `A`-block for H1 (`O(εδ⁶)`),
/// the `A`-residual for H2 (`O(εδ⁶)`), the `B`-residual for H3 (`O(εδ⁵)`).
pub fn remainder_scaling(
    kind: SchemeKind,
    r: &MatrixCurve,
    epsilon: f64,
    deltas: &[f64],
    anchoring: Anchoring,
) -> Result<FitReport> {
    assert!(deltas.len() >= 3, "need at least three window scales");
    let n = r.n();
    let mut remainders = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let rem = match anchoring {
            Anchoring::Scheme => {
                let d = delta.sqrt();
                let scheme = PerturbationScheme::new(
                    kind,
                    0,
                    if kind == SchemeKind::IV { 1 } else { 0 },
                    epsilon,
                    delta,
                    d,
                );
                let dd = dp_delta_measure(&scheme, r)?;
                block_remainder(kind, n, &dd.measured, &dd.predicted)
            }
            Anchoring::Local => {
                let fam = kind.family();
                let w = fam.width(delta);
                let spec = HdPsiSpec {
                    family: fam,
                    epsilon,
                    delta,
                    indices: (0, 0),
                    time_offset: 0.0,
                };
                let psi = build_hd_psi(&spec, w)?;
                let psi_mat = symmetric_slot_curve(n, 0, 0, &psi);
                let r_win = r.shifted(0.0, w);
                let u = riccati_transport(&r_win, &DMatrix::zeros(n, n), (0.0, w))?;
                let delta_r = delta_r_from_psi(&u, &psi_mat);
                let perturbed = r_win.add(&delta_r);
                let steps = feature_steps(w, w).max(512);
                let base =
                    dp_from_curvature_steps(&CurvatureProfile::Matrix(r_win), 0.0, w, steps)?;
                let new =
                    dp_from_curvature_steps(&CurvatureProfile::Matrix(perturbed), 0.0, w, steps)?;
                let measured = new.matrix() - base.matrix();
                // start-anchored prediction (no d factor)
                let lead = epsilon * delta.powi(3);
                let mut predicted = DMatrix::zeros(2 * n, 2 * n);
                match fam {
                    HdFamily::H1 => predicted[(n, 0)] = lead,
                    HdFamily::H2 => predicted[(0, 0)] = lead,
                    HdFamily::H3 => predicted[(0, n)] = -2.0 * lead,
                }
                block_remainder(kind, n, &measured, &predicted)
            }
        };
        remainders.push(rem);
    }
    if remainders.iter().any(|&r| r < 1e-13) {
        return Err(Error::DegenerateFit { floor: 1e-13 });
    }
    let (slope, _) = fit_loglog(deltas, &remainders);
    Ok(FitReport {
        slope,
        deltas: deltas.to_vec(),
        remainders,
    })
}

/// The remainder norm of the block each short-window expansion constrains.
fn block_remainder(
    kind: SchemeKind,
    n: usize,
    measured: &DMatrix<f64>,
    predicted: &DMatrix<f64>,
) -> f64 {
    let block = |m: &DMatrix<f64>, r0: usize, c0: usize| -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| m[(r0 + i, c0 + j)])
    };
    match kind {
        // the A-block is pure remainder for scheme I
        SchemeKind::I => max_col_sum(&block(measured, 0, 0)),
        SchemeKind::II => max_col_sum(&(block(measured, 0, 0) - block(predicted, 0, 0))),
        SchemeKind::III => max_col_sum(&(block(measured, 0, n) - block(predicted, 0, n))),
        SchemeKind::IV => max_col_sum(&(block(measured, 0, 0) - block(predicted, 0, 0))),
    }
}

/// Second-order ε-cross-term of a scheme, isolated by Richardson
/// differencing: `‖measured(2ε) − 2·measured(ε)‖`.
pub fn epsilon_cross_term(scheme: &PerturbationScheme, r: &MatrixCurve) -> Result<f64> {
    let mut double = *scheme;
    double.epsilon *= 2.0;
    let d1 = dp_delta_measure(scheme, r)?;
    let d2 = dp_delta_measure(&double, r)?;
    Ok(max_col_sum(&(&d2.measured - 2.0 * &d1.measured)))
}

// ---------------------------------------------------------------------
// Eigenvalue separation
// ---------------------------------------------------------------------

/// Sorted spectrum with the separation functional `h = Π_{i<j}(λ_j − λ_i)`.
#[derive(Debug, Clone)]
pub struct EigenSeparation {
    pub lambdas: Vec<f64>,
    pub h_value: f64,
    /// Maximizer location when produced by an interval scan.
    pub t_star: f64,
}

/// Separation data of a single symmetric matrix.
pub fn eigen_separation(m: &DMatrix<f64>) -> EigenSeparation {
    let (lambdas, _) = eigen::symmetric_eigen(m);
    let mut h = 1.0;
    for i in 0..lambdas.len() {
        for j in i + 1..lambdas.len() {
            h *= lambdas[j] - lambdas[i];
        }
    }
    EigenSeparation {
        lambdas,
        h_value: h.max(0.0),
        t_star: f64::NAN,
    }
}

/// Scan `h(R(t))` on a grid over `interval`; returns the maximizer.
pub fn max_h_on_interval(
    r: &MatrixCurve,
    interval: (f64, f64),
    scan_points: usize,
) -> EigenSeparation {
    let mut best = EigenSeparation {
        lambdas: Vec::new(),
        h_value: -1.0,
        t_star: interval.0,
    };
    for i in 0..scan_points.max(2) {
        let t =
            interval.0 + (interval.1 - interval.0) * i as f64 / (scan_points.max(2) - 1) as f64;
        let sep = eigen_separation(&r.eval(t));
        if sep.h_value > best.h_value {
            best = EigenSeparation { t_star: t, ..sep };
        }
    }
    best
}

// ---------------------------------------------------------------------
// Sp(n) chart
// ---------------------------------------------------------------------

/// Chart coordinates on Sp(n): `{a'ᵢⱼ + a'ⱼᵢ}` (i ≤ j), `{aᵢⱼ + aⱼᵢ}`
/// (i ≤ j), `{bᵢⱼ + bⱼᵢ}` (i ≤ j), `{aᵢⱼ − aⱼᵢ}` (i < j) — in that order;
/// `2n² + n` values in total.
pub fn sp_coordinates(m: &SymplecticMap) -> DVector<f64> {
    let n = m.n();
    let a = m.block_a();
    let ap = m.block_a_prime();
    let b = m.block_b();
    let mut coords = Vec::with_capacity(2 * n * n + n);
    for i in 0..n {
        for j in i..n {
            coords.push(ap[(i, j)] + ap[(j, i)]);
        }
    }
    for i in 0..n {
        for j in i..n {
            coords.push(a[(i, j)] + a[(j, i)]);
        }
    }
    for i in 0..n {
        for j in i..n {
            coords.push(b[(i, j)] + b[(j, i)]);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            coords.push(a[(i, j)] - a[(j, i)]);
        }
    }
    DVector::from_vec(coords)
}

/// Chart dimension `2n² + n`.
pub fn sp_chart_dim(n: usize) -> usize {
    2 * n * n + n
}

// ---------------------------------------------------------------------
// Gram-inverse linearization check
// ---------------------------------------------------------------------

/// Deviation report for the matrix-inverse linearizations
/// `(ÃᵀÃ)⁻¹ − (AᵀA)⁻¹ ≈ −(ΔA + ΔAᵀ)` and `(Ãᵀ)⁻¹ − (Aᵀ)⁻¹ ≈ −ΔAᵀ`.
#[derive(Debug, Clone, Copy)]
pub struct DgReport {
    /// Worst deviation divided by εδ⁴.
    pub max_dev_ratio: f64,
    pub worst_s: f64,
}

/// Check both linearizations over an s-grid in `(0, δ]` for the H3
/// increment.
pub fn gram_linearization_check(
    r: &MatrixCurve,
    epsilon: f64,
    delta: f64,
    s_samples: usize,
) -> Result<DgReport> {
    let n = r.n();
    let spec = HdPsiSpec {
        family: HdFamily::H3,
        epsilon,
        delta,
        indices: (0, if n > 1 { 1 } else { 0 }),
        time_offset: 0.0,
    };
    let psi = build_hd_psi(&spec, delta)?;
    let psi_mat = symmetric_slot_curve(n, spec.indices.0, spec.indices.1, &psi);
    let r_win = r.shifted(0.0, delta);
    let u = riccati_transport(&r_win, &DMatrix::zeros(n, n), (0.0, delta))?;
    let delta_r = delta_r_from_psi(&u, &psi_mat);
    let perturbed = r_win.add(&delta_r);

    let base = fundamental_matrix_on(&r_win, (0.0, delta))?;
    let new = fundamental_matrix_on(&perturbed, (0.0, delta))?;

    let mut worst = (0.0f64, 0.0f64);
    let scale = epsilon * delta.powi(4);
    for k in 1..=s_samples {
        let s = delta * k as f64 / s_samples as f64;
        let a = base.a.value(s);
        let at = new.a.value(s);
        let da = &at - &a;
        let gram = (a.transpose() * &a).try_inverse().unwrap();
        let gram_new = (at.transpose() * &at).try_inverse().unwrap();
        let lhs1 = gram_new - gram;
        let rhs1 = -(&da + da.transpose());
        let dev1 = max_col_sum(&(lhs1 - rhs1));
        let inv_t = a.transpose().try_inverse().unwrap();
        let inv_t_new = at.transpose().try_inverse().unwrap();
        let lhs2 = inv_t_new - inv_t;
        let rhs2 = -da.transpose();
        let dev2 = max_col_sum(&(lhs2 - rhs2));
        let dev = dev1.max(dev2) / scale;
        if dev > worst.0 {
            worst = (dev, s);
        }
    }
    Ok(DgReport {
        max_dev_ratio: worst.0,
        worst_s: worst.1,
    })
}

// ---------------------------------------------------------------------
// The assembled mechanism
// ---------------------------------------------------------------------

/// Outcome of a Newton realization in Sp(n).
#[derive(Debug, Clone)]
pub struct HdRealization {
    pub coefficients: DVector<f64>,
    pub achieved: SymplecticMap,
    pub residual: f64,
    pub newton_iterations: usize,
    /// Smallest singular value of the chart Jacobian at the origin.
    pub sigma_min: f64,
    /// Sup of the realized curvature increment over the window.
    pub curvature_change_c0: f64,
}

/// Realization mechanism for one curvature profile on `[0, 1]`.
///
/// Internally everything lives in the frame diagonalizing `R(t*)`, where
/// `t*` maximizes the separation functional on `[0, 1/2]`; inputs and
/// outputs are in the original frame.
#[derive(Debug)]
pub struct HdMechanism {
    n: usize,
    d: f64,
    solver_steps: usize,
    t_star: f64,
    separation: EigenSeparation,
    frame: DMatrix<f64>,
    r_original: MatrixCurve,
    /// Rotated window profile on `[0, d]`.
    r_window: MatrixCurve,
    /// Tabulated Riccati transport of the window.
    u_curve: MatrixCurve,
    /// Chart-ordered placed schemes.
    basis: Vec<PerturbationScheme>,
    /// Scalar time profiles of the schemes (same order).
    profiles: Vec<SmoothFn>,
    dp_window_rot: SymplecticMap,
    dphi: DMatrix<f64>,
    sigma_min: f64,
}

impl HdMechanism {
    /// Default coupling `δ = d²`.
    pub fn with_default_coupling(
        r: &MatrixCurve,
        epsilon: f64,
        d: f64,
        h_min: f64,
    ) -> Result<HdMechanism> {
        HdMechanism::new(r, epsilon, d * d, d, h_min)
    }

    pub fn new(
        r: &MatrixCurve,
        epsilon: f64,
        delta: f64,
        d: f64,
        h_min: f64,
    ) -> Result<HdMechanism> {
        let n = r.n();
        assert!(n >= 2, "the rotation scheme needs n ≥ 2");
        assert!(delta < d && d < 1.0);
        let separation = max_h_on_interval(r, (0.0, 0.5), 1025);
        if separation.h_value < h_min {
            return Err(Error::NoDistinctEigenvalues {
                h: separation.h_value,
            });
        }
        let t_star = separation.t_star;
        let (_, frame) = eigen::symmetric_eigen(&r.eval(t_star));

        // Rotated profile R̂(t) = Qᵀ R(t) Q, shifted to the window and
        // flattened to tables: the chart Jacobian and Newton loop evaluate
        // these curves millions of times.
        let steps = feature_steps(d, delta.powi(3));
        let r_window = rotate_curve(r, &frame).shifted(t_star, d).tabulate(steps);
        let u = riccati_transport(&r_window, &DMatrix::zeros(n, n), (0.0, d))?;
        let u_curve = u.as_matrix_curve().tabulate(crate::numkit::steps_for(d));

        let mut basis = Vec::with_capacity(sp_chart_dim(n));
        for kind in [SchemeKind::I, SchemeKind::II, SchemeKind::III] {
            for i in 0..n {
                for j in i..n {
                    basis.push(PerturbationScheme::new(kind, i, j, epsilon, delta, d));
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                basis.push(PerturbationScheme::new(SchemeKind::IV, i, j, epsilon, delta, d));
            }
        }
        assert_eq!(basis.len(), sp_chart_dim(n));
        let profiles: Vec<SmoothFn> = basis.iter().map(|s| s.scalar_profile()).collect();

        let dp_window_rot = dp_from_curvature_steps(
            &CurvatureProfile::Matrix(r_window.clone()),
            0.0,
            d,
            steps,
        )?;

        let mut mech = HdMechanism {
            n,
            d,
            solver_steps: steps,
            t_star,
            separation,
            frame,
            r_original: r.clone(),
            r_window,
            u_curve,
            basis,
            profiles,
            dp_window_rot,
            dphi: DMatrix::zeros(0, 0),
            sigma_min: 0.0,
        };
        let dphi = mech.jacobian_at(&DVector::zeros(sp_chart_dim(n)))?;
        let svd = dphi.clone().svd(false, false);
        mech.sigma_min = svd.singular_values.min();
        mech.dphi = dphi;
        Ok(mech)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn separation(&self) -> &EigenSeparation {
        &self.separation
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_star, self.t_star + self.d)
    }

    pub fn basis(&self) -> &[PerturbationScheme] {
        &self.basis
    }

    /// Window map in the original frame.
    pub fn base_dp(&self) -> SymplecticMap {
        self.rotate_back(&self.dp_window_rot)
    }

    /// Window map in the diagonalizing frame.
    pub fn base_dp_rotated(&self) -> &SymplecticMap {
        &self.dp_window_rot
    }

    /// Chart Jacobian at the origin (rotated frame).
    pub fn dphi(&self) -> &DMatrix<f64> {
        &self.dphi
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// Published radius of the realization ball in chart coordinates.
    pub fn delta_est(&self) -> f64 {
        0.25 * self.sigma_min * COEFF_RANGE
    }

    /// Combined Riccati perturbation `ψ_c = Σ cₓ ψₓ` (value and
    /// derivative) at window-local time `t`.
    fn psi_blend(&self, c: &DVector<f64>, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut v = DMatrix::zeros(n, n);
        let mut dv = DMatrix::zeros(n, n);
        for (idx, scheme) in self.basis.iter().enumerate() {
            let ck = c[idx];
            if ck != 0.0 {
                let jet = self.profiles[idx].jet2(t);
                let (i, j) = (scheme.i, scheme.j);
                v[(i, j)] += ck * jet.f;
                dv[(i, j)] += ck * jet.df;
                if i != j {
                    v[(j, i)] += ck * jet.f;
                    dv[(j, i)] += ck * jet.df;
                }
            }
        }
        (v, dv)
    }

    /// Blended window curvature value at `t`: `R̂ + ΔR(c)` with the exact
    /// increment `ΔR(c) = −ψ_c' − Uψ_c − ψ_cU − ψ_c²`, so that `U + ψ_c`
    /// is the Riccati transport of the blend for every coefficient vector.
    pub fn blended_value(&self, c: &DVector<f64>, t: f64) -> DMatrix<f64> {
        let r = self.r_window.eval(t);
        let (psi, dpsi) = self.psi_blend(c, t);
        if psi.amax() == 0.0 && dpsi.amax() == 0.0 {
            return r;
        }
        let u = self.u_curve.eval(t);
        r - dpsi - &u * &psi - &psi * u - &psi * &psi
    }

    /// Window map (rotated frame) of the blended curvature.
    pub fn phi(&self, c: &DVector<f64>) -> Result<SymplecticMap> {
        let n = self.n;
        let mut state = vec![0.0; 4 * n * n];
        // [A | B] columns with identity/zero initial blocks
        for i in 0..n {
            state[i * 2 * n + i] = 1.0; // A(0) = I
            state[2 * n * n + i * 2 * n + n + i] = 1.0; // B'(0) = I
        }
        let sol = crate::numkit::integrate(
            |t, y, dy| {
                let rt = self.blended_value(c, t);
                let nn = 2 * n * n;
                dy[..nn].copy_from_slice(&y[nn..]);
                for i in 0..n {
                    for j in 0..2 * n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s -= rt[(i, l)] * y[l * 2 * n + j];
                        }
                        dy[nn + i * 2 * n + j] = s;
                    }
                }
            },
            &state,
            (0.0, self.d),
            self.solver_steps,
        )?;
        let end = sol.eval(self.d);
        let nn = 2 * n * n;
        let a = DMatrix::from_fn(n, n, |i, j| end[i * 2 * n + j]);
        let b = DMatrix::from_fn(n, n, |i, j| end[i * 2 * n + n + j]);
        let ap = DMatrix::from_fn(n, n, |i, j| end[nn + i * 2 * n + j]);
        let bp = DMatrix::from_fn(n, n, |i, j| end[nn + i * 2 * n + n + j]);
        SymplecticMap::from_blocks(&a, &b, &ap, &bp)
    }

    fn jacobian_at(&self, c: &DVector<f64>) -> Result<DMatrix<f64>> {
        let m = sp_chart_dim(self.n);
        let base = sp_coordinates(&self.phi(c)?);
        let mut j = DMatrix::zeros(m, m);
        for col in 0..m {
            let mut cp = c.clone();
            cp[col] += JACOBIAN_FD_STEP;
            let coords = sp_coordinates(&self.phi(&cp)?);
            for row in 0..m {
                j[(row, col)] = (coords[row] - base[row]) / JACOBIAN_FD_STEP;
            }
        }
        Ok(j)
    }

    fn rotate_back(&self, m_rot: &SymplecticMap) -> SymplecticMap {
        let q = &self.frame;
        let conj = |blk: DMatrix<f64>| q * blk * q.transpose();
        SymplecticMap::from_blocks(
            &conj(m_rot.block_a()),
            &conj(m_rot.block_b()),
            &conj(m_rot.block_a_prime()),
            &conj(m_rot.block_b_prime()),
        )
        .expect("blocks stay square")
    }

    /// Conjugate an original-frame map into the diagonalizing frame.
    pub fn rotate_in(&self, m: &SymplecticMap) -> SymplecticMap {
        let q = &self.frame;
        let conj = |blk: DMatrix<f64>| q.transpose() * blk * q;
        SymplecticMap::from_blocks(
            &conj(m.block_a()),
            &conj(m.block_b()),
            &conj(m.block_a_prime()),
            &conj(m.block_b_prime()),
        )
        .expect("blocks stay square")
    }

    /// Newton realization of a window-map target given in the original
    /// frame.
    pub fn realize(&self, target: &SymplecticMap) -> Result<HdRealization> {
        if target.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: target.n(),
            });
        }
        if target.defect() > 1e-8 {
            return Err(Error::ConstraintViolation {
                family: "target",
                constraint: "symplectic defect",
                detail: target.defect(),
            });
        }
        let target_rot = self.rotate_in(target);
        let tc = sp_coordinates(&target_rot);
        let base = sp_coordinates(&self.dp_window_rot);
        let distance = (&tc - &base).norm();
        let delta_est = self.delta_est();
        if distance > delta_est {
            return Err(Error::OutOfBall {
                distance,
                delta_est,
            });
        }
        self.realize_unchecked(target)
    }

    /// Newton realization without the ball gate.
    pub fn realize_unchecked(&self, target: &SymplecticMap) -> Result<HdRealization> {
        let target_rot = self.rotate_in(target);
        let tc = sp_coordinates(&target_rot);
        let m = sp_chart_dim(self.n);
        let mut c = DVector::zeros(m);
        let mut res = (sp_coordinates(&self.phi(&c)?) - &tc).norm();
        let mut iterations = 0;
        while iterations < MAX_NEWTON && res > NEWTON_TOL {
            iterations += 1;
            let j = self.jacobian_at(&c)?;
            let f = sp_coordinates(&self.phi(&c)?) - &tc;
            let step = j.lu().solve(&(-f)).ok_or(Error::NonConvergence {
                iterations,
                residual: res,
            })?;
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..8 {
                let cand = &c + lambda * &step;
                let cres = (sp_coordinates(&self.phi(&cand)?) - &tc).norm();
                if cres < res {
                    c = cand;
                    res = cres;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if res > RESIDUAL_CONTRACT {
            return Err(Error::NonConvergence {
                iterations,
                residual: res,
            });
        }
        let achieved_rot = self.phi(&c)?;
        let mut change = 0.0f64;
        for g in 0..=2048 {
            let t = self.d * g as f64 / 2048.0;
            change = change.max(max_col_sum(
                &(self.blended_value(&c, t) - self.r_window.eval(t)),
            ));
        }
        Ok(HdRealization {
            coefficients: c,
            achieved: self.rotate_back(&achieved_rot),
            residual: res,
            newton_iterations: iterations,
            sigma_min: self.sigma_min,
            curvature_change_c0: change,
        })
    }

    /// Global curvature (original frame) carrying the realized window
    /// increment. Derivative queries fall back to finite differences of the
    /// increment; solvers only read values.
    pub fn global_curvature(&self, c: &DVector<f64>) -> MatrixCurve {
        let n = self.n;
        let t_star = self.t_star;
        let d = self.d;
        let q = self.frame.clone();
        let base = self.r_original.clone();
        // Tabulate the rotated-back increment on the window once.
        let steps = self.solver_steps;
        let h = d / steps as f64;
        let mut table: Vec<DMatrix<f64>> = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let s = h * i as f64;
            let inc = self.blended_value(c, s) - self.r_window.eval(s);
            table.push(&q * inc * q.transpose());
        }
        let table = std::sync::Arc::new(table);
        MatrixCurve::from_fn(n, base.domain(), move |i, j| {
            let base_entry = base.entry(i, j).clone();
            let table = table.clone();
            SmoothFn::from_jet2(
                base_entry.domain(),
                Provenance::AlgebraicCombination,
                move |t| {
                    let mut jet = base_entry.jet2(t);
                    if t >= t_star && t <= t_star + d {
                        let s = (t - t_star) / h;
                        let idx = (s.floor() as isize).clamp(0, table.len() as isize - 2) as usize;
                        let u = s - idx as f64;
                        let v0 = table[idx][(i, j)];
                        let v1 = table[idx + 1][(i, j)];
                        let dv = (v1 - v0) / h;
                        jet = jet.add(crate::numkit::Jet2::new(
                            v0 * (1.0 - u) + v1 * u,
                            dv,
                            0.0,
                        ));
                    }
                    jet
                },
            )
        })
    }

    /// Extend a realized window map to the unit interval by composition:
    /// `DP(0,1) = DP(t*+d, 1) · DP_window · DP(0, t*)`.
    pub fn extend_to_unit_interval(&self, realization: &HdRealization) -> Result<SymplecticMap> {
        let p = CurvatureProfile::Matrix(self.r_original.clone());
        let (w0, w1) = self.window();
        let left = if w0 > 0.0 {
            dp_from_curvature(&p, 0.0, w0)?
        } else {
            SymplecticMap::identity(self.n)
        };
        let right = if w1 < 1.0 {
            dp_from_curvature(&p, w1, 1.0)?
        } else {
            SymplecticMap::identity(self.n)
        };
        right.compose(&realization.achieved)?.compose(&left)
    }

    /// Oracle for the extension: one global re-solve with the perturbed
    /// curvature over `[0, 1]`.
    pub fn global_resolve(&self, realization: &HdRealization) -> Result<SymplecticMap> {
        let global = self.global_curvature(&realization.coefficients);
        let steps = feature_steps(1.0, self.d / self.solver_steps as f64 * FEATURE_SAMPLES);
        dp_from_curvature_steps(&CurvatureProfile::Matrix(global), 0.0, 1.0, steps)
    }
}

fn rotate_curve(r: &MatrixCurve, q: &DMatrix<f64>) -> MatrixCurve {
    let n = r.n();
    let domain = r.domain();
    MatrixCurve::from_fn(n, domain, |i, j| {
        let r = r.clone();
        let q = q.clone();
        SmoothFn::from_jet2(domain, Provenance::AlgebraicCombination, move |t| {
            let v = q.transpose() * r.eval(t) * &q;
            let d1 = q.transpose() * r.eval_deriv(t) * &q;
            let d2 = q.transpose() * r.eval_deriv2(t) * &q;
            crate::numkit::Jet2::new(v[(i, j)], d1[(i, j)], d2[(i, j)])
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_r(l1: f64, l2: f64) -> MatrixCurve {
        MatrixCurve::constant(
            (0.0, 1.0),
            &DMatrix::from_row_slice(2, 2, &[l1, 0.0, 0.0, l2]),
        )
    }

    #[test]
    fn family_shapes_meet_their_constraints() {
        for fam in HdFamily::ALL {
            for &delta in &[0.3, 0.1] {
                let spec = HdPsiSpec {
                    family: fam,
                    epsilon: 0.01,
                    delta,
                    indices: (0, 1),
                    time_offset: 0.0,
                };
                build_hd_psi(&spec, fam.width(delta)).unwrap();
            }
        }
    }

    #[test]
    fn zero_psi_gives_zero_delta_r() {
        let r = diag_r(1.0, -1.0);
        let r_win = r.shifted(0.0, 0.3);
        let u = riccati_transport(&r_win, &DMatrix::zeros(2, 2), (0.0, 0.3)).unwrap();
        let psi = MatrixCurve::constant((0.0, 0.3), &DMatrix::zeros(2, 2));
        let dr = delta_r_from_psi(&u, &psi);
        assert_eq!(max_col_sum(&dr.eval(0.2)), 0.0);
    }

    #[test]
    fn perturbed_riccati_solves_perturbed_equation() {
        // U + ψ must transport under R + ΔR.
        let r = diag_r(1.0, -1.0);
        let d = 0.3;
        let delta: f64 = 0.25;
        let r_win = r.shifted(0.0, d);
        let u = riccati_transport(&r_win, &DMatrix::zeros(2, 2), (0.0, d)).unwrap();
        let spec = HdPsiSpec {
            family: HdFamily::H1,
            epsilon: 0.05,
            delta,
            indices: (0, 1),
            time_offset: 0.0,
        };
        let psi = build_hd_psi(&spec, d).unwrap();
        let psi_mat = symmetric_slot_curve(2, 0, 1, &psi);
        let dr = delta_r_from_psi(&u, &psi_mat);
        assert!(dr.symmetry_defect(257) < 1e-12);
        let r_new = r_win.add(&dr);
        let u_new = riccati_transport(&r_new, &DMatrix::zeros(2, 2), (0.0, d)).unwrap();
        for g in [0.1, 0.2, 0.29] {
            let expect = u.value(g) + psi_mat.eval(g);
            assert!(max_col_sum(&(u_new.value(g) - expect)) < 1e-7, "t = {g}");
        }
    }

    #[test]
    fn delta_r_norm_is_order_epsilon() {
        let r = diag_r(1.0, -1.0);
        let d = 0.3;
        let eps = 0.01;
        let delta: f64 = 0.1;
        let r_win = r.shifted(0.0, d);
        let u = riccati_transport(&r_win, &DMatrix::zeros(2, 2), (0.0, d)).unwrap();
        let spec = HdPsiSpec {
            family: HdFamily::H1,
            epsilon: eps,
            delta,
            indices: (0, 1),
            time_offset: 0.0,
        };
        let psi = build_hd_psi(&spec, d).unwrap();
        let psi_mat = symmetric_slot_curve(2, 0, 1, &psi);
        let dr = delta_r_from_psi(&u, &psi_mat);
        let mut dr_sup = 0.0f64;
        let mut u_sup = 0.0f64;
        let mut psi_sup = 0.0f64;
        for g in 0..=512 {
            let t = d * g as f64 / 512.0;
            dr_sup = dr_sup.max(max_col_sum(&dr.eval(t)));
            u_sup = u_sup.max(max_col_sum(&u.value(t)));
            psi_sup = psi_sup.max(max_col_sum(&psi_mat.eval(t)));
        }
        let bound = (1.0 + 2.0 * u_sup + psi_sup) * hd_c_constant(HdFamily::H1) * eps;
        assert!(dr_sup <= bound, "{dr_sup} > {bound}");
    }

    #[test]
    fn scheme_one_targets_a_prime_block() {
        let r = diag_r(0.0, 0.0);
        let scheme = PerturbationScheme::new(SchemeKind::I, 0, 1, 0.01, 0.2, 0.447);
        let dd = dp_delta_measure(&scheme, &r).unwrap();
        let lead = 0.01 * 0.2f64.powi(3) * 0.447;
        assert!(
            (dd.measured[(2, 1)] - lead).abs() <= 0.02 * lead,
            "{} vs {lead}",
            dd.measured[(2, 1)]
        );
        assert!(dd.remainder <= 0.05 * lead, "remainder {}", dd.remainder);
    }

    #[test]
    fn scheme_four_rotation_needs_eigenvalue_gap() {
        let eps = 0.01;
        let delta: f64 = 0.1;
        let d = delta.sqrt();
        // gap 2: antisymmetric A-part appears
        let r_gap = diag_r(1.0, -1.0);
        let scheme = PerturbationScheme::new(SchemeKind::IV, 0, 1, eps, delta, d);
        let dd = dp_delta_measure(&scheme, &r_gap).unwrap();
        let asym = 0.5 * (dd.measured[(0, 1)] - dd.measured[(1, 0)]);
        let predicted_asym = eps * delta.powi(3) * (d - delta) * (1.0 - (-1.0));
        assert!(
            (asym - predicted_asym).abs() <= 0.2 * predicted_asym.abs(),
            "asym {asym} vs {predicted_asym}"
        );
        // no gap: antisymmetric part at remainder scale
        let dd0 = dp_delta_measure(
            &PerturbationScheme::new(SchemeKind::IV, 0, 1, eps, delta, d),
            &diag_r(1.0, 1.0),
        )
        .unwrap();
        let asym0 = 0.5 * (dd0.measured[(0, 1)] - dd0.measured[(1, 0)]);
        assert!(asym0.abs() < 0.05 * predicted_asym.abs(), "asym0 {asym0}");
    }

    #[test]
    fn short_time_map_expands_with_negative_curvature_block() {
        // DP(t) = Id + t·[[0, I], [−I(λ), 0]] + O(t²)
        let r = diag_r(1.0, -1.0);
        let p = CurvatureProfile::Matrix(r.clone());
        let mut errs = Vec::new();
        let ts = [0.1, 0.05, 0.025];
        for &t in &ts {
            let dp = dp_from_curvature(&p, 0.0, t).unwrap();
            let mut lin = DMatrix::identity(4, 4);
            lin[(0, 2)] = t;
            lin[(1, 3)] = t;
            lin[(2, 0)] = -t;
            lin[(3, 1)] = t;
            errs.push(max_col_sum(&(dp.matrix() - lin)));
        }
        let (slope, _) = fit_loglog(&ts, &errs);
        assert!(slope >= 1.5, "slope {slope}");
    }

    #[test]
    fn eigen_separation_basics() {
        let id = DMatrix::identity(2, 2);
        assert_eq!(eigen_separation(&id).h_value, 0.0);
        let gap = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(eigen_separation(&gap).h_value, 2.0);
    }

    #[test]
    fn max_h_finds_the_growing_gap() {
        // R(t) = diag(t, −t) on [0, 1/2]: maximizer at t = 1/2, h = 1.
        let r = MatrixCurve::from_fn(2, (0.0, 1.0), |i, j| {
            if i == j {
                let sign = if i == 0 { 1.0 } else { -1.0 };
                SmoothFn::from_jet4((0.0, 1.0), move |t| Jet4::variable(t).scale(sign))
            } else {
                SmoothFn::zero((0.0, 1.0))
            }
        });
        let sep = max_h_on_interval(&r, (0.0, 0.5), 513);
        assert!((sep.t_star - 0.5).abs() < 1e-12);
        assert!((sep.h_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chart_has_expected_length_and_values() {
        let id = SymplecticMap::identity(2);
        let c = sp_coordinates(&id);
        assert_eq!(c.len(), 10);
        // a-symmetric part (2, 0, 2) at offset 3
        assert_eq!(c[3], 2.0);
        assert_eq!(c[4], 0.0);
        assert_eq!(c[5], 2.0);
        assert_eq!(c[0], 0.0);
        assert_eq!(c[9], 0.0);
        assert_eq!(sp_chart_dim(3), 21);
        assert_eq!(sp_coordinates(&SymplecticMap::identity(3)).len(), 21);

        // n = 1 degenerates to twice the surface chart
        let m = SymplecticMap::from_matrix(DMatrix::from_row_slice(
            2,
            2,
            &[1.1, 0.3, -0.2, (1.0 + 0.3 * -0.2) / 1.1],
        ))
        .unwrap();
        let c1 = sp_coordinates(&m);
        assert_eq!(c1.len(), 3);
        assert!((c1[0] - 2.0 * -0.2).abs() < 1e-15);
        assert!((c1[1] - 2.0 * 1.1).abs() < 1e-15);
        assert!((c1[2] - 2.0 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn gram_linearization_deviation_is_bounded() {
        let r = diag_r(0.0, 0.0);
        let report = gram_linearization_check(&r, 0.01, 0.1, 16).unwrap();
        assert!(report.max_dev_ratio <= 50.0, "{}", report.max_dev_ratio);
    }

    #[test]
    fn mechanism_rejects_repeated_eigenvalues() {
        let r = diag_r(1.0, 1.0);
        let err = HdMechanism::new(&r, 0.1, 0.1, 0.2, H_MIN_DEFAULT).unwrap_err();
        assert_eq!(err.name(), "NoDistinctEigenvalues");
    }

    #[test]
    fn mechanism_base_matches_direct_window_map() {
        let r = diag_r(1.0, -1.0);
        let mech = HdMechanism::new(&r, 0.1, 0.1, 0.2, H_MIN_DEFAULT).unwrap();
        let (w0, w1) = mech.window();
        let direct = window_map(&r, w0, w1, feature_steps(w1 - w0, 0.001)).unwrap();
        assert!(mech.base_dp().distance(&direct) < 1e-9);
        assert!(mech.sigma_min() > 0.0);
    }

    #[test]
    fn realize_base_map_is_trivial() {
        let r = diag_r(1.0, -1.0);
        let mech = HdMechanism::new(&r, 0.1, 0.1, 0.2, H_MIN_DEFAULT).unwrap();
        let out = mech.realize(&mech.base_dp()).unwrap();
        assert!(out.residual <= 1e-10);
        assert!(out.coefficients.amax() < 1e-6);
    }

    #[test]
    fn realize_round_trip_recovers_coefficients() {
        let r = diag_r(1.0, -1.0);
        let mech = HdMechanism::new(&r, 0.1, 0.1, 0.2, H_MIN_DEFAULT).unwrap();
        let m = sp_chart_dim(2);
        let mut c = DVector::zeros(m);
        for (k, v) in [(0usize, 0.4), (3, -0.3), (6, 0.5), (9, 0.25)] {
            c[k] = v;
        }
        let target = mech.rotate_back(&mech.phi(&c).unwrap());
        let out = mech.realize_unchecked(&target).unwrap();
        assert!(
            (&out.coefficients - &c).amax() < 1e-6,
            "recovered {:?}",
            out.coefficients.as_slice()
        );
    }

    #[test]
    fn realize_antisymmetric_target_uses_rotation_scheme() {
        let r = diag_r(1.0, -1.0);
        let mech = HdMechanism::new(&r, 0.1, 0.1, 0.2, H_MIN_DEFAULT).unwrap();
        let base = sp_coordinates(mech.base_dp_rotated());
        // bump only the antisymmetric coordinate (the last one)
        let m = sp_chart_dim(2);
        let mut c_probe = DVector::zeros(m);
        c_probe[m - 1] = 1e-5 / mech.dphi()[(m - 1, m - 1)];
        let target = mech.rotate_back(&mech.phi(&c_probe).unwrap());
        let out = mech.realize(&target).unwrap();
        assert!(out.residual <= 1e-8);
        // dominant coefficient is the rotation one
        let mut dominant = 0;
        let mut best = 0.0;
        for k in 0..m {
            if out.coefficients[k].abs() > best {
                best = out.coefficients[k].abs();
                dominant = k;
            }
        }
        assert_eq!(dominant, m - 1);
        let achieved_coords = sp_coordinates(&mech.rotate_in(&out.achieved));
        assert!((achieved_coords[m - 1] - base[m - 1]).abs() > 5e-6);
    }

    #[test]
    fn extension_matches_global_resolve() {
        let r = diag_r(1.0, -1.0);
        let mech = HdMechanism::new(&r, 0.1, 0.1, 0.2, H_MIN_DEFAULT).unwrap();
        let m = sp_chart_dim(2);
        let mut c = DVector::zeros(m);
        c[1] = 0.3;
        c[m - 1] = 0.2;
        let target = mech.rotate_back(&mech.phi(&c).unwrap());
        let out = mech.realize_unchecked(&target).unwrap();
        let composed = mech.extend_to_unit_interval(&out).unwrap();
        let resolved = mech.global_resolve(&out).unwrap();
        assert!(
            composed.distance(&resolved) < 1e-6,
            "{}",
            composed.distance(&resolved)
        );
        assert!(composed.defect() < 1e-7);
        // identity perturbation keeps the original time-1 map
        let zero = mech.realize_unchecked(&mech.base_dp()).unwrap();
        let composed0 = mech.extend_to_unit_interval(&zero).unwrap();
        let original =
            dp_from_curvature(&CurvatureProfile::Matrix(r.clone()), 0.0, 1.0).unwrap();
        assert!(composed0.distance(&original) < 1e-7);
    }
}

#[cfg(test)]
mod chart_structure_tests {
    use super::*;

    #[test]
    fn chart_jacobian_is_block_triangular_dominant() {
        // Diagonal blocks carry the per-family leading values; off-block
        // contamination is strictly smaller at δ = 0.05 and decays with δ
        // (measured ∝ δ·d for this shape family).
        let r = MatrixCurve::constant(
            (0.0, 1.0),
            &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        );
        let delta: f64 = 0.05;
        let d = delta.sqrt();
        let mech = HdMechanism::new(&r, 0.01, delta, d, H_MIN_DEFAULT).unwrap();
        let j = mech.dphi();
        let m = sp_chart_dim(2);
        let block_of = |k: usize| k.min(9) / 3;
        let mut min_diag = f64::INFINITY;
        let mut max_off = 0.0f64;
        for row in 0..m {
            for col in 0..m {
                let v = j[(row, col)].abs();
                if row == col {
                    min_diag = min_diag.min(v);
                } else if block_of(row) != block_of(col) {
                    max_off = max_off.max(v);
                }
            }
        }
        assert!(max_off <= 0.5 * min_diag, "ratio {}", max_off / min_diag);
        // Diagonal values match the leading predictions: 2dεδ³ for the
        // first two families, 4dεδ³ for the third, 4εδ³(d−δ) for the
        // rotation (gap 2).
        let lead = 0.01 * delta.powi(3);
        assert!((j[(0, 0)].abs() - 2.0 * d * lead).abs() <= 0.05 * 2.0 * d * lead);
        assert!((j[(6, 6)].abs() - 4.0 * d * lead).abs() <= 0.05 * 4.0 * d * lead);
        let iv = 4.0 * lead * (d - delta);
        assert!((j[(9, 9)].abs() - iv).abs() <= 0.1 * iv, "{}", j[(9, 9)]);
    }
}
