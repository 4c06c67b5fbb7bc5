//! The three perturbation families on `[0, 1]`.
//!
//! Each family is a positive C∞ profile, linear in ε, targeting exactly one
//! chart entry of the time-1 map:
//!
//! - `S1`: supported in `(3/4, 1]`, slope ε at `t = 1` — moves `a'(1)`.
//! - `S2`: supported in `(3/4, 1]`, value ε and slope 0 at `t = 1` — moves
//!   `a(1)`.
//! - `S3`: supported in `(1/4, 1/2)`, integral ε — moves `b(1)` only.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numkit::bump::{bump01_wide, smooth_step};
use crate::numkit::jet::Jet4;
use crate::numkit::{grid_cr_norm, quad, SmoothFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsiFamily {
    S1,
    S2,
    S3,
}

impl PsiFamily {
    pub const ALL: [PsiFamily; 3] = [PsiFamily::S1, PsiFamily::S2, PsiFamily::S3];

    pub fn name(self) -> &'static str {
        match self {
            PsiFamily::S1 => "S1",
            PsiFamily::S2 => "S2",
            PsiFamily::S3 => "S3",
        }
    }

    /// Open support interval (functions vanish outside it; S1 and S2 may be
    /// nonzero at the right endpoint 1).
    pub fn support(self) -> (f64, f64) {
        match self {
            PsiFamily::S1 | PsiFamily::S2 => (0.75, 1.0),
            PsiFamily::S3 => (0.25, 0.5),
        }
    }
}

/// One declarative constraint on a family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// `ψ(t) = v`
    EndpointValue { t: f64, v: f64 },
    /// `ψ'(t) = v`
    EndpointDeriv { t: f64, v: f64 },
    /// `∫₀¹ ψ = v`
    Integral { v: f64 },
    /// `‖ψ‖_{C²} ≤ c·ε`
    C2Bound { c: f64 },
}

/// Declarative description of one family member.
#[derive(Debug, Clone)]
pub struct PsiSpec {
    pub family: PsiFamily,
    pub epsilon: f64,
    pub support: (f64, f64),
    pub constraints: Vec<Constraint>,
}

impl PsiSpec {
    pub fn new(family: PsiFamily, epsilon: f64) -> PsiSpec {
        assert!(epsilon > 0.0, "epsilon must be positive");
        let mut constraints = vec![Constraint::C2Bound {
            c: c2_constant(family),
        }];
        match family {
            PsiFamily::S1 => constraints.push(Constraint::EndpointDeriv { t: 1.0, v: epsilon }),
            PsiFamily::S2 => {
                constraints.push(Constraint::EndpointValue { t: 1.0, v: epsilon });
                constraints.push(Constraint::EndpointDeriv { t: 1.0, v: 0.0 });
            }
            PsiFamily::S3 => constraints.push(Constraint::Integral { v: epsilon }),
        }
        PsiSpec {
            family,
            epsilon,
            support: family.support(),
            constraints,
        }
    }
}

/// Raw (ε = 1) shape of a family, as a 4-jet.
fn shape_jet(family: PsiFamily, t: f64) -> Jet4 {
    match family {
        PsiFamily::S1 => {
            // ∫_{3/4}^t w with w a smooth step reaching 1 at 3/4 + 1/32:
            // slope at t = 1 is exactly 1.
            let table = s1_table();
            if t <= 0.75 {
                return Jet4::constant(0.0);
            }
            let w = |t: f64| smooth_step(Jet4::affine(t, 32.0, -24.0));
            // Hermite on the cumulative table; derivative values are exact.
            let h = 0.25 / (S1_TABLE_PANELS as f64 * 2.0);
            let s = (t - 0.75) / h;
            let i = (s.floor() as isize).clamp(0, table.len() as isize - 2) as usize;
            let u = s - i as f64;
            let t_i = 0.75 + h * i as f64;
            let t_j = t_i + h;
            let (c0, c1) = (table[i], table[i + 1]);
            let (m0, m1) = (w(t_i).d[0] * h, w(t_j).d[0] * h);
            let u2 = u * u;
            let u3 = u2 * u;
            let value = (2.0 * u3 - 3.0 * u2 + 1.0) * c0
                + (u3 - 2.0 * u2 + u) * m0
                + (-2.0 * u3 + 3.0 * u2) * c1
                + (u3 - u2) * m1;
            let wj = w(t);
            Jet4::new([value, wj.d[0], wj.d[1], wj.d[2], wj.d[3]])
        }
        PsiFamily::S2 => smooth_step(Jet4::affine(t, 4.0, -3.0)),
        PsiFamily::S3 => bump01_wide(Jet4::affine(t, 4.0, -1.0)).scale(1.0 / s3_mass()),
    }
}

const S1_TABLE_PANELS: usize = 4096;

/// Cumulative integral of the S1 slope profile on `[3/4, 1]`.
fn s1_table() -> &'static Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 2 * S1_TABLE_PANELS + 1;
        let h = 0.25 / (n - 1) as f64;
        let values: Vec<f64> = (0..n)
            .map(|i| smooth_step(Jet4::affine(0.75 + h * i as f64, 32.0, -24.0)).d[0])
            .collect();
        quad::cumulative_integral(&values, h)
    })
}

/// `∫₀¹` of the unnormalized S3 bump.
fn s3_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        quad::simpson(
            |t| bump01_wide(Jet4::affine(t, 4.0, -1.0)).d[0],
            0.25,
            0.5,
            8192,
        )
    })
}

/// Published constant `C` with `‖ψ‖_{C²} ≤ C·ε`, measured once per family
/// at ε = 1 (the construction is linear in ε).
pub fn c2_constant(family: PsiFamily) -> f64 {
    static CONSTS: OnceLock<[f64; 3]> = OnceLock::new();
    let all = CONSTS.get_or_init(|| {
        let mut out = [0.0; 3];
        for (slot, fam) in out.iter_mut().zip(PsiFamily::ALL) {
            let f = SmoothFn::from_jet4((0.0, 1.0), move |t| shape_jet(fam, t));
            *slot = grid_cr_norm(&f, 2, 4097);
        }
        out
    });
    match family {
        PsiFamily::S1 => all[0],
        PsiFamily::S2 => all[1],
        PsiFamily::S3 => all[2],
    }
}

/// Build the family member and verify every constraint in the spec.
pub fn build_psi(spec: &PsiSpec) -> Result<SmoothFn> {
    let family = spec.family;
    let eps = spec.epsilon;
    let psi = SmoothFn::from_jet4((0.0, 1.0), move |t| shape_jet(family, t).scale(eps));
    verify_psi(spec, &psi)?;
    Ok(psi)
}

fn verify_psi(spec: &PsiSpec, psi: &SmoothFn) -> Result<()> {
    let fam = spec.family.name();
    for c in &spec.constraints {
        match *c {
            Constraint::EndpointValue { t, v } => {
                let got = psi.value(t);
                if (got - v).abs() > 1e-12 {
                    return Err(Error::ConstraintViolation {
                        family: fam,
                        constraint: "endpoint value",
                        detail: got - v,
                    });
                }
            }
            Constraint::EndpointDeriv { t, v } => {
                let got = psi.deriv(t);
                if (got - v).abs() > 1e-12 {
                    return Err(Error::ConstraintViolation {
                        family: fam,
                        constraint: "endpoint derivative",
                        detail: got - v,
                    });
                }
            }
            Constraint::Integral { v } => {
                // Independent quadrature at a resolution unrelated to the
                // normalization constant.
                let got = quad::simpson(|t| psi.value(t), 0.0, 1.0, 12000);
                if (got - v).abs() > 1e-10 {
                    return Err(Error::ConstraintViolation {
                        family: fam,
                        constraint: "integral",
                        detail: got - v,
                    });
                }
            }
            Constraint::C2Bound { c } => {
                let got = grid_cr_norm(psi, 2, 4097);
                if got > c * spec.epsilon * (1.0 + 1e-9) {
                    return Err(Error::ConstraintViolation {
                        family: fam,
                        constraint: "c2 bound",
                        detail: got,
                    });
                }
            }
        }
    }
    // Support: exactly zero outside, strictly positive strictly inside.
    let (lo, hi) = spec.support;
    for i in 0..=400 {
        let t = i as f64 / 400.0;
        let v = psi.value(t);
        if t < lo - 1e-12 || t > hi + 1e-12 {
            if v != 0.0 {
                return Err(Error::ConstraintViolation {
                    family: fam,
                    constraint: "support",
                    detail: v,
                });
            }
        } else if t > lo + 0.01 && t < hi - 0.01 && v <= 0.0 {
            return Err(Error::ConstraintViolation {
                family: fam,
                constraint: "positivity",
                detail: v,
            });
        }
    }
    Ok(())
}
