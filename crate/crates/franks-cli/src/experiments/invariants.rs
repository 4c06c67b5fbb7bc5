//! Wronskian and symplecticity checks over the configured curvature and a
//! seeded random corpus.

use franks::jacobi::{dp_from_curvature, fundamental_matrix_on, fundamental_scalar, CurvatureProfile};
use franks::numkit::{MatrixCurve, SmoothFn};
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::config::Config;
use crate::report::ReportRow;
use crate::rng::XorShift64Star;
use crate::CliError;

const WRONSKIAN_TOL: f64 = 1e-8;
const DEFECT_TOL: f64 = 1e-8;
const COMPOSITION_TOL: f64 = 1e-7;

/// Random scalar curvature with `‖k‖_{C⁰} ≤ bound`: constant plus two
/// harmonics with random phases.
pub fn random_scalar_profile(rng: &mut XorShift64Star, bound: f64) -> SmoothFn {
    let tau = 2.0 * std::f64::consts::PI;
    let c0 = rng.range(-1.0, 1.0);
    let c1 = rng.range(-1.0, 1.0);
    let c2 = rng.range(-1.0, 1.0);
    let p1 = rng.range(0.0, tau);
    let p2 = rng.range(0.0, tau);
    let scale = bound / (c0.abs() + c1.abs() + c2.abs()).max(1e-9) * rng.next_f64();
    let constant = SmoothFn::constant((0.0, 1.0), c0 * scale);
    let h1 = SmoothFn::sinusoid((0.0, 1.0), c1 * scale, tau, p1);
    let h2 = SmoothFn::sinusoid((0.0, 1.0), c2 * scale, 2.0 * tau, p2);
    constant.add(&h1).add(&h2)
}

/// Random constant symmetric matrix profile with `‖R‖ ≤ bound`.
pub fn random_matrix_profile(rng: &mut XorShift64Star, n: usize, bound: f64) -> MatrixCurve {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.range(-1.0, 1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let norm = franks::numkit::max_col_sum(&m).max(1e-9);
    m *= bound * rng.next_f64() / norm;
    MatrixCurve::constant((0.0, 1.0), &m)
}

pub fn run(cfg: &Config) -> Result<Vec<ReportRow>, CliError> {
    let k = cfg.curvature().map_err(CliError::Config)?;
    let count = cfg.usize_or("count", 20).map_err(CliError::Config)?;
    let kmax = cfg.f64_or("kmax", 10.0).map_err(CliError::Config)?;
    let seed = cfg.u64_or("seed", 1).map_err(CliError::Config)?;

    let mut rows = Vec::new();

    // Configured curvature: Wronskian, symplectic defect, composition.
    let fund = fundamental_scalar(&k).map_err(CliError::Lib)?;
    let w = fund.wronskian_defect();
    rows.push(ReportRow::new(
        "invariants",
        "check=wronskian;profile=config",
        w,
        WRONSKIAN_TOL,
        w <= WRONSKIAN_TOL,
    ));
    let profile = CurvatureProfile::Scalar(k.clone());
    let dp = dp_from_curvature(&profile, 0.0, 1.0).map_err(CliError::Lib)?;
    rows.push(ReportRow::new(
        "invariants",
        "check=defect;profile=config",
        dp.defect(),
        DEFECT_TOL,
        dp.defect() <= DEFECT_TOL,
    ));
    let left = dp_from_curvature(&profile, 0.0, 0.5).map_err(CliError::Lib)?;
    let right = dp_from_curvature(&profile, 0.5, 1.0).map_err(CliError::Lib)?;
    let comp = right.compose(&left).map_err(CliError::Lib)?.distance(&dp);
    rows.push(ReportRow::new(
        "invariants",
        "check=composition;profile=config;split=5e-1",
        comp,
        COMPOSITION_TOL,
        comp <= COMPOSITION_TOL,
    ));

    // Random scalar corpus.
    let mut rng = XorShift64Star::new(seed);
    let profiles: Vec<SmoothFn> = (0..count)
        .map(|_| random_scalar_profile(&mut rng, kmax))
        .collect();
    let scalar_rows: Vec<ReportRow> = profiles
        .par_iter()
        .enumerate()
        .map(|(i, k)| {
            let w = fundamental_scalar(k).map(|f| f.wronskian_defect());
            match w {
                Ok(w) => ReportRow::new(
                    "invariants",
                    format!("check=wronskian;profile=random;case={i}"),
                    w,
                    WRONSKIAN_TOL,
                    w <= WRONSKIAN_TOL,
                ),
                Err(_) => ReportRow::new(
                    "invariants",
                    format!("check=wronskian;profile=random;case={i}"),
                    f64::NAN,
                    WRONSKIAN_TOL,
                    false,
                ),
            }
        })
        .collect();
    rows.extend(scalar_rows);

    // Random symmetric matrix corpus, n cycling through 1..=3.
    let matrix_count = count / 2;
    let specs: Vec<MatrixCurve> = (0..matrix_count)
        .map(|i| random_matrix_profile(&mut rng, 1 + i % 3, kmax))
        .collect();
    let matrix_rows: Vec<ReportRow> = specs
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let result = fundamental_matrix_on(r, (0.0, 1.0)).and_then(|f| {
                let p = CurvatureProfile::Matrix(r.clone());
                dp_from_curvature(&p, 0.0, 1.0).map(|dp| (f.wronskian_defect(), dp.defect()))
            });
            match result {
                Ok((w, d)) => {
                    let measured = w.max(d);
                    ReportRow::new(
                        "invariants",
                        format!("check=matrix-defect;profile=random;n={};case={i}", r.n()),
                        measured,
                        DEFECT_TOL,
                        measured <= DEFECT_TOL,
                    )
                }
                Err(_) => ReportRow::new(
                    "invariants",
                    format!("check=matrix-defect;profile=random;n={};case={i}", r.n()),
                    f64::NAN,
                    DEFECT_TOL,
                    false,
                ),
            }
        })
        .collect();
    rows.extend(matrix_rows);

    Ok(rows)
}
