//! Localized curvature replacement: the map moves linearly with the
//! support measure of the change.

use franks::numkit::bump::bump01_wide;
use franks::numkit::fit::fit_loglog;
use franks::numkit::jet::Jet4;
use franks::numkit::SmoothFn;
use franks::surface::localized_replacement;

use crate::config::Config;
use crate::experiments::p;
use crate::report::ReportRow;
use crate::CliError;

const PREDICTION_TOL: f64 = 1e-5;
const SLOPE_BAND: (f64, f64) = (0.7, 1.3);

/// `k` plus a bump of the given height supported on an interval of the
/// given measure centered at `center`.
pub fn bumped_curvature(k: &SmoothFn, height: f64, measure: f64, center: f64) -> SmoothFn {
    let k = k.clone();
    let lo = center - measure / 2.0;
    let peak = bump01_wide(Jet4::variable(0.5)).d[0];
    SmoothFn::from_jet4((0.0, 1.0), move |t| {
        let base = k
            .jet4(t)
            .expect("closed-form curvature profiles carry 4-jets");
        let bump = bump01_wide(Jet4::affine(t, 1.0 / measure, -lo / measure));
        base.add(bump.scale(height / peak))
    })
}

pub fn run(cfg: &Config) -> Result<Vec<ReportRow>, CliError> {
    let k = cfg.curvature().map_err(CliError::Config)?;
    let height = cfg.f64_or("height", 0.1).map_err(CliError::Config)?;
    let center = cfg.f64_or("center", 0.35).map_err(CliError::Config)?;
    let measures = cfg
        .f64_list_or("measures", &[0.04, 0.02, 0.01])
        .map_err(CliError::Config)?;

    let mut rows = Vec::new();
    let mut measured = Vec::with_capacity(measures.len());
    for &m in &measures {
        let k1 = bumped_curvature(&k, height, m, center);
        let rep = localized_replacement(&k, &k1, m).map_err(CliError::Lib)?;
        rows.push(ReportRow::new(
            "avoidance",
            format!("check=bound;measure={}", p(m)),
            rep.measured,
            rep.bound,
            rep.measured <= rep.bound,
        ));
        rows.push(ReportRow::new(
            "avoidance",
            format!("check=prediction;measure={}", p(m)),
            rep.column_error,
            PREDICTION_TOL,
            rep.column_error <= PREDICTION_TOL,
        ));
        measured.push(rep.measured);
    }

    let (slope, _) = fit_loglog(&measures, &measured);
    rows.push(ReportRow::new(
        "avoidance",
        "check=measure-slope",
        slope,
        1.0,
        (SLOPE_BAND.0..=SLOPE_BAND.1).contains(&slope),
    ));
    Ok(rows)
}
