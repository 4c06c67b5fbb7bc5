//! Remainder-exponent fits for the window perturbation schemes.

use franks::highdim::{
    dp_delta_measure, epsilon_cross_term, remainder_scaling, Anchoring, PerturbationScheme,
    SchemeKind,
};
use franks::numkit::max_col_sum;

use crate::config::Config;
use crate::experiments::p;
use crate::report::ReportRow;
use crate::CliError;

/// Minimum fitted slope per scheme: the window-expansion remainder
/// exponent less one half.
pub fn slope_threshold(kind: SchemeKind) -> f64 {
    match kind {
        SchemeKind::I | SchemeKind::II => 5.5,
        SchemeKind::III => 4.5,
        SchemeKind::IV => 4.5,
    }
}

fn scheme_from(cfg: &Config) -> Result<SchemeKind, CliError> {
    match cfg.get("scheme").unwrap_or("I") {
        "I" => Ok(SchemeKind::I),
        "II" => Ok(SchemeKind::II),
        "III" => Ok(SchemeKind::III),
        "IV" => Ok(SchemeKind::IV),
        other => Err(CliError::Config(crate::config::ConfigError(format!(
            "unknown scheme '{other}'"
        )))),
    }
}

pub fn run(cfg: &Config) -> Result<Vec<ReportRow>, CliError> {
    let r = cfg.matrix_curvature().map_err(CliError::Config)?;
    let kind = scheme_from(cfg)?;
    let eps = cfg.f64_or("eps", 0.01).map_err(CliError::Config)?;
    let deltas = cfg
        .f64_list_or("deltas", &[0.3, 0.2, 0.13])
        .map_err(CliError::Config)?;
    let anchoring = match cfg.get("anchoring").unwrap_or("local") {
        "local" => Anchoring::Local,
        "scheme" => Anchoring::Scheme,
        other => {
            return Err(CliError::Config(crate::config::ConfigError(format!(
                "unknown anchoring '{other}'"
            ))))
        }
    };

    let mut rows = Vec::new();

    if kind == SchemeKind::IV {
        // Second-order cross term: doubling ε must quadruple it.
        let delta = deltas[deltas.len() / 2];
        let d = delta.sqrt();
        let s1 = PerturbationScheme::new(kind, 0, 1, eps, delta, d);
        let s2 = PerturbationScheme::new(kind, 0, 1, 2.0 * eps, delta, d);
        let q1 = epsilon_cross_term(&s1, &r).map_err(CliError::Lib)?;
        let q2 = epsilon_cross_term(&s2, &r).map_err(CliError::Lib)?;
        let ratio = q2 / q1;
        rows.push(ReportRow::new(
            "scaling",
            format!("check=eps-cross-quadruple;delta={}", p(delta)),
            ratio,
            4.0,
            (2.4..=5.6).contains(&ratio),
        ));
    }

    // Leading-block accuracy per δ under the scheme placement.
    for &delta in &deltas {
        let d = delta.sqrt();
        let j = if kind == SchemeKind::IV { 1 } else { 0 };
        let scheme = PerturbationScheme::new(kind, 0, j, eps, delta, d);
        let dd = dp_delta_measure(&scheme, &r).map_err(CliError::Lib)?;
        let lead = max_col_sum(&dd.predicted);
        let err = max_col_sum(&(&dd.measured - &dd.predicted));
        // Remainder budget: the leading size times the composition slack.
        let budget = lead * (0.02f64).max(2.0 * d);
        rows.push(ReportRow::new(
            "scaling",
            format!("check=leading;scheme={};delta={}", kind.name(), p(delta)),
            dd.remainder,
            budget,
            dd.remainder <= budget && err.is_finite(),
        ));
    }

    // Fitted remainder exponent.
    let fit = remainder_scaling(kind, &r, eps, &deltas, anchoring).map_err(CliError::Lib)?;
    let threshold = slope_threshold(kind);
    rows.push(ReportRow::new(
        "scaling",
        format!(
            "check=remainder-slope;scheme={};anchoring={}",
            kind.name(),
            match anchoring {
                Anchoring::Local => "local",
                Anchoring::Scheme => "scheme",
            }
        ),
        fit.slope,
        threshold,
        fit.slope >= threshold,
    ));

    Ok(rows)
}
