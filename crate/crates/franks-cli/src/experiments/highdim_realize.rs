//! Newton realization of seeded Sp(n) targets for the window map.

use franks::error::Error;
use franks::highdim::{HdMechanism, H_MIN_DEFAULT};
use rayon::prelude::*;

use crate::config::Config;
use crate::experiments::p;
use crate::report::ReportRow;
use crate::targets::seeded_targets;
use crate::CliError;

const RESIDUAL_TOL: f64 = 1e-8;

pub fn run(cfg: &Config) -> Result<Vec<ReportRow>, CliError> {
    let r = cfg.matrix_curvature().map_err(CliError::Config)?;
    let eps = cfg.f64_or("eps", 0.1).map_err(CliError::Config)?;
    let delta = cfg.f64_or("delta", 0.1).map_err(CliError::Config)?;
    let d = cfg.f64_or("d", 0.2).map_err(CliError::Config)?;
    let count = cfg.usize_or("count", 10).map_err(CliError::Config)?;
    let radius = cfg.f64_or("radius", 1e-5).map_err(CliError::Config)?;
    let seed = cfg.u64_or("seed", 1).map_err(CliError::Config)?;
    let h_min = cfg.f64_or("hmin", H_MIN_DEFAULT).map_err(CliError::Config)?;

    let mech = HdMechanism::new(&r, eps, delta, d, h_min).map_err(CliError::Lib)?;
    let delta_est = mech.delta_est();
    if radius > delta_est {
        return Err(CliError::Lib(Error::OutOfBall {
            distance: radius,
            delta_est,
        }));
    }

    let mut rows = vec![
        ReportRow::new(
            "highdim-realize",
            format!(
                "check=separation;tstar={};h={}",
                p(mech.t_star()),
                p(mech.separation().h_value)
            ),
            mech.separation().h_value,
            h_min,
            mech.separation().h_value >= h_min,
        ),
        ReportRow::new(
            "highdim-realize",
            "check=chart-rank",
            mech.sigma_min(),
            0.0,
            mech.sigma_min() > 0.0,
        ),
        ReportRow::new(
            "highdim-realize",
            format!("check=ball;radius={}", p(radius)),
            radius,
            delta_est,
            radius <= delta_est,
        ),
    ];

    let base = mech.base_dp();
    let targets = seeded_targets(seed, count, radius, &base).map_err(CliError::Lib)?;
    let target_rows: Vec<ReportRow> = targets
        .par_iter()
        .enumerate()
        .map(|(i, target)| match mech.realize(target) {
            Ok(res) => ReportRow::new(
                "highdim-realize",
                format!(
                    "check=target;case={i};iters={};dr={}",
                    res.newton_iterations,
                    p(res.curvature_change_c0)
                ),
                res.residual,
                RESIDUAL_TOL,
                res.residual <= RESIDUAL_TOL,
            ),
            Err(_) => ReportRow::new(
                "highdim-realize",
                format!("check=target;case={i};iters=0;dr=nan"),
                f64::NAN,
                RESIDUAL_TOL,
                false,
            ),
        })
        .collect();
    rows.extend(target_rows);
    Ok(rows)
}
