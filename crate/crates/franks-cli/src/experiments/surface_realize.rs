//! Newton realization of seeded Sp(1) targets near the configured map.

use franks::error::Error;
use franks::surface::{sp1_coords, sp1_from_coords, SurfaceMechanism};
use rayon::prelude::*;

use crate::config::Config;
use crate::experiments::p;
use crate::report::ReportRow;
use crate::rng::XorShift64Star;
use crate::CliError;

const RESIDUAL_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 15;

pub fn run(cfg: &Config) -> Result<Vec<ReportRow>, CliError> {
    let k = cfg.curvature().map_err(CliError::Config)?;
    let eps = cfg.f64_or("eps", 0.01).map_err(CliError::Config)?;
    let count = cfg.usize_or("count", 20).map_err(CliError::Config)?;
    let radius = cfg.f64_or("radius", 5e-4).map_err(CliError::Config)?;
    let seed = cfg.u64_or("seed", 1).map_err(CliError::Config)?;

    let mech = SurfaceMechanism::new(&k, eps).map_err(CliError::Lib)?;
    let delta_est = mech.delta_est().map_err(CliError::Lib)?;
    if radius > delta_est {
        return Err(CliError::Lib(Error::OutOfBall {
            distance: radius,
            delta_est,
        }));
    }

    let mut rows = vec![ReportRow::new(
        "surface-realize",
        format!("check=ball;eps={};radius={}", p(eps), p(radius)),
        radius,
        delta_est,
        radius <= delta_est,
    )];

    // Targets sampled in the (a'(1), a(1), b(1)) chart.
    let mut rng = XorShift64Star::new(seed);
    let base = sp1_coords(mech.base_dp());
    let mut targets = Vec::with_capacity(count);
    for _ in 0..count {
        let dir = loop {
            let v = [
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm > 1e-3 && norm <= 1.0 {
                break [v[0] / norm, v[1] / norm, v[2] / norm];
            }
        };
        let len = radius * rng.next_f64().powf(1.0 / 3.0);
        let coords = [
            base[0] + len * dir[0],
            base[1] + len * dir[1],
            base[2] + len * dir[2],
        ];
        targets.push(sp1_from_coords(coords).map_err(CliError::Lib)?);
    }

    let target_rows: Vec<ReportRow> = targets
        .par_iter()
        .enumerate()
        .map(|(i, target)| match mech.realize(target) {
            Ok(res) => {
                let s_max = res.coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                let bound = mech.curvature_change_bound(s_max);
                let pass = res.residual <= RESIDUAL_TOL
                    && res.newton_iterations <= MAX_ITERATIONS
                    && res.curvature_change_c0 <= bound;
                ReportRow::new(
                    "surface-realize",
                    format!(
                        "check=target;case={i};iters={};dk={}",
                        res.newton_iterations,
                        p(res.curvature_change_c0)
                    ),
                    res.residual,
                    RESIDUAL_TOL,
                    pass,
                )
            }
            Err(_) => ReportRow::new(
                "surface-realize",
                format!("check=target;case={i};iters=0;dk=nan"),
                f64::NAN,
                RESIDUAL_TOL,
                false,
            ),
        })
        .collect();
    rows.extend(target_rows);
    Ok(rows)
}
