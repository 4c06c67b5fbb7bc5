//! The six experiment workflows behind `franks run`.

mod avoidance;
mod highdim_realize;
mod invariants;
mod metric_bounds;
mod scaling;
mod surface_realize;

use crate::config::{Config, Experiment};
use crate::report::ReportRow;
use crate::CliError;

pub fn run(cfg: &Config) -> Result<Vec<ReportRow>, CliError> {
    match cfg.experiment().map_err(CliError::Config)? {
        Experiment::Invariants => invariants::run(cfg),
        Experiment::SurfaceRealize => surface_realize::run(cfg),
        Experiment::HighdimRealize => highdim_realize::run(cfg),
        Experiment::MetricBounds => metric_bounds::run(cfg),
        Experiment::Scaling => scaling::run(cfg),
        Experiment::Avoidance => avoidance::run(cfg),
    }
}

/// Catalog text for `franks list`: one line per experiment with its
/// parameter schema and backing module, in a stable order.
pub fn catalog() -> String {
    let lines = [
        "invariants       [numkit+jacobi]   curvature= n= count= kmax= seed=   Wronskian and symplectic-defect checks",
        "surface-realize  [surface]         curvature= eps= count= radius= seed=   Newton realization of Sp(1) targets",
        "highdim-realize  [highdim]         curvature= eps= delta= d= count= radius= seed= hmin=   Newton realization of Sp(n) targets",
        "metric-bounds    [metric]          curvature= family= eps= etas= grid_t= chart_out=   tube estimates and C2 distance",
        "scaling          [highdim]         curvature= scheme= eps= deltas= anchoring=   remainder exponent fits",
        "avoidance        [surface+jacobi]  curvature= height= measures= center=   localized-replacement bounds",
    ];
    let mut out = String::new();
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
    out
}

/// Shared: formats a float compactly for the params column (no commas).
pub(crate) fn p(v: f64) -> String {
    format!("{v:e}")
}
