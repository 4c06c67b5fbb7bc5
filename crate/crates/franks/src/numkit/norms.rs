//! Grid-based Cʳ norms.
//!
//! The Cʳ norm convention is cumulative: the max over derivative orders
//! `0..=r` of the grid sup-norm. Grids are uniform with 4097 points by
//! default.

use super::smooth::SmoothFn;

/// Default number of grid points for norm evaluation.
pub const NORM_GRID: usize = 4097;

/// Cumulative C⁰/C¹/C² norms measured on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNorms {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub grid_points: usize,
}

/// All three cumulative norms of `f` in one pass.
pub fn grid_norms(f: &SmoothFn, grid_points: usize) -> GridNorms {
    let n = grid_points.max(2);
    let (t0, t1) = f.domain();
    let mut m = [0f64; 3];
    for i in 0..n {
        let t = t0 + (t1 - t0) * i as f64 / (n - 1) as f64;
        let (v, d1, d2) = f.eval(t);
        m[0] = m[0].max(v.abs());
        m[1] = m[1].max(d1.abs());
        m[2] = m[2].max(d2.abs());
    }
    GridNorms {
        c0: m[0],
        c1: m[0].max(m[1]),
        c2: m[0].max(m[1]).max(m[2]),
        grid_points: n,
    }
}

/// The Cʳ norm for a single order `r ∈ {0, 1, 2}`.
pub fn grid_cr_norm(f: &SmoothFn, r: usize, grid_points: usize) -> f64 {
    assert!(r <= 2, "only orders 0..=2 are supported");
    let norms = grid_norms(f, grid_points);
    match r {
        0 => norms.c0,
        1 => norms.c1,
        _ => norms.c2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function_has_zero_norms() {
        let f = SmoothFn::zero((0.0, 1.0));
        let n = grid_norms(&f, 65);
        assert_eq!((n.c0, n.c1, n.c2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn linear_function_c1() {
        // f(t) = t on [0,1]: |f| ≤ 1, |f'| = 1.
        let f = SmoothFn::from_jet4((0.0, 1.0), |t| super::super::jet::Jet4::variable(t));
        assert_eq!(grid_cr_norm(&f, 1, 101), 1.0);
        assert_eq!(grid_cr_norm(&f, 0, 101), 1.0);
    }

    #[test]
    fn sinusoid_c2_is_omega_squared() {
        // f = sin(2πt): max |f''| = 4π².
        let f = SmoothFn::sinusoid((0.0, 1.0), 1.0, 2.0 * std::f64::consts::PI, 0.0);
        let c2 = grid_cr_norm(&f, 2, NORM_GRID);
        let expect = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        assert!((c2 - expect).abs() < 1e-3, "{c2} vs {expect}");
    }

    #[test]
    fn norms_are_monotone_in_order() {
        let f = SmoothFn::sinusoid((0.0, 1.0), 0.3, 7.0, 0.2);
        let n = grid_norms(&f, 257);
        assert!(n.c0 <= n.c1 && n.c1 <= n.c2);
    }

    #[test]
    fn refinement_only_raises_the_sup() {
        let f = SmoothFn::sinusoid((0.0, 1.0), 1.0, 11.0, 0.0);
        let coarse = grid_norms(&f, 33);
        let fine = grid_norms(&f, 4097);
        assert!(coarse.c0 <= fine.c0 + 1e-6);
        assert!(coarse.c2 <= fine.c2 + 1e-6);
    }
}
