//! C∞ compactly-supported primitives built from `σ(u) = exp(−1/u)`.
//!
//! All return full 4-jets so that constructions layered on their second
//! derivatives remain twice differentiable.

use super::jet::Jet4;

/// Below this argument `σ` underflows to an exact zero jet.
const SIGMA_CUTOFF: f64 = 1e-8;

/// `σ(u) = exp(−1/u)` for `u > 0`, identically zero otherwise.
pub fn sigma(u: Jet4) -> Jet4 {
    if u.d[0] <= SIGMA_CUTOFF {
        return Jet4::constant(0.0);
    }
    Jet4::constant(-1.0).div(u).exp()
}

/// Smooth step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, strictly increasing between.
pub fn smooth_step(u: Jet4) -> Jet4 {
    if u.d[0] <= SIGMA_CUTOFF {
        return Jet4::constant(0.0);
    }
    if u.d[0] >= 1.0 - SIGMA_CUTOFF {
        return Jet4::constant(1.0);
    }
    let s = sigma(u);
    let s_flip = sigma(Jet4::constant(1.0).sub(u));
    s.div(s.add(s_flip))
}

/// Bump on `(0, 1)`: `exp(−1/(u(1−u)))` inside, zero outside. Max value
/// `e⁻⁴` at `u = 1/2`.
pub fn bump01(u: Jet4) -> Jet4 {
    if u.d[0] <= SIGMA_CUTOFF || u.d[0] >= 1.0 - SIGMA_CUTOFF {
        return Jet4::constant(0.0);
    }
    sigma(u.mul(Jet4::constant(1.0).sub(u)))
}

/// Wide bump on `(0, 1)`: `exp(−1/(16·u(1−u)))`. Max value `e^{−1/4}` at
/// `u = 1/2`; carries most of its mass on a broad plateau, keeping the
/// peak-to-mass ratio (and so the amplitude of mass-normalized profiles)
/// small.
pub fn bump01_wide(u: Jet4) -> Jet4 {
    if u.d[0] <= SIGMA_CUTOFF || u.d[0] >= 1.0 - SIGMA_CUTOFF {
        return Jet4::constant(0.0);
    }
    sigma(u.mul(Jet4::constant(1.0).sub(u)).scale(16.0))
}

/// Even plateau bump: 1 on `|x| ≤ 1/4`, 0 on `|x| ≥ 1`, smooth between.
pub fn plateau(x: Jet4) -> Jet4 {
    let v = x.d[0];
    if v.abs() <= 0.25 {
        return Jet4::constant(1.0);
    }
    if v >= 0.0 {
        // step argument (1 − x)/(3/4), decreasing from 1 to 0 on [1/4, 1]
        smooth_step(Jet4::constant(1.0).sub(x).scale(4.0 / 3.0))
    } else {
        smooth_step(Jet4::constant(1.0).add(x).scale(4.0 / 3.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_vanishes_with_all_derivatives_at_zero() {
        let j = sigma(Jet4::variable(0.0));
        assert_eq!(j.d, [0.0; 5]);
        let j = sigma(Jet4::variable(-0.5));
        assert_eq!(j.d, [0.0; 5]);
    }

    #[test]
    fn smooth_step_endpoints_are_exact() {
        assert_eq!(smooth_step(Jet4::variable(0.0)).d, [0.0; 5]);
        let one = smooth_step(Jet4::variable(1.0));
        assert_eq!(one.d[0], 1.0);
        assert_eq!(&one.d[1..], &[0.0; 4]);
        assert_eq!(smooth_step(Jet4::variable(1.7)).d[0], 1.0);
    }

    #[test]
    fn smooth_step_is_monotone_and_symmetric() {
        let mut prev = 0.0;
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let v = smooth_step(Jet4::variable(u)).d[0];
            assert!(v >= prev);
            prev = v;
            let w = smooth_step(Jet4::variable(1.0 - u)).d[0];
            assert!((v + w - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn step_derivatives_match_finite_differences() {
        let h = 1e-5;
        for i in 1..20 {
            let u = 0.05 * i as f64;
            if !(h * 4.0..1.0 - h * 4.0).contains(&u) {
                continue;
            }
            let j = smooth_step(Jet4::variable(u));
            let fp = smooth_step(Jet4::variable(u + h)).d[0];
            let fm = smooth_step(Jet4::variable(u - h)).d[0];
            let fd1 = (fp - fm) / (2.0 * h);
            assert!((j.d[1] - fd1).abs() < 1e-6 * j.d[1].abs().max(1.0), "u={u}");
            let fd2 = (fp - 2.0 * j.d[0] + fm) / (h * h);
            assert!((j.d[2] - fd2).abs() < 1e-3 * j.d[2].abs().max(1.0), "u={u}");
        }
    }

    #[test]
    fn bump_is_positive_inside_zero_outside() {
        assert_eq!(bump01(Jet4::variable(0.0)).d, [0.0; 5]);
        assert_eq!(bump01(Jet4::variable(1.0)).d, [0.0; 5]);
        assert!(bump01(Jet4::variable(0.5)).d[0] > 0.0);
        let peak = bump01(Jet4::variable(0.5)).d[0];
        assert!((peak - (-4.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(Jet4::variable(0.0)).d[0], 1.0);
        assert_eq!(plateau(Jet4::variable(0.2)).d[0], 1.0);
        assert_eq!(plateau(Jet4::variable(-0.25)).d[0], 1.0);
        assert_eq!(plateau(Jet4::variable(1.0)).d, [0.0; 5]);
        assert_eq!(plateau(Jet4::variable(-1.3)).d, [0.0; 5]);
        let mid = plateau(Jet4::variable(0.6)).d[0];
        assert!(mid > 0.0 && mid < 1.0);
        // even in x
        let l = plateau(Jet4::variable(-0.6)).d[0];
        assert!((l - mid).abs() < 1e-15);
    }
}
