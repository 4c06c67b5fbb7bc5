//! Cross-module conservation and consistency properties on randomized
//! inputs.

use franks::highdim::eigen::symmetric_eigen;
use franks::jacobi::{
    dp_from_curvature, fundamental_matrix_on, fundamental_scalar, reduction_of_order,
    CurvatureProfile,
};
use franks::numkit::{grid_norms, max_col_sum, quad, MatrixCurve, SmoothFn, SymplecticMap};
use franks::surface::{PsiFamily, SurfaceMechanism};
use nalgebra::DMatrix;
use proptest::prelude::*;

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn harmonic_profile(c0: f64, c1: f64, c2: f64, p1: f64, p2: f64) -> SmoothFn {
    SmoothFn::constant((0.0, 1.0), c0)
        .add(&SmoothFn::sinusoid((0.0, 1.0), c1, TAU, p1))
        .add(&SmoothFn::sinusoid((0.0, 1.0), c2, 2.0 * TAU, p2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wronskian_is_conserved(
        c0 in -4.0f64..4.0,
        c1 in -3.0f64..3.0,
        c2 in -3.0f64..3.0,
        p1 in 0.0f64..TAU,
        p2 in 0.0f64..TAU,
    ) {
        let k = harmonic_profile(c0, c1, c2, p1, p2);
        let f = fundamental_scalar(&k).unwrap();
        prop_assert!(f.wronskian_defect() <= 1e-8);
    }

    #[test]
    fn matrix_flow_is_symplectic(
        d1 in -8.0f64..8.0,
        d2 in -8.0f64..8.0,
        off in -4.0f64..4.0,
    ) {
        let m = DMatrix::from_row_slice(2, 2, &[d1, off, off, d2]);
        let r = MatrixCurve::constant((0.0, 1.0), &m);
        let dp = dp_from_curvature(&CurvatureProfile::Matrix(r.clone()), 0.0, 1.0).unwrap();
        prop_assert!(dp.defect() <= 1e-8, "defect {}", dp.defect());
        let f = fundamental_matrix_on(&r, (0.0, 1.0)).unwrap();
        prop_assert!(f.wronskian_defect() <= 1e-8);
        prop_assert!(f.lagrangian_defect() <= 1e-9);
    }

    #[test]
    fn composition_identity_holds(
        c0 in -3.0f64..3.0,
        c1 in -2.0f64..2.0,
        split in 0.1f64..0.9,
    ) {
        let k = harmonic_profile(c0, c1, 0.0, 0.0, 0.0);
        let p = CurvatureProfile::Scalar(k);
        let full = dp_from_curvature(&p, 0.0, 1.0).unwrap();
        let left = dp_from_curvature(&p, 0.0, split).unwrap();
        let right = dp_from_curvature(&p, split, 1.0).unwrap();
        prop_assert!(right.compose(&left).unwrap().distance(&full) <= 1e-7);
    }

    #[test]
    fn near_symplectic_maps_compose_tightly(
        a in 0.5f64..2.0,
        b in -1.0f64..1.0,
        c in -1.0f64..1.0,
        s in -1.0f64..1.0,
    ) {
        // Exactly symplectic 2×2 factors (unit determinant by construction).
        let m1 = SymplecticMap::from_matrix(DMatrix::from_row_slice(
            2, 2, &[a, b, c, (1.0 + b * c) / a],
        )).unwrap();
        let m2 = SymplecticMap::from_matrix(DMatrix::from_row_slice(
            2, 2, &[1.0, s, 0.0, 1.0],
        )).unwrap();
        prop_assert!(m1.defect() <= 1e-10);
        prop_assert!(m2.compose(&m1).unwrap().defect() <= 1e-8);
    }

    #[test]
    fn grid_norms_are_monotone(
        amp in 0.1f64..3.0,
        omega in 1.0f64..30.0,
    ) {
        let f = SmoothFn::sinusoid((0.0, 1.0), amp, omega, 0.3);
        let n = grid_norms(&f, 4097);
        prop_assert!(n.c0 <= n.c1 && n.c1 <= n.c2);
        let coarse = grid_norms(&f, 129);
        prop_assert!(coarse.c0 <= n.c0 + 1e-6);
        prop_assert!(coarse.c2 <= n.c2 + 1e-6);
    }

    #[test]
    fn reduction_of_order_matches_ode_solution(
        c0 in -2.0f64..2.0,
        c1 in -1.5f64..1.5,
        p1 in 0.0f64..TAU,
    ) {
        let k = harmonic_profile(c0, c1, 0.0, p1, 0.0);
        let f = fundamental_scalar(&k).unwrap();
        let (lo, _) = f.a.range();
        prop_assume!(lo >= 0.1);
        let red = reduction_of_order(&f.a).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            prop_assert!((red.value(t) - f.b.value(t)).abs() <= 1e-7);
        }
    }
}

#[test]
fn perturbation_directions_are_independent() {
    // Gram matrix of the three curvature increments in L²: the condition
    // number stays far from degeneracy.
    let k = SmoothFn::sinusoid((0.0, 1.0), 1.0, TAU, 0.0);
    let mech = SurfaceMechanism::new(&k, 0.01).unwrap();
    let deltas: Vec<SmoothFn> = PsiFamily::ALL
        .iter()
        .map(|&fam| mech.perturbed(fam).sub(&k))
        .collect();
    let mut gram = DMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            gram[(i, j)] = quad::simpson(
                |t| deltas[i].value(t) * deltas[j].value(t),
                0.0,
                1.0,
                4096,
            );
        }
    }
    let (lambdas, _) = symmetric_eigen(&gram);
    let cond = lambdas[2] / lambdas[0].max(1e-300);
    assert!(cond > 0.0 && cond < 1e6, "condition number {cond}");
}

#[test]
fn entry_isolation_across_curvature_corpus() {
    // The three families move their designated chart entries and leave the
    // earlier ones fixed, for every profile in the named corpus.
    let corpus: Vec<(&str, SmoothFn)> = vec![
        ("zero", SmoothFn::zero((0.0, 1.0))),
        ("one", SmoothFn::constant((0.0, 1.0), 1.0)),
        ("minus-one", SmoothFn::constant((0.0, 1.0), -1.0)),
        ("sin", SmoothFn::sinusoid((0.0, 1.0), 1.0, TAU, 0.0)),
        ("cos", SmoothFn::cosine((0.0, 1.0), 1.0, TAU, 0.0)),
    ];
    for (name, k) in &corpus {
        let eps = 0.01;
        let mech = SurfaceMechanism::new(k, eps).unwrap();
        let base = mech.base_dp().matrix().clone();
        let (a_lb, a_ub) = mech.a_bounds();

        let m1 = mech.phi([1.0, 0.0, 0.0]).unwrap();
        let shift = (m1.matrix()[(1, 0)] - base[(1, 0)]).abs();
        assert!((shift - eps).abs() <= 1e-6, "{name}: slope shift {shift}");

        let m2 = mech.phi([0.0, 1.0, 0.0]).unwrap();
        let shift = (m2.matrix()[(0, 0)] - base[(0, 0)]).abs();
        assert!((shift - eps).abs() <= 1e-6, "{name}: value shift {shift}");
        assert!((m2.matrix()[(1, 0)] - base[(1, 0)]).abs() <= 1e-6, "{name}");

        let m3 = mech.phi([0.0, 0.0, 1.0]).unwrap();
        assert!((m3.matrix()[(0, 0)] - base[(0, 0)]).abs() <= 1e-6, "{name}");
        assert!((m3.matrix()[(1, 0)] - base[(1, 0)]).abs() <= 1e-6, "{name}");
        let b_shift = m3.matrix()[(0, 1)] - base[(0, 1)];
        let lower = 0.95 * eps * a_lb / a_ub.powi(3);
        assert!(b_shift >= lower, "{name}: b shift {b_shift} < {lower}");
    }
}

#[test]
fn symplectic_defect_reduces_to_determinant_in_dim_one() {
    let m = SymplecticMap::from_matrix(DMatrix::from_row_slice(2, 2, &[1.3, 0.4, 0.2, 0.9]))
        .unwrap();
    let det: f64 = 1.3 * 0.9 - 0.4 * 0.2;
    assert!((m.defect() - (det - 1.0).abs()).abs() < 1e-14);
}

#[test]
fn max_col_sum_is_submultiplicative() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 0.5]);
    let b = DMatrix::from_row_slice(2, 2, &[0.3, 1.5, -0.7, 2.0]);
    assert!(max_col_sum(&(&a * &b)) <= max_col_sum(&a) * max_col_sum(&b) + 1e-12);
}

#[test]
fn jacobi_round_trip_over_random_corpus() {
    // Declaring ã = a − ψ a Jacobi field and re-solving reproduces ã on a
    // corpus of ten admissible profiles with ‖k‖ ≤ 4.
    use franks::jacobi::solve_jacobi_scalar;
    use franks::surface::{build_psi, perturbed_curvature, PsiSpec};

    let mut collected = 0;
    let mut state: u64 = 0x1234_5678_9abc_def0;
    let mut next = move || {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        (state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
    };
    while collected < 10 {
        let c0 = 4.0 * (2.0 * next() - 1.0);
        let c1 = 2.0 * (2.0 * next() - 1.0);
        let p1 = TAU * next();
        let scale = 4.0 / (c0.abs() + c1.abs()).max(1.0);
        let k = SmoothFn::constant((0.0, 1.0), c0 * scale).add(&SmoothFn::sinusoid(
            (0.0, 1.0),
            c1 * scale,
            TAU,
            p1,
        ));
        let a = match solve_jacobi_scalar(&k, 1.0, 0.0) {
            Ok(a) => a,
            Err(_) => continue,
        };
        if a.range().0 < 0.15 {
            continue;
        }
        collected += 1;
        for fam in PsiFamily::ALL {
            let psi = build_psi(&PsiSpec::new(fam, 0.02)).unwrap();
            let kt = perturbed_curvature(&a, &psi).unwrap();
            let resolved = solve_jacobi_scalar(&kt, 1.0, 0.0).unwrap();
            for i in 0..=32 {
                let t = i as f64 / 32.0;
                let expect = a.value(t) - psi.value(t);
                assert!(
                    (resolved.value(t) - expect).abs() <= 1e-7,
                    "{} profile {collected} at t={t}",
                    fam.name()
                );
            }
        }
    }
}

#[test]
fn window_shifted_perturbations_are_conjugate() {
    // For a constant profile, placing the same local increment at two
    // different window starts changes the time-1 map by conjugation with
    // the transport over the shift.
    use franks::highdim::{
        delta_r_from_psi, symmetric_slot_curve, PerturbationScheme, SchemeKind,
    };
    use franks::jacobi::{dp_from_curvature_steps, riccati_transport};

    let r0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let r = MatrixCurve::constant((0.0, 1.0), &r0);
    let (eps, delta, d) = (0.01, 0.1f64, 0.2);
    let scheme = PerturbationScheme::new(SchemeKind::III, 0, 1, eps, delta, d);
    let u = riccati_transport(&r.shifted(0.0, d), &DMatrix::zeros(2, 2), (0.0, d)).unwrap();
    let slot = symmetric_slot_curve(2, 0, 1, &scheme.scalar_profile());
    let delta_r = delta_r_from_psi(&u, &slot);

    let global = |t0: f64| {
        let delta_r = delta_r.clone();
        let r = r.clone();
        let curve = MatrixCurve::from_fn(2, (0.0, 1.0), move |i, j| {
            let base = r.entry(i, j).clone();
            let inc = delta_r.entry(i, j).clone();
            SmoothFn::from_jet2((0.0, 1.0), franks::numkit::Provenance::AlgebraicCombination,
                move |t| {
                    let mut jet = base.jet2(t);
                    if t >= t0 && t <= t0 + 0.2 {
                        jet = jet.add(inc.jet2(t - t0));
                    }
                    jet
                })
        });
        dp_from_curvature_steps(&CurvatureProfile::Matrix(curve), 0.0, 1.0, 8192).unwrap()
    };
    let g1 = global(0.1);
    let g2 = global(0.3);
    let shift = dp_from_curvature(&CurvatureProfile::Matrix(r.clone()), 0.0, 0.2).unwrap();
    let shift_inv = SymplecticMap::from_matrix(shift.matrix().clone().try_inverse().unwrap())
        .unwrap();
    let conjugated = shift_inv.compose(&g1).unwrap().compose(&shift).unwrap();
    assert!(
        g2.distance(&conjugated) <= 1e-6,
        "distance {}",
        g2.distance(&conjugated)
    );
}

#[test]
fn four_dimensional_flow_stays_symplectic() {
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.3, -0.2, 0.1, //
            0.3, -1.0, 0.4, 0.0, //
            -0.2, 0.4, 0.5, -0.3, //
            0.1, 0.0, -0.3, -0.5,
        ],
    );
    let r = MatrixCurve::constant((0.0, 1.0), &m);
    let dp = dp_from_curvature(&CurvatureProfile::Matrix(r.clone()), 0.0, 1.0).unwrap();
    assert!(dp.defect() <= 1e-8, "defect {}", dp.defect());
    let f = fundamental_matrix_on(&r, (0.0, 1.0)).unwrap();
    assert!(f.wronskian_defect() <= 1e-8);
}
