//! Deterministic sampling of symplectic targets near a base map.
//!
//! A target is drawn as a uniform chart-coordinate offset inside the
//! requested radius and completed back to a group element: the chart fixes
//! `A`, the symmetric parts of `A'` and `B`; the antisymmetric parts are
//! solved from the group conditions `AᵀA'` and `BᵀB'` symmetric, and `B'`
//! is recovered from `AᵀB' − A'ᵀB = I`.

use franks::error::{Error, Result};
use franks::highdim::{sp_chart_dim, sp_coordinates};
use franks::numkit::SymplecticMap;
use nalgebra::{DMatrix, DVector};

use crate::rng::XorShift64Star;

/// Maximum symplectic defect accepted for a completed target.
pub const TARGET_DEFECT: f64 = 1e-10;

/// Draw `count` symplectic maps whose chart coordinates lie within
/// `radius` of the base map's, deterministically from `seed`.
pub fn seeded_targets(
    seed: u64,
    count: usize,
    radius: f64,
    base: &SymplecticMap,
) -> Result<Vec<SymplecticMap>> {
    let mut rng = XorShift64Star::new(seed);
    let dim = sp_chart_dim(base.n());
    let base_coords = sp_coordinates(base);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        if radius == 0.0 {
            out.push(base.clone());
            continue;
        }
        // Direction uniform on the sphere by rejection, length by the
        // ball-volume law.
        let dir = loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.range(-1.0, 1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-3 && norm <= 1.0 {
                break DVector::from_vec(v) / norm;
            }
        };
        let len = radius * rng.next_f64().powf(1.0 / dim as f64);
        let coords = &base_coords + dir * len;
        let target = complete_from_chart(&coords, base)?;
        if target.defect() > TARGET_DEFECT {
            return Err(Error::ConstraintViolation {
                family: "target",
                constraint: "symplectic defect",
                detail: target.defect(),
            });
        }
        out.push(target);
    }
    Ok(out)
}

/// Rebuild a symplectic map with the given chart coordinates, taking the
/// unconstrained degrees of freedom from `base`.
pub fn complete_from_chart(coords: &DVector<f64>, base: &SymplecticMap) -> Result<SymplecticMap> {
    let n = base.n();
    assert_eq!(coords.len(), sp_chart_dim(n));
    let m_sym = n * (n + 1) / 2;

    // A is fully determined: symmetric part from block 2, antisymmetric
    // from block 4.
    let mut a = DMatrix::zeros(n, n);
    {
        let mut idx = m_sym; // block 2 offset
        for i in 0..n {
            for j in i..n {
                let s = coords[idx];
                idx += 1;
                if i == j {
                    a[(i, i)] = s / 2.0;
                } else {
                    a[(i, j)] = s / 2.0;
                    a[(j, i)] = s / 2.0;
                }
            }
        }
        let mut idx = 3 * m_sym;
        for i in 0..n {
            for j in i + 1..n {
                let w = coords[idx] / 2.0;
                idx += 1;
                a[(i, j)] += w;
                a[(j, i)] -= w;
            }
        }
    }

    let sym_from_block = |block: usize| {
        let mut m = DMatrix::zeros(n, n);
        let mut idx = block * m_sym;
        for i in 0..n {
            for j in i..n {
                let s = coords[idx];
                idx += 1;
                if i == j {
                    m[(i, i)] = s / 2.0;
                } else {
                    m[(i, j)] = s / 2.0;
                    m[(j, i)] = s / 2.0;
                }
            }
        }
        m
    };
    let ap_sym = sym_from_block(0);
    let b_sym = sym_from_block(2);

    if n == 1 {
        // b' recovered from the unit determinant.
        let (a11, ap11, b11) = (a[(0, 0)], ap_sym[(0, 0)], b_sym[(0, 0)]);
        if a11.abs() < 1e-12 {
            return Err(Error::SingularSolution { t: 0.0, value: a11 });
        }
        let bp = (1.0 + ap11 * b11) / a11;
        return SymplecticMap::from_matrix(DMatrix::from_row_slice(
            2,
            2,
            &[a11, b11, ap11, bp],
        ));
    }

    let anti_dim = n * (n - 1) / 2;
    let anti_basis: Vec<DMatrix<f64>> = {
        let mut v = Vec::with_capacity(anti_dim);
        for i in 0..n {
            for j in i + 1..n {
                let mut k = DMatrix::zeros(n, n);
                k[(i, j)] = 1.0;
                k[(j, i)] = -1.0;
                v.push(k);
            }
        }
        v
    };
    let anti_vec = |m: &DMatrix<f64>| -> DVector<f64> {
        let mut v = DVector::zeros(anti_dim);
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                v[idx] = 0.5 * (m[(i, j)] - m[(j, i)]);
                idx += 1;
            }
        }
        v
    };
    let assemble = |omega: &DVector<f64>| -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for (k, basis) in anti_basis.iter().enumerate() {
            m += basis * omega[k];
        }
        m
    };

    // A' antisymmetric part: linear solve for antisym(Aᵀ A') = 0.
    let mut sys = DMatrix::zeros(anti_dim, anti_dim);
    for (k, basis) in anti_basis.iter().enumerate() {
        let col = anti_vec(&(a.transpose() * basis));
        sys.set_column(k, &col);
    }
    let rhs = -anti_vec(&(a.transpose() * &ap_sym));
    let omega_ap = sys
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSolution { t: 0.0, value: 0.0 })?;
    let ap = &ap_sym + assemble(&omega_ap);

    // B antisymmetric part: Newton on antisym(Bᵀ B') = 0 with
    // B' = A⁻ᵀ (I + A'ᵀ B), warm-started from the base map.
    let a_inv_t = a
        .transpose()
        .try_inverse()
        .ok_or(Error::SingularSolution { t: 0.0, value: 0.0 })?;
    let b_prime_of = |b: &DMatrix<f64>| &a_inv_t * (DMatrix::identity(n, n) + ap.transpose() * b);
    let residual = |omega: &DVector<f64>| -> DVector<f64> {
        let b = &b_sym + assemble(omega);
        anti_vec(&(b.transpose() * b_prime_of(&b)))
    };
    let mut omega_b = anti_vec(&base.block_b());
    for _ in 0..32 {
        let f = residual(&omega_b);
        if f.amax() < 1e-14 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::zeros(anti_dim, anti_dim);
        for k in 0..anti_dim {
            let mut op = omega_b.clone();
            op[k] += h;
            jac.set_column(k, &((residual(&op) - &f) / h));
        }
        let step = jac.lu().solve(&(-&f)).ok_or(Error::SingularSolution {
            t: 0.0,
            value: 0.0,
        })?;
        omega_b += step;
    }
    let b = &b_sym + assemble(&omega_b);
    let bp = b_prime_of(&b);

    SymplecticMap::from_blocks(&a, &b, &ap, &bp)
}
