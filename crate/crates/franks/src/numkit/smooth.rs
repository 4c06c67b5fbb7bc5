//! Twice-differentiable functions on an interval, with queryable
//! value/first/second derivative.
//!
//! A [`SmoothFn`] is the common currency for curvatures `k(t)`, perturbation
//! profiles `ψ(t)`, bump factors `φ(x)` and solution components `a(t)`,
//! `b(t)`. Algebraic combinations propagate derivatives by the exact
//! calculus rules; closed-form constructors additionally expose a 4-jet so
//! that second derivatives of combinations remain twice differentiable.

use std::sync::Arc;

use super::jet::{Jet2, Jet4};

/// How a function was produced. Informational only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    OdeSolution,
    AlgebraicCombination,
}

trait SmoothImpl: Send + Sync {
    fn jet2(&self, t: f64) -> Jet2;
    /// 4-jet when the representation supports it.
    fn jet4(&self, t: f64) -> Option<Jet4> {
        let _ = t;
        None
    }
}

struct ClosedForm<F: Fn(f64) -> Jet4 + Send + Sync>(F);

impl<F: Fn(f64) -> Jet4 + Send + Sync> SmoothImpl for ClosedForm<F> {
    fn jet2(&self, t: f64) -> Jet2 {
        (self.0)(t).jet2()
    }
    fn jet4(&self, t: f64) -> Option<Jet4> {
        Some((self.0)(t))
    }
}

struct FromJet2<F: Fn(f64) -> Jet2 + Send + Sync>(F);

impl<F: Fn(f64) -> Jet2 + Send + Sync> SmoothImpl for FromJet2<F> {
    fn jet2(&self, t: f64) -> Jet2 {
        (self.0)(t)
    }
}

enum Combi {
    Add(SmoothFn, SmoothFn),
    Sub(SmoothFn, SmoothFn),
    Mul(SmoothFn, SmoothFn),
    Div(SmoothFn, SmoothFn),
    Scale(SmoothFn, f64),
}

impl SmoothImpl for Combi {
    fn jet2(&self, t: f64) -> Jet2 {
        match self {
            Combi::Add(a, b) => a.jet2(t).add(b.jet2(t)),
            Combi::Sub(a, b) => a.jet2(t).sub(b.jet2(t)),
            Combi::Mul(a, b) => a.jet2(t).mul(b.jet2(t)),
            Combi::Div(a, b) => a.jet2(t).div(b.jet2(t)),
            Combi::Scale(a, c) => a.jet2(t).scale(*c),
        }
    }

    fn jet4(&self, t: f64) -> Option<Jet4> {
        match self {
            Combi::Add(a, b) => Some(a.jet4(t)?.add(b.jet4(t)?)),
            Combi::Sub(a, b) => Some(a.jet4(t)?.sub(b.jet4(t)?)),
            Combi::Mul(a, b) => Some(a.jet4(t)?.mul(b.jet4(t)?)),
            Combi::Div(a, b) => Some(a.jet4(t)?.div(b.jet4(t)?)),
            Combi::Scale(a, c) => Some(a.jet4(t)?.scale(*c)),
        }
    }
}

/// A twice-differentiable real function on a closed interval.
#[derive(Clone)]
pub struct SmoothFn {
    domain: (f64, f64),
    provenance: Provenance,
    imp: Arc<dyn SmoothImpl>,
}

impl std::fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothFn")
            .field("domain", &self.domain)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl SmoothFn {
    /// Build from a closure returning a full 4-jet.
    pub fn from_jet4<F>(domain: (f64, f64), f: F) -> SmoothFn
    where
        F: Fn(f64) -> Jet4 + Send + Sync + 'static,
    {
        SmoothFn {
            domain,
            provenance: Provenance::ClosedForm,
            imp: Arc::new(ClosedForm(f)),
        }
    }

    /// Build from a closure returning value and two derivatives.
    pub fn from_jet2<F>(domain: (f64, f64), provenance: Provenance, f: F) -> SmoothFn
    where
        F: Fn(f64) -> Jet2 + Send + Sync + 'static,
    {
        SmoothFn {
            domain,
            provenance,
            imp: Arc::new(FromJet2(f)),
        }
    }

    pub fn constant(domain: (f64, f64), c: f64) -> SmoothFn {
        SmoothFn::from_jet4(domain, move |_| Jet4::constant(c))
    }

    pub fn zero(domain: (f64, f64)) -> SmoothFn {
        SmoothFn::constant(domain, 0.0)
    }

    /// `c·sin(ω t + φ)`.
    pub fn sinusoid(domain: (f64, f64), c: f64, omega: f64, phase: f64) -> SmoothFn {
        SmoothFn::from_jet4(domain, move |t| {
            let (s, _) = Jet4::affine(t, omega, phase).sin_cos();
            s.scale(c)
        })
    }

    /// `c·cos(ω t + φ)`.
    pub fn cosine(domain: (f64, f64), c: f64, omega: f64, phase: f64) -> SmoothFn {
        SmoothFn::from_jet4(domain, move |t| {
            let (_, co) = Jet4::affine(t, omega, phase).sin_cos();
            co.scale(c)
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Value with first and second derivative.
    pub fn jet2(&self, t: f64) -> Jet2 {
        self.imp.jet2(t)
    }

    /// Full 4-jet, when the underlying representation carries one.
    pub fn jet4(&self, t: f64) -> Option<Jet4> {
        self.imp.jet4(t)
    }

    /// `(f(t), f'(t), f''(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let j = self.jet2(t);
        (j.f, j.df, j.ddf)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet2(t).f
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.jet2(t).df
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        self.jet2(t).ddf
    }

    fn combine(self, other: SmoothFn, f: impl FnOnce(SmoothFn, SmoothFn) -> Combi) -> SmoothFn {
        let domain = self.domain;
        SmoothFn {
            domain,
            provenance: Provenance::AlgebraicCombination,
            imp: Arc::new(f(self, other)),
        }
    }

    pub fn add(&self, other: &SmoothFn) -> SmoothFn {
        self.clone().combine(other.clone(), Combi::Add)
    }

    pub fn sub(&self, other: &SmoothFn) -> SmoothFn {
        self.clone().combine(other.clone(), Combi::Sub)
    }

    pub fn mul(&self, other: &SmoothFn) -> SmoothFn {
        self.clone().combine(other.clone(), Combi::Mul)
    }

    pub fn div(&self, other: &SmoothFn) -> SmoothFn {
        self.clone().combine(other.clone(), Combi::Div)
    }

    pub fn scale(&self, c: f64) -> SmoothFn {
        let domain = self.domain;
        SmoothFn {
            domain,
            provenance: Provenance::AlgebraicCombination,
            imp: Arc::new(Combi::Scale(self.clone(), c)),
        }
    }

    /// Maximum absolute value over a uniform grid.
    pub fn sup_on_grid(&self, points: usize) -> f64 {
        let (t0, t1) = self.domain;
        let n = points.max(2);
        let mut m: f64 = 0.0;
        for i in 0..n {
            let t = t0 + (t1 - t0) * i as f64 / (n - 1) as f64;
            m = m.max(self.value(t).abs());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central-difference consistency required of every representation:
    /// f' and f'' from `eval` must agree with finite differences of f.
    fn assert_fd_consistent(f: &SmoothFn, samples: usize) {
        let (t0, t1) = f.domain();
        let h = 1e-4;
        let margin = 10.0 * h;
        for i in 0..samples {
            let t = t0 + margin + (t1 - t0 - 2.0 * margin) * i as f64 / (samples - 1) as f64;
            let (v, d1, d2) = f.eval(t);
            let fp = f.value(t + h);
            let fm = f.value(t - h);
            let fd1 = (fp - fm) / (2.0 * h);
            let fd2 = (fp - 2.0 * v + fm) / (h * h);
            let scale1 = d1.abs().max(1.0);
            let scale2 = d2.abs().max(1.0);
            assert!(
                (d1 - fd1).abs() / scale1 <= 1e-5,
                "first derivative off at t={t}: {d1} vs fd {fd1}"
            );
            assert!(
                (d2 - fd2).abs() / scale2 <= 1e-5,
                "second derivative off at t={t}: {d2} vs fd {fd2}"
            );
        }
    }

    #[test]
    fn closed_forms_are_fd_consistent() {
        let s = SmoothFn::sinusoid((0.0, 1.0), 2.0, 2.0 * std::f64::consts::PI, 0.0);
        assert_fd_consistent(&s, 33);
        let c = SmoothFn::cosine((0.0, 1.0), 1.0, 3.0, 0.5);
        assert_fd_consistent(&c, 33);
    }

    #[test]
    fn combinations_are_fd_consistent_and_exact() {
        let s = SmoothFn::sinusoid((0.0, 1.0), 1.0, 1.0, 0.0);
        let c = SmoothFn::cosine((0.0, 1.0), 1.0, 1.0, 0.0);
        let prod = s.mul(&c);
        assert_fd_consistent(&prod, 17);
        // sin·cos = sin(2t)/2 with derivative cos(2t)·2/2
        let t = 0.4;
        let j = prod.jet2(t);
        assert!((j.f - (2.0f64 * t).sin() / 2.0).abs() < 1e-14);
        assert!((j.df - (2.0f64 * t).cos()).abs() < 1e-14);
        assert_eq!(prod.provenance(), Provenance::AlgebraicCombination);

        let s1 = SmoothFn::sinusoid((0.0, 1.0), 1.0, 1.0, 0.0);
        let c1 = SmoothFn::cosine((0.0, 1.0), 1.0, 1.0, 0.0);
        let q = s1.div(&c1); // tan(t)
        let jq = q.jet2(0.3);
        let tan: f64 = (0.3f64).tan();
        assert!((jq.f - tan).abs() < 1e-14);
        assert!((jq.df - (1.0 + tan * tan)).abs() < 1e-13);
    }

    #[test]
    fn scale_is_linear() {
        let s = SmoothFn::sinusoid((0.0, 1.0), 1.0, 5.0, 0.0);
        let s3 = s.scale(3.0);
        for i in 0..10 {
            let t = 0.05 + 0.1 * i as f64;
            assert!((s3.value(t) - 3.0 * s.value(t)).abs() < 1e-15);
        }
    }
}
