//! Small fixed-order derivative arithmetic.
//!
//! [`Jet2`] carries a value with its first two derivatives and is the
//! currency of [`SmoothFn`](super::SmoothFn). [`Jet4`] carries four
//! derivatives and backs the closed-form perturbation primitives, where a
//! second derivative of the function itself must again be twice
//! differentiable.
//!
//! Entries are derivative *values* (not Taylor coefficients); products use
//! the Leibniz rule with binomial weights.

/// Value with first and second derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub f: f64,
    pub df: f64,
    pub ddf: f64,
}

impl Jet2 {
    pub const fn new(f: f64, df: f64, ddf: f64) -> Self {
        Jet2 { f, df, ddf }
    }

    pub const fn constant(c: f64) -> Self {
        Jet2::new(c, 0.0, 0.0)
    }

    pub fn add(self, o: Jet2) -> Jet2 {
        Jet2::new(self.f + o.f, self.df + o.df, self.ddf + o.ddf)
    }

    pub fn sub(self, o: Jet2) -> Jet2 {
        Jet2::new(self.f - o.f, self.df - o.df, self.ddf - o.ddf)
    }

    pub fn mul(self, o: Jet2) -> Jet2 {
        Jet2::new(
            self.f * o.f,
            self.df * o.f + self.f * o.df,
            self.ddf * o.f + 2.0 * self.df * o.df + self.f * o.ddf,
        )
    }

    pub fn div(self, o: Jet2) -> Jet2 {
        let f = self.f / o.f;
        let df = (self.df - f * o.df) / o.f;
        let ddf = (self.ddf - 2.0 * df * o.df - f * o.ddf) / o.f;
        Jet2::new(f, df, ddf)
    }

    pub fn scale(self, c: f64) -> Jet2 {
        Jet2::new(c * self.f, c * self.df, c * self.ddf)
    }

    pub fn is_finite(self) -> bool {
        self.f.is_finite() && self.df.is_finite() && self.ddf.is_finite()
    }
}

/// Value with derivatives up to fourth order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet4 {
    /// `d[k]` is the k-th derivative value.
    pub d: [f64; 5],
}

/// Binomial coefficients C(k, j) for k ≤ 4.
const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

impl Jet4 {
    pub const fn new(d: [f64; 5]) -> Self {
        Jet4 { d }
    }

    pub const fn constant(c: f64) -> Self {
        Jet4::new([c, 0.0, 0.0, 0.0, 0.0])
    }

    /// The identity jet `u ↦ u` evaluated at `u`.
    pub const fn variable(u: f64) -> Self {
        Jet4::new([u, 1.0, 0.0, 0.0, 0.0])
    }

    /// Jet of `t ↦ a·t + b` evaluated at `t`.
    pub fn affine(t: f64, a: f64, b: f64) -> Self {
        Jet4::new([a * t + b, a, 0.0, 0.0, 0.0])
    }

    pub fn jet2(self) -> Jet2 {
        Jet2::new(self.d[0], self.d[1], self.d[2])
    }

    pub fn add(self, o: Jet4) -> Jet4 {
        let mut d = [0.0; 5];
        for k in 0..5 {
            d[k] = self.d[k] + o.d[k];
        }
        Jet4::new(d)
    }

    pub fn sub(self, o: Jet4) -> Jet4 {
        let mut d = [0.0; 5];
        for k in 0..5 {
            d[k] = self.d[k] - o.d[k];
        }
        Jet4::new(d)
    }

    pub fn scale(self, c: f64) -> Jet4 {
        let mut d = self.d;
        for v in &mut d {
            *v *= c;
        }
        Jet4::new(d)
    }

    pub fn mul(self, o: Jet4) -> Jet4 {
        let mut d = [0.0; 5];
        for k in 0..5 {
            let mut s = 0.0;
            for j in 0..=k {
                s += BINOM[k][j] * self.d[j] * o.d[k - j];
            }
            d[k] = s;
        }
        Jet4::new(d)
    }

    /// Leibniz back-substitution for `q = self / o`.
    pub fn div(self, o: Jet4) -> Jet4 {
        let mut q = [0.0; 5];
        for k in 0..5 {
            let mut s = self.d[k];
            for j in 0..k {
                s -= BINOM[k][j] * q[j] * o.d[k - j];
            }
            q[k] = s / o.d[0];
        }
        Jet4::new(q)
    }

    /// `exp(u)` via the recurrence `y' = u'·y`.
    pub fn exp(self) -> Jet4 {
        let mut y = [0.0; 5];
        y[0] = self.d[0].exp();
        // y^{(k)} = (u' y)^{(k-1)} = Σ C(k-1, j) u^{(j+1)} y^{(k-1-j)}
        for k in 1..5 {
            let mut s = 0.0;
            for j in 0..k {
                s += BINOM[k - 1][j] * self.d[j + 1] * y[k - 1 - j];
            }
            y[k] = s;
        }
        Jet4::new(y)
    }

    /// `sin(u)` and `cos(u)` as a coupled pair.
    pub fn sin_cos(self) -> (Jet4, Jet4) {
        let mut s = [0.0; 5];
        let mut c = [0.0; 5];
        s[0] = self.d[0].sin();
        c[0] = self.d[0].cos();
        for k in 1..5 {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 0..k {
                ds += BINOM[k - 1][j] * self.d[j + 1] * c[k - 1 - j];
                dc -= BINOM[k - 1][j] * self.d[j + 1] * s[k - 1 - j];
            }
            s[k] = ds;
            c[k] = dc;
        }
        (Jet4::new(s), Jet4::new(c))
    }
}
