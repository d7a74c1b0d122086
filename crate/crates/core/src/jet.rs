//! Second-order forward-mode dual numbers in two variables.
//!
//! A [`Jet2`] carries a value, its gradient, and its full Hessian through
//! arithmetic via truncated Taylor products, so first and second derivatives
//! of every built-in surface map are exact to machine precision. No step
//! sizes, no truncation error: identity residuals downstream are limited by
//! quadrature, not differentiation.
//!
//! Curves (one parameter) reuse the same type with the second slot unseeded.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    /// Gradient (d/du, d/dv).
    pub d: [f64; 2],
    /// Symmetric Hessian.
    pub h: [[f64; 2]; 2],
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 { v: 0.0, d: [0.0, 0.0], h: [[0.0, 0.0], [0.0, 0.0]] };

    pub fn constant(v: f64) -> Self {
        Jet2 { v, ..Jet2::ZERO }
    }

    /// Seed the `axis`-th parameter: value `v`, unit first derivative.
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut j = Jet2::constant(v);
        j.d[axis] = 1.0;
        j
    }

    /// Lift a scalar function through the jet: needs the value and the first
    /// two derivatives of the outer function at `self.v`.
    pub fn chain(self, f: f64, fp: f64, fpp: f64) -> Self {
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = fpp * self.d[i] * self.d[j] + fp * self.h[i][j];
            }
        }
        Jet2 { v: f, d: [fp * self.d[0], fp * self.d[1]], h }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sinh(self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh(), self.v.sinh())
    }

    pub fn cosh(self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh(), self.v.cosh())
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn powi(self, p: i32) -> Self {
        match p {
            0 => Jet2::constant(1.0),
            1 => self,
            _ => self.chain(
                self.v.powi(p),
                p as f64 * self.v.powi(p - 1),
                (p * (p - 1)) as f64 * self.v.powi(p - 2),
            ),
        }
    }

    pub fn acos(self) -> Self {
        let t = self.v;
        let s = (1.0 - t * t).sqrt();
        self.chain(t.acos(), -1.0 / s, -t / (s * s * s))
    }

    pub fn acosh(self) -> Self {
        let t = self.v;
        let s = (t * t - 1.0).sqrt();
        self.chain(t.acosh(), 1.0 / s, -t / (s * s * s))
    }

    pub fn asinh(self) -> Self {
        let t = self.v;
        let s = (t * t + 1.0).sqrt();
        self.chain(t.asinh(), 1.0 / s, -t / (s * s * s))
    }

    pub fn atan(self) -> Self {
        let t = self.v;
        let w = 1.0 + t * t;
        self.chain(t.atan(), 1.0 / w, -2.0 * t / (w * w))
    }

    pub fn recip(self) -> Self {
        let w = 1.0 / self.v;
        self.chain(w, -w * w, 2.0 * w * w * w)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let mut out = self;
        out.v += rhs.v;
        for i in 0..2 {
            out.d[i] += rhs.d[i];
            for j in 0..2 {
                out.h[i][j] += rhs.h[i][j];
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        let mut out = self;
        out.v = -out.v;
        for i in 0..2 {
            out.d[i] = -out.d[i];
            for j in 0..2 {
                out.h[i][j] = -out.h[i][j];
            }
        }
        out
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = self.h[i][j] * rhs.v
                    + self.d[i] * rhs.d[j]
                    + self.d[j] * rhs.d[i]
                    + self.v * rhs.h[i][j];
            }
        }
        Jet2 {
            v: self.v * rhs.v,
            d: [
                self.d[0] * rhs.v + self.v * rhs.d[0],
                self.d[1] * rhs.v + self.v * rhs.d[1],
            ],
            h,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: f64) -> Jet2 {
        let mut out = self;
        out.v += rhs;
        out
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: f64) -> Jet2 {
        self + (-rhs)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        let mut out = self;
        out.v *= rhs;
        for i in 0..2 {
            out.d[i] *= rhs;
            for j in 0..2 {
                out.h[i][j] *= rhs;
            }
        }
        out
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        rhs * self
    }
}

impl Add<Jet2> for f64 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        rhs + self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        -rhs + self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let x0 = 0.7;
        let cases: Vec<(fn(Jet2) -> Jet2, fn(f64) -> f64)> = vec![
            (|j| j.sin(), |x| x.sin()),
            (|j| j.cosh(), |x| x.cosh()),
            (|j| j.exp(), |x| x.exp()),
            (|j| j.sqrt(), |x| x.sqrt()),
            (|j| j.acos(), |x| x.acos()),
            (|j| j.asinh(), |x| x.asinh()),
            (|j| j.recip(), |x| 1.0 / x),
        ];
        for (jf, ff) in cases {
            let j = jf(Jet2::variable(x0, 0));
            let (d1, d2) = fd2(ff, x0, 1e-5);
            assert!((j.v - ff(x0)).abs() < 1e-14);
            assert!((j.d[0] - d1).abs() < 1e-8, "d1 {} vs {}", j.d[0], d1);
            assert!((j.h[0][0] - d2).abs() < 1e-5, "d2 {} vs {}", j.h[0][0], d2);
        }
    }

    #[test]
    fn product_rule_cross_terms() {
        // f(u, v) = u^2 * sin(v); check mixed partial d2f/dudv = 2u cos(v).
        let u = Jet2::variable(1.3, 0);
        let v = Jet2::variable(0.4, 1);
        let f = u * u * v.sin();
        let expect = 2.0 * 1.3 * 0.4f64.cos();
        assert!((f.h[0][1] - expect).abs() < 1e-13);
        assert_eq!(f.h[0][1], f.h[1][0]);
    }

    #[test]
    fn division_is_exact() {
        let u = Jet2::variable(2.0, 0);
        let one = (u * u.recip()).v;
        assert!((one - 1.0).abs() < 1e-15);
        let q = (u * u + Jet2::constant(1.0)) / u;
        // f = (u^2+1)/u = u + 1/u; f'' = 2/u^3.
        assert!((q.h[0][0] - 2.0 / 8.0).abs() < 1e-14);
    }
}
