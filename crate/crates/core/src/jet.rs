//! Forward-mode differentiation for the closed-form conformal factors.
//!
//! Every metric family is written once, generically over [`Scalar`]; evaluating
//! it with `f64` gives the value, with [`Jet1`] the value and gradient, and with
//! [`Jet2`] the value, gradient and Hessian. Derivatives are exact up to
//! rounding.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest ambient dimension supported by the jets.
pub const MAX_DIM: usize = 7;

pub trait Scalar:
    Copy
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(c: f64, dim: usize) -> Self;
    fn value(&self) -> f64;
    /// Compose with a scalar function given its value and first two derivatives
    /// at `self.value()`.
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self;

    fn powf(self, e: f64) -> Self {
        let v = self.value();
        let p2 = v.powf(e - 2.0);
        let p1 = p2 * v;
        let p0 = p1 * v;
        self.chain(p0, e * p1, e * (e - 1.0) * p2)
    }
    fn sqrt(self) -> Self {
        let s = self.value().sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }
    fn exp(self) -> Self {
        let e = self.value().exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let v = self.value();
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn recip(self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
    fn square(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn constant(c: f64, _dim: usize) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn chain(self, f: f64, _df: f64, _d2f: f64) -> Self {
        f
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// Value and gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub g: [f64; MAX_DIM],
    pub n: usize,
}

/// Value, gradient and Hessian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; MAX_DIM],
    pub h: [[f64; MAX_DIM]; MAX_DIM],
    pub n: usize,
}

impl Jet1 {
    pub fn variable(i: usize, value: f64, dim: usize) -> Self {
        let mut g = [0.0; MAX_DIM];
        g[i] = 1.0;
        Self { v: value, g, n: dim }
    }
    pub fn point(x: &[f64]) -> Vec<Self> {
        (0..x.len()).map(|i| Self::variable(i, x[i], x.len())).collect()
    }
}

impl Jet2 {
    pub fn variable(i: usize, value: f64, dim: usize) -> Self {
        let mut g = [0.0; MAX_DIM];
        g[i] = 1.0;
        Self { v: value, g, h: [[0.0; MAX_DIM]; MAX_DIM], n: dim }
    }
    pub fn point(x: &[f64]) -> Vec<Self> {
        (0..x.len()).map(|i| Self::variable(i, x[i], x.len())).collect()
    }
    pub fn laplacian(&self) -> f64 {
        (0..self.n).map(|i| self.h[i][i]).sum()
    }
    pub fn grad_norm2(&self) -> f64 {
        self.g[..self.n].iter().map(|a| a * a).sum()
    }
}

impl Scalar for Jet1 {
    fn constant(c: f64, dim: usize) -> Self {
        Self { v: c, g: [0.0; MAX_DIM], n: dim }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn chain(self, f: f64, df: f64, _d2f: f64) -> Self {
        let mut g = [0.0; MAX_DIM];
        for i in 0..self.n {
            g[i] = df * self.g[i];
        }
        Self { v: f, g, n: self.n }
    }
}

impl Scalar for Jet2 {
    fn constant(c: f64, dim: usize) -> Self {
        Self { v: c, g: [0.0; MAX_DIM], h: [[0.0; MAX_DIM]; MAX_DIM], n: dim }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        let n = self.n;
        let mut out = Self::constant(f, n);
        for i in 0..n {
            out.g[i] = df * self.g[i];
            for j in 0..=i {
                let hij = df * self.h[i][j] + d2f * self.g[i] * self.g[j];
                out.h[i][j] = hij;
                out.h[j][i] = hij;
            }
        }
        out
    }
}

macro_rules! scalar_rhs_ops {
    ($t:ty) => {
        impl Add<f64> for $t {
            type Output = $t;
            fn add(mut self, c: f64) -> $t {
                self.v += c;
                self
            }
        }
        impl Sub<f64> for $t {
            type Output = $t;
            fn sub(mut self, c: f64) -> $t {
                self.v -= c;
                self
            }
        }
        impl Div<f64> for $t {
            type Output = $t;
            fn div(self, c: f64) -> $t {
                self * (1.0 / c)
            }
        }
        impl Div for $t {
            type Output = $t;
            fn div(self, rhs: $t) -> $t {
                self * rhs.recip()
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                self + (-rhs)
            }
        }
    };
}

scalar_rhs_ops!(Jet1);
scalar_rhs_ops!(Jet2);

impl Add for Jet1 {
    type Output = Jet1;
    fn add(mut self, rhs: Jet1) -> Jet1 {
        let n = self.n.max(rhs.n);
        self.v += rhs.v;
        for i in 0..n {
            self.g[i] += rhs.g[i];
        }
        self.n = n;
        self
    }
}
impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: Jet1) -> Jet1 {
        let n = self.n.max(rhs.n);
        let mut g = [0.0; MAX_DIM];
        for i in 0..n {
            g[i] = self.g[i] * rhs.v + self.v * rhs.g[i];
        }
        Jet1 { v: self.v * rhs.v, g, n }
    }
}
impl Mul<f64> for Jet1 {
    type Output = Jet1;
    fn mul(mut self, c: f64) -> Jet1 {
        self.v *= c;
        for i in 0..self.n {
            self.g[i] *= c;
        }
        self
    }
}
impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self * -1.0
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: Jet2) -> Jet2 {
        let n = self.n.max(rhs.n);
        self.v += rhs.v;
        for i in 0..n {
            self.g[i] += rhs.g[i];
            for j in 0..n {
                self.h[i][j] += rhs.h[i][j];
            }
        }
        self.n = n;
        self
    }
}
impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let n = self.n.max(rhs.n);
        let mut out = Jet2::constant(self.v * rhs.v, n);
        for i in 0..n {
            out.g[i] = self.g[i] * rhs.v + self.v * rhs.g[i];
            for j in 0..=i {
                let hij = self.h[i][j] * rhs.v
                    + self.v * rhs.h[i][j]
                    + self.g[i] * rhs.g[j]
                    + self.g[j] * rhs.g[i];
                out.h[i][j] = hij;
                out.h[j][i] = hij;
            }
        }
        out
    }
}
impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(mut self, c: f64) -> Jet2 {
        self.v *= c;
        for i in 0..self.n {
            self.g[i] *= c;
            for j in 0..self.n {
                self.h[i][j] *= c;
            }
        }
        self
    }
}
impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self * -1.0
    }
}

/// Euclidean squared norm of a point given as scalars.
pub fn norm2<S: Scalar>(x: &[S]) -> S {
    let mut acc = S::constant(0.0, x.len());
    for &xi in x {
        acc = acc + xi * xi;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample<S: Scalar>(x: &[S]) -> S {
        // (1 + x0^2 x1) / sqrt(2 + x2^2) * exp(-x1)
        let a = x[0] * x[0] * x[1] + 1.0;
        let b = (x[2] * x[2] + 2.0).sqrt();
        a / b * (-x[1]).exp()
    }

    #[test]
    fn jets_match_finite_differences() {
        let x = [0.7, -0.3, 1.1];
        let j = sample(&Jet2::point(&x));
        let h = 1e-5;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (sample(&xp) - sample(&xm)) / (2.0 * h);
            assert!((fd - j.g[i]).abs() < 1e-8, "grad {i}: {fd} vs {}", j.g[i]);
            for k in 0..3 {
                let gp = sample(&Jet1::point(&xp)).g[k];
                let gm = sample(&Jet1::point(&xm)).g[k];
                let fd2 = (gp - gm) / (2.0 * h);
                assert!((fd2 - j.h[i][k]).abs() < 1e-7, "hess {i}{k}");
            }
        }
        assert!((sample(&x) - j.v).abs() < 1e-15);
    }

    #[test]
    fn powf_matches_repeated_multiplication() {
        let x = Jet2::variable(0, 1.3, 1);
        let a = x.powf(3.0);
        let b = x * x * x;
        assert!((a.v - b.v).abs() < 1e-14);
        assert!((a.g[0] - b.g[0]).abs() < 1e-13);
        assert!((a.h[0][0] - b.h[0][0]).abs() < 1e-12);
    }
}
