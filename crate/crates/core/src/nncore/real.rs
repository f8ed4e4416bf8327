//! Scalar types for the reference (oracle) implementations: `f64`, and a
//! double-double type carrying ~106 significant bits.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn sigmoid(self) -> Self {
        Self::one() / (Self::one() + (-self).exp())
    }

    fn tanh(self) -> Self {
        // tanh x = (1 − e^{−2|x|}) / (1 + e^{−2|x|}) · sign x
        let neg = self.to_f64() < 0.0;
        let a = if neg { -self } else { self };
        let e = (-(a + a)).exp();
        let t = (Self::one() - e) / (Self::one() + e);
        if neg {
            -t
        } else {
            t
        }
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sigmoid(self) -> Self {
        super::sigmoid(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::renorm(p, e + self.lo * b)
    }

    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DoubleDouble {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::renorm(s, e + f)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        Self::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o.mul_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o.mul_f64(q2);
        let q3 = r.hi / o.hi;
        let (h, l) = quick_two_sum(q1, q2);
        DoubleDouble::new(h, l) + DoubleDouble::from_f64(q3)
    }
}

const LN2: DoubleDouble = DoubleDouble::new(std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17);

impl Real for DoubleDouble {
    fn from_f64(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::zero();
        }
        // x = k·ln2 + r, then e^r = (e^{r/1024})^1024 with a Taylor series.
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-10);
        let mut term = Self::one();
        let mut sum = Self::one();
        for n in 1..=20 {
            term = term * r / Self::from_f64(n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum.ldexp(k as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Dd = DoubleDouble;

    #[test]
    fn arithmetic_carries_extra_bits() {
        let third = Dd::one() / Dd::from_f64(3.0);
        let back = third * Dd::from_f64(3.0) - Dd::one();
        assert!(back.to_f64().abs() < 1e-30, "{back:?}");
        let tiny = Dd::from_f64(1.0) + Dd::from_f64(1e-20) - Dd::from_f64(1.0);
        assert!((tiny.to_f64() - 1e-20).abs() < 1e-34);
    }

    #[test]
    fn transcendental_agree_with_f64() {
        for x in [-30.0, -3.2, -0.5, 0.0, 1e-8, 0.7, 2.0, 15.0] {
            let d = Dd::from_f64(x);
            assert!((d.exp().to_f64() - x.exp()).abs() <= 4.0 * f64::EPSILON * x.exp(), "exp {x}");
            assert!((Real::tanh(d).to_f64() - x.tanh()).abs() < 4e-16, "tanh {x}");
            assert!((Real::sigmoid(d).to_f64() - super::super::sigmoid(x)).abs() < 4e-16, "sigmoid {x}");
        }
    }

    #[test]
    fn exp_identity_to_extended_precision() {
        // e^a · e^{−a} = 1
        let a = Dd::from_f64(0.37) + Dd::from_f64(1e-19);
        let p = a.exp() * (-a).exp() - Dd::one();
        assert!(p.to_f64().abs() < 1e-29, "{p:?}");
    }
}
