//! Minimal arbitrary-precision complex arithmetic over MPFR floats, plus real
//! root finding for cubics.

use std::ops::{Add, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

/// Working precision in bits for a target number of decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    ((digits as f64) * std::f64::consts::LOG2_10).ceil() as u32 + 32
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Complex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Complex { re: Float::with_val(prec, 1), im: Float::new(prec) }
    }

    pub fn real(x: Float) -> Self {
        let prec = x.prec();
        Complex { re: x, im: Float::new(prec) }
    }

    pub fn i(prec: u32) -> Self {
        Complex { re: Float::new(prec), im: Float::with_val(prec, 1) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Complex {
        Complex { re: self.re.clone(), im: Float::with_val(self.im.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn scale(&self, k: &Float) -> Complex {
        let p = self.prec();
        Complex { re: Float::with_val(p, &self.re * k), im: Float::with_val(p, &self.im * k) }
    }

    pub fn scale_i(&self, k: i64) -> Complex {
        let p = self.prec();
        Complex { re: Float::with_val(p, &self.re * k), im: Float::with_val(p, &self.im * k) }
    }

    pub fn mul_i(&self) -> Complex {
        Complex { re: Float::with_val(self.prec(), -&self.im), im: self.re.clone() }
    }

    pub fn recip(&self) -> Complex {
        let n = self.norm_sqr();
        let p = self.prec();
        Complex {
            re: Float::with_val(p, &self.re / &n),
            im: Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        }
    }

    pub fn div(&self, other: &Complex) -> Complex {
        self * &other.recip()
    }

    pub fn exp(&self) -> Complex {
        let p = self.prec();
        let r = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Complex { re: Float::with_val(p, &r * &c), im: Float::with_val(p, &r * &s) }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Complex {
        let p = self.prec();
        let m = self.abs();
        let re = Float::with_val(p, Float::with_val(p, &m + &self.re) / 2u32).sqrt();
        let im_abs = Float::with_val(p, Float::with_val(p, &m - &self.re) / 2u32).sqrt();
        let im = if self.im.is_sign_negative() { -im_abs } else { im_abs };
        Complex { re, im }
    }

    pub fn powi(&self, n: u32) -> Complex {
        let mut acc = Complex::one(self.prec());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl<'a> Add<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn add(self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
}

impl<'a> Sub<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn sub(self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
}

impl<'a> Mul<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn mul(self, o: &Complex) -> Complex {
        let p = self.prec();
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let ad = Float::with_val(p, &self.re * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        Complex { re: ac - bd, im: ad + bc }
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        let p = self.prec();
        Complex { re: Float::with_val(p, -&self.re), im: Float::with_val(p, -&self.im) }
    }
}

/// Real roots of c3·x³ + c2·x² + c1·x + c0 (c3 ≠ 0), sorted decreasingly.
///
/// Closed forms give starting values; each root is then polished by Newton steps.
pub fn cubic_real_roots(c: [&Float; 4], prec: u32) -> Vec<Float> {
    let [c3, c2, c1, c0] = c;
    let a = Float::with_val(prec, c2 / c3);
    let b = Float::with_val(prec, c1 / c3);
    let d = Float::with_val(prec, c0 / c3);
    // depressed cubic t³ + P t + Q with x = t − a/3
    let a2 = Float::with_val(prec, a.square_ref());
    let p = Float::with_val(prec, &b - Float::with_val(prec, &a2 / 3u32));
    let q = Float::with_val(prec, Float::with_val(prec, 2u32 * Float::with_val(prec, &a2 * &a)) / 27u32)
        - Float::with_val(prec, Float::with_val(prec, &a * &b) / 3u32)
        + &d;
    let shift = Float::with_val(prec, &a / 3u32);
    let disc = Float::with_val(prec, Float::with_val(prec, q.square_ref()) / 4u32)
        + Float::with_val(prec, Float::with_val(prec, Float::with_val(prec, p.square_ref()) * &p) / 27u32);
    let mut roots: Vec<Float> = Vec::new();
    if disc.is_sign_negative() && !disc.is_zero() && p.is_sign_negative() {
        // three real roots
        let m = Float::with_val(prec, Float::with_val(prec, -&p) / 3u32).sqrt();
        let arg = Float::with_val(prec, Float::with_val(prec, 3u32 * &q) / Float::with_val(prec, 2u32 * &p))
            / &m;
        let arg = arg.clamp(&-1.0f64, &1.0f64);
        let theta = Float::with_val(prec, arg.acos()) / 3u32;
        let two_pi_3 = Float::with_val(prec, 2u32 * pi(prec)) / 3u32;
        for k in 0..3 {
            let ang = Float::with_val(prec, &theta - Float::with_val(prec, &two_pi_3 * k));
            let t = Float::with_val(prec, 2u32 * &m) * ang.cos();
            roots.push(t - &shift);
        }
    } else {
        let sd = disc.clone().abs().sqrt();
        let half_q = Float::with_val(prec, &q / 2u32);
        let u = Float::with_val(prec, &sd - &half_q).cbrt();
        let v = Float::with_val(prec, Float::with_val(prec, -&sd) - &half_q).cbrt();
        roots.push(u + v - &shift);
    }
    for r in roots.iter_mut() {
        polish_root(r, c, prec);
    }
    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    roots
}

fn polish_root(r: &mut Float, c: [&Float; 4], prec: u32) {
    let [c3, c2, c1, c0] = c;
    for _ in 0..8 {
        let f = Float::with_val(prec, Float::with_val(prec, Float::with_val(prec, c3 * &*r) + c2) * &*r + c1)
            * &*r
            + c0;
        let df = Float::with_val(prec, Float::with_val(prec, 3u32 * c3) * &*r + Float::with_val(prec, 2u32 * c2))
            * &*r
            + c1;
        if df.is_zero() || f.is_zero() {
            return;
        }
        let step = Float::with_val(prec, &f / &df);
        *r -= &step;
        if step.is_zero() || step.get_exp().unwrap_or(i32::MIN) < r.get_exp().unwrap_or(0) - prec as i32 {
            return;
        }
    }
}

/// Integer roots of a monic integer cubic x³ + c2x² + c1x + c0.
pub fn integer_roots_monic_cubic(c2: &Integer, c1: &Integer, c0: &Integer) -> Vec<Integer> {
    let bits = [c2, c1, c0].iter().map(|c| c.significant_bits()).max().unwrap_or(1);
    let prec = 2 * bits + 128;
    let one = Float::with_val(prec, 1);
    let f2 = Float::with_val(prec, c2);
    let f1 = Float::with_val(prec, c1);
    let f0 = Float::with_val(prec, c0);
    let mut out: Vec<Integer> = Vec::new();
    let mut cands: Vec<Float> = Vec::new();
    for r in cubic_real_roots([&one, &f2, &f1, &f0], prec) {
        // real part of the other two roots covers a numerically missed double root
        let other = Float::with_val(prec, Float::with_val(prec, &f2 + &r) / -2i32);
        cands.push(r);
        cands.push(other);
    }
    for r in cands {
        let Some(base) = r.round().to_integer() else { continue };
        for delta in -1i32..=1 {
            let x = Integer::from(&base + delta);
            let val = Integer::from((Integer::from(&x + c2) * &x + c1) * &x + c0);
            if val == 0 && !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out.sort();
    out
}

/// x^n for Float with integer exponent.
pub fn powf(x: &Float, n: i32) -> Float {
    Float::with_val(x.prec(), x.pow(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_basics() {
        let p = 128;
        let z = Complex::new(Float::with_val(p, 3), Float::with_val(p, 4));
        assert_eq!(z.abs().to_f64(), 5.0);
        let w = z.div(&z);
        assert!((w.re.to_f64() - 1.0).abs() < 1e-30 && w.im.to_f64().abs() < 1e-30);
        let s = z.sqrt();
        let back = &s * &s;
        assert!((back.re.to_f64() - 3.0).abs() < 1e-30);
        let e = Complex::new(Float::new(p), pi(p)).exp();
        assert!((e.re.to_f64() + 1.0).abs() < 1e-30);
        assert_eq!(z.powi(3), &(&z * &z) * &z);
    }

    #[test]
    fn cubic_roots() {
        let p = 200;
        let f = |v: i64| Float::with_val(p, v);
        // (x-1)(x-2)(x+3) = x³ − 7x + 6
        let r = cubic_real_roots([&f(1), &f(0), &f(-7), &f(6)], p);
        let r: Vec<f64> = r.iter().map(|x| x.to_f64()).collect();
        assert!((r[0] - 2.0).abs() < 1e-40 && (r[1] - 1.0).abs() < 1e-40 && (r[2] + 3.0).abs() < 1e-40);
        // x³ + 2 has one real root
        let r = cubic_real_roots([&f(1), &f(0), &f(0), &f(2)], p);
        assert_eq!(r.len(), 1);
        assert!((r[0].to_f64() + 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn integer_roots() {
        let r = integer_roots_monic_cubic(&Integer::from(0), &Integer::from(-1), &Integer::from(0));
        assert_eq!(r, vec![Integer::from(-1), Integer::from(0), Integer::from(1)]);
        let r = integer_roots_monic_cubic(&Integer::from(0), &Integer::from(0), &Integer::from(2));
        assert!(r.is_empty());
        // double root: (x-5)²(x+10)
        let r = integer_roots_monic_cubic(&Integer::from(0), &Integer::from(-75), &Integer::from(250));
        assert_eq!(r, vec![Integer::from(-10), Integer::from(5)]);
    }
}
