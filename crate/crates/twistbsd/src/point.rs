//! Rational points and the chord-tangent group law on long Weierstrass models.

use std::fmt;

use rug::{Integer, Rational};

use crate::curve::CurveQ;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RationalPoint {
    Infinity,
    Affine { x: Rational, y: Rational },
}

impl RationalPoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        RationalPoint::Affine { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        RationalPoint::Affine { x: Rational::from(x), y: Rational::from(y) }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, RationalPoint::Infinity)
    }

    pub fn x(&self) -> Option<&Rational> {
        match self {
            RationalPoint::Affine { x, .. } => Some(x),
            RationalPoint::Infinity => None,
        }
    }

    pub fn y(&self) -> Option<&Rational> {
        match self {
            RationalPoint::Affine { y, .. } => Some(y),
            RationalPoint::Infinity => None,
        }
    }

    /// Denominator d of x = a/d² (1 for the point at infinity).
    pub fn x_denominator_sqrt(&self) -> Integer {
        match self {
            RationalPoint::Infinity => Integer::from(1),
            RationalPoint::Affine { x, .. } => Integer::from(x.denom().sqrt_ref()),
        }
    }

    /// Logarithm of the naive height max(|num x|, |den x|).
    pub fn naive_log_height(&self) -> f64 {
        match self {
            RationalPoint::Infinity => 0.0,
            RationalPoint::Affine { x, .. } => {
                let n = Integer::from(x.numer().abs_ref());
                let d = x.denom();
                let m = if n > *d { n } else { d.clone() };
                log_integer(&m)
            }
        }
    }
}

pub(crate) fn log_integer(n: &Integer) -> f64 {
    if *n == 0 {
        return f64::NEG_INFINITY;
    }
    let bits = n.significant_bits();
    if bits < 1000 {
        n.to_f64().abs().ln()
    } else {
        let shift = bits - 60;
        let top = Integer::from(n.abs_ref()) >> shift;
        top.to_f64().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalPoint::Infinity => write!(f, "O"),
            RationalPoint::Affine { x, y } => write!(f, "({}, {})", x, y),
        }
    }
}

impl CurveQ {
    pub fn is_on_curve(&self, p: &RationalPoint) -> bool {
        match p {
            RationalPoint::Infinity => true,
            RationalPoint::Affine { x, y } => {
                let [a1, a2, a3, a4, a6] = self.coeffs();
                let lhs = Rational::from(y * y) + Rational::from(a1 * x) * y + Rational::from(a3 * y);
                let x2 = Rational::from(x * x);
                let rhs = Rational::from(&x2 * x)
                    + Rational::from(a2 * &x2)
                    + Rational::from(a4 * x)
                    + Rational::from(a6);
                lhs == rhs
            }
        }
    }

    pub fn neg(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x, y } => {
                let [a1, _, a3, _, _] = self.coeffs();
                let ny = -Rational::from(y) - Rational::from(a1 * x) - Rational::from(a3);
                RationalPoint::Affine { x: x.clone(), y: ny }
            }
        }
    }

    pub fn add(&self, p: &RationalPoint, q: &RationalPoint) -> RationalPoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (RationalPoint::Infinity, _) => return q.clone(),
            (_, RationalPoint::Infinity) => return p.clone(),
            (RationalPoint::Affine { x: x1, y: y1 }, RationalPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let [a1, a2, a3, a4, _] = self.coeffs();
        let (lambda, nu);
        if x1 == x2 {
            let sum = Rational::from(y1 + y2) + Rational::from(a1 * x2) + Rational::from(a3);
            if sum == 0 {
                return RationalPoint::Infinity;
            }
            let x1sq = Rational::from(x1 * x1);
            let num = Rational::from(3 * &x1sq) + (2 * Rational::from(a2 * x1)) + Rational::from(a4)
                - Rational::from(a1 * y1);
            let den = Rational::from(2 * y1) + Rational::from(a1 * x1) + Rational::from(a3);
            lambda = num / &den;
            let num2 = -Rational::from(&x1sq * x1) + Rational::from(a4 * x1)
                + Rational::from(2 * self.a6())
                - Rational::from(a3 * y1);
            nu = num2 / den;
        } else {
            let dx = Rational::from(x2 - x1);
            lambda = Rational::from(y2 - y1) / &dx;
            nu = (Rational::from(y1 * x2) - Rational::from(y2 * x1)) / dx;
        }
        let x3 = Rational::from(&lambda * &lambda) + Rational::from(a1 * &lambda) - Rational::from(a2) - x1 - x2;
        let y3 = -(&lambda + Rational::from(a1)) * &x3 - &nu - Rational::from(a3);
        RationalPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &RationalPoint) -> RationalPoint {
        self.add(p, p)
    }

    pub fn sub(&self, p: &RationalPoint, q: &RationalPoint) -> RationalPoint {
        self.add(p, &self.neg(q))
    }

    /// [n]P by double-and-add; negative n negates.
    pub fn mul(&self, p: &RationalPoint, n: i64) -> RationalPoint {
        let mut acc = RationalPoint::Infinity;
        let mut base = if n < 0 { self.neg(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// Order of P if it is at most `bound`, otherwise None.
    pub fn order_upto(&self, p: &RationalPoint, bound: u32) -> Option<u32> {
        let mut q = p.clone();
        for k in 1..=bound {
            if q.is_infinity() {
                return Some(k);
            }
            q = self.add(&q, p);
            if k == bound && q.is_infinity() {
                return None;
            }
        }
        None
    }

    /// Rational torsion points have order ≤ 12 (Mazur).
    pub fn is_torsion(&self, p: &RationalPoint) -> bool {
        p.is_infinity() || self.order_upto(p, 12).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_law_on_37a1() {
        let e = CurveQ::from_i64([0, 0, 1, -1, 0]).unwrap();
        let p = RationalPoint::from_ints(0, 0);
        assert!(e.is_on_curve(&p));
        let p2 = e.double(&p);
        assert_eq!(p2, RationalPoint::from_ints(1, 0));
        let p3 = e.add(&p2, &p);
        assert_eq!(p3, RationalPoint::from_ints(-1, -1));
        assert!(e.is_on_curve(&e.mul(&p, 7)));
        assert_eq!(e.add(&p, &e.neg(&p)), RationalPoint::Infinity);
        assert_eq!(e.mul(&p, 5), e.add(&e.mul(&p, 2), &e.mul(&p, 3)));
        assert_eq!(e.mul(&p, -3), e.neg(&p3));
        assert!(!e.is_torsion(&p));
    }

    #[test]
    fn torsion_order_on_69a1() {
        let e = CurveQ::from_i64([1, 0, 1, -1, -1]).unwrap();
        let t = e.rational_two_torsion();
        assert_eq!(t.len(), 1);
        assert_eq!(e.order_upto(&t[0], 12), Some(2));
    }
}
