//! Positive definite binary quadratic forms and form class groups.

use std::fmt;

use rug::ops::{DivRounding, RemRounding};
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// The form A·x² + B·xy + C·y².
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: Integer,
    pub b: Integer,
    pub c: Integer,
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.a, self.b, self.c)
    }
}

impl QuadForm {
    pub fn new(a: impl Into<Integer>, b: impl Into<Integer>, c: impl Into<Integer>) -> QuadForm {
        QuadForm { a: a.into(), b: b.into(), c: c.into() }
    }

    pub fn disc(&self) -> Integer {
        Integer::from(self.b.square_ref()) - (4 * Integer::from(&self.a * &self.c))
    }

    pub fn is_primitive(&self) -> bool {
        Integer::from(self.a.gcd_ref(&self.b)).gcd(&self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let ab = Integer::from(self.b.abs_ref());
        if ab > self.a || self.a > self.c {
            return false;
        }
        if (ab == self.a || self.a == self.c) && self.b < 0 {
            return false;
        }
        true
    }

    /// The reduced form in the same SL₂(Z)-class.
    pub fn reduce(&self) -> QuadForm {
        let mut f = self.clone();
        loop {
            // normalise B into (−A, A]
            let two_a = Integer::from(2 * &f.a);
            if f.b > f.a || Integer::from(-&f.b) >= f.a {
                // B' = B − 2Ak with k = ⌈(B − A)/2A⌉
                let num = Integer::from(&f.b + &f.a) - 1u32;
                let k = num.div_floor(two_a.clone());
                let nb = &f.b - Integer::from(&two_a * &k);
                // C' = C − kB + k²A
                let nc = (&f.c - Integer::from(&k * &f.b)) + (Integer::from(k.square_ref()) * &f.a);
                f.b = nb;
                f.c = nc;
            }
            if f.a > f.c {
                // (A, B, C) → (C, −B, A)
                std::mem::swap(&mut f.a, &mut f.c);
                f.b = -f.b;
                continue;
            }
            if f.a == f.c && f.b < 0 {
                f.b = -f.b;
            }
            return f;
        }
    }

    /// The identity form of the given discriminant.
    pub fn identity(disc: &Integer) -> QuadForm {
        let b = Integer::from(disc.mod_u(2));
        let c = (Integer::from(b.square_ref()) - disc) / 4;
        QuadForm { a: Integer::from(1), b, c }
    }

    pub fn inverse(&self) -> QuadForm {
        QuadForm { a: self.a.clone(), b: Integer::from(-&self.b), c: self.c.clone() }.reduce()
    }

    /// Gauss composition followed by reduction.
    pub fn compose(&self, other: &QuadForm) -> QuadForm {
        let (f1, f2) = if self.a > other.a { (other, self) } else { (self, other) };
        let s: Integer = Integer::from(&f1.b + &f2.b) / 2;
        let n = Integer::from(&f2.b - &s);
        let (y1, d) = if f2.a.is_divisible(&f1.a) {
            (Integer::new(), f1.a.clone())
        } else {
            let (d, u, _) = f2.a.clone().gcd_cofactors(f1.a.clone(), Integer::new());
            (u, d)
        };
        let (x2, y2, d1) = if s.is_divisible(&d) {
            (Integer::new(), Integer::from(-1), d.clone())
        } else {
            let (d1, u, v) = s.clone().gcd_cofactors(d.clone(), Integer::new());
            (u, (-v), d1)
        };
        let v1 = Integer::from(&f1.a / &d1);
        let v2 = Integer::from(&f2.a / &d1);
        let r = ((Integer::from(&y1 * &y2) * &n) - Integer::from(&x2 * &f2.c)).rem_euc(v1.clone());
        let b3 = Integer::from(&f2.b + (2 * Integer::from(&v2 * &r)));
        let a3 = Integer::from(&v1 * &v2);
        let c3 = (Integer::from(&f2.c * &d1) + Integer::from(&r * (&f2.b + Integer::from(&v2 * &r)))) / &v1;
        QuadForm { a: a3, b: b3, c: c3 }.reduce()
    }

    pub fn eval(&self, x: i64, y: i64) -> Integer {
        Integer::from(&self.a * (x * x)) + Integer::from(&self.b * (x * y)) + Integer::from(&self.c * (y * y))
    }

    /// A value represented by the form and coprime to m.
    pub fn value_coprime_to(&self, m: &Integer) -> Option<Integer> {
        for r in 1i64..=12 {
            for x in -r..=r {
                for y in [-r, r] {
                    for (xx, yy) in [(x, y), (y, x)] {
                        if Integer::from(xx).gcd(&Integer::from(yy)) != 1 {
                            continue;
                        }
                        let v = self.eval(xx, yy);
                        if v != 0 && Integer::from(v.gcd_ref(m)) == 1 {
                            return Some(v);
                        }
                    }
                }
            }
        }
        None
    }

    /// Root (−B + √disc)/(2A) in the upper half plane, as (real part, imaginary part squared).
    pub fn root_parts(&self) -> (Rational, Rational) {
        let two_a = Integer::from(2 * &self.a);
        let re = Rational::from((Integer::from(-&self.b), two_a.clone()));
        let im2 = Rational::from(((-self.disc()), Integer::from(two_a.square_ref())));
        (re, im2)
    }
}

fn check_disc(disc: &Integer) -> Result<()> {
    if *disc >= 0 || !(disc.mod_u(4) == 0 || disc.mod_u(4) == 1) {
        return Err(Error::NotADiscriminant(disc.to_string()));
    }
    Ok(())
}

/// One reduced primitive form per class of discriminant `disc` < 0, sorted.
pub fn class_group_forms(disc: &Integer) -> Result<Vec<QuadForm>> {
    check_disc(disc)?;
    let abs = Integer::from(-disc);
    let amax = Integer::from(Integer::from(&abs / 3u32).sqrt_ref()) + 1u32;
    let amax = amax.to_u64().expect("discriminant too large");
    let mut out = Vec::new();
    for a in 1..=amax {
        let a_i = Integer::from(a);
        for bi in -(a as i64) + 1..=(a as i64) {
            let b = Integer::from(bi);
            let num = Integer::from(b.square_ref()) - disc;
            let four_a = Integer::from(4 * &a_i);
            if !num.is_divisible(&four_a) {
                continue;
            }
            let c = num / four_a;
            let f = QuadForm { a: a_i.clone(), b, c };
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn class_number(disc: &Integer) -> Result<usize> {
    Ok(class_group_forms(disc)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::kronecker_i64;

    fn d(n: i64) -> Integer {
        Integer::from(n)
    }

    #[test]
    fn small_class_numbers() {
        assert_eq!(class_number(&d(-7)).unwrap(), 1);
        let f = class_group_forms(&d(-4)).unwrap();
        assert_eq!(f, vec![QuadForm::new(1, 0, 1)]);
        assert_eq!(class_number(&d(-23)).unwrap(), 3);
        assert_eq!(class_number(&d(-47)).unwrap(), 5);
        assert!(class_group_forms(&d(-5)).is_err());
        assert!(class_group_forms(&d(8)).is_err());
    }

    #[test]
    fn order_class_number_formula() {
        // h(−11·q²) = (q − (−11/q))·h(−11) for the unit index 1
        for q in [3i64, 5, 7, 13] {
            let h = class_number(&d(-11 * q * q)).unwrap() as i64;
            assert_eq!(h, q - kronecker_i64(-11, q) as i64, "q={}", q);
        }
        assert_eq!(class_number(&d(-11 * 49)).unwrap(), 8);
    }

    #[test]
    fn reduction_is_idempotent_and_preserves_disc() {
        let f = QuadForm::new(69, 47, 9);
        let r = f.reduce();
        assert!(r.is_reduced());
        assert_eq!(r.disc(), f.disc());
        assert_eq!(r.reduce(), r);
    }

    #[test]
    fn composition_is_closed() {
        for disc in [-23i64, -47, -11 * 49, -191, -84] {
            let forms = class_group_forms(&d(disc)).unwrap();
            let id = QuadForm::identity(&d(disc)).reduce();
            for f in &forms {
                assert_eq!(f.compose(&id), *f);
                assert_eq!(f.compose(&f.inverse()), id);
                for g in &forms {
                    let h = f.compose(g);
                    assert!(forms.contains(&h), "{} ∘ {} = {} (disc {})", f, g, h, disc);
                    assert_eq!(h, g.compose(f));
                }
            }
        }
    }
}
