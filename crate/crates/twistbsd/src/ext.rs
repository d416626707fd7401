//! Small conveniences over rug's incomplete-value API.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

pub(crate) trait PowRef {
    type Out;
    fn pow_ref(&self, k: u32) -> Self::Out;
}

impl PowRef for Integer {
    type Out = Integer;
    fn pow_ref(&self, k: u32) -> Integer {
        Integer::from(self.pow(k))
    }
}

impl PowRef for Rational {
    type Out = Rational;
    fn pow_ref(&self, k: u32) -> Rational {
        Rational::from(self.pow(k))
    }
}

impl PowRef for Float {
    type Out = Float;
    fn pow_ref(&self, k: u32) -> Float {
        Float::with_val(self.prec(), self.pow(k))
    }
}
