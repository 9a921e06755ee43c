//! Arbitrary-precision scalars shared by the moment pipeline.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::Sign;
use dashu_ratio::RBig;

/// Binary floating point with per-value precision, rounding half to even.
pub type BigFloat = FBig<HalfEven, 2>;

/// Exact rational.
pub type Rational = RBig;

/// Lift an `f64` exactly and attach `bits` of working precision.
pub fn big_from_f64(x: f64, bits: usize) -> BigFloat {
    BigFloat::try_from(x).expect("finite f64").with_precision(bits).value()
}

/// Correctly rounded `bits`-bit approximation of a rational.
pub fn big_from_rational(x: &Rational, bits: usize) -> BigFloat {
    x.to_float::<HalfEven, 2>(bits).value()
}

pub fn big_to_f64(x: &BigFloat) -> f64 {
    x.to_f64().value()
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::try_from(x).expect("finite f64")
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().value()
}

/// Field operations needed by the moment recursion.
pub(crate) trait Scalar: Clone {
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn approx(&self) -> f64;
}

impl Scalar for Rational {
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn is_zero(&self) -> bool {
        RBig::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        self.sign() == Sign::Negative && !RBig::is_zero(self)
    }
    fn approx(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Scalar for BigFloat {
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn is_zero(&self) -> bool {
        self.repr().significand().is_zero()
    }
    fn is_negative(&self) -> bool {
        self.repr().sign() == Sign::Negative && !self.repr().significand().is_zero()
    }
    fn approx(&self) -> f64 {
        big_to_f64(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_are_exact_for_dyadics() {
        let r = rational_from_f64(0.375);
        assert_eq!(rational_to_f64(&r), 0.375);
        let b = big_from_f64(-1.25, 128);
        assert_eq!(b.precision(), 128);
        assert_eq!(big_to_f64(&b), -1.25);
        let third = Rational::from_parts(1.into(), 3u8.into());
        let b = big_from_rational(&third, 200);
        assert!((big_to_f64(&b) - 1.0 / 3.0).abs() < 1e-17);
    }

    #[test]
    fn sign_queries() {
        let r = rational_from_f64(-2.0);
        assert!(Scalar::is_negative(&r));
        assert!(!Scalar::is_negative(&Rational::ZERO));
        let b = big_from_f64(0.0, 64);
        assert!(Scalar::is_zero(&b));
    }
}
