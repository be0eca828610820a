//! Logarithms and float conversions of exact big numbers.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Natural logarithm of a positive big integer, accurate to a few ulps.
pub fn ln_biguint(value: &BigUint) -> f64 {
    debug_assert!(!value.is_zero());
    let bits = value.bits();
    if bits <= 64 {
        return libm::log(value.to_u64().expect("fits") as f64);
    }
    let shift = bits - 64;
    let top = (value >> shift).to_u64().expect("64 bits");
    libm::log(top as f64) + shift as f64 * core::f64::consts::LN_2
}

/// Natural logarithm of a positive rational.
pub fn ln_rational(value: &BigRational) -> f64 {
    assert_eq!(value.numer().sign(), Sign::Plus, "logarithm of a non-positive rational");
    ln_biguint(value.numer().magnitude()) - ln_biguint(value.denom().magnitude())
}

pub fn rational_to_f64(value: &BigRational) -> f64 {
    if value.is_zero() {
        return 0.0;
    }
    let sign = if value.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
    let numer = value.numer().magnitude();
    let denom = value.denom().magnitude();
    let (nb, db) = (numer.bits() as i64, denom.bits() as i64);
    // Scale so that the quotient keeps 64 significant bits.
    let shift = nb - db - 64;
    let quotient = if shift >= 0 {
        numer / (denom << shift as u64)
    } else {
        (numer << (-shift) as u64) / denom
    };
    sign * libm::ldexp(quotient.to_f64().expect("finite"), shift as i32)
}

pub fn big(value: u64) -> BigInt {
    BigInt::from(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn logs() {
        let x = BigUint::from(3u32).pow(100);
        assert!((ln_biguint(&x) - 100.0 * libm::log(3.0)).abs() < 1e-12);
        let r = BigRational::new(big(1), big(1) << 60u32);
        assert!((ln_rational(&r) + 60.0 * core::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(ln_rational(&BigRational::one()), 0.0);
    }

    #[test]
    fn to_float() {
        let r = BigRational::new(big(2), big(3));
        assert!((rational_to_f64(&r) - 2.0 / 3.0).abs() < 1e-16);
        let r = BigRational::new(-(BigInt::from(7u32).pow(80)), BigInt::from(5u32).pow(90));
        let expect = -libm::exp(80.0 * libm::log(7.0) - 90.0 * libm::log(5.0));
        assert!((rational_to_f64(&r) / expect - 1.0).abs() < 1e-12);
        assert_eq!(rational_to_f64(&BigRational::zero()), 0.0);
    }
}
