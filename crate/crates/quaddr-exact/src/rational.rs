//! The ground field. `BigRational` already keeps values reduced with a
//! positive denominator, so the alias is all we need plus a few helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn sign(n: i64) -> Rational {
    if n.rem_euclid(2) == 0 {
        one()
    } else {
        -one()
    }
}

/// `3`, `-1/2`; integers print without a denominator.
pub fn render(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn is_negative(q: &Rational) -> bool {
    q.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(frac(2, -4), frac(-1, 2));
        assert_eq!(frac(0, 7), zero());
        assert_eq!(render(&frac(6, 4)), "3/2");
        assert_eq!(render(&int(-5)), "-5");
        assert!(frac(3, -9).denom() > &BigInt::from(0));
    }

    proptest! {
        #[test]
        fn add_then_subtract(a in -1000i64..1000, b in 1i64..50, c in -1000i64..1000, d in 1i64..50) {
            let x = frac(a, b);
            let y = frac(c, d);
            prop_assert_eq!(&(&x + &y) - &y, x);
        }
    }
}
