//! Places of Q and the quadratic Hilbert symbol.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::{is_prime, jacobi};
use crate::error::ParseError;

/// A place of Q: a finite prime or the real place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Place {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        match s.trim() {
            "inf" | "∞" | "infinity" => Ok(Place::Infinite),
            t => match t.parse::<u64>() {
                Ok(p) if is_prime(p) => Ok(Place::Finite(p)),
                _ => Err(ParseError::msg(format!("not a place: {t:?}"))),
            },
        }
    }
}

/// Splits a nonzero integer as `p^v · u` with `p ∤ u`.
fn split_off(n: &BigInt, p: u64) -> (u32, BigInt) {
    let bp = BigInt::from(p);
    let (mut v, mut u) = (0, n.clone());
    while (&u % &bp).is_zero() {
        u /= &bp;
        v += 1;
    }
    (v, u)
}

/// An integer in the same square class as a nonzero rational.
fn square_class_rep(q: &BigRational) -> BigInt {
    q.numer() * q.denom()
}

/// The Hilbert symbol `(a, b)_v`: `+1` iff `b` is a norm from `Q_v(√a)`.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, place: Place) -> i32 {
    assert!(!a.is_zero() && !b.is_zero(), "Hilbert symbol of zero");
    let (a, b) = (square_class_rep(a), square_class_rep(b));
    match place {
        Place::Infinite => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => {
            let (al, u) = split_off(&a, 2);
            let (be, v) = split_off(&b, 2);
            let m8 = |x: &BigInt| x.mod_floor(&BigInt::from(8)).to_u64().expect("small");
            let (u, v) = (m8(&u), m8(&v));
            let eps = |x: u64| ((x - 1) / 2) % 2;
            let omega = |x: u64| ((x * x - 1) / 8) % 2;
            let e = eps(u) * eps(v) + al as u64 * omega(v) + be as u64 * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let (al, u) = split_off(&a, p);
            let (be, v) = split_off(&b, p);
            let mut s = 1;
            if (al * be) % 2 == 1 && p % 4 == 3 {
                s = -s;
            }
            if be % 2 == 1 {
                s *= jacobi(&u, p);
            }
            if al % 2 == 1 {
                s *= jacobi(&v, p);
            }
            s
        }
    }
}

/// Convenience wrapper for integers.
pub fn hilbert_symbol_int(a: i64, b: i64, place: Place) -> i32 {
    hilbert_symbol(&BigRational::from_integer(a.into()), &BigRational::from_integer(b.into()), place)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_values() {
        assert_eq!(hilbert_symbol_int(2, 3, Place::Finite(3)), -1);
        assert_eq!(hilbert_symbol_int(-1, -1, Place::Infinite), -1);
        assert_eq!(hilbert_symbol_int(-1, -1, Place::Finite(2)), -1);
        assert_eq!(hilbert_symbol_int(5, 2, Place::Finite(2)), -1);
        assert_eq!(hilbert_symbol_int(1, -7, Place::Finite(7)), 1);
        assert_eq!("inf".parse::<Place>().unwrap(), Place::Infinite);
        assert!("4".parse::<Place>().is_err());
    }
}
