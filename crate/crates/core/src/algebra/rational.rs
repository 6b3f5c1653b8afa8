use alloc::format;
use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// An element of `Z[1/5]`, stored as `numerator / 5^exponent`.
///
/// The representation is normalized: either `exponent == 0` or the numerator
/// is not divisible by 5. Two values are equal iff their representations are.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational5 {
    numerator: BigInt,
    exponent: u32,
}

pub(crate) fn pow5(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(5u32), k as usize)
}

impl Rational5 {
    pub fn new(numerator: impl Into<BigInt>, exponent: u32) -> Self {
        let mut r = Rational5 {
            numerator: numerator.into(),
            exponent,
        };
        r.normalize();
        r
    }

    pub fn from_int(n: i64) -> Self {
        Rational5 {
            numerator: BigInt::from(n),
            exponent: 0,
        }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exponent == 0 && self.numerator.is_one()
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.numerator.to_f64().unwrap_or(f64::NAN);
        n / libm::pow(5.0, self.exponent as f64)
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let five = BigInt::from(5u32);
        while self.exponent > 0 {
            let (q, rem) = self.numerator.div_rem(&five);
            if !rem.is_zero() {
                break;
            }
            self.numerator = q;
            self.exponent -= 1;
        }
    }
}

impl Add for &Rational5 {
    type Output = Rational5;

    fn add(self, rhs: &Rational5) -> Rational5 {
        let k = self.exponent.max(rhs.exponent);
        let a = &self.numerator * pow5(k - self.exponent);
        let b = &rhs.numerator * pow5(k - rhs.exponent);
        Rational5::new(a + b, k)
    }
}

impl Sub for &Rational5 {
    type Output = Rational5;

    fn sub(self, rhs: &Rational5) -> Rational5 {
        self + &(-rhs)
    }
}

impl Mul for &Rational5 {
    type Output = Rational5;

    fn mul(self, rhs: &Rational5) -> Rational5 {
        Rational5::new(&self.numerator * &rhs.numerator, self.exponent + rhs.exponent)
    }
}

impl Neg for &Rational5 {
    type Output = Rational5;

    fn neg(self) -> Rational5 {
        Rational5 {
            numerator: -&self.numerator,
            exponent: self.exponent,
        }
    }
}

impl Rational5 {
    /// Numeric comparison (the derived `Ord` is structural).
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        let k = self.exponent.max(other.exponent);
        let a = &self.numerator * pow5(k - self.exponent);
        let b = &other.numerator * pow5(k - other.exponent);
        a.cmp(&b)
    }

    pub fn abs(&self) -> Self {
        Rational5 {
            numerator: self.numerator.abs(),
            exponent: self.exponent,
        }
    }
}

impl fmt::Display for Rational5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/5^{}", self.numerator, self.exponent)
        }
    }
}

impl fmt::Debug for Rational5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `"n"`, `"n/5^k"` or `"n/D"` where `D` is a power of five.
impl FromStr for Rational5 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Input(format!("not an element of Z[1/5]: {s:?}"));
        let (num, den) = match s.split_once('/') {
            None => (s, None),
            Some((n, d)) => (n.trim(), Some(d.trim())),
        };
        let numerator = BigInt::from_str(num).map_err(|_| bad())?;
        let exponent = match den {
            None => 0,
            Some(d) => {
                if let Some(k) = d.strip_prefix("5^") {
                    k.trim().parse::<u32>().map_err(|_| bad())?
                } else {
                    let mut d = BigInt::from_str(d).map_err(|_| bad())?;
                    if !d.is_positive() {
                        return Err(bad());
                    }
                    let five = BigInt::from(5u32);
                    let mut k = 0u32;
                    while !d.is_one() {
                        let (q, rem) = d.div_rem(&five);
                        if !rem.is_zero() {
                            return Err(bad());
                        }
                        d = q;
                        k += 1;
                    }
                    k
                }
            }
        };
        Ok(Rational5::new(numerator, exponent))
    }
}

impl From<i64> for Rational5 {
    fn from(n: i64) -> Self {
        Rational5::from_int(n)
    }
}

impl Rational5 {
    /// The canonical text form accepted by [`FromStr`].
    pub fn to_config_string(&self) -> String {
        self.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational5 {
        s.parse().unwrap()
    }

    #[test]
    fn normalization() {
        let r = Rational5::new(15, 2);
        assert_eq!(r.numerator(), &BigInt::from(3));
        assert_eq!(r.exponent(), 1);
        assert_eq!(Rational5::new(0, 7), Rational5::zero());
        assert_eq!(Rational5::new(25, 2), Rational5::one());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(q("3/5"), Rational5::new(3, 1));
        assert_eq!(q("-4/5^1"), Rational5::new(-4, 1));
        assert_eq!(q("7"), Rational5::from_int(7));
        assert_eq!(q("10/25"), Rational5::new(2, 1));
        assert_eq!(q(" -24/5^2 "), Rational5::new(-24, 2));
        assert!("1/3".parse::<Rational5>().is_err());
        assert!("x".parse::<Rational5>().is_err());
        assert!("1/0".parse::<Rational5>().is_err());
    }

    #[test]
    fn arithmetic() {
        // (3/5)^2 + (4/5)^2 = 1
        let a = q("3/5");
        let b = q("4/5");
        assert!((&(&a * &a) + &(&b * &b)).is_one());
        assert_eq!(&a - &a, Rational5::zero());
        assert_eq!(&q("1/5") + &q("4/5"), Rational5::one());
        assert_eq!(q("-7/25").to_string(), "-7/5^2");
        assert_eq!(q("3/5").cmp_value(&q("4/5")), Ordering::Less);
        assert!((q("-24/25").to_f64() + 0.96).abs() < 1e-15);
    }
}
