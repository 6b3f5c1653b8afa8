use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::rational::{pow5, Rational5};
use crate::error::{Error, Result};

/// Integer numerators of a matrix sharing one power-of-five denominator.
///
/// `Small` is used whenever every numerator fits in an `i64`; arithmetic that
/// leaves that range is redone in `BigInt`, so no value is ever truncated.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Numerators {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

impl Numerators {
    fn from_big(v: Vec<BigInt>) -> Self {
        let small: Option<Vec<i64>> = v.iter().map(|x| x.to_i64()).collect();
        match small {
            Some(s) => Numerators::Small(s),
            None => Numerators::Big(v),
        }
    }

    fn to_big(&self) -> Vec<BigInt> {
        match self {
            Numerators::Small(v) => v.iter().map(|&x| BigInt::from(x)).collect(),
            Numerators::Big(v) => v.clone(),
        }
    }

    fn get(&self, i: usize) -> BigInt {
        match self {
            Numerators::Small(v) => BigInt::from(v[i]),
            Numerators::Big(v) => v[i].clone(),
        }
    }
}

/// An exact `dim × dim` matrix over `Z[1/5]`, stored as `N / 5^k` with `N`
/// an integer matrix and `k` minimal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalMatrix {
    dim: usize,
    exponent: u32,
    nums: Numerators,
}

impl RationalMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut v = vec![0i64; dim * dim];
        for i in 0..dim {
            v[i * dim + i] = 1;
        }
        RationalMatrix {
            dim,
            exponent: 0,
            nums: Numerators::Small(v),
        }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_entries(dim: usize, entries: &[Rational5]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::Input(alloc::format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let k = entries.iter().map(Rational5::exponent).max().unwrap_or(0);
        let nums = entries
            .iter()
            .map(|e| e.numerator() * pow5(k - e.exponent()))
            .collect();
        Ok(Self::normalized(dim, k, nums))
    }

    /// Row-major integer entries.
    pub fn from_integers(dim: usize, entries: &[i64]) -> Result<Self> {
        let e: Vec<Rational5> = entries.iter().map(|&x| Rational5::from_int(x)).collect();
        Self::from_entries(dim, &e)
    }

    fn normalized(dim: usize, mut exponent: u32, nums: Vec<BigInt>) -> Self {
        let mut nums = nums;
        let five = BigInt::from(5u32);
        while exponent > 0 && nums.iter().all(|x| x.is_multiple_of(&five)) {
            for x in nums.iter_mut() {
                *x = &*x / &five;
            }
            exponent -= 1;
        }
        if nums.iter().all(Zero::is_zero) {
            exponent = 0;
        }
        RationalMatrix {
            dim,
            exponent,
            nums: Numerators::from_big(nums),
        }
    }

    fn normalized_small(dim: usize, mut exponent: u32, mut nums: Vec<i64>) -> Self {
        while exponent > 0 && nums.iter().all(|x| x % 5 == 0) {
            for x in nums.iter_mut() {
                *x /= 5;
            }
            exponent -= 1;
        }
        if nums.iter().all(|&x| x == 0) {
            exponent = 0;
        }
        RationalMatrix {
            dim,
            exponent,
            nums: Numerators::Small(nums),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exponent of the common denominator `5^k`.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn entry(&self, i: usize, j: usize) -> Rational5 {
        Rational5::new(self.nums.get(i * self.dim + j), self.exponent)
    }

    pub fn entries(&self) -> Vec<Rational5> {
        (0..self.dim * self.dim)
            .map(|idx| Rational5::new(self.nums.get(idx), self.exponent))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let nums = match &self.nums {
            Numerators::Small(v) => {
                Numerators::Small((0..d * d).map(|idx| v[(idx % d) * d + idx / d]).collect())
            }
            Numerators::Big(v) => {
                Numerators::Big((0..d * d).map(|idx| v[(idx % d) * d + idx / d].clone()).collect())
            }
        };
        RationalMatrix {
            dim: d,
            exponent: self.exponent,
            nums,
        }
    }

    /// Exact determinant, via fraction-free (Bareiss) elimination on the numerators.
    pub fn determinant(&self) -> Rational5 {
        let d = self.dim;
        let mut a = self.nums.to_big();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..d {
            if a[k * d + k].is_zero() {
                let Some(p) = (k + 1..d).find(|&r| !a[r * d + k].is_zero()) else {
                    return Rational5::zero();
                };
                for c in 0..d {
                    a.swap(k * d + c, p * d + c);
                }
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &a[i * d + j] * &a[k * d + k] - &a[i * d + k] * &a[k * d + j];
                    a[i * d + j] = v / &prev;
                }
            }
            prev = a[k * d + k].clone();
        }
        let det = if sign < 0 { -prev } else { prev };
        Rational5::new(det, self.exponent * d as u32)
    }

    /// Row-major floating-point copy.
    pub fn to_f64(&self) -> Vec<f64> {
        let scale = libm::pow(5.0, self.exponent as f64);
        match &self.nums {
            Numerators::Small(v) => v.iter().map(|&x| x as f64 / scale).collect(),
            Numerators::Big(v) => v
                .iter()
                .map(|x| x.to_f64().unwrap_or(f64::NAN) / scale)
                .collect(),
        }
    }

    /// A 64-bit FNV-1a digest of the canonical representation.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(&(self.dim as u64).to_le_bytes());
        feed(&self.exponent.to_le_bytes());
        match &self.nums {
            Numerators::Small(v) => v.iter().for_each(|x| feed(&x.to_le_bytes())),
            Numerators::Big(v) => v.iter().for_each(|x| feed(&x.to_signed_bytes_le())),
        }
        h
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let d = self.dim;
        let exponent = self.exponent + rhs.exponent;
        if let (Numerators::Small(a), Numerators::Small(b)) = (&self.nums, &rhs.nums) {
            let mut out = Vec::with_capacity(d * d);
            let mut fits = true;
            'outer: for i in 0..d {
                for j in 0..d {
                    let mut acc: i128 = 0;
                    for k in 0..d {
                        acc += a[i * d + k] as i128 * b[k * d + j] as i128;
                    }
                    match i64::try_from(acc) {
                        Ok(x) => out.push(x),
                        Err(_) => {
                            fits = false;
                            break 'outer;
                        }
                    }
                }
            }
            if fits {
                return RationalMatrix::normalized_small(d, exponent, out);
            }
        }
        let a = self.nums.to_big();
        let b = rhs.nums.to_big();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = BigInt::zero();
                for k in 0..d {
                    acc += &a[i * d + k] * &b[k * d + j];
                }
                out.push(acc);
            }
        }
        RationalMatrix::normalized(d, exponent, out)
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<Rational5>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j)).collect())
            .collect();
        f.debug_list().entries(rows.iter()).finish()
    }
}
