//! Exact dyadic numbers, general rationals and the scalar abstraction used by
//! sampled functions.

use alloc::format;
use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::float::FloatCore;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary precision rational.
pub type Rational = BigRational;

/// A number of the form `num / 2^exp`, kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    pub fn new(num: i128, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.reduce();
        d
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { num: n as i128, exp: 0 }
    }

    /// `2^k` for any integer `k`.
    pub fn pow2(k: i32) -> Self {
        if k >= 0 {
            Dyadic { num: 1i128 << k, exp: 0 }
        } else {
            Dyadic { num: 1, exp: (-k) as u32 }
        }
    }

    /// `j / 2^k`, the `j`-th point of the grid `V_k`.
    pub fn grid(j: u64, k: u32) -> Self {
        Dyadic::new(j as i128, k)
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn abs(&self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }

    /// Multiply by `2^k`.
    pub fn scale_pow2(&self, k: i32) -> Self {
        if self.num == 0 {
            return *self;
        }
        if k <= 0 {
            Dyadic::new(self.num, self.exp + (-k) as u32)
        } else if (k as u32) <= self.exp {
            Dyadic { num: self.num, exp: self.exp - k as u32 }
        } else {
            let shift = k as u32 - self.exp;
            Dyadic { num: shl_checked(self.num, shift), exp: 0 }
        }
    }

    /// Position on the grid `V_k`, if the number lies there and in `[0, 1]`.
    pub fn grid_index(&self, k: u32) -> Option<u64> {
        if self.num < 0 || self.exp > k {
            return None;
        }
        let j = self.num.checked_mul(1i128 << (k - self.exp))?;
        if j > (1i128 << k) {
            return None;
        }
        Some(j as u64)
    }

    /// Exponent `a` such that the value is `2^-a`, for exact powers of two.
    pub fn neg_log2(&self) -> Option<i32> {
        if self.num <= 0 || self.num & (self.num - 1) != 0 {
            return None;
        }
        Some(self.exp as i32 - self.num.trailing_zeros() as i32)
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.num), BigInt::one() << self.exp as usize)
    }

    pub fn to_f64(&self) -> f64 {
        let mut v = self.num as f64;
        let mut e = self.exp;
        while e > 0 {
            let step = e.min(60);
            v /= (1u64 << step) as f64;
            e -= step;
        }
        v
    }

    /// Exact conversion from a rational whose denominator is a power of two.
    pub fn from_rational(r: &Rational) -> Option<Self> {
        let den = r.denom();
        let bits = den.bits();
        if bits == 0 || den != &(BigInt::one() << (bits - 1) as usize) {
            return None;
        }
        let num = r.numer().to_i128()?;
        Some(Dyadic::new(num, (bits - 1) as u32))
    }

    fn reduce(&mut self) {
        if self.num == 0 {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().min(self.exp);
        self.num >>= tz;
        self.exp -= tz;
    }

    fn align(a: &Dyadic, b: &Dyadic) -> Option<(i128, i128, u32)> {
        let e = a.exp.max(b.exp);
        let x = a.num.checked_mul(pow2_i128(e - a.exp)?)?;
        let y = b.num.checked_mul(pow2_i128(e - b.exp)?)?;
        Some((x, y, e))
    }
}

fn pow2_i128(k: u32) -> Option<i128> {
    if k >= 127 {
        None
    } else {
        Some(1i128 << k)
    }
}

fn shl_checked(n: i128, k: u32) -> i128 {
    pow2_i128(k).and_then(|p| n.checked_mul(p)).expect("dyadic overflow")
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::ZERO
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match Dyadic::align(self, other) {
            Some((x, y, _)) => x.cmp(&y),
            None => self.to_rational().cmp(&other.to_rational()),
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let (x, y, e) = Dyadic::align(&self, &rhs).expect("dyadic overflow");
        Dyadic::new(x.checked_add(y).expect("dyadic overflow"), e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Dyadic) -> Dyadic {
        let num = self.num.checked_mul(rhs.num).expect("dyadic overflow");
        Dyadic::new(num, self.exp + rhs.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigInt::one() << self.exp as usize)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let r = parse_rational(s)?;
        Dyadic::from_rational(&r).ok_or_else(|| Error::Parse(format!("`{s}` is not a dyadic rational")))
    }
}

/// Parse an exact rational from `p/q`, an integer, or a decimal such as `-0.375`.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational number"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: String = [int, frac].concat();
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let mut den = BigInt::one();
    for _ in 0..frac.len() {
        den *= 10;
    }
    let r = Rational::new(n, den);
    Ok(if neg { -r } else { r })
}

/// Render a rational as `p/q`, or `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Field element used for function values: exact rationals or `f64`.
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_dyadic(d: &Dyadic) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn abs_val(&self) -> Self;
    fn is_zero_val(&self) -> bool;
    /// Equality: exact for rationals, relative tolerance `1e-12` for floats.
    fn close_to(&self, other: &Self) -> bool;
    fn to_f64_val(&self) -> f64;
    fn render(&self) -> String;
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_dyadic(d: &Dyadic) -> Self {
        d.to_rational()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn is_zero_val(&self) -> bool {
        self.is_zero()
    }
    fn close_to(&self, other: &Self) -> bool {
        self == other
    }
    fn to_f64_val(&self) -> f64 {
        rational_to_f64(self)
    }
    fn render(&self) -> String {
        format_rational(self)
    }
}

pub const FLOAT_TOLERANCE: f64 = 1e-12;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_dyadic(d: &Dyadic) -> Self {
        d.to_f64()
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn abs_val(&self) -> Self {
        FloatCore::abs(*self)
    }
    fn is_zero_val(&self) -> bool {
        FloatCore::abs(*self) <= FLOAT_TOLERANCE
    }
    fn close_to(&self, other: &Self) -> bool {
        let scale = 1.0f64.max(FloatCore::abs(*self)).max(FloatCore::abs(*other));
        FloatCore::abs(*self - *other) <= FLOAT_TOLERANCE * scale
    }
    fn to_f64_val(&self) -> f64 {
        *self
    }
    fn render(&self) -> String {
        format!("{self:e}")
    }
}

/// Maximum of a non-empty iterator of partially ordered values.
pub fn max_of<S: PartialOrd + Clone>(items: impl IntoIterator<Item = S>, init: S) -> S {
    items.into_iter().fold(init, |m, v| if v > m { v } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_arithmetic_is_exact() {
        let a: Dyadic = "3/8".parse().unwrap();
        let b: Dyadic = "0.125".parse().unwrap();
        assert_eq!(a + b, Dyadic::new(1, 1));
        assert_eq!(a - b, Dyadic::new(1, 2));
        assert_eq!(a * b, Dyadic::new(3, 6));
        assert!(b < a);
        assert_eq!(Dyadic::pow2(-3), b);
        assert_eq!(Dyadic::pow2(-3).neg_log2(), Some(3));
        assert_eq!(a.neg_log2(), None);
        assert_eq!(a.scale_pow2(3), Dyadic::from_int(3));
        assert_eq!(a.grid_index(4), Some(6));
        assert_eq!(a.grid_index(2), None);
        assert_eq!(a.to_string(), "3/8");
    }

    #[test]
    fn rationals_parse_in_all_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), Rational::new(1.into(), 3.into()));
        assert_eq!(parse_rational("-0.25").unwrap(), Rational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational("7").unwrap(), Rational::from_integer(7.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!("1/3".parse::<Dyadic>().is_err());
    }

    #[test]
    fn float_tolerance() {
        assert!(1.0f64.close_to(&(1.0 + 1e-14)));
        assert!(!1.0f64.close_to(&(1.0 + 1e-9)));
    }
}
