//! Exact rational quantities and certified numerics.
//!
//! Every mechanism decision (threshold tests such as `c <= 1/l`, budget
//! checks, harmonic partial sums) is taken on exact rationals. Floats appear
//! only as a fast path whose verdict is accepted when a rigorous error bound
//! separates it from the threshold, and in the experiment harness once
//! decisions are made.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An amount of reward or cost, in units of the client's total reward.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(BigRational);

/// A point in (abstract) time. Non-submission is modelled separately, never
/// as a special numeric value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimePoint(BigRational);

macro_rules! nonneg_rational {
    ($ty:ident, $what:literal) => {
        impl $ty {
            /// Returns `None` for negative values.
            pub fn new(value: BigRational) -> Option<Self> {
                if value.is_negative() {
                    None
                } else {
                    Some(Self(value))
                }
            }

            /// `num / den`. Panics on a zero denominator.
            pub fn ratio(num: u64, den: u64) -> Self {
                assert!(den != 0, "zero denominator");
                Self(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }

            pub fn integer(v: u64) -> Self {
                Self(BigRational::from_integer(BigInt::from(v)))
            }

            pub fn zero() -> Self {
                Self(BigRational::zero())
            }

            /// Nearest point of the 2^-64 grid to a finite non-negative float.
            pub fn from_f64(x: f64) -> Self {
                Self(rational_from_f64(x))
            }

            pub fn value(&self) -> &BigRational {
                &self.0
            }

            pub fn into_inner(self) -> BigRational {
                self.0
            }

            pub fn to_f64(&self) -> f64 {
                rational_to_f64(&self.0)
            }

            pub fn is_zero(&self) -> bool {
                self.0.is_zero()
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&format_rational(&self.0))
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let v = parse_rational(s).map_err(|msg| Error::Parse { line: 0, msg })?;
                Self::new(v).ok_or_else(|| Error::Parse {
                    line: 0,
                    msg: format!("{} must be non-negative, got `{}`", $what, s),
                })
            }
        }
    };
}

nonneg_rational!(Money, "money");
nonneg_rational!(TimePoint, "time");

impl Money {
    pub fn one() -> Self {
        Self(BigRational::one())
    }

    /// `1 / q`.
    pub fn unit_fraction(q: u64) -> Self {
        Self::ratio(1, q)
    }

    /// `self <= 1/q`, without building the fraction.
    pub fn at_most_unit_fraction(&self, q: u64) -> bool {
        self.0.numer() * BigInt::from(q) <= *self.0.denom()
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Money> for Money {
    type Output = Money;
    fn add(self, rhs: &'a Money) -> Money {
        Money(self.0 + &rhs.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |a, b| a + b)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Rounds a finite non-negative float to the nearest multiple of 2^-64.
pub fn rational_from_f64(x: f64) -> BigRational {
    assert!(
        x.is_finite() && x >= 0.0,
        "expected finite non-negative float, got {x}"
    );
    assert!(x < 2f64.powi(60), "float {x} too large for the 2^-64 grid");
    // Scaling by a power of two is exact; rounding picks the grid point.
    let scaled = (x * 2f64.powi(64)).round() as u128;
    BigRational::new(BigInt::from(scaled), BigInt::from(1u128 << 64))
}

/// Parses `3`, `0.25`, `.5`, `1/3` or `1.5/4` into an exact rational.
pub fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    match s.split_once('/') {
        Some((num, den)) => {
            let num = parse_decimal(num)?;
            let den = parse_decimal(den)?;
            if den.is_zero() {
                return Err(format!("zero denominator in `{s}`"));
            }
            Ok(num / den)
        }
        None => parse_decimal(s),
    }
}

fn parse_decimal(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("invalid number `{s}`"));
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(format!("invalid number `{s}`"));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits
            .parse()
            .map_err(|_| format!("invalid number `{s}`"))?
    };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let v = BigRational::new(numer, denom);
    Ok(if neg { -v } else { v })
}

/// Integers print bare, terminating decimals with up to 24 fractional digits
/// print as decimals, everything else as `p/q`. Always re-parses exactly.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    let places = twos.max(fives);
    if d.is_one() && places <= 24 {
        let scale = num_traits::pow(BigInt::from(10u32), places);
        let scaled = (r.numer() * &scale) / r.denom();
        let sign = if scaled.is_negative() { "-" } else { "" };
        let digits = scaled.abs().to_string();
        let padded = format!("{:0>width$}", digits, width = places + 1);
        let (ip, fp) = padded.split_at(padded.len() - places);
        format!("{sign}{ip}.{fp}")
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Compares `sum_{x=start}^{start+len-1} 1/x` against 1, exactly.
///
/// A float sum with a rigorous a-priori error bound decides almost every
/// case; the rest fall back to exact binary splitting.
pub fn harmonic_block_cmp_one(start: u64, len: u64) -> Ordering {
    assert!(
        start >= 1 && len >= 1,
        "harmonic block needs start >= 1 and len >= 1"
    );
    assert!(start.checked_add(len).is_some_and(|e| e < (1u64 << 52)));
    let mut s = 0.0f64;
    for x in (start..start + len).rev() {
        s += 1.0 / x as f64;
    }
    // Each reciprocal carries relative error <= u and recursive summation
    // adds at most (len - 1) u relative to the running sum; 4(len + 2)u is
    // a comfortable over-estimate of both together.
    let err = 2.0 * (len as f64 + 2.0) * f64::EPSILON * s.max(1.0);
    if s - 1.0 > err {
        Ordering::Greater
    } else if 1.0 - s > err {
        Ordering::Less
    } else {
        let (p, q) = harmonic_split(start, start + len);
        p.cmp(&q)
    }
}

/// Exact `sum_{x=start}^{start+len-1} 1/x`.
pub fn harmonic_block_sum(start: u64, len: u64) -> BigRational {
    assert!(start >= 1);
    if len == 0 {
        return BigRational::zero();
    }
    let (p, q) = harmonic_split(start, start + len);
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

// sum_{x=lo}^{hi-1} 1/x = p/q, unreduced.
fn harmonic_split(lo: u64, hi: u64) -> (BigUint, BigUint) {
    if hi - lo == 1 {
        return (BigUint::one(), BigUint::from(lo));
    }
    let mid = lo + (hi - lo) / 2;
    let (p1, q1) = harmonic_split(lo, mid);
    let (p2, q2) = harmonic_split(mid, hi);
    (p1 * &q2 + p2 * &q1, q1 * q2)
}

/// A closed rational interval known to contain some real number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Certified enclosure of `1/e` of width below `1/41!`.
pub fn inv_e_enclosure() -> Enclosure {
    // Alternating series sum (-1)^k / k! with decreasing terms: the limit
    // lies between any two consecutive partial sums.
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut prev = sum.clone();
    for k in 1..=41u32 {
        term /= BigRational::from_integer(BigInt::from(k));
        prev = sum.clone();
        if k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
    }
    let (lo, hi) = if prev < sum { (prev, sum) } else { (sum, prev) };
    Enclosure { lo, hi }
}

/// Certified enclosure of `ln(x)` for rational `x > 0`, of width at most `max_width`.
pub fn ln_enclosure(x: &BigRational, max_width: &BigRational) -> Enclosure {
    assert!(x.is_positive(), "ln of a non-positive number");
    assert!(max_width.is_positive());
    // x = 2^e * r with r in [1, 2).
    let two = BigRational::from_integer(BigInt::from(2u32));
    let mut r = x.clone();
    let mut e: i64 = 0;
    let bits = |v: &BigInt| v.bits() as i64;
    let shift = bits(r.numer()) - bits(r.denom());
    if shift > 1 {
        r /= BigRational::from_integer(BigInt::one() << (shift - 1) as usize);
        e += shift - 1;
    } else if shift < -1 {
        r *= BigRational::from_integer(BigInt::one() << (-shift - 1) as usize);
        e += shift + 1;
    }
    while r >= two {
        r /= &two;
        e += 1;
    }
    while r < BigRational::one() {
        r *= &two;
        e -= 1;
    }
    let parts = BigRational::from_integer(BigInt::from(2 * (e.unsigned_abs() + 1)));
    let budget = max_width / parts;
    let r_enc = ln_near_one(&r, &budget);
    if e == 0 {
        return r_enc;
    }
    let ln2 = ln_near_one(&two, &budget);
    let scale = BigRational::from_integer(BigInt::from(e));
    let (a, b) = (&ln2.lo * &scale, &ln2.hi * &scale);
    let (l2lo, l2hi) = if e > 0 { (a, b) } else { (b, a) };
    Enclosure {
        lo: l2lo + r_enc.lo,
        hi: l2hi + r_enc.hi,
    }
}

// ln(r) = 2 atanh(y), y = (r-1)/(r+1) in [0, 1/3] for r in [1, 2].
fn ln_near_one(r: &BigRational, max_width: &BigRational) -> Enclosure {
    let one = BigRational::one();
    let y = (r - &one) / (r + &one);
    if y.is_zero() {
        return Enclosure {
            lo: BigRational::zero(),
            hi: BigRational::zero(),
        };
    }
    let y2 = &y * &y;
    let tail_factor = &one / (&one - &y2);
    let mut pow = y.clone(); // y^(2k+1)
    let mut sum = BigRational::zero();
    let mut k: u64 = 0;
    loop {
        sum += &pow / BigRational::from_integer(BigInt::from(2 * k + 1));
        pow *= &y2;
        k += 1;
        // sum_{j>=k} y^(2j+1)/(2j+1) <= y^(2k+1) / ((2k+1)(1-y^2))
        let tail = &pow / BigRational::from_integer(BigInt::from(2 * k + 1)) * &tail_factor;
        let width = &tail * BigRational::from_integer(BigInt::from(2u32));
        if &width <= max_width {
            let lo = &sum * BigRational::from_integer(BigInt::from(2u32));
            let hi = &lo + width;
            return Enclosure { lo, hi };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert_eq!(parse_rational("1.5/4").unwrap(), q(3, 8));
        assert_eq!(parse_rational("7").unwrap(), q(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
        assert!("-0.5".parse::<Money>().is_err());
    }

    #[test]
    fn formats_round_trip() {
        for r in [q(1, 4), q(1, 3), q(7, 1), q(-3, 8), q(1, 1 << 40), q(22, 7)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&q(1, 4)), "0.25");
        assert_eq!(format_rational(&q(1, 3)), "1/3");
        assert_eq!(format_rational(&q(1, 20)), "0.05");
    }

    #[test]
    fn f64_lands_on_the_grid() {
        assert_eq!(rational_from_f64(0.5), q(1, 2));
        assert_eq!(rational_from_f64(0.0), BigRational::zero());
        let r = rational_from_f64(0.1);
        assert!((rational_to_f64(&r) - 0.1).abs() < 1e-18);
        assert_eq!(r.denom() % BigInt::from(2u32), BigInt::zero());
    }

    #[test]
    fn unit_fraction_test() {
        let c = Money::ratio(1, 3);
        assert!(c.at_most_unit_fraction(3));
        assert!(c.at_most_unit_fraction(2));
        assert!(!c.at_most_unit_fraction(4));
    }

    #[test]
    fn harmonic_fast_path_agrees_with_exact_sums() {
        for start in 1..40u64 {
            for len in 1..40u64 {
                let exact = harmonic_block_sum(start, len).cmp(&BigRational::one());
                assert_eq!(
                    harmonic_block_cmp_one(start, len),
                    exact,
                    "start {start} len {len}"
                );
            }
        }
        // 1/1 == 1 exactly, and 1/2 + 1/3 + 1/6 is not a block but 1/2 + 1/3 < 1.
        assert_eq!(harmonic_block_cmp_one(1, 1), Ordering::Equal);
        assert_eq!(harmonic_block_cmp_one(2, 2), Ordering::Less);
    }

    #[test]
    fn inv_e_is_tight() {
        let enc = inv_e_enclosure();
        let approx = (-1.0f64).exp();
        assert!(rational_to_f64(&enc.lo) <= approx + 1e-16);
        assert!(rational_to_f64(&enc.hi) >= approx - 1e-16);
        assert!(enc.width() < q(1, 1_000_000_000_000_000_000));
    }

    #[test]
    fn ln_enclosures_contain_float_ln() {
        let w = q(1, 1_000_000_000_000);
        for (n, d) in [
            (2, 1),
            (3, 1),
            (1, 2),
            (10_000, 7),
            (1, 1),
            (5, 4),
            (1, 1000),
        ] {
            let x = q(n, d);
            let enc = ln_enclosure(&x, &w);
            assert!(enc.width() <= w);
            let f = (n as f64 / d as f64).ln();
            assert!(rational_to_f64(&enc.lo) <= f + 1e-12, "{n}/{d}");
            assert!(rational_to_f64(&enc.hi) >= f - 1e-12, "{n}/{d}");
        }
    }
}
