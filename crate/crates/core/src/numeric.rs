//! Exact rational scalars and certified sign tests.
//!
//! Every coordinate, score and threshold in the crate is a [`Rational`]. Small
//! values (numerator and denominator fitting in `i64`) are kept inline and
//! operated on with `i128` intermediates; anything larger transparently
//! promotes to an arbitrary-precision [`BigRational`]. Both representations
//! are canonical, so equality and hashing are structural.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("sign of approximate score {value} is not certified (error bound {bound})")]
    IndeterminateSign { value: f64, bound: f64 },
}

#[derive(Clone)]
enum Repr {
    /// Canonical: `den > 0`, `gcd(|num|, den) == 1`.
    Small { num: i64, den: i64 },
    /// Canonical and never representable as `Small`.
    Big(BigRational),
}

/// An exact rational number in canonical form.
#[derive(Clone)]
pub struct Rational(Repr);

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small { num: 0, den: 1 })
    }

    pub fn one() -> Self {
        Rational(Repr::Small { num: 1, den: 1 })
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(Repr::Small { num: n, den: 1 })
    }

    /// Builds `num/den`, reducing to canonical form.
    ///
    /// Panics if `den == 0`; use [`Rational::checked_new`] for untrusted input.
    pub fn new(num: i64, den: i64) -> Self {
        Self::checked_new(num, den).expect("zero denominator")
    }

    pub fn checked_new(num: i64, den: i64) -> Result<Self, NumericError> {
        if den == 0 {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Self::from_i128(num as i128, den as i128))
    }

    fn from_i128(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        if num == 0 {
            return Self::zero();
        }
        let g = gcd_i128(num, den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        match (i64::try_from(num), i64::try_from(den)) {
            (Ok(num), Ok(den)) => Rational(Repr::Small { num, den }),
            _ => Rational(Repr::Big(BigRational::new_raw(
                BigInt::from(num),
                BigInt::from(den),
            ))),
        }
    }

    fn from_big(r: BigRational) -> Self {
        // BigRational arithmetic keeps values reduced with a positive denominator.
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(num), Some(den)) => Rational(Repr::Small { num, den }),
            _ => Rational(Repr::Big(r)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => {
                BigRational::new_raw(BigInt::from(*num), BigInt::from(*den))
            }
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, .. } => BigInt::from(*num),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { den, .. } => BigInt::from(*den),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    /// Exact conversion of a finite binary64 value.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_f64(x).map(Self::from_big)
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => *num as f64 / *den as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn signum(&self) -> Ordering {
        match &self.0 {
            Repr::Small { num, .. } => num.cmp(&0),
            Repr::Big(r) => {
                if r.is_positive() {
                    Ordering::Greater
                } else if r.is_negative() {
                    Ordering::Less
                } else {
                    Ordering::Equal
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == Ordering::Equal
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, den } => BigInt::from(num.div_ceil(den)),
            Repr::Big(r) => r.ceil().to_integer(),
        }
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, den } => BigInt::from(num.div_floor(den)),
            Repr::Big(r) => r.floor().to_integer(),
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, NumericError> {
        if rhs.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(self / rhs)
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(n))
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => a == c && b == d,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            // canonical forms never overlap
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small { num, den } => {
                0u8.hash(state);
                num.hash(state);
                den.hash(state);
            }
            Repr::Big(r) => {
                1u8.hash(state);
                r.hash(state);
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! forward_binop {
    ($Trait:ident, $method:ident, $small:expr, $big:expr) => {
        impl<'a> $Trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) =
                    (&self.0, &rhs.0)
                {
                    let f: fn(i128, i128, i128, i128) -> (i128, i128) = $small;
                    let (n, m) = f(*a as i128, *b as i128, *c as i128, *d as i128);
                    return Rational::from_i128(n, m);
                }
                let f: fn(BigRational, BigRational) -> BigRational = $big;
                Rational::from_big(f(self.to_big(), rhs.to_big()))
            }
        }
        impl $Trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $Trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl<'a> $Trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
    };
}

// a/b op c/d with b, d > 0; every product of two i64 values fits in i128 and so
// does the sum of two such products.
forward_binop!(Add, add, |a, b, c, d| (a * d + c * b, b * d), |x, y| x + y);
forward_binop!(Sub, sub, |a, b, c, d| (a * d - c * b, b * d), |x, y| x - y);
forward_binop!(Mul, mul, |a, b, c, d| (a * c, b * d), |x, y| x * y);
forward_binop!(
    Div,
    div,
    |a, b, c, d| {
        assert!(c != 0, "division by zero");
        (a * d, b * c)
    },
    |x, y| {
        assert!(!y.is_zero(), "division by zero");
        x / y
    }
);

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small { num, den } => Rational::from_i128(-(*num as i128), *den as i128),
            Repr::Big(r) => Rational::from_big(-r.clone()),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses `-?[0-9]+(/[0-9]+)?`.
pub fn rational_parse(text: &str) -> Result<Rational, NumericError> {
    let malformed = || NumericError::Malformed(text.to_string());
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    if !digits(num) || den.is_some_and(|d| !digits(d)) {
        return Err(malformed());
    }
    let mut num: BigInt = num.parse().map_err(|_| malformed())?;
    if negative {
        num = -num;
    }
    let den: BigInt = match den {
        Some(d) => d.parse().map_err(|_| malformed())?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(NumericError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::from_big(BigRational::new(num, den)))
}

impl FromStr for Rational {
    type Err = NumericError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        rational_parse(s)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        rational_parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Per-term error bound for binary64 sigmoid evaluations (2^-40).
pub fn sigmoid_term_error_bound() -> Rational {
    Rational::new(1, 1 << 40)
}

/// A score produced by a scoring function.
///
/// Only sigmoid-based scorers and the Euclidean demo space produce `Approx`
/// values. An approximate score may carry an exactly decided sign (the demo
/// space decides signs by comparing squared distances), in which case sign
/// queries never consult the error bound.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreValue {
    Exact(Rational),
    Approx {
        value: f64,
        error_bound: Rational,
        sign: Option<Ordering>,
    },
}

impl ScoreValue {
    pub fn approx(value: f64, error_bound: Rational) -> Self {
        ScoreValue::Approx {
            value,
            error_bound,
            sign: None,
        }
    }

    /// Certified sign of the score.
    pub fn sign(&self) -> Result<Ordering, NumericError> {
        match self {
            ScoreValue::Exact(r) => Ok(r.signum()),
            ScoreValue::Approx { sign: Some(s), .. } => Ok(*s),
            ScoreValue::Approx {
                value,
                error_bound,
                sign: None,
            } => {
                let indeterminate = || NumericError::IndeterminateSign {
                    value: *value,
                    bound: error_bound.to_f64(),
                };
                let v = Rational::from_f64(*value).ok_or_else(indeterminate)?;
                if v.abs() > *error_bound {
                    Ok(v.signum())
                } else {
                    Err(indeterminate())
                }
            }
        }
    }

    /// Distance between the score and zero that is guaranteed despite the
    /// error bound; exact scores return their absolute value.
    pub fn certified_margin(&self) -> f64 {
        match self {
            ScoreValue::Exact(r) => r.abs().to_f64(),
            ScoreValue::Approx {
                value, error_bound, ..
            } => value.abs() - error_bound.to_f64(),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            ScoreValue::Exact(r) => r.to_f64(),
            ScoreValue::Approx { value, .. } => *value,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            ScoreValue::Exact(r) => Some(r),
            ScoreValue::Approx { .. } => None,
        }
    }

    /// Pointwise minimum; the sign of a minimum is the minimum of the signs.
    pub fn min(self, other: ScoreValue) -> Result<ScoreValue, NumericError> {
        match (self, other) {
            (ScoreValue::Exact(a), ScoreValue::Exact(b)) => Ok(ScoreValue::Exact(a.min(b))),
            (a, b) => {
                let sign = a.sign()?.min(b.sign()?);
                let bound = match (&a, &b) {
                    (ScoreValue::Approx { error_bound: x, .. }, ScoreValue::Approx { error_bound: y, .. }) => {
                        x.clone().max(y.clone())
                    }
                    (ScoreValue::Approx { error_bound, .. }, _)
                    | (_, ScoreValue::Approx { error_bound, .. }) => error_bound.clone(),
                    _ => unreachable!(),
                };
                Ok(ScoreValue::Approx {
                    value: a.as_f64().min(b.as_f64()),
                    error_bound: bound,
                    sign: Some(sign),
                })
            }
        }
    }
}

impl fmt::Display for ScoreValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreValue::Exact(r) => write!(f, "{r}"),
            ScoreValue::Approx { value, .. } => write!(f, "~{value}"),
        }
    }
}

/// `s > 0`, certified.
pub fn sign_gt0(s: &ScoreValue) -> Result<bool, NumericError> {
    Ok(s.sign()? == Ordering::Greater)
}

/// `s >= 0`, certified.
pub fn sign_ge0(s: &ScoreValue) -> Result<bool, NumericError> {
    Ok(s.sign()? != Ordering::Less)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(r("3/4"), Rational::new(3, 4));
        assert_eq!(r("-2/4"), Rational::new(-1, 2));
        assert_eq!(r("-2/4").to_string(), "-1/2");
        assert_eq!(r("0/7"), Rational::zero());
        assert_eq!(r("0/7").to_string(), "0");
        assert_eq!(r("12"), Rational::from_integer(12));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(rational_parse("1/0"), Err(NumericError::ZeroDenominator(_))));
        for bad in ["", "-", "1/", "/2", "1.5", "+3", "1/-2", " 1", "a/b", "--1"] {
            assert!(
                matches!(rational_parse(bad), Err(NumericError::Malformed(_))),
                "{bad:?} should be malformed"
            );
        }
    }

    #[test]
    fn big_values_promote_and_demote() {
        let big = r("123456789012345678901234567891/7");
        assert_eq!(big.to_string(), "123456789012345678901234567891/7");
        let back = &(&big - &big) + &Rational::one();
        assert_eq!(back, Rational::one());
        let m = Rational::from_integer(i64::MAX);
        let sq = &m * &m;
        assert_eq!(&sq / &m, m);
        assert!(sq > m);
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(r("3/2").ceil(), BigInt::from(2));
        assert_eq!(r("3/2").floor(), BigInt::from(1));
        assert_eq!(r("-1/2").ceil(), BigInt::from(0));
        assert_eq!(r("-1/2").floor(), BigInt::from(-1));
        assert_eq!(r("2").ceil(), BigInt::from(2));
    }

    #[test]
    fn sign_examples() {
        let neg = ScoreValue::Exact(r("-1/2"));
        assert!(!sign_gt0(&neg).unwrap());
        assert!(!sign_ge0(&neg).unwrap());
        let zero = ScoreValue::Exact(Rational::zero());
        assert!(!sign_gt0(&zero).unwrap());
        assert!(sign_ge0(&zero).unwrap());
        // interval [0.4999 - 1e-6, 0.4999 + 1e-6] lies strictly above zero
        let approx = ScoreValue::approx(0.4999, r("1/1000000"));
        assert!(sign_gt0(&approx).unwrap());
    }

    #[test]
    fn indeterminate_sign() {
        let s = ScoreValue::approx(1e-9, r("1/1000000"));
        assert!(matches!(s.sign(), Err(NumericError::IndeterminateSign { .. })));
        let certified = ScoreValue::Approx {
            value: 0.0,
            error_bound: r("1/1000000"),
            sign: Some(Ordering::Equal),
        };
        assert!(sign_ge0(&certified).unwrap());
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        prop_oneof![
            (any::<i64>(), 1i64..=i64::MAX).prop_map(|(n, d)| Rational::new(n, d)),
            (-1000i64..1000, 1i64..50).prop_map(|(n, d)| Rational::new(n, d)),
        ]
    }

    proptest! {
        #[test]
        fn add_then_sub_is_identity(a in arb_rational(), b in arb_rational()) {
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn order_is_total_and_matches_subtraction(a in arb_rational(), b in arb_rational()) {
            let n = [a < b, a == b, a > b].iter().filter(|x| **x).count();
            prop_assert_eq!(n, 1);
            prop_assert_eq!(a.cmp(&b), (&a - &b).signum());
        }

        #[test]
        fn ge0_is_gt0_or_zero(a in arb_rational()) {
            let s = ScoreValue::Exact(a.clone());
            prop_assert_eq!(sign_ge0(&s).unwrap(), sign_gt0(&s).unwrap() || a.is_zero());
        }

        #[test]
        fn text_round_trip(a in arb_rational()) {
            prop_assert_eq!(rational_parse(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn mul_div_inverse(a in arb_rational(), b in arb_rational()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!(&(&a * &b) / &b, a);
        }
    }
}
