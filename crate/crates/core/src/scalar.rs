//! The quantity sort: a Euclidean-field backend trait with an exact rational
//! implementation ([`Rat`]) and an IEEE `f64` implementation.
//!
//! Exactness is the point of the [`Rat`] backend: every kinematic identity in
//! this crate is checked with `==`, never with a tolerance. Square roots are
//! only taken of perfect squares; [`pythagorean_velocity`] produces speeds
//! whose Lorentz factor is rational so that the radical never escapes.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative number")]
    NegativeArgument,
    #[error("{0} is not a perfect square")]
    NotPerfectSquare(String),
    #[error("parameter {0} is outside [0, 1)")]
    ParameterOutOfRange(String),
    #[error("cannot parse scalar literal {0:?}")]
    Parse(String),
}

/// Field operations shared by both backends.
///
/// `near` is the comparison used by generic algorithms: exact equality for
/// [`Rat`], tolerance-based for `f64` (see [`set_tolerance`]).
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(numer: i64, denom: i64) -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn is_zero(&self) -> bool;
    fn inv(&self) -> Result<Self, ScalarError>;
    fn sqrt(&self) -> Result<Self, ScalarError>;
    fn to_f64(&self) -> f64;
    fn near(&self, other: &Self) -> bool;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self.clone() * other.inv()?)
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn near_zero(&self) -> bool {
        self.near(&Self::zero())
    }

    /// Total comparison; `f64` NaN compares as equal to everything, which
    /// cannot arise from the operations in this crate.
    fn cmp_total(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }

    /// `Σ a_i · b_i`.
    fn dot4(a: [&Self; 4], b: [&Self; 4]) -> Self {
        (0..4).fold(Self::zero(), |acc, k| acc + a[k].clone() * b[k].clone())
    }

    /// Inverse of a 4×4 matrix, `None` when it is singular.
    fn invert4(a: &[[Self; 4]; 4]) -> Option<[[Self; 4]; 4]> {
        crate::transforms::gauss_inverse(a)
    }
}

/// Exact arbitrary-precision rational.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(pub BigRational);

impl Rat {
    pub fn new(numer: i64, denom: i64) -> Rat {
        Rat(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_bigs(numer: BigInt, denom: BigInt) -> Rat {
        Rat(BigRational::new(numer, denom))
    }

    pub fn int(n: i64) -> Rat {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Exact square root if `self` is the square of a rational.
    pub fn perfect_sqrt(&self) -> Option<Rat> {
        if self.0.is_negative() {
            return None;
        }
        let n = exact_isqrt(self.0.numer())?;
        let d = exact_isqrt(self.0.denom())?;
        Some(Rat(BigRational::new(n, d)))
    }

    /// Length of the decimal representation of numerator plus denominator;
    /// a cheap proxy for how expensive further arithmetic will be.
    pub fn height(&self) -> u64 {
        self.0.numer().bits() + self.0.denom().bits()
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = ScalarError;

    /// Accepts `p/q`, integers and decimals such as `-0.125`.
    fn from_str(s: &str) -> Result<Rat, ScalarError> {
        let err = || ScalarError::Parse(s.to_string());
        let t = s.trim();
        if t.is_empty() {
            return Err(err());
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
            return Ok(Rat(BigRational::new(p, q)));
        }
        if let Some((whole, frac)) = t.split_once('.') {
            let negative = whole.starts_with('-');
            let digits = whole.trim_start_matches(['-', '+']);
            if !frac.chars().all(|c| c.is_ascii_digit())
                || !digits.chars().all(|c| c.is_ascii_digit())
                || (digits.is_empty() && frac.is_empty())
            {
                return Err(err());
            }
            let mantissa: BigInt = format!("{}{}", digits, frac).parse().map_err(|_| err())?;
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let value = BigRational::new(mantissa, scale);
            return Ok(Rat(if negative { -value } else { value }));
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Rat(BigRational::from_integer(n)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rat, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Lit {
            Text(String),
            Int(i64),
        }
        match Lit::deserialize(deserializer)? {
            Lit::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Lit::Int(n) => Ok(Rat::int(n)),
        }
    }
}

macro_rules! rat_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat($tr::$method(&self.0, &rhs.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn dot4(a: [&Rat; 4], b: [&Rat; 4]) -> Rat {
        // one reduction for the whole sum
        let mut n = BigInt::zero();
        let mut d = BigInt::one();
        for k in 0..4 {
            if a[k].0.is_zero() || b[k].0.is_zero() {
                continue;
            }
            let pn = a[k].numer() * b[k].numer();
            let pd = a[k].denom() * b[k].denom();
            if pd == d {
                n += pn;
            } else {
                n = &n * &pd + pn * &d;
                d *= pd;
            }
        }
        Rat(BigRational::new(n, d))
    }

    /// Rows are scaled to integers and inverted through the adjugate, so
    /// nothing is reduced until the final entries.
    fn invert4(a: &[[Rat; 4]; 4]) -> Option<[[Rat; 4]; 4]> {
        let scale: [BigInt; 4] = std::array::from_fn(|i| a[i].iter().fold(BigInt::one(), |l, x| l.lcm(x.denom())));
        let m: [[BigInt; 4]; 4] =
            std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].numer() * (&scale[i] / a[i][j].denom())));
        let minor = |r: usize, s: usize, i: usize, j: usize| &m[r][i] * &m[s][j] - &m[s][i] * &m[r][j];
        let s = [minor(0, 1, 0, 1), minor(0, 1, 0, 2), minor(0, 1, 0, 3), minor(0, 1, 1, 2), minor(0, 1, 1, 3), minor(0, 1, 2, 3)];
        let c = [minor(2, 3, 0, 1), minor(2, 3, 0, 2), minor(2, 3, 0, 3), minor(2, 3, 1, 2), minor(2, 3, 1, 3), minor(2, 3, 2, 3)];
        let det = &s[0] * &c[5] - &s[1] * &c[4] + &s[2] * &c[3] + &s[3] * &c[2] - &s[4] * &c[1] + &s[5] * &c[0];
        if det.is_zero() {
            return None;
        }
        // cofactor `(i, j)` is the signed combination `Σ ±x·y`
        let cof = |terms: [(i8, &BigInt, &BigInt); 3]| {
            terms.iter().fold(BigInt::zero(), |acc, (sign, x, y)| if *sign > 0 { acc + *x * *y } else { acc - *x * *y })
        };
        let adj: [[BigInt; 4]; 4] = [
            [
                cof([(1, &m[1][1], &c[5]), (-1, &m[1][2], &c[4]), (1, &m[1][3], &c[3])]),
                cof([(-1, &m[0][1], &c[5]), (1, &m[0][2], &c[4]), (-1, &m[0][3], &c[3])]),
                cof([(1, &m[3][1], &s[5]), (-1, &m[3][2], &s[4]), (1, &m[3][3], &s[3])]),
                cof([(-1, &m[2][1], &s[5]), (1, &m[2][2], &s[4]), (-1, &m[2][3], &s[3])]),
            ],
            [
                cof([(-1, &m[1][0], &c[5]), (1, &m[1][2], &c[2]), (-1, &m[1][3], &c[1])]),
                cof([(1, &m[0][0], &c[5]), (-1, &m[0][2], &c[2]), (1, &m[0][3], &c[1])]),
                cof([(-1, &m[3][0], &s[5]), (1, &m[3][2], &s[2]), (-1, &m[3][3], &s[1])]),
                cof([(1, &m[2][0], &s[5]), (-1, &m[2][2], &s[2]), (1, &m[2][3], &s[1])]),
            ],
            [
                cof([(1, &m[1][0], &c[4]), (-1, &m[1][1], &c[2]), (1, &m[1][3], &c[0])]),
                cof([(-1, &m[0][0], &c[4]), (1, &m[0][1], &c[2]), (-1, &m[0][3], &c[0])]),
                cof([(1, &m[3][0], &s[4]), (-1, &m[3][1], &s[2]), (1, &m[3][3], &s[0])]),
                cof([(-1, &m[2][0], &s[4]), (1, &m[2][1], &s[2]), (-1, &m[2][3], &s[0])]),
            ],
            [
                cof([(-1, &m[1][0], &c[3]), (1, &m[1][1], &c[1]), (-1, &m[1][2], &c[0])]),
                cof([(1, &m[0][0], &c[3]), (-1, &m[0][1], &c[1]), (1, &m[0][2], &c[0])]),
                cof([(-1, &m[3][0], &s[3]), (1, &m[3][1], &s[1]), (-1, &m[3][2], &s[0])]),
                cof([(1, &m[2][0], &s[3]), (-1, &m[2][1], &s[1]), (1, &m[2][2], &s[0])]),
            ],
        ];
        // A = diag(scale)⁻¹·M, so A⁻¹ = M⁻¹·diag(scale)
        Some(std::array::from_fn(|i| std::array::from_fn(|j| Rat(BigRational::new(&adj[i][j] * &scale[j], det.clone())))))
    }

    fn zero() -> Rat {
        Rat(BigRational::zero())
    }

    fn one() -> Rat {
        Rat(BigRational::one())
    }

    fn from_ratio(numer: i64, denom: i64) -> Rat {
        Rat::new(numer, denom)
    }

    fn from_rat(r: &Rat) -> Rat {
        r.clone()
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn inv(&self) -> Result<Rat, ScalarError> {
        if self.0.is_zero() {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(Rat(self.0.recip()))
        }
    }

    fn sqrt(&self) -> Result<Rat, ScalarError> {
        if self.0.is_negative() {
            return Err(ScalarError::NegativeArgument);
        }
        self.perfect_sqrt()
            .ok_or_else(|| ScalarError::NotPerfectSquare(self.to_string()))
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    fn near(&self, other: &Rat) -> bool {
        self == other
    }
}

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Tolerance used by [`Scalar::near`] on the `f64` backend.
pub fn tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(AtomicOrdering::Relaxed))
}

pub fn set_tolerance(tol: f64) {
    TOLERANCE_BITS.store(tol.to_bits(), AtomicOrdering::Relaxed);
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> f64 {
        0.0
    }

    fn one() -> f64 {
        1.0
    }

    fn from_ratio(numer: i64, denom: i64) -> f64 {
        numer as f64 / denom as f64
    }

    fn from_rat(r: &Rat) -> f64 {
        r.to_f64()
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn inv(&self) -> Result<f64, ScalarError> {
        if *self == 0.0 {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(1.0 / self)
        }
    }

    fn sqrt(&self) -> Result<f64, ScalarError> {
        if *self < 0.0 {
            Err(ScalarError::NegativeArgument)
        } else {
            Ok(f64::sqrt(*self))
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    /// Absolute below magnitude 1, relative above it.
    fn near(&self, other: &f64) -> bool {
        (self - other).abs() <= tolerance() * f64::abs(*self).max(f64::abs(*other)).max(1.0)
    }
}

/// A speed `v` together with the exact value of `sqrt(1 - v^2/c^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PythagoreanVelocity<S: Scalar> {
    pub v: S,
    pub gamma_inv: S,
}

/// Rational parametrisation of the unit circle: `v = c*2t/(1+t^2)` and
/// `gamma_inv = (1-t^2)/(1+t^2)`, both exact whenever `t` and `c` are.
pub fn pythagorean_velocity<S: Scalar>(t: &S, c: &S) -> Result<PythagoreanVelocity<S>, ScalarError> {
    if *t < S::zero() || *t >= S::one() {
        return Err(ScalarError::ParameterOutOfRange(t.to_string()));
    }
    let t2 = t.square();
    let denom = S::one() + t2.clone();
    let v = c.clone() * (S::from_int(2) * t.clone()).div(&denom)?;
    let gamma_inv = (S::one() - t2).div(&denom)?;
    Ok(PythagoreanVelocity { v, gamma_inv })
}

/// `sqrt(1 - v^2/c^2)`; exact backends require a perfect square.
pub fn gamma_inv<S: Scalar>(v: &S, c: &S) -> Result<S, ScalarError> {
    let ratio = v.square().div(&c.square())?;
    (S::one() - ratio).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn field_examples() {
        assert_eq!(r("1/2") + r("1/3"), r("5/6"));
        assert_eq!(Rat::zero().inv(), Err(ScalarError::DivisionByZero));
        assert_eq!(r("-2").cmp(&r("3")), Ordering::Less);
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(Rat::zero().sqrt(), Ok(Rat::zero()));
        assert_eq!(r("16/25").sqrt(), Ok(r("4/5")));
        assert!(matches!(r("2").sqrt(), Err(ScalarError::NotPerfectSquare(_))));
        assert_eq!(r("-4").sqrt(), Err(ScalarError::NegativeArgument));
        assert_eq!(4.0f64.sqrt(), 2.0);
        assert_eq!(Scalar::sqrt(&-1.0f64), Err(ScalarError::NegativeArgument));
    }

    #[test]
    fn pythagorean_examples() {
        let p = pythagorean_velocity(&Rat::zero(), &Rat::one()).unwrap();
        assert_eq!((p.v, p.gamma_inv), (Rat::zero(), Rat::one()));
        let p = pythagorean_velocity(&r("1/3"), &Rat::one()).unwrap();
        assert_eq!((p.v, p.gamma_inv), (r("3/5"), r("4/5")));
        let p = pythagorean_velocity(&r("1/2"), &r("3")).unwrap();
        assert_eq!((p.v, p.gamma_inv), (r("12/5"), r("3/5")));
        assert!(pythagorean_velocity(&Rat::one(), &Rat::one()).is_err());
        assert!(pythagorean_velocity(&r("-1/7"), &Rat::one()).is_err());
    }

    #[test]
    fn literal_parsing() {
        assert_eq!(r("0.25"), r("1/4"));
        assert_eq!(r("-1.5"), r("-3/2"));
        assert_eq!(r(" 7 "), Rat::int(7));
        assert_eq!(r("6/-4"), r("-3/2"));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("abc".parse::<Rat>().is_err());
        assert!("1.2.3".parse::<Rat>().is_err());
        assert_eq!(r("3/5").to_string(), "3/5");
        assert_eq!(r("4").to_string(), "4");
    }

    #[test]
    fn serde_round_trip() {
        let v: Vec<Rat> = serde_json::from_str(r#"["3/5", 2, "0.5"]"#).unwrap();
        assert_eq!(v, vec![r("3/5"), Rat::int(2), r("1/2")]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["3/5","2","1/2"]"#);
    }

    #[test]
    fn gamma_inv_matches_parametrisation() {
        let p = pythagorean_velocity(&r("2/7"), &r("5")).unwrap();
        assert_eq!(gamma_inv(&p.v, &r("5")).unwrap(), p.gamma_inv);
    }
}
