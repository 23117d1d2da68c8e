//! Quantities of the form `r·√d` with rational `r` and `d`. Spatial distances
//! and speeds leave the rationals only through one square root, so this is
//! enough for exact evaluation; sums that would need two unrelated radicals
//! are reported as not representable.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::scalar::Rat;

#[derive(Clone)]
pub struct Num {
    coef: Rat,
    /// positive, and 1 when the value is rational
    rad: Rat,
}

impl Num {
    pub fn rat(r: Rat) -> Num {
        Num { coef: r, rad: Rat::int(1) }
    }

    pub fn int(n: i64) -> Num {
        Num::rat(Rat::int(n))
    }

    pub fn zero() -> Num {
        Num::int(0)
    }

    /// `√r` for `r ≥ 0`.
    pub fn sqrt(r: &Rat) -> Option<Num> {
        if r.is_negative() {
            return None;
        }
        if r.0.is_zero() {
            return Some(Num::zero());
        }
        Some(Num::surd(Rat::int(1), r.clone()))
    }

    fn surd(coef: Rat, rad: Rat) -> Num {
        if coef.0.is_zero() {
            return Num::zero();
        }
        match rad.perfect_sqrt() {
            Some(s) => Num::rat(&coef * &s),
            None => Num { coef, rad },
        }
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        self.rad.0.is_one().then_some(&self.coef)
    }

    pub fn into_rat(self) -> Option<Rat> {
        self.rad.0.is_one().then_some(self.coef)
    }

    pub fn is_zero(&self) -> bool {
        self.coef.0.is_zero()
    }

    pub fn square(&self) -> Rat {
        &(&self.coef * &self.coef) * &self.rad
    }

    pub fn signum(&self) -> Ordering {
        self.coef.0.cmp(&Zero::zero())
    }

    pub fn neg(&self) -> Num {
        Num { coef: -&self.coef, rad: self.rad.clone() }
    }

    pub fn add(&self, other: &Num) -> Option<Num> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        if self.rad == other.rad {
            return Some(Num::surd(&self.coef + &other.coef, self.rad.clone()));
        }
        let ratio = Rat(&self.rad.0 / &other.rad.0);
        let s = ratio.perfect_sqrt()?;
        Some(Num::surd(&(&self.coef * &s) + &other.coef, other.rad.clone()))
    }

    pub fn sub(&self, other: &Num) -> Option<Num> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Num) -> Num {
        Num::surd(&self.coef * &other.coef, &self.rad * &other.rad)
    }

    pub fn recip(&self) -> Option<Num> {
        if self.is_zero() {
            return None;
        }
        let denom = &self.coef * &self.rad;
        Some(Num::surd(Rat(denom.0.recip()), self.rad.clone()))
    }

    pub fn div(&self, other: &Num) -> Option<Num> {
        Some(self.mul(&other.recip()?))
    }

    pub fn abs(&self) -> Num {
        Num { coef: Rat(self.coef.0.abs()), rad: self.rad.clone() }
    }

    /// Rational `(lo, hi)` with `lo ≤ self ≤ hi` and `hi - lo ≤ 2^-bits`
    /// (relative to the coefficient scale).
    pub fn bounds(&self, bits: u32) -> (Rat, Rat) {
        if let Some(r) = self.as_rat() {
            return (r.clone(), r.clone());
        }
        // √(p/q) = √(pq)/q
        let p = self.rad.numer().clone();
        let q = self.rad.denom().clone();
        let scale = BigInt::one() << bits;
        let n = &p * &q * &scale * &scale;
        let root = n.sqrt();
        let lo = Rat::from_bigs(root.clone(), &q * &scale);
        let hi = Rat::from_bigs(root + 1, &q * &scale);
        if self.coef.is_negative() {
            (&self.coef * &hi, &self.coef * &lo)
        } else {
            (&self.coef * &lo, &self.coef * &hi)
        }
    }

    /// A rational strictly between `a < b`.
    pub fn rational_between(a: &Num, b: &Num) -> Rat {
        let mut bits = 8;
        loop {
            let (_, a_hi) = a.bounds(bits);
            let (b_lo, _) = b.bounds(bits);
            if a_hi < b_lo || (a_hi == b_lo && a.as_rat().is_none() && b.as_rat().is_none()) {
                let mid = Rat(&(&a_hi.0 + &b_lo.0) / BigInt::from(2));
                if Num::rat(mid.clone()) > *a && Num::rat(mid.clone()) < *b {
                    return mid;
                }
            }
            bits += 8;
        }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.coef.0.to_f64().unwrap_or(f64::NAN) * self.rad.0.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl From<Rat> for Num {
    fn from(r: Rat) -> Num {
        Num::rat(r)
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Num) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Num {}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Num) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Num {
    fn cmp(&self, other: &Num) -> Ordering {
        if let Some(d) = self.sub(other) {
            return d.signum();
        }
        let (s, o) = (self.signum(), other.signum());
        if s != o {
            return s.cmp(&o);
        }
        let by_square = self.square().cmp(&other.square());
        if s == Ordering::Less {
            by_square.reverse()
        } else {
            by_square
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rat() {
            Some(r) => write!(f, "{r}"),
            None if self.coef.0.is_one() => write!(f, "sqrt({})", self.rad),
            None => write!(f, "{}*sqrt({})", self.coef, self.rad),
        }
    }
}

impl fmt::Debug for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl serde::Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic() {
        let two = Num::sqrt(&r("2")).unwrap();
        let eight = Num::sqrt(&r("8")).unwrap();
        assert_eq!(two.add(&two).unwrap(), eight);
        assert_eq!(two.mul(&two), Num::int(2));
        assert!(two.add(&Num::int(1)).is_none());
        assert!(Num::sqrt(&r("3")).unwrap().add(&two).is_none());
        assert_eq!(Num::sqrt(&r("9/4")).unwrap().as_rat(), Some(&r("3/2")));
        assert_eq!(two.recip().unwrap().mul(&two), Num::int(1));
        assert!(Num::sqrt(&r("-1")).is_none());
        assert_eq!(two.to_string(), "sqrt(2)");
    }

    #[test]
    fn ordering() {
        let two = Num::sqrt(&r("2")).unwrap();
        let three = Num::sqrt(&r("3")).unwrap();
        assert!(two < three);
        assert!(two.neg() > three.neg());
        assert!(Num::rat(r("7/5")) < two);
        assert!(Num::rat(r("3/2")) > two);
        assert!(two.neg() < Num::zero());
    }

    #[test]
    fn rationals_between_surds() {
        let two = Num::sqrt(&r("2")).unwrap();
        let m = Num::rational_between(&two, &Num::rat(r("1415/1000")));
        assert!(Num::rat(m.clone()) > two && m < r("1415/1000"));
        let m = Num::rational_between(&Num::int(1), &Num::int(2));
        assert_eq!(m, r("3/2"));
    }

    proptest! {
        #[test]
        fn square_root_squares_back(n in 0i64..10_000, d in 1i64..100) {
            let x = Rat::new(n, d);
            let s = Num::sqrt(&x).unwrap();
            prop_assert_eq!(s.square(), x.clone());
            let (lo, hi) = s.bounds(16);
            prop_assert!(Num::rat(lo) <= s && s <= Num::rat(hi));
        }
    }
}
