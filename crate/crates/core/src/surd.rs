//! Exact numbers of the form `r + s * sqrt(R)` with rational `r`, `R >= 0`
//! and sign `s` in {-1, 0, +1}, comparable against rationals and integers
//! without floating point.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

pub type Rational = Ratio<i128>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Surd {
    rational: Rational,
    sign: i8,
    radicand: Rational,
}

impl Surd {
    /// `rational + sign * sqrt(radicand)`; panics on a negative radicand.
    pub fn new(rational: Rational, sign: i8, radicand: Rational) -> Self {
        assert!(radicand >= Rational::from_integer(0), "negative radicand");
        let sign = if radicand == Rational::from_integer(0) { 0 } else { sign.signum() };
        Surd { rational, sign, radicand }
    }

    pub fn from_rational(r: Rational) -> Self {
        Surd::new(r, 0, Rational::from_integer(0))
    }

    pub fn rational_part(&self) -> Rational {
        self.rational
    }

    pub fn radicand(&self) -> Rational {
        self.radicand
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Exact ordering of `x` relative to `self`.
    pub fn cmp_rational(&self, x: Rational) -> Ordering {
        let d = x - self.rational;
        let zero = Rational::from_integer(0);
        match self.sign {
            0 => d.cmp(&zero),
            1 => {
                if d < zero {
                    Ordering::Less
                } else {
                    (d * d).cmp(&self.radicand)
                }
            }
            _ => {
                if d >= zero {
                    if d == zero && self.radicand == zero {
                        Ordering::Equal
                    } else {
                        Ordering::Greater
                    }
                } else {
                    self.radicand.cmp(&(d * d))
                }
            }
        }
    }

    pub fn cmp_int(&self, x: i64) -> Ordering {
        self.cmp_rational(Rational::from_integer(x as i128))
    }

    /// `x <= self`.
    pub fn admits(&self, x: i64) -> bool {
        self.cmp_int(x) != Ordering::Greater
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> i64 {
        let mut k = self.to_f64().floor() as i64;
        while self.cmp_int(k) == Ordering::Greater {
            k -= 1;
        }
        while self.cmp_int(k + 1) != Ordering::Greater {
            k += 1;
        }
        k
    }

    pub fn to_f64(&self) -> f64 {
        let r = *self.rational.numer() as f64 / *self.rational.denom() as f64;
        let rad = *self.radicand.numer() as f64 / *self.radicand.denom() as f64;
        r + self.sign as f64 * rad.sqrt()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "{}", self.rational),
            s => {
                let op = if s > 0 { "+" } else { "-" };
                write!(f, "{} {} sqrt({})", self.rational, op, self.radicand)
            }
        }
    }
}

impl Serialize for Surd {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

pub fn ratio(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_square_radicands_compare_equal() {
        // 15/4 + 5/4 = 5
        let s = Surd::new(ratio(5, 4), 1, ratio(225, 16));
        assert_eq!(s.cmp_int(5), Ordering::Equal);
        assert_eq!(s.cmp_int(4), Ordering::Less);
        assert_eq!(s.cmp_int(6), Ordering::Greater);
        assert_eq!(s.floor(), 5);
        let t = Surd::new(ratio(41, 4), -1, ratio(225, 16));
        assert_eq!(t.cmp_rational(ratio(13, 2)), Ordering::Equal);
        assert_eq!(t.cmp_int(6), Ordering::Less);
        assert_eq!(t.cmp_int(7), Ordering::Greater);
    }

    #[test]
    fn irrational_comparisons() {
        // 5/4 + sqrt(33/16) ~ 2.686
        let s = Surd::new(ratio(5, 4), 1, ratio(33, 16));
        assert!(s.admits(2));
        assert!(!s.admits(3));
        assert_eq!(s.floor(), 2);
        let n = Surd::new(ratio(0, 1), -1, ratio(2, 1));
        assert_eq!(n.floor(), -2);
        assert_eq!(n.cmp_int(-1), Ordering::Greater);
        assert_eq!(n.cmp_int(-2), Ordering::Less);
    }

    #[test]
    fn floor_matches_float_oracle_away_from_integers() {
        for p in 3..2000i128 {
            let s = Surd::new(ratio(5, 4), 1, ratio(24 * p - 39, 16));
            let v = 1.25 + ((24 * p - 39) as f64 / 16.0).sqrt();
            if (v - v.round()).abs() > 1e-9 {
                assert_eq!(s.floor(), v.floor() as i64, "p={p}");
            }
        }
    }
}
