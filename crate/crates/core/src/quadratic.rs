//! Exact elements `a + b√d` of a quadratic field (or of `Q` when `b = 0`).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::scalar::{rational_height, Field, Ring};

/// `a + b√d`. Rational values have `b = 0` and `d = 0`; mixing two
/// different nontrivial `d` panics.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quadratic {
    a: BigRational,
    b: BigRational,
    d: i64,
}

fn squarefree_part(d: i64) -> (i64, i64) {
    // d = s^2 * r with r squarefree; returns (s, r)
    let sign = d.signum();
    let mut n = d.abs();
    let mut s = 1i64;
    let mut r = 1i64;
    let mut f = 2i64;
    while f * f <= n {
        while n % (f * f) == 0 {
            n /= f * f;
            s *= f;
        }
        if n % f == 0 {
            n /= f;
            r *= f;
        }
        f += 1;
    }
    (s, sign * r * n)
}

impl Quadratic {
    pub fn rational(a: BigRational) -> Self {
        Quadratic {
            a,
            b: BigRational::zero(),
            d: 0,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(n: i64, m: i64) -> Self {
        Self::rational(BigRational::new(n.into(), m.into()))
    }

    /// `a + b√d`; `d` is reduced to its squarefree part.
    pub fn new(a: BigRational, b: BigRational, d: i64) -> Self {
        if b.is_zero() || d == 0 {
            return Self::rational(a);
        }
        let (s, r) = squarefree_part(d);
        let b = b * BigRational::from_integer(s.into());
        if r == 1 {
            return Self::rational(a + b);
        }
        Quadratic { a, b, d: r }
    }

    /// `√d`.
    pub fn sqrt(d: i64) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), d)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.a.clone())
    }

    /// Galois conjugate `a - b√d`.
    pub fn conjugate(&self) -> Self {
        Quadratic {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    /// Field norm `a² - d b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(self.d.into()) * &self.b * &self.b
    }

    fn join(&self, other: &Self) -> i64 {
        match (self.d, other.d) {
            (0, d) | (d, 0) => d,
            (x, y) if x == y => x,
            (x, y) => panic!("mixed quadratic fields Q(√{x}) and Q(√{y})"),
        }
    }

    /// Complex value as `(re, im)` in `f64`.
    pub fn to_complex(&self) -> (f64, f64) {
        let a = rational_to_f64(&self.a);
        let b = rational_to_f64(&self.b);
        if self.d >= 0 {
            (a + b * (self.d as f64).sqrt(), 0.0)
        } else {
            (a, b * ((-self.d) as f64).sqrt())
        }
    }
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        // Fall back for huge numerators/denominators.
        let n = x.numer().to_string().len() as i32 - x.denom().to_string().len() as i32;
        let scale = BigRational::from_integer(BigInt::from(10).pow(n.unsigned_abs()));
        let y = if n >= 0 { x / &scale } else { x * &scale };
        y.to_f64().unwrap_or(f64::NAN) * 10f64.powi(n)
    })
}

impl Zero for Quadratic {
    fn zero() -> Self {
        Self::rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for Quadratic {
    fn one() -> Self {
        Self::rational(BigRational::one())
    }
}

impl Add for Quadratic {
    type Output = Quadratic;
    fn add(self, rhs: Self) -> Self {
        let d = self.join(&rhs);
        Quadratic::new(self.a + rhs.a, self.b + rhs.b, d)
    }
}

impl Sub for Quadratic {
    type Output = Quadratic;
    fn sub(self, rhs: Self) -> Self {
        let d = self.join(&rhs);
        Quadratic::new(self.a - rhs.a, self.b - rhs.b, d)
    }
}

impl Mul for Quadratic {
    type Output = Quadratic;
    fn mul(self, rhs: Self) -> Self {
        let d = self.join(&rhs);
        let dd = BigRational::from_integer(d.into());
        let a = &self.a * &rhs.a + dd * &self.b * &rhs.b;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Quadratic::new(a, b, d)
    }
}

impl Div for Quadratic {
    type Output = Quadratic;
    fn div(self, rhs: Self) -> Self {
        let n = rhs.norm();
        assert!(!n.is_zero(), "division by zero");
        let conj = rhs.conjugate();
        let num = self * conj;
        Quadratic::new(num.a / &n, num.b / &n, num.d)
    }
}

impl Neg for Quadratic {
    type Output = Quadratic;
    fn neg(self) -> Self {
        Quadratic {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

impl Ring for Quadratic {
    fn zero_like(&self) -> Self {
        Quadratic::zero()
    }
    fn one_like(&self) -> Self {
        Quadratic::one()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Quadratic::from_integer(n)
    }
}

impl Field for Quadratic {
    fn pivot_cost(&self) -> i64 {
        (rational_height(&self.a) + rational_height(&self.b)) as i64
    }
}

impl From<BigRational> for Quadratic {
    fn from(a: BigRational) -> Self {
        Quadratic::rational(a)
    }
}

fn fmt_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl fmt::Display for Quadratic {
    /// `a`, or `a+b*sqrt(d)` / `a-b*sqrt(d)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", fmt_rational(&self.a));
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        write!(
            f,
            "{}{}{}*sqrt({})",
            fmt_rational(&self.a),
            sign,
            fmt_rational(&self.b.abs()),
            self.d
        )
    }
}

impl fmt::Debug for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl FromStr for Quadratic {
    type Err = Error;

    /// Accepts `m/n`, `a+b*sqrt(d)`, `a-b*sqrt(d)`, `b*sqrt(d)` and
    /// `sqrt(d)`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(pos) = s.find("sqrt(") else {
            return Ok(Quadratic::rational(parse_rational(&s)?));
        };
        let bad = || Error::Parse(format!("bad quadratic number '{s}'"));
        let close = s[pos..].find(')').ok_or_else(bad)? + pos;
        if close != s.len() - 1 {
            return Err(bad());
        }
        let d: i64 = s[pos + 5..close].parse().map_err(|_| bad())?;
        let head = &s[..pos];
        let head = head.strip_suffix('*').unwrap_or(head);
        // Split `head` into rational part and coefficient of the root: find
        // the last sign that is not at position 0.
        let split = head
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
            .map(|(i, _)| i)
            .next_back();
        let (a_str, b_str) = match split {
            Some(i) => (&head[..i], &head[i..]),
            None => ("0", head),
        };
        let b = match b_str {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other.strip_prefix('+').unwrap_or(other))?,
        };
        Ok(Quadratic::new(parse_rational(a_str)?, b, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_in_q_sqrt_minus_two() {
        let r = Quadratic::sqrt(-2);
        let sq = r.clone() * r.clone();
        assert_eq!(sq, Quadratic::from_integer(-2));
        let x: Quadratic = "1+sqrt(-2)".parse().unwrap();
        assert_eq!(x.norm(), BigRational::from_integer(3.into()));
        let inv = Quadratic::one() / x.clone();
        assert_eq!(inv * x, Quadratic::one());
    }

    #[test]
    fn parse_and_display() {
        for s in ["3/4", "-2", "1/2+3/2*sqrt(-3)", "-1-sqrt(2)", "5*sqrt(7)"] {
            let x: Quadratic = s.parse().unwrap();
            let y: Quadratic = x.to_string().parse().unwrap();
            assert_eq!(x, y, "{s}");
        }
        let x: Quadratic = "sqrt(8)".parse().unwrap();
        assert_eq!(x.to_string(), "0+2*sqrt(2)");
        let y: Quadratic = "sqrt(4)".parse().unwrap();
        assert_eq!(y, Quadratic::from_integer(2));
    }
}
