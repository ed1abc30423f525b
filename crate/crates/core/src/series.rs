//! Truncated Laurent series in `t` over p-adic floats.
//!
//! A [`LaurentElement`] keeps the coefficients whose exponents lie in the
//! window `[-M_neg, M_pos]` of its [`RingParams`]. Anything that an
//! operation would push outside the window is dropped and recorded in the
//! `tail_pos` / `tail_neg` flags, so truncation is always visible.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{PadicNumber, UnramifiedField};
use crate::scalar::Ring;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingMode {
    /// Models `S_K` / `R_K^+`: no negative exponents.
    PowerSeries,
    /// Models `E_K^dagger`, `R_K` and `E_K` at truncation.
    Laurent,
}

/// Prime, residue degree, coefficient precision and t-window.
#[derive(Clone)]
pub struct RingParams {
    field: Arc<UnramifiedField>,
    neg: u32,
    pos: u32,
    mode: RingMode,
}

impl RingParams {
    pub fn new(p: u64, precision: u32, neg: u32, pos: u32, mode: RingMode) -> Result<Self> {
        Self::with_extension(p, 1, None, precision, neg, pos, mode)
    }

    /// Convenience constructor for the common Laurent model with a
    /// symmetric window.
    pub fn laurent(p: u64, precision: u32, window: u32) -> Result<Self> {
        Self::new(p, precision, window, window, RingMode::Laurent)
    }

    pub fn power_series(p: u64, precision: u32, window: u32) -> Result<Self> {
        Self::new(p, precision, 0, window, RingMode::PowerSeries)
    }

    /// `q = p^degree`; `modulus` is a monic integer polynomial (low to high)
    /// irreducible modulo `p`.
    pub fn with_extension(
        p: u64,
        degree: usize,
        modulus: Option<&[i64]>,
        precision: u32,
        neg: u32,
        pos: u32,
        mode: RingMode,
    ) -> Result<Self> {
        if precision == 0 {
            return Err(Error::BadPrecision(0));
        }
        if pos == 0 {
            return Err(Error::BadParams("M_pos must be at least 1".into()));
        }
        if mode == RingMode::PowerSeries && neg != 0 {
            return Err(Error::BadParams(
                "power-series mode has no negative exponents".into(),
            ));
        }
        let field = UnramifiedField::new(p, degree, modulus, precision as i64)?;
        Ok(RingParams {
            field,
            neg,
            pos,
            mode,
        })
    }

    pub fn field(&self) -> &Arc<UnramifiedField> {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.p()
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    pub fn q(&self) -> BigInt {
        self.field.q()
    }

    pub fn precision(&self) -> u32 {
        self.field.precision() as u32
    }

    pub fn window(&self) -> (u32, u32) {
        (self.neg, self.pos)
    }

    pub fn mode(&self) -> RingMode {
        self.mode
    }

    pub fn min_exponent(&self) -> i64 {
        -(self.neg as i64)
    }

    pub fn max_exponent(&self) -> i64 {
        self.pos as i64
    }

    /// Same coefficient field, different window or mode.
    pub fn with_window(&self, neg: u32, pos: u32, mode: RingMode) -> Result<Self> {
        if mode == RingMode::PowerSeries && neg != 0 {
            return Err(Error::BadParams(
                "power-series mode has no negative exponents".into(),
            ));
        }
        if pos == 0 {
            return Err(Error::BadParams("M_pos must be at least 1".into()));
        }
        Ok(RingParams {
            field: self.field.clone(),
            neg,
            pos,
            mode,
        })
    }

    /// Base change to the Laurent model with a symmetric window.
    pub fn to_laurent(&self) -> Self {
        let w = self.neg.max(self.pos);
        RingParams {
            field: self.field.clone(),
            neg: w,
            pos: w,
            mode: RingMode::Laurent,
        }
    }

    /// Same field data with precision and window scaled (used for
    /// robustness reruns).
    pub fn rescaled(&self, precision: u32, neg: u32, pos: u32) -> Result<Self> {
        let modulus = self.field.modulus();
        let modulus = (self.degree() > 1).then_some(modulus);
        Self::with_extension(
            self.p(),
            self.degree(),
            modulus.as_deref(),
            precision,
            neg,
            pos,
            self.mode,
        )
    }

    pub fn in_window(&self, e: i64) -> bool {
        e >= self.min_exponent() && e <= self.max_exponent()
    }

    pub fn scalar(&self, x: &BigRational) -> PadicNumber {
        PadicNumber::from_rational(&self.field, x, self.field.precision())
    }

    pub fn integer(&self, n: i64) -> PadicNumber {
        PadicNumber::exact_integer(&self.field, n)
    }
}

impl PartialEq for RingParams {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field)
            && self.neg == other.neg
            && self.pos == other.pos
            && self.mode == other.mode
    }
}

impl Eq for RingParams {}

impl fmt::Debug for RingParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RingParams(p={}, a={}, N={}, window=[-{}, {}], {:?})",
            self.p(),
            self.degree(),
            self.precision(),
            self.neg,
            self.pos,
            self.mode
        )
    }
}

/// A truncated Laurent series `Σ a_i t^i` with explicit window.
#[derive(Clone)]
pub struct LaurentElement {
    params: RingParams,
    terms: BTreeMap<i64, PadicNumber>,
    tail_pos: bool,
    tail_neg: bool,
}

impl LaurentElement {
    pub fn zero(params: &RingParams) -> Self {
        LaurentElement {
            params: params.clone(),
            terms: BTreeMap::new(),
            tail_pos: false,
            tail_neg: false,
        }
    }

    pub fn one(params: &RingParams) -> Self {
        Self::monomial(params, params.integer(1), 0)
    }

    pub fn constant(params: &RingParams, c: PadicNumber) -> Self {
        Self::monomial(params, c, 0)
    }

    /// `c t^e`; out-of-window exponents give zero with the matching tail flag.
    pub fn monomial(params: &RingParams, c: PadicNumber, e: i64) -> Self {
        let mut out = Self::zero(params);
        out.insert(e, c);
        out
    }

    pub fn t(params: &RingParams) -> Self {
        Self::monomial(params, params.integer(1), 1)
    }

    pub fn from_rational(params: &RingParams, x: &BigRational) -> Self {
        Self::constant(params, params.scalar(x))
    }

    pub fn from_integer(params: &RingParams, n: i64) -> Self {
        Self::constant(params, params.integer(n))
    }

    /// Builds from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms(
        params: &RingParams,
        terms: impl IntoIterator<Item = (i64, PadicNumber)>,
    ) -> Self {
        let mut out = Self::zero(params);
        for (e, c) in terms {
            out.insert(e, c);
        }
        out
    }

    pub fn from_rational_terms(params: &RingParams, terms: &[(i64, BigRational)]) -> Self {
        Self::from_terms(params, terms.iter().map(|(e, c)| (*e, params.scalar(c))))
    }

    fn insert(&mut self, e: i64, c: PadicNumber) {
        if e > self.params.max_exponent() {
            if !c.is_zero() {
                self.tail_pos = true;
            }
            return;
        }
        if e < self.params.min_exponent() {
            // Power-series elements never carry a negative tail.
            if !c.is_zero() && self.params.mode == RingMode::Laurent {
                self.tail_neg = true;
            }
            return;
        }
        let slot = match self.terms.remove(&e) {
            Some(old) => old + c,
            None => c,
        };
        if !slot.is_zero() {
            self.terms.insert(e, slot);
        }
    }

    pub fn params(&self) -> &RingParams {
        &self.params
    }

    pub fn tail_pos(&self) -> bool {
        self.tail_pos
    }

    pub fn tail_neg(&self) -> bool {
        self.tail_neg
    }

    pub fn is_truncated(&self) -> bool {
        self.tail_pos || self.tail_neg
    }

    pub fn with_tails(mut self, pos: bool, neg: bool) -> Self {
        self.tail_pos |= pos;
        self.tail_neg |= neg && self.params.mode == RingMode::Laurent;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &PadicNumber)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, e: i64) -> Option<&PadicNumber> {
        self.terms.get(&e)
    }

    pub fn coeff_or_zero(&self, e: i64) -> PadicNumber {
        self.terms
            .get(&e)
            .cloned()
            .unwrap_or_else(|| PadicNumber::exact_zero(self.params.field()))
    }

    pub fn constant_term(&self) -> PadicNumber {
        self.coeff_or_zero(0)
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// True when every stored term has exponent 0.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&e| e == 0)
    }

    /// Minimum valuation over the stored coefficients.
    pub fn min_coefficient_valuation(&self) -> Option<i64> {
        self.terms.values().filter_map(|c| c.valuation()).min()
    }

    /// Smallest absolute precision over stored coefficients.
    pub fn min_precision(&self) -> Option<i64> {
        self.terms.values().map(|c| c.precision()).min()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.params == other.params {
            Ok(())
        } else {
            Err(Error::MismatchedParams)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(*e, c.clone());
        }
        out.tail_pos |= other.tail_pos;
        out.tail_neg |= other.tail_neg;
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.negated())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(&self.params);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.insert(ea + eb, ca * cb);
            }
        }
        out.tail_pos |= self.tail_pos || other.tail_pos;
        out.tail_neg |= self.tail_neg || other.tail_neg;
        Ok(out)
    }

    pub fn negated(&self) -> Self {
        LaurentElement {
            params: self.params.clone(),
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
            tail_pos: self.tail_pos,
            tail_neg: self.tail_neg,
        }
    }

    pub fn scale(&self, c: &PadicNumber) -> Self {
        let mut out = Self::zero(&self.params);
        for (e, a) in &self.terms {
            out.insert(*e, a * c);
        }
        out.tail_pos = self.tail_pos;
        out.tail_neg = self.tail_neg;
        out
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        let mut out = Self::zero(&self.params);
        for (e, a) in &self.terms {
            out.insert(e + k, a.clone());
        }
        out.tail_pos |= self.tail_pos;
        out.tail_neg |= self.tail_neg;
        out
    }

    /// `Σ a_i t^i ↦ Σ σ(a_i) t^{p i}` for the Kummer lift `σ(t) = t^p`.
    pub fn sigma(&self) -> Self {
        let p = self.params.p() as i64;
        let mut out = Self::zero(&self.params);
        for (e, a) in &self.terms {
            out.insert(e * p, a.sigma());
        }
        out.tail_pos |= self.tail_pos;
        out.tail_neg |= self.tail_neg;
        out
    }

    /// `∂/∂t`.
    pub fn d_dt(&self) -> Self {
        let mut out = Self::zero(&self.params);
        for (e, a) in &self.terms {
            if *e != 0 {
                out.insert(e - 1, a * &self.params.integer(*e));
            }
        }
        out.tail_pos = self.tail_pos;
        out.tail_neg = self.tail_neg;
        out
    }

    /// The logarithmic derivation `D = t ∂/∂t`.
    pub fn log_derivative(&self) -> Self {
        let mut out = Self::zero(&self.params);
        for (e, a) in &self.terms {
            if *e != 0 {
                out.insert(*e, a * &self.params.integer(*e));
            }
        }
        out.tail_pos = self.tail_pos;
        out.tail_neg = self.tail_neg;
        out
    }

    /// Inverse of `D` on the non-constant part: `t^k ↦ t^k / k`. The
    /// constant term is dropped. Precision of coefficient `k` drops by
    /// `v_p(k)`.
    pub fn integrate_log(&self) -> Self {
        let mut out = Self::zero(&self.params);
        for (e, a) in &self.terms {
            if *e != 0 {
                let k = self.params.integer(*e).inverse().expect("nonzero");
                out.insert(*e, a * &k);
            }
        }
        out.tail_pos = self.tail_pos;
        out.tail_neg = self.tail_neg;
        out
    }

    /// Substitution `t = s^e`, landing in `target` (the s-ring).
    pub fn substitute_power(&self, e: u32, target: &RingParams) -> Self {
        let mut out = Self::zero(target);
        for (k, a) in &self.terms {
            out.insert(k * e as i64, a.clone());
        }
        out.tail_pos |= self.tail_pos;
        out.tail_neg |= self.tail_neg;
        out
    }

    /// Reinterprets the series over other ring parameters with the same
    /// coefficient field (base change between ring modes, window changes).
    pub fn rebase(&self, target: &RingParams) -> Result<Self> {
        if !(Arc::ptr_eq(self.params.field(), target.field())
            || **self.params.field() == **target.field())
        {
            return Err(Error::MismatchedParams);
        }
        let mut out = Self::zero(target);
        for (k, a) in &self.terms {
            out.insert(*k, a.clone());
        }
        out.tail_pos |= self.tail_pos;
        out.tail_neg |= self.tail_neg && target.mode() == RingMode::Laurent;
        Ok(out)
    }

    /// Inverse for elements of the form `c t^k (1 + u)` with `u` of positive
    /// order; the geometric series for `(1 + u)^{-1}` is truncated at the
    /// window (setting `tail_pos` when `u ≠ 0`). Returns `None` when the
    /// element is zero, or when `k ≠ 0` in power-series mode.
    pub fn try_inverse(&self) -> Option<Self> {
        let k = self.min_exponent()?;
        if self.params.mode == RingMode::PowerSeries && k != 0 {
            return None;
        }
        let lead = self.terms.get(&k)?.inverse()?;
        // x = c t^k (1 + u)
        let normalized = self.shift(-k).scale(&lead);
        let one = Self::one(&self.params);
        let u = normalized.checked_sub(&one).ok()?;
        let mut out = if u.is_zero() {
            one
        } else {
            // Σ (-u)^n, n up to the window height.
            let minus_u = u.negated();
            let mut acc = one.clone();
            let mut power = one;
            let span = self.params.max_exponent() - self.params.min_exponent() + 1;
            for _ in 0..span {
                power = power.checked_mul(&minus_u).ok()?;
                if power.is_zero() {
                    break;
                }
                acc = acc.checked_add(&power).ok()?;
            }
            acc.tail_pos = true;
            acc
        };
        out = out.scale(&lead).shift(-k);
        out.tail_pos |= self.tail_pos;
        out.tail_neg |= self.tail_neg;
        Some(out)
    }

    /// Recognizes every coefficient as a rational number.
    pub fn to_rational_terms(&self) -> Option<Vec<(i64, BigRational)>> {
        self.terms
            .iter()
            .map(|(e, c)| c.to_rational().map(|r| (*e, r)))
            .collect()
    }

    /// Compares on the common window and precision: true when the
    /// difference vanishes.
    pub fn agrees_with(&self, other: &Self) -> bool {
        match self.checked_sub(other) {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }
}

impl PartialEq for LaurentElement {
    /// Equality of the stored terms at working precision; tail flags are
    /// ignored.
    fn eq(&self, other: &Self) -> bool {
        self.agrees_with(other)
    }
}

impl fmt::Debug for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match *e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*t")?,
                _ => write!(f, "({c})*t^{e}")?,
            }
        }
        if self.tail_pos {
            write!(f, " + …")?;
        }
        if self.tail_neg {
            write!(f, " + …t^-")?;
        }
        Ok(())
    }
}

impl Add for LaurentElement {
    type Output = LaurentElement;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("mismatched ring parameters")
    }
}

impl Sub for LaurentElement {
    type Output = LaurentElement;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(&rhs).expect("mismatched ring parameters")
    }
}

impl Mul for LaurentElement {
    type Output = LaurentElement;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(&rhs).expect("mismatched ring parameters")
    }
}

impl<'a> Add<&'a LaurentElement> for &'a LaurentElement {
    type Output = LaurentElement;
    fn add(self, rhs: &LaurentElement) -> LaurentElement {
        self.checked_add(rhs).expect("mismatched ring parameters")
    }
}

impl<'a> Sub<&'a LaurentElement> for &'a LaurentElement {
    type Output = LaurentElement;
    fn sub(self, rhs: &LaurentElement) -> LaurentElement {
        self.checked_sub(rhs).expect("mismatched ring parameters")
    }
}

impl<'a> Mul<&'a LaurentElement> for &'a LaurentElement {
    type Output = LaurentElement;
    fn mul(self, rhs: &LaurentElement) -> LaurentElement {
        self.checked_mul(rhs).expect("mismatched ring parameters")
    }
}

impl Neg for LaurentElement {
    type Output = LaurentElement;
    fn neg(self) -> Self {
        self.negated()
    }
}

impl Ring for LaurentElement {
    fn zero_like(&self) -> Self {
        LaurentElement::zero(&self.params)
    }
    fn one_like(&self) -> Self {
        LaurentElement::one(&self.params)
    }
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        LaurentElement::from_integer(&self.params, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RingParams {
        RingParams::laurent(5, 20, 32).unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn poly(p: &RingParams, terms: &[(i64, i64)]) -> LaurentElement {
        let t: Vec<(i64, BigRational)> = terms.iter().map(|&(e, c)| (e, q(c))).collect();
        LaurentElement::from_rational_terms(p, &t)
    }

    #[test]
    fn additive_cancellation() {
        let p = params();
        let x = poly(&p, &[(1, 1), (0, 1)]) + poly(&p, &[(0, -1)]);
        assert_eq!(x, LaurentElement::t(&p));
    }

    #[test]
    fn doubling_negative_exponent() {
        let p = params();
        let x = poly(&p, &[(-1, 1)]);
        assert_eq!(x.clone() + x, poly(&p, &[(-1, 2)]));
    }

    #[test]
    fn difference_of_squares_and_unit_relation() {
        let p = params();
        let a = poly(&p, &[(0, 1), (1, 1)]);
        let b = poly(&p, &[(0, 1), (1, -1)]);
        assert_eq!(a * b, poly(&p, &[(0, 1), (2, -1)]));
        assert_eq!(poly(&p, &[(-1, 1)]) * poly(&p, &[(1, 1)]), LaurentElement::one(&p));
    }

    #[test]
    fn window_overflow_sets_tail() {
        let p = RingParams::laurent(5, 20, 4).unwrap();
        let x = poly(&p, &[(3, 1)]);
        let y = x.clone() * x.clone();
        assert!(y.is_zero());
        assert!(y.tail_pos());
        let z = poly(&p, &[(-3, 1)]).sigma();
        assert!(z.tail_neg());
    }

    #[test]
    fn sigma_examples() {
        let p = params();
        assert_eq!(LaurentElement::t(&p).sigma(), poly(&p, &[(5, 1)]));
        let c = poly(&p, &[(0, 7)]);
        assert_eq!(c.sigma(), c);
        let f = poly(&p, &[(0, 1), (1, 2), (2, 1)]);
        assert_eq!(f.sigma(), poly(&p, &[(0, 1), (5, 2), (10, 1)]));
    }

    #[test]
    fn derivations() {
        let p = params();
        assert_eq!(poly(&p, &[(3, 1)]).d_dt(), poly(&p, &[(2, 3)]));
        assert_eq!(poly(&p, &[(-1, 1)]).log_derivative(), poly(&p, &[(-1, -1)]));
        for e in -32..=32 {
            let m = poly(&p, &[(e, 1)]);
            assert_eq!(m.log_derivative(), m.scale(&p.integer(e)));
        }
    }

    #[test]
    fn mismatched_params() {
        let a = LaurentElement::one(&params());
        let b = LaurentElement::one(&RingParams::laurent(7, 20, 32).unwrap());
        assert_eq!(a.checked_add(&b), Err(Error::MismatchedParams));
        assert_eq!(a.checked_mul(&b), Err(Error::MismatchedParams));
    }

    #[test]
    fn power_series_mode_rejects_negative_window() {
        assert!(RingParams::new(5, 20, 3, 10, RingMode::PowerSeries).is_err());
        let p = RingParams::power_series(5, 20, 10).unwrap();
        let x = poly(&p, &[(-1, 1)]);
        assert!(x.is_zero());
        assert!(!x.tail_neg());
    }

    #[test]
    fn inverse_of_unit_series() {
        let p = params();
        let x = poly(&p, &[(0, 1), (1, 1)]);
        let y = x.try_inverse().unwrap();
        assert!(y.tail_pos());
        let prod = x * y;
        assert_eq!(prod.constant_term(), p.integer(1));
        assert!(prod.terms().all(|(e, _)| e == 0 || e == 32));
        let m = poly(&p, &[(-3, 4)]);
        let mi = m.try_inverse().unwrap();
        assert!(!mi.is_truncated());
        assert_eq!(m * mi, LaurentElement::one(&p));
    }
}
