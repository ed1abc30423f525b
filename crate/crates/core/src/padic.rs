//! p-adic floating coefficients in `Q_q = W(F_q)[1/p]`.
//!
//! A [`PadicNumber`] is `p^val * unit` where the unit is known modulo
//! `p^(prec - val)`; `prec` is the absolute precision. For `q = p^a` with
//! `a > 1` the unit is a polynomial of degree `< a` reduced modulo a fixed
//! monic lift of an irreducible polynomial over `F_p`.
//!
//! Integers that enter through formulas (exponents, ramification indices,
//! identity matrices) are kept *exact*: they carry no precision bound and
//! never degrade the precision of what they are combined with.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::scalar::{Field, Ring};

/// Absolute precision marker for exact values.
pub const EXACT: i64 = i64::MAX;

fn add_prec(a: i64, b: i64) -> i64 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        a.saturating_add(b).min(EXACT - 1)
    }
}

/// The unramified coefficient field `Q_q` together with the default
/// relative precision used when an exact value has to be inverted.
#[derive(Debug)]
pub struct UnramifiedField {
    p: u64,
    prime: BigInt,
    degree: usize,
    /// Monic modulus, low-to-high, length `degree + 1`.
    modulus: Vec<BigInt>,
    precision: i64,
    frobenius_generator: Mutex<Option<(i64, Vec<BigInt>)>>,
}

impl PartialEq for UnramifiedField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.degree == other.degree
            && self.modulus == other.modulus
            && self.precision == other.precision
    }
}

impl Eq for UnramifiedField {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl UnramifiedField {
    /// `modulus` is ignored (and may be `None`) when `degree == 1`.
    pub fn new(
        p: u64,
        degree: usize,
        modulus: Option<&[i64]>,
        precision: i64,
    ) -> Result<Arc<Self>, Error> {
        if !is_prime(p) || p > u32::MAX as u64 {
            return Err(Error::NotPrime(p));
        }
        if precision < 1 {
            return Err(Error::BadPrecision(precision));
        }
        if degree == 0 {
            return Err(Error::BadModulus("residue degree must be at least 1".into()));
        }
        let modulus: Vec<BigInt> = if degree == 1 {
            vec![BigInt::zero(), BigInt::one()]
        } else {
            let m = modulus.ok_or_else(|| {
                Error::BadModulus(format!("degree {degree} needs an explicit modulus"))
            })?;
            if m.len() != degree + 1 || m[degree] != 1 {
                return Err(Error::BadModulus(format!(
                    "modulus must be monic of degree {degree}, low-to-high"
                )));
            }
            let reduced: Vec<u64> = m.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
            if !fp::is_irreducible(&reduced, p) {
                return Err(Error::BadModulus(format!(
                    "modulus {m:?} is not irreducible modulo {p}"
                )));
            }
            m.iter().map(|&c| BigInt::from(c)).collect()
        };
        Ok(Arc::new(UnramifiedField {
            p,
            prime: BigInt::from(p),
            degree,
            modulus,
            precision,
            frobenius_generator: Mutex::new(None),
        }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    pub fn q(&self) -> BigInt {
        self.prime.pow(self.degree as u32)
    }

    pub fn modulus(&self) -> Vec<i64> {
        self.modulus.iter().map(|c| c.to_i64().unwrap_or(0)).collect()
    }

    fn p_pow(&self, k: i64) -> BigInt {
        debug_assert!(k >= 0);
        self.prime.pow(k as u32)
    }

    fn val_of_int(&self, x: &BigInt) -> i64 {
        if x.is_zero() {
            return i64::MAX;
        }
        let mut v = 0;
        let mut y = x.clone();
        loop {
            let (q, r) = y.div_rem(&self.prime);
            if !r.is_zero() {
                return v;
            }
            y = q;
            v += 1;
        }
    }

    fn poly_mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let d = self.degree;
        if d == 1 {
            return vec![&a[0] * &b[0]];
        }
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        for top in (d..prod.len()).rev() {
            let c = std::mem::take(&mut prod[top]);
            if c.is_zero() {
                continue;
            }
            for j in 0..d {
                prod[top - d + j] -= &c * &self.modulus[j];
            }
        }
        prod.truncate(d);
        prod
    }

    fn reduce(&self, coeffs: &mut [BigInt], modulus: &BigInt) {
        for c in coeffs.iter_mut() {
            *c = c.mod_floor(modulus);
        }
    }

    /// Inverse of a unit modulo `p^k`.
    fn unit_inverse(&self, unit: &[BigInt], k: i64) -> Vec<BigInt> {
        let m = self.p_pow(k);
        if self.degree == 1 {
            let g = unit[0].extended_gcd(&m);
            debug_assert!(g.gcd.is_one() || (-g.gcd.clone()).is_one());
            let mut inv = g.x * &g.gcd;
            inv = inv.mod_floor(&m);
            return vec![inv];
        }
        let p = self.p;
        let reduced: Vec<u64> = unit
            .iter()
            .map(|c| c.mod_floor(&self.prime).to_u64().unwrap())
            .collect();
        let f: Vec<u64> = self
            .modulus
            .iter()
            .map(|c| c.mod_floor(&self.prime).to_u64().unwrap())
            .collect();
        let inv0 = fp::inverse_mod(&reduced, &f, p).expect("unit is invertible modulo p");
        let mut y: Vec<BigInt> = inv0.into_iter().map(BigInt::from).collect();
        y.resize(self.degree, BigInt::zero());
        let two = BigInt::from(2);
        let mut reached = 1i64;
        while reached < k {
            reached = (reached * 2).min(k);
            let mk = self.p_pow(reached);
            let mut uy = self.poly_mul(unit, &y);
            for c in uy.iter_mut() {
                *c = -&*c;
            }
            uy[0] += &two;
            y = self.poly_mul(&y, &uy);
            self.reduce(&mut y, &mk);
        }
        self.reduce(&mut y, &m);
        y
    }

    fn poly_eval_modulus(&self, y: &[BigInt], m: &BigInt) -> (Vec<BigInt>, Vec<BigInt>) {
        // f(y) and f'(y) in Z[x]/(f) modulo m, by Horner.
        let d = self.degree;
        let mut val = vec![BigInt::zero(); d];
        let mut der = vec![BigInt::zero(); d];
        for i in (0..=d).rev() {
            // der = der*y + val; val = val*y + c_i
            let mut nd = self.poly_mul(&der, y);
            for (a, b) in nd.iter_mut().zip(val.iter()) {
                *a += b;
            }
            let mut nv = self.poly_mul(&val, y);
            nv[0] += &self.modulus[i];
            self.reduce(&mut nd, m);
            self.reduce(&mut nv, m);
            der = nd;
            val = nv;
        }
        (val, der)
    }

    /// Image of the generator `x` under the Frobenius lift, modulo `p^k`.
    fn frobenius_of_generator(&self, k: i64) -> Vec<BigInt> {
        let mut cache = self.frobenius_generator.lock().expect("frobenius cache");
        if let Some((have, v)) = cache.as_ref() {
            if *have >= k {
                let mut out = v.clone();
                self.reduce(&mut out, &self.p_pow(k));
                return out;
            }
        }
        let target = k.max(self.precision + 16);
        let m = self.p_pow(target);
        // Start from x^p, which is correct modulo p.
        let mut x = vec![BigInt::zero(); self.degree];
        x[1] = BigInt::one();
        let mut y = vec![BigInt::zero(); self.degree];
        y[0] = BigInt::one();
        for _ in 0..self.p {
            y = self.poly_mul(&y, &x);
        }
        self.reduce(&mut y, &m);
        loop {
            let (fy, dfy) = self.poly_eval_modulus(&y, &m);
            if fy.iter().all(|c| c.is_zero()) {
                break;
            }
            let inv = self.unit_inverse(&dfy, target);
            let step = self.poly_mul(&fy, &inv);
            for (a, b) in y.iter_mut().zip(step.iter()) {
                *a -= b;
            }
            self.reduce(&mut y, &m);
        }
        *cache = Some((target, y.clone()));
        self.reduce(&mut y, &self.p_pow(k));
        y
    }
}

/// A p-adic float `p^val * unit + O(p^prec)`.
#[derive(Clone)]
pub struct PadicNumber {
    field: Arc<UnramifiedField>,
    val: i64,
    /// Empty for zero.
    unit: Vec<BigInt>,
    prec: i64,
}

impl PadicNumber {
    pub fn zero(field: &Arc<UnramifiedField>, prec: i64) -> Self {
        PadicNumber {
            field: field.clone(),
            val: prec,
            unit: Vec::new(),
            prec,
        }
    }

    pub fn exact_zero(field: &Arc<UnramifiedField>) -> Self {
        Self::zero(field, EXACT)
    }

    pub fn exact_integer(field: &Arc<UnramifiedField>, n: impl Into<BigInt>) -> Self {
        let mut coeffs = vec![BigInt::zero(); field.degree];
        coeffs[0] = n.into();
        Self::normalize(field, 0, coeffs, EXACT)
    }

    /// `x` to absolute precision `prec`.
    pub fn from_rational(field: &Arc<UnramifiedField>, x: &BigRational, prec: i64) -> Self {
        if x.is_zero() {
            return Self::zero(field, prec);
        }
        let vn = field.val_of_int(x.numer());
        let vd = field.val_of_int(x.denom());
        let val = vn - vd;
        if val >= prec {
            return Self::zero(field, prec);
        }
        let pn = field.p_pow(vn);
        let pd = field.p_pow(vd);
        let num = x.numer() / pn;
        let den = x.denom() / pd;
        let rel = prec - val;
        let m = field.p_pow(rel);
        let dinv = field.unit_inverse(&Self::scalar_poly(field, den), rel);
        let mut coeffs = field.poly_mul(&Self::scalar_poly(field, num), &dinv);
        field.reduce(&mut coeffs, &m);
        PadicNumber {
            field: field.clone(),
            val,
            unit: coeffs,
            prec,
        }
    }

    pub fn from_integer(field: &Arc<UnramifiedField>, n: impl Into<BigInt>, prec: i64) -> Self {
        Self::from_rational(field, &BigRational::from_integer(n.into()), prec)
    }

    /// Builds `p^val * Σ c_i x^i + O(p^prec)`; the coefficients need not be
    /// normalized.
    pub fn from_parts(
        field: &Arc<UnramifiedField>,
        val: i64,
        coeffs: Vec<BigInt>,
        prec: i64,
    ) -> Self {
        let mut coeffs = coeffs;
        coeffs.resize(field.degree, BigInt::zero());
        Self::normalize(field, val, coeffs, prec)
    }

    fn scalar_poly(field: &UnramifiedField, c: BigInt) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); field.degree];
        v[0] = c;
        v
    }

    fn normalize(field: &Arc<UnramifiedField>, val: i64, mut coeffs: Vec<BigInt>, prec: i64) -> Self {
        let v0 = coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| field.val_of_int(c))
            .min();
        let Some(v0) = v0 else {
            return Self::zero(field, prec);
        };
        if prec != EXACT && v0 >= prec - val {
            return Self::zero(field, prec);
        }
        if v0 > 0 {
            let pv = field.p_pow(v0);
            for c in coeffs.iter_mut() {
                *c = &*c / &pv;
            }
        }
        let val = val + v0;
        if prec != EXACT {
            field.reduce(&mut coeffs, &field.p_pow(prec - val));
        }
        PadicNumber {
            field: field.clone(),
            val,
            unit: coeffs,
            prec,
        }
    }

    pub fn field(&self) -> &Arc<UnramifiedField> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// `None` for zero at precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Absolute precision (`EXACT` for exact values).
    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn relative_precision(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else if self.prec == EXACT {
            Some(EXACT)
        } else {
            Some(self.prec - self.val)
        }
    }

    pub fn unit_coefficients(&self) -> &[BigInt] {
        &self.unit
    }

    /// Lowers the absolute precision to `prec` (never raises it).
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        if self.is_zero() {
            return Self::zero(&self.field, prec);
        }
        Self::normalize(&self.field, self.val, self.unit.clone(), prec)
    }

    fn same_field(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field
    }

    fn sum(&self, other: &Self) -> Self {
        assert!(self.same_field(other), "p-adic numbers from different fields");
        let prec = self.prec.min(other.prec);
        if self.is_zero() {
            return other.truncate(prec);
        }
        if other.is_zero() {
            return self.truncate(prec);
        }
        let v = self.val.min(other.val);
        let lift = |x: &PadicNumber| -> Vec<BigInt> {
            let s = x.field.p_pow(x.val - v);
            x.unit.iter().map(|c| c * &s).collect()
        };
        let mut a = lift(self);
        for (c, d) in a.iter_mut().zip(lift(other)) {
            *c += d;
        }
        Self::normalize(&self.field, v, a, prec)
    }

    fn product(&self, other: &Self) -> Self {
        assert!(self.same_field(other), "p-adic numbers from different fields");
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Self::zero(&self.field, add_prec(self.prec, other.prec)),
            (true, false) => return Self::zero(&self.field, add_prec(self.prec, other.val)),
            (false, true) => return Self::zero(&self.field, add_prec(other.prec, self.val)),
            _ => {}
        }
        let val = self.val + other.val;
        let rel = match (self.relative_precision(), other.relative_precision()) {
            (Some(a), Some(b)) => a.min(b),
            _ => unreachable!(),
        };
        let unit = self.field.poly_mul(&self.unit, &other.unit);
        let prec = if rel == EXACT { EXACT } else { val + rel };
        Self::normalize(&self.field, val, unit, prec)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let field = &self.field;
        if self.prec == EXACT {
            let u = &self.unit;
            let is_pm_one = field.degree == 1 && (u[0].is_one() || (-&u[0]).is_one());
            if is_pm_one {
                return Some(PadicNumber {
                    field: field.clone(),
                    val: -self.val,
                    unit: u.clone(),
                    prec: EXACT,
                });
            }
            let rel = field.precision;
            let inv = field.unit_inverse(&self.unit, rel);
            return Some(Self::normalize(field, -self.val, inv, -self.val + rel));
        }
        let rel = self.prec - self.val;
        let inv = field.unit_inverse(&self.unit, rel);
        Some(Self::normalize(field, -self.val, inv, -self.val + rel))
    }

    pub fn pow(&self, n: i64) -> Self {
        if n < 0 {
            return self
                .inverse()
                .expect("negative power of zero")
                .pow(-n);
        }
        let mut acc = PadicNumber::exact_integer(&self.field, 1);
        let mut base = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.product(&base);
            }
            base = base.product(&base);
            k >>= 1;
        }
        acc
    }

    /// The Witt-vector Frobenius on `Q_q` (identity when `q = p`).
    pub fn sigma(&self) -> Self {
        if self.field.degree == 1 || self.is_zero() {
            return self.clone();
        }
        let field = &self.field;
        let rel = if self.prec == EXACT {
            // Exact units of degree > 1 only arise from integers.
            if self.unit[1..].iter().all(|c| c.is_zero()) {
                return self.clone();
            }
            field.precision
        } else {
            self.prec - self.val
        };
        let m = field.p_pow(rel);
        let fx = field.frobenius_of_generator(rel);
        let mut acc = vec![BigInt::zero(); field.degree];
        for c in self.unit.iter().rev() {
            acc = field.poly_mul(&acc, &fx);
            acc[0] += c;
            field.reduce(&mut acc, &m);
        }
        let prec = if self.prec == EXACT { self.val + rel } else { self.prec };
        Self::normalize(field, self.val, acc, prec)
    }

    /// Rational reconstruction of the unit (small-height continued fraction
    /// step of the extended Euclidean algorithm). Only for units lying in
    /// `Z_p`.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.unit[1..].iter().any(|c| !c.is_zero()) {
            return None;
        }
        let scale = |r: BigRational| -> BigRational {
            if self.val >= 0 {
                r * BigRational::from_integer(self.field.p_pow(self.val))
            } else {
                r / BigRational::from_integer(self.field.p_pow(-self.val))
            }
        };
        if self.prec == EXACT {
            return Some(scale(BigRational::from_integer(self.unit[0].clone())));
        }
        let rel = self.prec - self.val;
        let m = self.field.p_pow(rel);
        let (a, b) = rational_reconstruct(&self.unit[0], &m)?;
        Some(scale(BigRational::new(a, b)))
    }

    pub fn p(&self) -> u64 {
        self.field.p
    }
}

/// Finds `a/b ≡ u (mod m)` with `|a|, |b| <= sqrt(m/2)`.
pub fn rational_reconstruct(u: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !t1.gcd(m).is_one() {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prec == EXACT {
            write!(f, "{self}")
        } else {
            write!(f, "{self} + O({}^{})", self.field.p, self.prec)
        }
    }
}

impl fmt::Display for PadicNumber {
    /// `m/n` when rational reconstruction succeeds, `p^v*u` otherwise
    /// (`p^v*[u0,u1,..]` for units outside `Z_p`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if let Some(r) = self.to_rational() {
            return if r.denom().is_one() {
                write!(f, "{}", r.numer())
            } else {
                write!(f, "{}/{}", r.numer(), r.denom())
            };
        }
        if self.field.degree == 1 || self.unit[1..].iter().all(|c| c.is_zero()) {
            write!(f, "{}^{}*{}", self.field.p, self.val, self.unit[0])
        } else {
            let parts: Vec<String> = self.unit.iter().map(|c| c.to_string()).collect();
            write!(f, "{}^{}*[{}]", self.field.p, self.val, parts.join(","))
        }
    }
}

impl PartialEq for PadicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other) && self.sum(&other.neg_ref()).is_zero()
    }
}

impl PadicNumber {
    fn neg_ref(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let coeffs = self.unit.iter().map(|c| -c).collect();
        Self::normalize(&self.field, self.val, coeffs, self.prec)
    }
}

impl Add for PadicNumber {
    type Output = PadicNumber;
    fn add(self, rhs: Self) -> Self {
        self.sum(&rhs)
    }
}

impl<'a> Add<&'a PadicNumber> for &'a PadicNumber {
    type Output = PadicNumber;
    fn add(self, rhs: &PadicNumber) -> PadicNumber {
        self.sum(rhs)
    }
}

impl Sub for PadicNumber {
    type Output = PadicNumber;
    fn sub(self, rhs: Self) -> Self {
        self.sum(&rhs.neg_ref())
    }
}

impl<'a> Sub<&'a PadicNumber> for &'a PadicNumber {
    type Output = PadicNumber;
    fn sub(self, rhs: &PadicNumber) -> PadicNumber {
        self.sum(&rhs.neg_ref())
    }
}

impl Mul for PadicNumber {
    type Output = PadicNumber;
    fn mul(self, rhs: Self) -> Self {
        self.product(&rhs)
    }
}

impl<'a> Mul<&'a PadicNumber> for &'a PadicNumber {
    type Output = PadicNumber;
    fn mul(self, rhs: &PadicNumber) -> PadicNumber {
        self.product(rhs)
    }
}

impl Div for PadicNumber {
    type Output = PadicNumber;
    fn div(self, rhs: Self) -> Self {
        self.product(&rhs.inverse().expect("division by p-adic zero"))
    }
}

impl Neg for PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> Self {
        self.neg_ref()
    }
}

impl Ring for PadicNumber {
    fn zero_like(&self) -> Self {
        PadicNumber::exact_zero(&self.field)
    }
    fn one_like(&self) -> Self {
        PadicNumber::exact_integer(&self.field, 1)
    }
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        PadicNumber::exact_integer(&self.field, n)
    }
}

impl Field for PadicNumber {
    fn pivot_cost(&self) -> i64 {
        match self.valuation() {
            None => i64::MAX,
            // Prefer exact pivots at equal valuation.
            Some(v) => 2 * v + i64::from(!self.is_exact()),
        }
    }

    fn recip(&self) -> Self {
        self.inverse().expect("reciprocal of p-adic zero")
    }
}

/// Arithmetic over `F_p` used for the residue field of `Q_q`.
mod fp {
    fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    fn mulmod(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    fn inv(a: u64, p: u64) -> u64 {
        // Fermat; p is prime.
        let mut r = 1u64;
        let mut b = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b, p);
            }
            b = mulmod(b, b, p);
            e >>= 1;
        }
        r
    }

    fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let mut r = a.to_vec();
        trim(&mut r);
        let mut b = b.to_vec();
        trim(&mut b);
        assert!(!b.is_empty());
        let db = b.len() - 1;
        let lead_inv = inv(b[db], p);
        if r.len() < b.len() {
            return (vec![], r);
        }
        let mut q = vec![0u64; r.len() - db];
        while r.len() > db && !r.is_empty() {
            let dr = r.len() - 1;
            let c = mulmod(r[dr], lead_inv, p);
            q[dr - db] = c;
            for j in 0..=db {
                let sub = mulmod(c, b[j], p);
                r[dr - db + j] = (r[dr - db + j] + p - sub) % p;
            }
            trim(&mut r);
        }
        trim(&mut q);
        (q, r)
    }

    fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
            }
        }
        trim(&mut out);
        out
    }

    fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut out = vec![0u64; n];
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            out[i] = (x + p - y) % p;
        }
        trim(&mut out);
        out
    }

    fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let (_, r) = divrem(&a, &b, p);
            a = std::mem::replace(&mut b, r);
        }
        a
    }

    fn powmod(base: &[u64], mut e: u128, f: &[u64], p: u64) -> Vec<u64> {
        let mut result = vec![1u64];
        let mut b = divrem(base, f, p).1;
        while e > 0 {
            if e & 1 == 1 {
                result = divrem(&mul(&result, &b, p), f, p).1;
            }
            b = divrem(&mul(&b, &b, p), f, p).1;
            e >>= 1;
        }
        result
    }

    /// Rabin's irreducibility test.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let mut f = f.to_vec();
        trim(&mut f);
        if f.len() < 2 {
            return false;
        }
        let n = f.len() - 1;
        let x = vec![0u64, 1];
        let pn = (p as u128).pow(n as u32);
        if sub(&powmod(&x, pn, &f, p), &x, p).iter().any(|&c| c != 0) {
            return false;
        }
        let mut m = n;
        let mut primes = vec![];
        let mut d = 2;
        while d <= m {
            if m.is_multiple_of(d) {
                primes.push(d);
                while m.is_multiple_of(d) {
                    m /= d;
                }
            }
            d += 1;
        }
        for r in primes {
            let e = (p as u128).pow((n / r) as u32);
            let h = sub(&powmod(&x, e, &f, p), &x, p);
            let g = gcd(&f, &h, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }

    /// Inverse of `a` modulo `f` over `F_p`, as a vector of length `deg f`.
    pub fn inverse_mod(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
        // Extended Euclid tracking the coefficient of `a`.
        let mut r0 = f.to_vec();
        trim(&mut r0);
        let mut r1 = divrem(a, f, p).1;
        let mut s0: Vec<u64> = vec![];
        let mut s1: Vec<u64> = vec![1];
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1, p);
            let s2 = sub(&s0, &mul(&q, &s1, p), p);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        if r0.len() != 1 {
            return None;
        }
        let c = inv(r0[0], p);
        let mut out: Vec<u64> = s0.iter().map(|&x| mulmod(x, c, p)).collect();
        out.resize(f.len() - 1, 0);
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(p: u64, n: i64) -> Arc<UnramifiedField> {
        UnramifiedField::new(p, 1, None, n).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn rational_round_trip() {
        let f = qp(5, 20);
        for (a, b) in [(1, 2), (-7, 3), (25, 4), (3, 125), (-1, 1)] {
            let x = PadicNumber::from_rational(&f, &rat(a, b), 20);
            assert_eq!(x.to_rational().unwrap(), rat(a, b), "{a}/{b}");
        }
    }

    #[test]
    fn valuation_and_precision() {
        let f = qp(5, 20);
        let x = PadicNumber::from_rational(&f, &rat(50, 1), 20);
        assert_eq!(x.valuation(), Some(2));
        assert_eq!(x.relative_precision(), Some(18));
        let y = PadicNumber::from_rational(&f, &rat(1, 25), 20);
        assert_eq!(y.valuation(), Some(-2));
        let z = x.clone() * y;
        assert_eq!(z.to_rational().unwrap(), rat(2, 1));
        assert_eq!(z.precision(), 18);
    }

    #[test]
    fn cancellation_is_zero_at_precision() {
        let f = qp(7, 10);
        let x = PadicNumber::from_rational(&f, &rat(3, 11), 10);
        let d = x.clone() - x;
        assert!(d.is_zero());
        assert_eq!(d.precision(), 10);
    }

    #[test]
    fn exact_integers_keep_precision() {
        let f = qp(5, 20);
        let x = PadicNumber::from_rational(&f, &rat(1, 3), 20);
        let five = PadicNumber::exact_integer(&f, 5);
        let y = five * x.clone();
        assert_eq!(y.valuation(), Some(1));
        assert_eq!(y.precision(), 21);
        assert_eq!(y.relative_precision(), x.relative_precision());
    }

    #[test]
    fn inverse_times_self_is_one() {
        let f = qp(3, 15);
        let x = PadicNumber::from_rational(&f, &rat(-18, 7), 15);
        let one = x.clone() * x.inverse().unwrap();
        assert_eq!(one.to_rational().unwrap(), rat(1, 1));
    }

    #[test]
    fn unramified_quadratic_extension() {
        // F_25 = F_5[x]/(x^2 - 2), lifted as x^2 - 2.
        let f = UnramifiedField::new(5, 2, Some(&[-2, 0, 1]), 12).unwrap();
        let x = PadicNumber::from_parts(&f, 0, vec![BigInt::from(1), BigInt::from(1)], 12);
        let inv = x.inverse().unwrap();
        let one = x.clone() * inv;
        assert_eq!(one.to_rational().unwrap(), rat(1, 1));
        // sigma is an automorphism of order 2 fixing Z_5.
        let sx = x.sigma();
        assert_ne!(sx, x);
        assert_eq!(sx.sigma(), x);
        let y = PadicNumber::from_parts(&f, 0, vec![BigInt::from(3), BigInt::from(-4)], 12);
        assert_eq!((x.clone() * y.clone()).sigma(), x.sigma() * y.sigma());
        let c = PadicNumber::from_rational(&f, &rat(2, 3), 12);
        assert_eq!(c.sigma(), c);
    }

    #[test]
    fn reducible_modulus_rejected() {
        assert!(UnramifiedField::new(5, 2, Some(&[-4, 0, 1]), 10).is_err());
        assert!(UnramifiedField::new(6, 1, None, 10).is_err());
    }

    #[test]
    fn display_forms() {
        let f = qp(5, 20);
        assert_eq!(PadicNumber::from_rational(&f, &rat(-3, 4), 20).to_string(), "-3/4");
        assert_eq!(PadicNumber::exact_integer(&f, 25).to_string(), "25");
    }
}
