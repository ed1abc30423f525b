//! Weil–Deligne representations with exact (rational or quadratic)
//! coefficients: monodromy filtration, weights, purity and compatibility of
//! families through trace tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::matrix::induced_on_quotient;
use crate::matrix::{Matrix, Subspace};
use crate::poly;
use crate::quadratic::{rational_to_f64, Quadratic};

pub type QuadMatrix = Matrix<Quadratic>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `Phi` lifts geometric Frobenius; `Phi N Phi⁻¹ = q⁻¹ N`; weight `w`
    /// means `|α| = q^{w/2}`.
    Geometric,
    /// `Phi` lifts arithmetic Frobenius; `Phi N Phi⁻¹ = q N`. Eigenvalue
    /// weights are negated, so reported weights match the geometric ones.
    Arithmetic,
}

impl Convention {
    /// Exponent `ε` in `Phi N Phi⁻¹ = q^ε N`.
    pub fn epsilon(self) -> i64 {
        match self {
            Convention::Geometric => -1,
            Convention::Arithmetic => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Geometric => "geometric",
            Convention::Arithmetic => "arithmetic",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inertia {
    pub order: u32,
    pub matrix: QuadMatrix,
}

/// Splits a prime power `q = p^a`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let (mut r, mut a) = (q, 0);
    while r % p == 0 {
        r /= p;
        a += 1;
    }
    (r == 1).then_some((p, a))
}

fn q_pow(q: u64, n: i64) -> Quadratic {
    let base = BigRational::from_integer(q.into());
    let v = num_traits::pow(base, n.unsigned_abs() as usize);
    Quadratic::rational(if n >= 0 { v } else { v.recip() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeilDeligneRep {
    q: u64,
    phi: QuadMatrix,
    n: QuadMatrix,
    inertia: Option<Inertia>,
    convention: Convention,
    label: String,
}

impl WeilDeligneRep {
    /// Validates shapes, invertibility of `Phi`, nilpotence of `N`,
    /// `Phi N Phi⁻¹ = q^ε N`, `T^m = I` and `T N = N T`.
    pub fn new(
        q: u64,
        phi: QuadMatrix,
        n: QuadMatrix,
        inertia: Option<Inertia>,
        convention: Convention,
    ) -> Result<Self> {
        let rep = Self::new_unvalidated(q, phi, n, inertia, convention)?;
        let inv = rep.phi.inverse().expect("checked");
        let lhs = rep.phi.mul(&rep.n).mul(&inv);
        let rhs = rep.n.scale(&q_pow(q, convention.epsilon()));
        if lhs != rhs {
            return Err(Error::InvalidRepresentation(format!(
                "Phi N Phi^-1 != q^{} N",
                convention.epsilon()
            )));
        }
        Ok(rep)
    }

    /// Checks everything except the equivariance of `N`; for analyzing
    /// malformed data (the verdicts then report the failure).
    pub fn new_unvalidated(
        q: u64,
        phi: QuadMatrix,
        n: QuadMatrix,
        inertia: Option<Inertia>,
        convention: Convention,
    ) -> Result<Self> {
        if prime_power(q).is_none() {
            return Err(Error::InvalidRepresentation(format!("q = {q} is not a prime power")));
        }
        let d = phi.nrows();
        if !phi.is_square() || n.nrows() != d || n.ncols() != d {
            return Err(Error::DimensionMismatch("Phi and N must be square of equal size".into()));
        }
        if phi.inverse().is_none() {
            return Err(Error::NonInvertible("Phi".into()));
        }
        if !n.is_nilpotent() {
            return Err(Error::NotNilpotent);
        }
        if let Some(t) = &inertia {
            if t.matrix.nrows() != d || !t.matrix.is_square() || t.order == 0 {
                return Err(Error::DimensionMismatch("inertia matrix".into()));
            }
            if t.matrix.pow(t.order) != Matrix::identity(d, &Quadratic::zero()) {
                return Err(Error::InvalidRepresentation(format!(
                    "inertia generator does not have order dividing {}",
                    t.order
                )));
            }
            if t.matrix.mul(&n) != n.mul(&t.matrix) {
                return Err(Error::InvalidRepresentation("T N != N T".into()));
            }
        }
        Ok(WeilDeligneRep {
            q,
            phi,
            n,
            inertia,
            convention,
            label: String::new(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn phi(&self) -> &QuadMatrix {
        &self.phi
    }

    pub fn monodromy(&self) -> &QuadMatrix {
        &self.n
    }

    pub fn inertia(&self) -> Option<&Inertia> {
        self.inertia.as_ref()
    }

    pub fn inertia_order(&self) -> u32 {
        self.inertia.as_ref().map_or(1, |t| t.order)
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// True if `Phi N Phi⁻¹ = q^ε N`.
    pub fn is_equivariant(&self) -> bool {
        let inv = self.phi.inverse().expect("checked at construction");
        self.phi.mul(&self.n).mul(&inv) == self.n.scale(&q_pow(self.q, self.convention.epsilon()))
    }

    /// The same representation described by the other Frobenius lift.
    pub fn to_convention(&self, convention: Convention) -> Self {
        if convention == self.convention {
            return self.clone();
        }
        WeilDeligneRep {
            phi: self.phi.inverse().expect("checked at construction"),
            convention,
            ..self.clone()
        }
    }

    /// Twist by `n`: every weight moves by `−2n`.
    pub fn twist(&self, n: i64) -> Self {
        let c = match self.convention {
            Convention::Geometric => q_pow(self.q, -n),
            Convention::Arithmetic => q_pow(self.q, n),
        };
        WeilDeligneRep {
            phi: self.phi.scale(&c),
            ..self.clone()
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.q != other.q {
            return Err(Error::InvalidRepresentation("different q".into()));
        }
        let other = other.to_convention(self.convention);
        let inertia = match (&self.inertia, &other.inertia) {
            (None, None) => None,
            (a, b) => {
                let m = a.as_ref().map_or(1, |t| t.order).lcm(&b.as_ref().map_or(1, |t| t.order));
                let id = |d: usize| Matrix::identity(d, &Quadratic::zero());
                let ta = a.as_ref().map_or_else(|| id(self.dim()), |t| t.matrix.clone());
                let tb = b.as_ref().map_or_else(|| id(other.dim()), |t| t.matrix.clone());
                Some(Inertia {
                    order: m,
                    matrix: ta.direct_sum(&tb),
                })
            }
        };
        Ok(WeilDeligneRep {
            q: self.q,
            phi: self.phi.direct_sum(&other.phi),
            n: self.n.direct_sum(&other.n),
            inertia,
            convention: self.convention,
            label: format!("({}) ⊕ ({})", self.label, other.label),
        })
    }

    pub fn monodromy_filtration(&self) -> Result<MonodromyFiltration> {
        monodromy_filtration(&self.n)
    }

    /// Eigenvalues of `Phi` with their weights.
    pub fn weights(&self) -> Result<Vec<WeightedRoot>> {
        matrix_weights(&self.phi, self.q, self.convention)
    }

    /// Weights of `Phi` on `Gr_k` of the monodromy filtration, for every `k`
    /// with a nonzero graded piece.
    pub fn graded_weights(&self) -> Result<Vec<(i64, usize, Vec<WeightedRoot>)>> {
        let filt = self.monodromy_filtration()?;
        let mut out = Vec::new();
        for k in filt.indices() {
            let (upper, lower) = (filt.get(k), filt.get(k - 1));
            if upper.dim() == lower.dim() {
                continue;
            }
            let phi_k = induced_on_quotient(&self.phi, &upper, &lower);
            out.push((k, phi_k.nrows(), matrix_weights(&phi_k, self.q, self.convention)?));
        }
        Ok(out)
    }

    pub fn purity_check(&self, i: i64) -> Result<PurityReport> {
        let weights = self.weights()?;
        let expected = BigRational::from_integer(i.into());
        let offending = weights.iter().find(|w| w.weight.as_ref() != Some(&expected)).cloned();
        Ok(PurityReport {
            weight: i,
            pure: offending.is_none(),
            weights,
            offending,
        })
    }

    /// Quasi-purity of weight `i`: `Gr_k` pure of weight `i + k`.
    pub fn quasi_purity_check(&self, i: i64) -> Result<QuasiPurityReport> {
        let mut graded = Vec::new();
        for (k, rank, weights) in self.graded_weights()? {
            let expected_weight = i + k;
            let expected = BigRational::from_integer(expected_weight.into());
            let pure = weights.iter().all(|w| w.weight.as_ref() == Some(&expected));
            graded.push(GradedWeights {
                index: k,
                rank,
                weights,
                expected_weight,
                pure,
            });
        }
        let quasi_pure = graded.iter().all(|g| g.pure);
        let n_zero = self.n.is_zero();
        let verdict = match (quasi_pure, n_zero) {
            (true, true) => Verdict::Pure,
            (true, false) => Verdict::QuasiPure,
            (false, _) => Verdict::NotQuasiPure,
        };
        Ok(QuasiPurityReport {
            weight: i,
            verdict,
            graded,
            convention: self.convention,
        })
    }

    /// The weight `i` for which the representation is quasi-pure, read off
    /// the first graded piece; `None` if the pieces do not fit one `i`.
    pub fn infer_weight(&self) -> Result<Option<i64>> {
        let graded = self.graded_weights()?;
        let Some((k, _, ws)) = graded.first() else { return Ok(Some(0)) };
        let Some(w) = ws.first().and_then(|w| w.weight.clone()) else { return Ok(None) };
        if !w.is_integer() {
            return Ok(None);
        }
        let i = w.to_integer().to_i64().unwrap_or(0) - k;
        Ok(self.quasi_purity_check(i)?.verdict.is_ok().then_some(i))
    }

    /// `Tr(Phi^n T^j | Gr_k)` in the geometric normalization, for
    /// `1 ≤ n ≤ n_max`, `0 ≤ j < inertia_period` and every `k` in
    /// `[−s, s]`.
    pub fn trace_table(&self, n_max: u32, inertia_period: u32) -> Result<TraceTable> {
        let rep = self.to_convention(Convention::Geometric);
        let filt = rep.monodromy_filtration()?;
        let d = rep.dim();
        let one = Matrix::identity(d, &Quadratic::zero());
        let t = rep.inertia.as_ref().map_or(one, |t| t.matrix.clone());
        let mut entries = BTreeMap::new();
        for k in filt.indices() {
            let (upper, lower) = (filt.get(k), filt.get(k - 1));
            let phi_k = induced_on_quotient(&rep.phi, &upper, &lower);
            let t_k = induced_on_quotient(&t, &upper, &lower);
            let mut phi_pow = Matrix::identity(phi_k.nrows(), &Quadratic::zero());
            for n in 1..=n_max {
                phi_pow = phi_pow.mul(&phi_k);
                let mut t_pow = Matrix::identity(t_k.nrows(), &Quadratic::zero());
                for j in 0..inertia_period.max(1) {
                    let tr = phi_pow.mul(&t_pow).trace();
                    let r = tr.to_rational().ok_or_else(|| {
                        Error::IrrationalTrace(format!("Tr(Phi^{n} T^{j} | Gr_{k}) = {tr}"))
                    })?;
                    entries.insert((k, n, j), r);
                    t_pow = t_pow.mul(&t_k);
                }
            }
        }
        Ok(TraceTable { entries })
    }
}

/// The filtration `M_k`, `k ∈ [−s, s]`, with `M_k = 0` below and `V`
/// above that range.
#[derive(Clone, Debug)]
pub struct MonodromyFiltration {
    pub s: i64,
    dim: usize,
    spaces: BTreeMap<i64, Subspace<Quadratic>>,
}

impl MonodromyFiltration {
    pub fn from_spaces(dim: usize, spaces: BTreeMap<i64, Subspace<Quadratic>>) -> Self {
        let s = spaces.keys().map(|k| k.abs()).max().unwrap_or(0);
        MonodromyFiltration { s, dim, spaces }
    }

    pub fn get(&self, k: i64) -> Subspace<Quadratic> {
        if let Some(v) = self.spaces.get(&k) {
            return v.clone();
        }
        let lowest = self.spaces.keys().next().copied().unwrap_or(0);
        if k < lowest {
            Subspace::zero(self.dim, &Quadratic::zero())
        } else {
            Subspace::whole(self.dim, &Quadratic::zero())
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        -self.s..=self.s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn graded_ranks(&self) -> Vec<(i64, usize)> {
        self.indices()
            .map(|k| (k, self.get(k).dim() - self.get(k - 1).dim()))
            .filter(|&(_, r)| r > 0)
            .collect()
    }
}

/// `M_k = Σ_{j ≥ max(0, −k)} (ker N^{k+j+1} ∩ im N^j)`, checked against
/// both axioms before returning.
pub fn monodromy_filtration(n: &QuadMatrix) -> Result<MonodromyFiltration> {
    if !n.is_nilpotent() {
        return Err(Error::NotNilpotent);
    }
    let d = n.nrows();
    let zero = Quadratic::zero();
    // Smallest s with N^{s+1} = 0.
    let mut powers = vec![Matrix::identity(d, &zero)];
    while !powers.last().unwrap().is_zero() {
        let next = powers.last().unwrap().mul(n);
        powers.push(next);
    }
    let s = powers.len() as i64 - 2;
    let s = s.max(0);
    let pw = |k: i64| -> QuadMatrix {
        let k = k as usize;
        if k < powers.len() {
            powers[k].clone()
        } else {
            Matrix::zeros(d, d, &zero)
        }
    };
    let mut spaces = BTreeMap::new();
    for k in -s..=s {
        let mut acc = Subspace::zero(d, &zero);
        for j in (-k).max(0)..=(2 * s + 1) {
            let ker = Subspace::kernel_of(&pw(k + j + 1));
            let im = Subspace::column_space(&pw(j));
            acc = acc.sum(&ker.intersection(&im));
        }
        spaces.insert(k, acc);
    }
    let filt = MonodromyFiltration::from_spaces(d, spaces);
    if let Some(k) = axiom_violation(n, &filt) {
        return Err(Error::InvalidRepresentation(format!(
            "monodromy filtration fails its axioms at k = {k}"
        )));
    }
    Ok(filt)
}

/// First index at which `N M_k ⊂ M_{k−2}` or `N^k: Gr_k ≅ Gr_{−k}` fails.
fn axiom_violation(n: &QuadMatrix, filt: &MonodromyFiltration) -> Option<i64> {
    let s = filt.s;
    for k in -s - 1..=s + 1 {
        if !filt.get(k - 2).contains_subspace(&filt.get(k).image(n)) {
            return Some(k);
        }
    }
    for k in 1..=s {
        let nk = n.pow(k as u32);
        let (up, low) = (filt.get(k), filt.get(k - 1));
        let (up_m, low_m) = (filt.get(-k), filt.get(-k - 1));
        if up.dim() - low.dim() != up_m.dim() - low_m.dim() {
            return Some(k);
        }
        // Injective on Gr_k: image of a complement meets M_{−k−1} trivially.
        let comp = up.complement_of(&low);
        let imgs: Vec<_> = comp.iter().map(|v| nk.mul_vec(v)).collect();
        let span = Subspace::span(n.nrows(), &imgs, &Quadratic::zero()).sum(&low_m);
        if span.dim() != low_m.dim() + comp.len() || !up_m.contains_subspace(&span) {
            return Some(k);
        }
    }
    None
}

/// An eigenvalue of `Phi` with its weight (`None`: not a Weil number).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedRoot {
    pub description: String,
    pub approx: (f64, f64),
    pub weight: Option<BigRational>,
    /// Decided by exact arithmetic (rational or quadratic eigenvalue).
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pure,
    QuasiPure,
    NotQuasiPure,
}

impl Verdict {
    pub fn is_ok(self) -> bool {
        self != Verdict::NotQuasiPure
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pure => "PURE",
            Verdict::QuasiPure => "QUASI_PURE",
            Verdict::NotQuasiPure => "NOT_QUASI_PURE",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PurityReport {
    pub weight: i64,
    pub pure: bool,
    pub weights: Vec<WeightedRoot>,
    pub offending: Option<WeightedRoot>,
}

#[derive(Clone, Debug)]
pub struct GradedWeights {
    pub index: i64,
    pub rank: usize,
    pub weights: Vec<WeightedRoot>,
    pub expected_weight: i64,
    pub pure: bool,
}

#[derive(Clone, Debug)]
pub struct QuasiPurityReport {
    pub weight: i64,
    pub verdict: Verdict,
    pub graded: Vec<GradedWeights>,
    pub convention: Convention,
}

impl QuasiPurityReport {
    /// The first failing graded piece as a [`Error::PurityFailure`].
    pub fn failure(&self) -> Option<Error> {
        let g = self.graded.iter().find(|g| !g.pure)?;
        let bad = g
            .weights
            .iter()
            .find(|w| w.weight != Some(BigRational::from_integer(g.expected_weight.into())))?;
        Some(Error::PurityFailure {
            index: g.index,
            expected: g.expected_weight.to_string(),
            detail: match &bad.weight {
                Some(w) => format!("eigenvalue {} has weight {w}", bad.description),
                None => format!("eigenvalue {} is not a Weil number", bad.description),
            },
        })
    }
}

fn fmt_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact `w` with `|x| = q^{w/2}` for a nonzero rational `x` (`x² = q^w`).
fn rational_abs_weight(x: &BigRational, p: u64, a: u32) -> Option<BigRational> {
    let x = x.abs();
    let pb = BigInt::from(p);
    let power_of_p = |n: &BigInt| -> Option<i64> {
        let mut n = n.clone();
        let mut k = 0;
        while !n.is_one() {
            let (q, r) = n.div_rem(&pb);
            if !r.is_zero() {
                return None;
            }
            n = q;
            k += 1;
        }
        Some(k)
    };
    let k = power_of_p(x.numer())? - power_of_p(x.denom())?;
    // |x| = p^k = q^{w/2} ⇒ w = 2k / a.
    Some(BigRational::new((2 * k).into(), (a as i64).into()))
}

fn apply_convention(w: Option<BigRational>, c: Convention) -> Option<BigRational> {
    match c {
        Convention::Geometric => w,
        Convention::Arithmetic => w.map(|x| -x),
    }
}

/// Weight of an algebraic number given by its minimal polynomial (monic or
/// not, rational coefficients). Exact for degree ≤ 2.
pub fn weight_of_eigenvalue(minpoly: &[BigRational], q: u64, convention: Convention) -> Result<BigRational> {
    let roots = polynomial_weights(minpoly, q, convention)?;
    let first = roots.first().ok_or_else(|| Error::NotWeil("constant polynomial".into()))?;
    let w = first.weight.clone().ok_or_else(|| Error::NotWeil(first.description.clone()))?;
    if roots.iter().any(|r| r.weight.as_ref() != Some(&w)) {
        return Err(Error::NotWeil("embeddings have different absolute values".into()));
    }
    Ok(w)
}

/// Weights of all roots of `f` (with multiplicity).
pub fn polynomial_weights(f: &[BigRational], q: u64, convention: Convention) -> Result<Vec<WeightedRoot>> {
    let (p, a) = prime_power(q).ok_or_else(|| Error::InvalidRepresentation(format!("q = {q}")))?;
    let f = poly::trim(f.to_vec());
    let mut out = Vec::new();
    let (rational, rest) = poly::rational_roots(&f);
    for r in rational {
        let w = if r.is_zero() { None } else { rational_abs_weight(&r, p, a) };
        out.push(WeightedRoot {
            description: fmt_rational(&r),
            approx: (rational_to_f64(&r), 0.0),
            weight: apply_convention(w, convention),
            exact: true,
        });
    }
    // Repeated irrational factors: peel off the squarefree part repeatedly.
    let mut rest = rest;
    while poly::degree(&rest).is_some_and(|d| d > 0) {
        let sf = poly::squarefree_part(&rest);
        let (quads, left) = if poly::degree(&sf) == Some(2) {
            (vec![sf.clone()], vec![BigRational::one()])
        } else {
            poly::quadratic_factors(&sf)
        };
        for quad in &quads {
            out.extend(quadratic_weights(quad, p, a, convention));
        }
        if poly::degree(&left).is_some_and(|d| d > 0) {
            out.extend(numeric_weights(&left, q, a, convention)?);
        }
        rest = poly::div_rem(&rest, &sf).0;
    }
    Ok(out)
}

/// Both roots of an irreducible monic-able quadratic `c0 + c1 x + c2 x²`.
fn quadratic_weights(f: &[BigRational], p: u64, a: u32, convention: Convention) -> Vec<WeightedRoot> {
    let f = poly::monic(f);
    let (c, b) = (f[0].clone(), f[1].clone());
    let disc = &b * &b - BigRational::from_integer(4.into()) * &c;
    // αᾱ = c for complex roots; for real conjugates need b = 0 and −c = q^w.
    let half = BigRational::new(1.into(), 2.into());
    let w = if disc.is_negative() {
        rational_abs_weight(&c, p, a).filter(|_| c.is_positive())
    } else if b.is_zero() && c.is_negative() {
        rational_abs_weight(&c, p, a)
    } else {
        None
    }
    .map(|w| w * half);
    let (bf, df) = (rational_to_f64(&b), rational_to_f64(&disc));
    let roots = if df < 0.0 {
        let im = (-df).sqrt() / 2.0;
        [(-bf / 2.0, im), (-bf / 2.0, -im)]
    } else {
        let r = df.sqrt() / 2.0;
        [(-bf / 2.0 + r, 0.0), (-bf / 2.0 - r, 0.0)]
    };
    let desc = format!("root of x^2 + ({})x + ({})", fmt_rational(&b), fmt_rational(&c));
    roots
        .into_iter()
        .map(|z| WeightedRoot {
            description: desc.clone(),
            approx: z,
            weight: apply_convention(w.clone(), convention),
            exact: true,
        })
        .collect()
}

/// Certified numeric weights: the inclusion disc around each root must
/// contain `q^{w/2}` for exactly one `w ∈ (1/a)ℤ`.
fn numeric_weights(f: &[BigRational], q: u64, a: u32, convention: Convention) -> Result<Vec<WeightedRoot>> {
    let ln_q = (q as f64).ln();
    let mut out = Vec::new();
    for (z, r) in poly::complex_roots(f) {
        let m = z.norm();
        let (lo, hi) = ((m - r).max(f64::MIN_POSITIVE), m + r);
        // Candidates j/a whose q^{w/2} falls into [lo, hi].
        let jlo = (2.0 * lo.ln() / ln_q * a as f64).ceil() as i64;
        let jhi = (2.0 * hi.ln() / ln_q * a as f64).floor() as i64;
        let desc = format!("{:.6}{:+.6}i", z.re, z.im);
        let weight = match jhi - jlo {
            d if d < 0 => None,
            0 => Some(BigRational::new(jlo.into(), (a as i64).into())),
            _ => return Err(Error::Uncertifiable(desc)),
        };
        out.push(WeightedRoot {
            description: desc,
            approx: (z.re, z.im),
            weight: apply_convention(weight, convention),
            exact: false,
        });
    }
    Ok(out)
}

/// Weights of the eigenvalues of a matrix with rational or quadratic
/// entries.
pub fn matrix_weights(m: &QuadMatrix, q: u64, convention: Convention) -> Result<Vec<WeightedRoot>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let cp = m.charpoly();
    if let Some(f) = cp.iter().map(|c| c.to_rational()).collect::<Option<Vec<_>>>() {
        return polynomial_weights(&f, q, convention);
    }
    // Coefficients in Q(√d): classify the roots of the norm f·f̄ and match
    // each root of f to the nearest one.
    let conj: Vec<Quadratic> = cp.iter().map(|c| c.conjugate()).collect();
    let mut norm = vec![Quadratic::zero(); cp.len() * 2 - 1];
    for (i, x) in cp.iter().enumerate() {
        for (j, y) in conj.iter().enumerate() {
            norm[i + j] = norm[i + j].clone() + x.clone() * y.clone();
        }
    }
    let norm: Vec<BigRational> = norm
        .iter()
        .map(|c| c.to_rational().expect("norm is rational"))
        .collect();
    let classified = polynomial_weights(&norm, q, convention)?;
    let coeffs: Vec<Complex64> = cp
        .iter()
        .map(|c| {
            let (re, im) = c.to_complex();
            Complex64::new(re, im)
        })
        .collect();
    let roots = poly::aberth(&coeffs);
    Ok(roots
        .into_iter()
        .map(|(z, _)| {
            let best = classified
                .iter()
                .min_by(|x, y| {
                    let dx = (Complex64::new(x.approx.0, x.approx.1) - z).norm();
                    let dy = (Complex64::new(y.approx.0, y.approx.1) - z).norm();
                    dx.total_cmp(&dy)
                })
                .expect("norm polynomial has roots");
            WeightedRoot {
                description: format!("{:.6}{:+.6}i", z.re, z.im),
                approx: (z.re, z.im),
                ..best.clone()
            }
        })
        .collect())
}

/// `Tr(Phi^n T^j | Gr_k)` keyed by `(k, n, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TraceTable {
    pub entries: BTreeMap<(i64, u32, u32), BigRational>,
}

impl TraceTable {
    pub fn get(&self, k: i64, n: u32, j: u32) -> BigRational {
        self.entries.get(&(k, n, j)).cloned().unwrap_or_else(BigRational::zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy {
    /// Index of the first member disagreeing with member 0.
    pub member: usize,
    pub k: i64,
    pub n: u32,
    pub j: u32,
    pub expected: BigRational,
    pub found: BigRational,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "member {} differs at Gr_{} n={} j={}: expected {}, found {}",
            self.member,
            self.k,
            self.n,
            self.j,
            fmt_rational(&self.expected),
            fmt_rational(&self.found)
        )
    }
}

/// First entry where some table differs from the first one; missing
/// entries count as zero.
pub fn compare_tables(tables: &[TraceTable]) -> Option<Discrepancy> {
    let keys: BTreeSet<(i64, u32, u32)> = tables.iter().flat_map(|t| t.entries.keys().copied()).collect();
    let first = tables.first()?;
    for &(k, n, j) in &keys {
        let expected = first.get(k, n, j);
        for (member, t) in tables.iter().enumerate().skip(1) {
            let found = t.get(k, n, j);
            if found != expected {
                return Some(Discrepancy {
                    member,
                    k,
                    n,
                    j,
                    expected,
                    found,
                });
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct FamilyVerdict {
    pub compatible: bool,
    pub tables: Vec<TraceTable>,
    pub discrepancy: Option<Discrepancy>,
}

pub fn compatibility_family(reps: &[WeilDeligneRep], n_max: u32) -> Result<FamilyVerdict> {
    if let Some(r) = reps.iter().find(|r| r.q != reps[0].q) {
        return Err(Error::InvalidRepresentation(format!(
            "family mixes q = {} and q = {}",
            reps[0].q, r.q
        )));
    }
    let period = reps.iter().fold(1u32, |acc, r| acc.lcm(&r.inertia_order()));
    let tables = reps
        .iter()
        .map(|r| r.trace_table(n_max, period))
        .collect::<Result<Vec<_>>>()?;
    let discrepancy = compare_tables(&tables);
    Ok(FamilyVerdict {
        compatible: discrepancy.is_none(),
        tables,
        discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> QuadMatrix {
        Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| Quadratic::from_integer(x)).collect()).collect(),
            &Quadratic::zero(),
        )
    }

    fn sp2(q: i64) -> WeilDeligneRep {
        WeilDeligneRep::new(q as u64, m(&[&[1, 0], &[0, q]]), m(&[&[0, 1], &[0, 0]]), None, Convention::Geometric).unwrap()
    }

    #[test]
    fn filtration_of_e12() {
        let f = monodromy_filtration(&m(&[&[0, 1], &[0, 0]])).unwrap();
        assert_eq!(f.s, 1);
        let e1 = Subspace::span(2, &[vec![Quadratic::one(), Quadratic::zero()]], &Quadratic::zero());
        assert_eq!(f.get(-1), e1);
        assert_eq!(f.get(0), e1);
        assert_eq!(f.get(1).dim(), 2);
        assert_eq!(f.get(-2).dim(), 0);
    }

    #[test]
    fn sp2_is_quasi_pure_of_weight_one() {
        let rep = sp2(5);
        let qp = rep.quasi_purity_check(1).unwrap();
        assert_eq!(qp.verdict, Verdict::QuasiPure);
        assert!(!rep.purity_check(1).unwrap().pure);
        assert_eq!(rep.infer_weight().unwrap(), Some(1));
        let tw = rep.twist(1);
        assert_eq!(tw.quasi_purity_check(-1).unwrap().verdict, Verdict::QuasiPure);
        assert_eq!(tw.twist(-1), rep);
    }

    #[test]
    fn weights_exact() {
        let two = |x: i64| BigRational::from_integer(x.into());
        assert_eq!(weight_of_eigenvalue(&[two(-5), two(1)], 5, Convention::Geometric).unwrap(), two(2));
        assert_eq!(weight_of_eigenvalue(&[two(2), two(0), two(1)], 2, Convention::Geometric).unwrap(), two(1));
        assert!(weight_of_eigenvalue(&[two(-1), two(-2), two(1)], 2, Convention::Geometric).is_err());
        assert_eq!(weight_of_eigenvalue(&[two(-5), two(1)], 5, Convention::Arithmetic).unwrap(), two(-2));
        let arith = sp2(5).to_convention(Convention::Arithmetic);
        assert!(arith.is_equivariant());
        let qp = arith.quasi_purity_check(1).unwrap();
        assert_eq!(qp.verdict, Verdict::QuasiPure);
        assert_eq!(qp.graded[1].expected_weight, 2);
        assert_eq!(arith.infer_weight().unwrap(), Some(1));
    }

    #[test]
    fn non_equivariant_is_rejected() {
        let bad = WeilDeligneRep::new(5, m(&[&[1, 0], &[0, 1]]), m(&[&[0, 1], &[0, 0]]), None, Convention::Geometric);
        assert!(bad.is_err());
        let rep = WeilDeligneRep::new_unvalidated(5, m(&[&[1, 0], &[0, 1]]), m(&[&[0, 1], &[0, 0]]), None, Convention::Geometric).unwrap();
        assert_eq!(rep.quasi_purity_check(1).unwrap().verdict, Verdict::NotQuasiPure);
    }

    #[test]
    fn family_tables() {
        let a = sp2(5);
        let b = WeilDeligneRep::new(5, m(&[&[1, 0], &[0, 5]]), m(&[&[0, 0], &[0, 0]]), None, Convention::Geometric).unwrap();
        assert!(compatibility_family(&[a.clone(), a.clone()], 6).unwrap().compatible);
        let v = compatibility_family(&[a, b], 6).unwrap();
        assert!(!v.compatible);
        assert_eq!(v.discrepancy.unwrap().k, -1);
    }
}
