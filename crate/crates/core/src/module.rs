//! (φ,∇)-modules presented by a Frobenius matrix `A` and a connection
//! matrix `G` in a global basis:
//! `φ(e_j) = Σ_i A_ij e_i` (σ-semilinear) and `∇(e_j) = Σ_i G_ij e_i ⊗ dt`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::padic::PadicNumber;
use crate::poly;
use crate::series::{LaurentElement, RingParams};

pub type SeriesMatrix = Matrix<LaurentElement>;
pub type PadicMatrix = Matrix<PadicNumber>;
pub type QMatrix = Matrix<BigRational>;

/// Builds a series matrix from rows of `(exponent, coefficient)` lists.
pub fn series_matrix(params: &RingParams, rows: &[Vec<Vec<(i64, BigRational)>>]) -> SeriesMatrix {
    let zero = LaurentElement::zero(params);
    Matrix::from_rows(
        rows.iter()
            .map(|row| {
                row.iter()
                    .map(|terms| LaurentElement::from_rational_terms(params, terms))
                    .collect()
            })
            .collect(),
        &zero,
    )
}

pub fn constant_matrix(params: &RingParams, m: &PadicMatrix) -> SeriesMatrix {
    m.map(&LaurentElement::zero(params), |c| {
        LaurentElement::constant(params, c.clone())
    })
}

pub fn rational_constant_matrix(params: &RingParams, m: &QMatrix) -> SeriesMatrix {
    m.map(&LaurentElement::zero(params), |c| {
        LaurentElement::from_rational(params, c)
    })
}

/// Recognizes every entry as a rational number.
pub fn recognize_rational(m: &PadicMatrix) -> Option<QMatrix> {
    m.try_map(&BigRational::zero(), |c| c.to_rational().ok_or(()))
        .ok()
}

/// Constant terms of a series matrix.
pub fn constant_part(m: &SeriesMatrix, params: &RingParams) -> PadicMatrix {
    m.map(&params.integer(0), |x| x.constant_term())
}

fn sigma(m: &SeriesMatrix) -> SeriesMatrix {
    m.map(m.zero_element(), |x| x.sigma())
}

fn d_dt(m: &SeriesMatrix) -> SeriesMatrix {
    m.map(m.zero_element(), |x| x.d_dt())
}

fn has_tails(m: &SeriesMatrix) -> bool {
    m.entries().any(|x| x.is_truncated())
}

fn all_constant(m: &SeriesMatrix) -> bool {
    m.entries().all(|x| x.is_constant())
}

/// Inverse over the series ring via the adjugate; `None` if the
/// determinant is not a unit.
pub fn series_inverse(m: &SeriesMatrix) -> Option<SeriesMatrix> {
    let det_inv = m.det().try_inverse()?;
    Some(m.adjugate().scale(&det_inv))
}

/// Change of basis `U`: `A ↦ U⁻¹ A σ(U)`, `G ↦ U⁻¹ (G U + ∂U)`.
#[derive(Clone, Debug)]
pub struct GaugeChange {
    u: SeriesMatrix,
    u_inv: SeriesMatrix,
}

impl GaugeChange {
    pub fn new(u: SeriesMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimensionMismatch("gauge matrix must be square".into()));
        }
        let u_inv = series_inverse(&u)
            .ok_or_else(|| Error::NonInvertible("gauge determinant is not a unit".into()))?;
        Ok(GaugeChange { u, u_inv })
    }

    pub fn identity(params: &RingParams, rank: usize) -> Self {
        let u = Matrix::identity(rank, &LaurentElement::zero(params));
        GaugeChange {
            u: u.clone(),
            u_inv: u,
        }
    }

    pub fn matrix(&self) -> &SeriesMatrix {
        &self.u
    }

    pub fn inverse_matrix(&self) -> &SeriesMatrix {
        &self.u_inv
    }

    pub fn inverse(&self) -> Self {
        GaugeChange {
            u: self.u_inv.clone(),
            u_inv: self.u.clone(),
        }
    }

    /// First `self`, then `next` (new basis `U_self · U_next`).
    pub fn then(&self, next: &GaugeChange) -> Self {
        GaugeChange {
            u: self.u.mul(&next.u),
            u_inv: next.u_inv.mul(&self.u_inv),
        }
    }

    pub fn rank(&self) -> usize {
        self.u.nrows()
    }
}

/// Residual `∂A + G A − p t^{p−1} A σ(G)` of the compatibility diagram.
#[derive(Clone, Debug)]
pub struct CompatibilityReport {
    pub residual: SeriesMatrix,
    pub compatible: bool,
    /// Smallest coefficient valuation of the residual (`None` if zero).
    pub min_valuation: Option<i64>,
    /// Some intermediate product left the t-window.
    pub truncated: bool,
}

/// A grading of the basis by classes modulo `modulus`, used for modules
/// pulled back along `t = s^e`: a section of class `c` has component `j`
/// supported on exponents `≡ c − classes[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grading {
    pub modulus: u32,
    pub classes: Vec<u32>,
}

impl Grading {
    pub fn trivial(rank: usize) -> Self {
        Grading {
            modulus: 1,
            classes: vec![0; rank],
        }
    }

    pub fn uniform(modulus: u32, rank: usize) -> Self {
        Grading {
            modulus,
            classes: vec![0; rank],
        }
    }
}

/// A horizontal section together with its grading class.
#[derive(Clone, Debug)]
pub struct Section {
    pub class: u32,
    pub components: Vec<LaurentElement>,
}

#[derive(Clone, Debug)]
pub struct ConstantSubmodule {
    pub sections: Vec<Vec<LaurentElement>>,
    /// Induced Frobenius on the sections (`None` for ∇-only modules).
    pub frobenius: Option<PadicMatrix>,
    pub module: PhiNablaModule,
}

impl ConstantSubmodule {
    pub fn rank(&self) -> usize {
        self.sections.len()
    }
}

#[derive(Clone, Debug)]
pub struct UnipotentFiltration {
    pub level: usize,
    /// Ranks of the successive constant graded pieces.
    pub step_ranks: Vec<usize>,
    /// Columns of the gauge are the new basis; the first
    /// `step_ranks[0] + … + step_ranks[i-1]` columns span `M_i`.
    pub gauge: GaugeChange,
    pub classes: Vec<u32>,
    /// The module in the new basis: `G` strictly block upper triangular.
    pub gauged: PhiNablaModule,
}

impl UnipotentFiltration {
    /// Basis (as columns over the ring) of `M_i`.
    pub fn step_basis(&self, i: usize) -> Vec<Vec<LaurentElement>> {
        let n: usize = self.step_ranks[..i].iter().sum();
        (0..n).map(|j| self.gauge.matrix().column(j)).collect()
    }

    /// Index ranges of the blocks in the gauged basis.
    pub fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for &k in &self.step_ranks {
            out.push(start..start + k);
            start += k;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum Unipotence {
    Unipotent(UnipotentFiltration),
    /// No horizontal section on the quotient after `level` steps.
    NotUnipotent { level: usize, remaining_rank: usize },
}

impl Unipotence {
    pub fn level(&self) -> Option<usize> {
        match self {
            Unipotence::Unipotent(f) => Some(f.level),
            Unipotence::NotUnipotent { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResidueExponents {
    /// `R = (tG)|_{t=0}`.
    pub residue: PadicMatrix,
    /// `det(x − R)`, low to high.
    pub charpoly: Vec<PadicNumber>,
    /// Rationally recognized eigenvalues with multiplicity, ascending.
    pub exponents: Vec<BigRational>,
    /// Number of eigenvalues that were not recognized as rationals.
    pub unresolved: usize,
    /// `R` has a nonzero nilpotent part (some eigenvalue is defective).
    pub nilpotent_part: bool,
}

#[derive(Clone, Debug)]
pub struct PhiNablaModule {
    params: RingParams,
    rank: usize,
    frobenius: Option<SeriesMatrix>,
    connection: Option<SeriesMatrix>,
    label: String,
}

impl PhiNablaModule {
    /// Validates shapes, parameters and invertibility of `A`. Compatibility
    /// is not enforced here; see [`PhiNablaModule::check_compatibility`].
    pub fn new(
        params: RingParams,
        rank: usize,
        frobenius: Option<SeriesMatrix>,
        connection: Option<SeriesMatrix>,
        label: impl Into<String>,
    ) -> Result<Self> {
        for (name, m) in [("frobenius", &frobenius), ("connection", &connection)] {
            let Some(m) = m else { continue };
            if m.nrows() != rank || m.ncols() != rank {
                return Err(Error::DimensionMismatch(format!(
                    "{name} matrix is {}x{}, rank is {rank}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.entries().any(|x| x.params() != &params) {
                return Err(Error::MismatchedParams);
            }
        }
        if let Some(a) = &frobenius {
            if a.det().try_inverse().is_none() {
                return Err(Error::NonInvertible(
                    "Frobenius determinant is not a unit".into(),
                ));
            }
        }
        Ok(PhiNablaModule {
            params,
            rank,
            frobenius,
            connection,
            label: label.into(),
        })
    }

    /// `A = I`, `G = 0`.
    pub fn trivial(params: &RingParams, rank: usize) -> Self {
        let zero = LaurentElement::zero(params);
        PhiNablaModule {
            params: params.clone(),
            rank,
            frobenius: Some(Matrix::identity(rank, &zero)),
            connection: Some(Matrix::zeros(rank, rank, &zero)),
            label: format!("trivial rank {rank}"),
        }
    }

    /// Constant rational Frobenius `A₀`, `G = 0`.
    pub fn constant(params: &RingParams, a: &QMatrix, label: impl Into<String>) -> Result<Self> {
        let zero = LaurentElement::zero(params);
        let n = a.nrows();
        Self::new(
            params.clone(),
            n,
            Some(rational_constant_matrix(params, a)),
            Some(Matrix::zeros(n, n, &zero)),
            label,
        )
    }

    pub fn params(&self) -> &RingParams {
        &self.params
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn frobenius(&self) -> Option<&SeriesMatrix> {
        self.frobenius.as_ref()
    }

    pub fn connection(&self) -> Option<&SeriesMatrix> {
        self.connection.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn zero(&self) -> LaurentElement {
        LaurentElement::zero(&self.params)
    }

    fn require_frobenius(&self) -> Result<&SeriesMatrix> {
        self.frobenius.as_ref().ok_or(Error::MissingStructure("Frobenius"))
    }

    fn require_connection(&self) -> Result<&SeriesMatrix> {
        self.connection.as_ref().ok_or(Error::MissingStructure("connection"))
    }

    /// The matrix of `D = t∇_{d/dt}`, i.e. `tG`.
    pub fn log_connection(&self) -> Option<SeriesMatrix> {
        self.connection
            .as_ref()
            .map(|g| g.map(&self.zero(), |x| x.shift(1)))
    }

    /// True when `G = 0` and `A` has constant entries.
    pub fn is_constant(&self) -> bool {
        self.connection.as_ref().is_none_or(|g| g.is_zero())
            && self.frobenius.as_ref().is_none_or(all_constant)
    }

    pub fn check_compatibility(&self) -> Result<CompatibilityReport> {
        let a = self.require_frobenius()?;
        let g = self.require_connection()?;
        let p = self.params.p() as i64;
        let factor = LaurentElement::monomial(&self.params, self.params.integer(p), p - 1);
        let lhs = d_dt(a).add(&g.mul(a));
        let rhs = a.mul(&sigma(g)).scale(&factor);
        let residual = lhs.sub(&rhs);
        let min_valuation = residual
            .entries()
            .filter_map(|x| x.min_coefficient_valuation())
            .min();
        Ok(CompatibilityReport {
            compatible: residual.is_zero(),
            truncated: has_tails(&residual),
            min_valuation,
            residual,
        })
    }

    fn check_params(&self, other: &Self) -> Result<()> {
        if self.params == other.params {
            Ok(())
        } else {
            Err(Error::MismatchedParams)
        }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.check_params(other)?;
        let zero = self.zero();
        let frobenius = match (&self.frobenius, &other.frobenius) {
            (Some(a), Some(b)) => Some(a.kron(b)),
            _ => None,
        };
        let connection = match (&self.connection, &other.connection) {
            (Some(g), Some(h)) => {
                let i1 = Matrix::identity(self.rank, &zero);
                let i2 = Matrix::identity(other.rank, &zero);
                Some(g.kron(&i2).add(&i1.kron(h)))
            }
            _ => None,
        };
        Self::new(
            self.params.clone(),
            self.rank * other.rank,
            frobenius,
            connection,
            format!("({}) ⊗ ({})", self.label, other.label),
        )
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.check_params(other)?;
        let frobenius = match (&self.frobenius, &other.frobenius) {
            (Some(a), Some(b)) => Some(a.direct_sum(b)),
            _ => None,
        };
        let connection = match (&self.connection, &other.connection) {
            (Some(g), Some(h)) => Some(g.direct_sum(h)),
            _ => None,
        };
        Self::new(
            self.params.clone(),
            self.rank + other.rank,
            frobenius,
            connection,
            format!("({}) ⊕ ({})", self.label, other.label),
        )
    }

    /// Frobenius `(Aᵀ)⁻¹`, connection `−Gᵀ`.
    pub fn dual(&self) -> Result<Self> {
        let frobenius = match &self.frobenius {
            Some(a) => Some(
                series_inverse(a)
                    .ok_or_else(|| Error::NonInvertible("Frobenius matrix".into()))?
                    .transpose(),
            ),
            None => None,
        };
        let connection = self.connection.as_ref().map(|g| g.transpose().neg());
        Self::new(
            self.params.clone(),
            self.rank,
            frobenius,
            connection,
            format!("dual of {}", self.label),
        )
    }

    /// Tensor with the rank-1 module `A = p^{−n}`, `G = 0`; the linearized
    /// Frobenius picks up `q^{−n}`.
    pub fn tate_twist(&self, n: i64) -> Self {
        let c = self.params.integer(self.params.p() as i64).pow(-n);
        let frobenius = self
            .frobenius
            .as_ref()
            .map(|a| a.map(&self.zero(), |x| x.scale(&c)));
        PhiNablaModule {
            params: self.params.clone(),
            rank: self.rank,
            frobenius,
            connection: self.connection.clone(),
            label: format!("{}({n})", self.label),
        }
    }

    pub fn gauge(&self, g: &GaugeChange) -> Result<Self> {
        if g.rank() != self.rank {
            return Err(Error::DimensionMismatch(format!(
                "gauge of rank {} on module of rank {}",
                g.rank(),
                self.rank
            )));
        }
        if g.matrix().entries().any(|x| x.params() != &self.params) {
            return Err(Error::MismatchedParams);
        }
        let u = g.matrix();
        let u_inv = g.inverse_matrix();
        let frobenius = self
            .frobenius
            .as_ref()
            .map(|a| u_inv.mul(a).mul(&sigma(u)));
        let connection = self
            .connection
            .as_ref()
            .map(|c| u_inv.mul(&c.mul(u).add(&d_dt(u))));
        Ok(PhiNablaModule {
            params: self.params.clone(),
            rank: self.rank,
            frobenius,
            connection,
            label: self.label.clone(),
        })
    }

    /// The same matrices read over other ring parameters (same coefficient
    /// field), e.g. base change from `R_K^+` to `R_K`.
    pub fn rebase(&self, target: &RingParams) -> Result<Self> {
        let zero = LaurentElement::zero(target);
        let conv = |m: &SeriesMatrix| m.try_map(&zero, |x| x.rebase(target));
        let frobenius = self.frobenius.as_ref().map(conv).transpose()?;
        let connection = self.connection.as_ref().map(conv).transpose()?;
        Ok(PhiNablaModule {
            params: target.clone(),
            rank: self.rank,
            frobenius,
            connection,
            label: self.label.clone(),
        })
    }

    /// Lower-right block starting at `offset` (the quotient by the span of
    /// the first `offset` basis vectors, when that span is stable).
    pub fn quotient_block(&self, offset: usize) -> Self {
        let n = self.rank;
        let blk = |m: &SeriesMatrix| m.block(offset, n, offset, n);
        PhiNablaModule {
            params: self.params.clone(),
            rank: n - offset,
            frobenius: self.frobenius.as_ref().map(blk),
            connection: self.connection.as_ref().map(blk),
            label: self.label.clone(),
        }
    }

    /// Sections of `∇ = 0` supported on the exponent range `[lo, hi]`, one
    /// linear system per grading class.
    fn solve_sections(&self, grading: &Grading, lo: i64, hi: i64) -> Result<Vec<Section>> {
        let h = self.log_connection().ok_or(Error::MissingStructure("connection"))?;
        let r = self.rank;
        let m = grading.modulus.max(1) as i64;
        let zero = self.params.integer(0);
        let mut out = Vec::new();
        for c in 0..m {
            let unknowns: Vec<(i64, usize)> = (lo..=hi)
                .flat_map(|e| (0..r).map(move |j| (e, j)))
                .filter(|&(e, j)| (e - (c - grading.classes[j] as i64)).rem_euclid(m) == 0)
                .collect();
            if unknowns.is_empty() {
                continue;
            }
            // Coefficient of t^k in component i of D f + H f.
            let mut rows: BTreeMap<(i64, usize), Vec<(usize, PadicNumber)>> = BTreeMap::new();
            for (col, &(e, j)) in unknowns.iter().enumerate() {
                if e != 0 {
                    rows.entry((e, j)).or_default().push((col, self.params.integer(e)));
                }
                for i in 0..r {
                    for (d, coeff) in h[(i, j)].terms() {
                        rows.entry((e + d, i)).or_default().push((col, coeff.clone()));
                    }
                }
            }
            let mut system = Matrix::zeros(rows.len(), unknowns.len(), &zero);
            for (ri, entries) in rows.values().enumerate() {
                for (col, v) in entries {
                    let cur = std::mem::replace(&mut system[(ri, *col)], zero.clone());
                    system[(ri, *col)] = cur + v.clone();
                }
            }
            for v in system.kernel() {
                let mut comps: Vec<Vec<(i64, PadicNumber)>> = vec![Vec::new(); r];
                for (x, &(e, j)) in v.into_iter().zip(&unknowns) {
                    if !x.is_zero() {
                        comps[j].push((e, x));
                    }
                }
                out.push(Section {
                    class: c as u32,
                    components: comps
                        .into_iter()
                        .map(|t| LaurentElement::from_terms(&self.params, t))
                        .collect(),
                });
            }
        }
        Ok(out)
    }

    /// Horizontal sections, split by grading class. Solutions must be
    /// supported in the window; the count is compared against the half
    /// window to detect boundary sensitivity.
    pub fn graded_horizontal_sections(&self, grading: &Grading) -> Result<Vec<Section>> {
        let g = self.require_connection()?;
        if grading.classes.len() != self.rank {
            return Err(Error::DimensionMismatch("grading classes".into()));
        }
        if has_tails(g) {
            return Err(Error::WindowTooSmall(
                "connection matrix is truncated".into(),
            ));
        }
        let (lo, hi) = (self.params.min_exponent(), self.params.max_exponent());
        let full = self.solve_sections(grading, lo, hi)?;
        let half = self.solve_sections(grading, lo / 2, hi / 2)?;
        if full.len() != half.len() {
            return Err(Error::WindowTooSmall(format!(
                "{} horizontal sections on [{lo}, {hi}] but {} on [{}, {}]",
                full.len(),
                half.len(),
                lo / 2,
                hi / 2
            )));
        }
        Ok(full)
    }

    /// A K-basis of `ker ∇` (each section given by its components).
    pub fn horizontal_sections(&self) -> Result<Vec<Vec<LaurentElement>>> {
        Ok(self
            .graded_horizontal_sections(&Grading::trivial(self.rank))?
            .into_iter()
            .map(|s| s.components)
            .collect())
    }

    /// Matrix `B` over K with `A σ(s_j) = Σ_k B_kj s_k`.
    pub fn induced_frobenius(&self, sections: &[Vec<LaurentElement>]) -> Result<PadicMatrix> {
        let a = self.require_frobenius()?;
        let k = sections.len();
        let zero = self.params.integer(0);
        let images: Vec<Vec<LaurentElement>> = sections
            .iter()
            .map(|s| {
                let sig: Vec<LaurentElement> = s.iter().map(|x| x.sigma()).collect();
                a.mul_vec(&sig)
            })
            .collect();
        if images.iter().flatten().any(|x| x.is_truncated()) {
            return Err(Error::WindowTooSmall(
                "Frobenius image of a horizontal section leaves the window".into(),
            ));
        }
        let mut keys: BTreeMap<(usize, i64), usize> = BTreeMap::new();
        for v in sections.iter().chain(&images) {
            for (i, x) in v.iter().enumerate() {
                for (e, _) in x.terms() {
                    let n = keys.len();
                    keys.entry((i, e)).or_insert(n);
                }
            }
        }
        let flatten = |vs: &[Vec<LaurentElement>]| {
            let mut m = Matrix::zeros(keys.len(), vs.len(), &zero);
            for (col, v) in vs.iter().enumerate() {
                for (i, x) in v.iter().enumerate() {
                    for (e, c) in x.terms() {
                        m[(keys[&(i, e)], col)] = c.clone();
                    }
                }
            }
            m
        };
        let s = flatten(sections);
        let t = flatten(&images);
        if k == 0 {
            return Ok(Matrix::zeros(0, 0, &zero));
        }
        s.solve(&t).ok_or_else(|| {
            Error::NotEquivariant("span of horizontal sections is not φ-stable".into())
        })
    }

    pub fn largest_constant_submodule(&self) -> Result<ConstantSubmodule> {
        let sections = self.horizontal_sections()?;
        let frobenius = match self.frobenius {
            Some(_) => Some(self.induced_frobenius(&sections)?),
            None => None,
        };
        let k = sections.len();
        let zero = self.zero();
        let module = PhiNablaModule {
            params: self.params.clone(),
            rank: k,
            frobenius: frobenius.as_ref().map(|b| constant_matrix(&self.params, b)),
            connection: Some(Matrix::zeros(k, k, &zero)),
            label: format!("constant part of {}", self.label),
        };
        Ok(ConstantSubmodule {
            sections,
            frobenius,
            module,
        })
    }

    pub fn unipotent_filtration(&self) -> Result<Unipotence> {
        self.graded_unipotent_filtration(&Grading::trivial(self.rank))
    }

    /// Iterates the constant part on successive quotients. With a grading,
    /// every new basis vector is homogeneous.
    pub fn graded_unipotent_filtration(&self, grading: &Grading) -> Result<Unipotence> {
        self.require_connection()?;
        let r = self.rank;
        let zero = self.zero();
        let mut cur = self.clone();
        let mut total = GaugeChange::identity(&self.params, r);
        let mut classes = grading.classes.clone();
        let mut steps = Vec::new();
        let mut offset = 0;
        while offset < r {
            let quotient = cur.quotient_block(offset);
            let q_grading = Grading {
                modulus: grading.modulus,
                classes: classes[offset..].to_vec(),
            };
            let secs = quotient.graded_horizontal_sections(&q_grading)?;
            if secs.is_empty() {
                return Ok(Unipotence::NotUnipotent {
                    level: steps.len(),
                    remaining_rank: r - offset,
                });
            }
            let n = r - offset;
            let k = secs.len();
            let s = Matrix::from_columns(
                n,
                &secs.iter().map(|s| s.components.clone()).collect::<Vec<_>>(),
                &zero,
            );
            let rest = standard_complement(&s)?;
            let mut step = Matrix::identity(r, &zero);
            for i in 0..n {
                for (col, sec) in secs.iter().enumerate() {
                    step[(offset + i, offset + col)] = sec.components[i].clone();
                }
                for (col, &j) in rest.iter().enumerate() {
                    step[(offset + i, offset + k + col)] = if i == j {
                        LaurentElement::one(&self.params)
                    } else {
                        zero.clone()
                    };
                }
            }
            let mut new_classes: Vec<u32> = secs.iter().map(|s| s.class).collect();
            new_classes.extend(rest.iter().map(|&j| q_grading.classes[j]));
            classes.splice(offset.., new_classes);
            let g = GaugeChange::new(step)?;
            cur = cur.gauge(&g)?;
            total = total.then(&g);
            if let Some(a) = &cur.frobenius {
                let leak = (offset + k..r)
                    .any(|i| (offset..offset + k).any(|j| !a[(i, j)].is_zero()));
                if leak {
                    return Err(Error::NotEquivariant(
                        "span of horizontal sections is not φ-stable".into(),
                    ));
                }
            }
            steps.push(k);
            offset += k;
        }
        Ok(Unipotence::Unipotent(UnipotentFiltration {
            level: steps.len(),
            step_ranks: steps,
            gauge: total,
            classes,
            gauged: cur,
        }))
    }

    pub fn residue_exponents(&self) -> Result<ResidueExponents> {
        let h = self.log_connection().ok_or(Error::MissingStructure("connection"))?;
        if h.entries().any(|x| x.min_exponent().is_some_and(|e| e < 0)) {
            return Err(Error::IrregularSingularity);
        }
        let residue = constant_part(&h, &self.params);
        let charpoly = residue.charpoly();
        let rational: Option<Vec<BigRational>> =
            charpoly.iter().map(|c| c.to_rational()).collect();
        let n = self.rank;
        let (exponents, unresolved) = match &rational {
            Some(f) => {
                let (roots, _) = poly::rational_roots(f);
                let k = roots.len();
                (roots, n - k)
            }
            None => (Vec::new(), n),
        };
        let mut nilpotent_part = false;
        let mut distinct = exponents.clone();
        distinct.dedup();
        for lam in &distinct {
            let mult = exponents.iter().filter(|x| *x == lam).count();
            let shifted = residue.sub(&Matrix::identity(n, &self.params.integer(0)).scale(&self.params.scalar(lam)));
            if n - shifted.rank() < mult {
                nilpotent_part = true;
            }
        }
        Ok(ResidueExponents {
            residue,
            charpoly,
            exponents,
            unresolved,
            nilpotent_part,
        })
    }

    /// Base change along `t = s^e`: `A(s^e)` and `e s^{e−1} G(s^e)`, over
    /// the same ring parameters (now read in the variable `s`).
    pub fn kummer_pullback(&self, e: u32) -> Result<Self> {
        if e == 0 {
            return Err(Error::BadParams("Kummer degree must be positive".into()));
        }
        if (e as u64).is_multiple_of(self.params.p()) {
            return Err(Error::WildCover(e));
        }
        let e64 = e as i64;
        let fits = |m: &SeriesMatrix, shift: i64| {
            m.entries().all(|x| {
                x.terms()
                    .all(|(k, _)| self.params.in_window(k * e64 + shift))
            })
        };
        if self.frobenius.as_ref().is_some_and(|a| !fits(a, 0))
            || self.connection.as_ref().is_some_and(|g| !fits(g, e64 - 1))
        {
            return Err(Error::WindowTooSmall(format!(
                "exponents times {e} leave the window"
            )));
        }
        let zero = self.zero();
        let frobenius = self
            .frobenius
            .as_ref()
            .map(|a| a.map(&zero, |x| x.substitute_power(e, &self.params)));
        let factor = self.params.integer(e64);
        let connection = self.connection.as_ref().map(|g| {
            g.map(&zero, |x| {
                x.substitute_power(e, &self.params)
                    .shift(e64 - 1)
                    .scale(&factor)
            })
        });
        Ok(PhiNablaModule {
            params: self.params.clone(),
            rank: self.rank,
            frobenius,
            connection,
            label: format!("{} pulled back along t = s^{e}", self.label),
        })
    }
}

/// Standard basis indices completing the columns of `s` (n×k) to a basis
/// of the free module. Prefers complements whose determinant is a monomial,
/// so that the gauge inverse is exact.
fn standard_complement(s: &SeriesMatrix) -> Result<Vec<usize>> {
    let n = s.nrows();
    let k = s.ncols();
    let mut fallback = None;
    for rows in combinations(n, k) {
        let minor = s.select_rows(&rows).det();
        if minor.is_zero() {
            continue;
        }
        let rest: Vec<usize> = (0..n).filter(|i| !rows.contains(i)).collect();
        let monomial = minor.terms().count() == 1;
        if monomial {
            return Ok(rest);
        }
        if fallback.is_none() && minor.try_inverse().is_some() {
            fallback = Some(rest);
        }
    }
    fallback.ok_or_else(|| {
        Error::NonInvertible("horizontal sections do not extend to a basis".into())
    })
}

/// All `k`-subsets of `0..n`, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn params() -> RingParams {
        RingParams::laurent(5, 20, 32).unwrap()
    }

    pub(crate) fn kummer_tate(params: &RingParams) -> PhiNablaModule {
        let p = params.p() as i64;
        let a = series_matrix(params, &[vec![vec![(0, q(1))], vec![]], vec![vec![], vec![(0, q(p))]]]);
        let g = series_matrix(params, &[vec![vec![], vec![(-1, q(1))]], vec![vec![], vec![]]]);
        PhiNablaModule::new(params.clone(), 2, Some(a), Some(g), "Kummer-Tate").unwrap()
    }

    #[test]
    fn kummer_tate_is_compatible() {
        let m = kummer_tate(&params());
        let rep = m.check_compatibility().unwrap();
        assert!(rep.compatible);
        assert!(!rep.truncated);
    }

    #[test]
    fn wrong_frobenius_leaves_residual() {
        let pr = params();
        let a = Matrix::identity(2, &LaurentElement::zero(&pr));
        let g = kummer_tate(&pr).connection().unwrap().clone();
        let m = PhiNablaModule::new(pr.clone(), 2, Some(a), Some(g), "bad").unwrap();
        let rep = m.check_compatibility().unwrap();
        assert!(!rep.compatible);
        let expected = LaurentElement::from_rational_terms(&pr, &[(-1, q(1 - 5))]);
        assert_eq!(rep.residual[(0, 1)], expected);
    }

    #[test]
    fn kummer_tate_sections_and_level() {
        let m = kummer_tate(&params());
        let secs = m.horizontal_sections().unwrap();
        assert_eq!(secs.len(), 1);
        assert!(secs[0][1].is_zero());
        assert!(secs[0][0].is_constant());
        let Unipotence::Unipotent(f) = m.unipotent_filtration().unwrap() else {
            panic!("KT is unipotent")
        };
        assert_eq!(f.level, 2);
        assert_eq!(f.step_ranks, vec![1, 1]);
    }

    #[test]
    fn half_exponent_module() {
        let pr = params();
        let a = series_matrix(&pr, &[vec![vec![(2, q(1))]]]);
        let g = series_matrix(&pr, &[vec![vec![(-1, BigRational::new(1.into(), 2.into()))]]]);
        let m = PhiNablaModule::new(pr.clone(), 1, Some(a), Some(g), "half").unwrap();
        assert!(m.check_compatibility().unwrap().compatible);
        assert!(m.horizontal_sections().unwrap().is_empty());
        let r = m.residue_exponents().unwrap();
        assert_eq!(r.exponents, vec![BigRational::new(1.into(), 2.into())]);
        let pulled = m.kummer_pullback(2).unwrap();
        assert!(pulled.check_compatibility().unwrap().compatible);
        let secs = pulled.horizontal_sections().unwrap();
        assert_eq!(secs.len(), 1);
        assert_eq!(secs[0][0].min_exponent(), Some(-1));
        assert!(matches!(m.kummer_pullback(5), Err(Error::WildCover(5))));
    }

    #[test]
    fn dual_twist_tensor() {
        let pr = params();
        let m = kummer_tate(&pr);
        let dd = m.dual().unwrap().dual().unwrap();
        assert_eq!(dd.frobenius(), m.frobenius());
        assert_eq!(dd.connection(), m.connection());
        assert!(m.dual().unwrap().check_compatibility().unwrap().compatible);
        let t = PhiNablaModule::trivial(&pr, 1).tate_twist(1);
        assert_eq!(
            t.frobenius().unwrap()[(0, 0)],
            LaurentElement::from_rational(&pr, &BigRational::new(1.into(), 5.into()))
        );
        let mt = m.tensor(&PhiNablaModule::trivial(&pr, 1)).unwrap();
        assert_eq!(mt.frobenius(), m.frobenius());
        assert!(m.tensor(&m).unwrap().check_compatibility().unwrap().compatible);
    }
}
