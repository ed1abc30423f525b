//! Arithmetic verdicts: reduction type and rank bookkeeping for abelian
//! variety data, semistable and excision weight filtrations, and
//! weight–monodromy checks.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marmora::{extract, linearize, to_quad, wd_of_cohomology};
use crate::matrix::{induced_on_quotient, Matrix, Subspace};
use crate::module::{recognize_rational, PadicMatrix, PhiNablaModule, SeriesMatrix, Unipotence};
use crate::padic::PadicNumber;
use crate::quadratic::Quadratic;
use crate::series::LaurentElement;
use crate::weil_deligne::{
    compatibility_family, Convention, FamilyVerdict, PurityReport, QuadMatrix, QuasiPurityReport,
    WeilDeligneRep,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReductionType {
    Good,
    SemistableNotGood,
    NotSemistable,
}

impl ReductionType {
    pub fn name(self) -> &'static str {
        match self {
            ReductionType::Good => "GOOD",
            ReductionType::SemistableNotGood => "SEMISTABLE_NOT_GOOD",
            ReductionType::NotSemistable => "NOT_SEMISTABLE",
        }
    }
}

/// `n = α + μ + λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    pub n: usize,
    pub mu: usize,
    pub alpha: usize,
    pub lambda: usize,
}

/// `D_R(A)`, optionally with `D_R(A')` and a perfect pairing into `R(1)`:
/// `⟨x, y⟩ = xᵀ P y`.
#[derive(Clone, Debug)]
pub struct AbelianVarietyDatum {
    module: PhiNablaModule,
    dual_module: Option<PhiNablaModule>,
    pairing: Option<SeriesMatrix>,
}

fn sigma_matrix(m: &SeriesMatrix) -> SeriesMatrix {
    m.map(m.zero_element(), |x| x.sigma())
}

fn d_dt_matrix(m: &SeriesMatrix) -> SeriesMatrix {
    m.map(m.zero_element(), |x| x.d_dt())
}

impl AbelianVarietyDatum {
    /// Checks even rank and, for a pairing, perfectness,
    /// `Aᵀ P A' = p⁻¹ σ(P)` and `∂P = Gᵀ P + P G'`. Without a dual module
    /// the pairing is read as a self-pairing.
    pub fn new(
        module: PhiNablaModule,
        dual_module: Option<PhiNablaModule>,
        pairing: Option<SeriesMatrix>,
    ) -> Result<Self> {
        let r = module.rank();
        if !r.is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!("abelian variety datum of odd rank {r}")));
        }
        if let Some(d) = &dual_module {
            if d.rank() != r {
                return Err(Error::DimensionMismatch("dual module rank".into()));
            }
            if d.params() != module.params() {
                return Err(Error::MismatchedParams);
            }
        }
        if let Some(p) = &pairing {
            if p.nrows() != r || p.ncols() != r {
                return Err(Error::DimensionMismatch("pairing matrix".into()));
            }
            if r > 0 && p.det().try_inverse().is_none() {
                return Err(Error::NonInvertible("pairing is not perfect".into()));
            }
            let dual = dual_module.as_ref().unwrap_or(&module);
            if let (Some(a), Some(b)) = (module.frobenius(), dual.frobenius()) {
                let c = module.params().integer(module.params().p() as i64).inverse().expect("p ≠ 0");
                let lhs = a.transpose().mul(p).mul(b);
                let rhs = sigma_matrix(p).map(p.zero_element(), |x| x.scale(&c));
                if !lhs.sub(&rhs).is_zero() {
                    return Err(Error::NotEquivariant("pairing is not Frobenius-compatible".into()));
                }
            }
            if let (Some(g), Some(h)) = (module.connection(), dual.connection()) {
                let lhs = d_dt_matrix(p);
                let rhs = g.transpose().mul(p).add(&p.mul(h));
                if !lhs.sub(&rhs).is_zero() {
                    return Err(Error::NotEquivariant("pairing is not horizontal".into()));
                }
            }
        }
        Ok(AbelianVarietyDatum {
            module,
            dual_module,
            pairing,
        })
    }

    pub fn module(&self) -> &PhiNablaModule {
        &self.module
    }

    pub fn dual_module(&self) -> Option<&PhiNablaModule> {
        self.dual_module.as_ref()
    }

    pub fn pairing(&self) -> Option<&SeriesMatrix> {
        self.pairing.as_ref()
    }

    /// The datum of the dual abelian variety (pairing transposed).
    pub fn dual_datum(&self) -> Result<Self> {
        let dual = self.dual_module.clone().unwrap_or_else(|| self.module.clone());
        Self::new(dual, Some(self.module.clone()), self.pairing.as_ref().map(|p| p.transpose()))
    }

    pub fn half_rank(&self) -> usize {
        self.module.rank() / 2
    }
}

/// `D^f` (horizontal sections with their Frobenius) and `D^t ⊂ D^f` as a
/// subspace of section coefficients.
struct FixedParts {
    sections: Vec<Vec<LaurentElement>>,
    frobenius: Option<PadicMatrix>,
    toric: Subspace<PadicNumber>,
}

fn fixed_parts(d: &AbelianVarietyDatum) -> Result<FixedParts> {
    let params = d.module.params();
    let k0 = params.integer(0);
    let df = d.module.largest_constant_submodule()?;
    let k = df.rank();
    let toric = if k == 0 {
        Subspace::zero(0, &k0)
    } else {
        let p = d.pairing.as_ref().ok_or(Error::MissingPairing)?;
        let dual = d.dual_module.as_ref().unwrap_or(&d.module);
        let dual_sections = dual.horizontal_sections()?;
        // Gram matrix of D^f against D'^f; horizontal, hence constant.
        let mut gram = Matrix::zeros(k, dual_sections.len(), &k0);
        for (i, s) in df.sections.iter().enumerate() {
            let ps = p.transpose().mul_vec(s);
            for (j, t) in dual_sections.iter().enumerate() {
                let v = ps
                    .iter()
                    .zip(t)
                    .fold(LaurentElement::zero(params), |acc, (x, y)| acc + x.clone() * y.clone());
                if !v.is_constant() {
                    return Err(Error::NotEquivariant("pairing of horizontal sections is not constant".into()));
                }
                gram[(i, j)] = v.constant_term();
            }
        }
        Subspace::kernel_of(&gram.transpose())
    };
    Ok(FixedParts {
        sections: df.sections,
        frobenius: df.frobenius,
        toric,
    })
}

/// `μ = rk D^t`, `α = (rk D^f − μ)/2`, `λ = n − α − μ`.
pub fn rank_profile(d: &AbelianVarietyDatum) -> Result<RankProfile> {
    let parts = fixed_parts(d)?;
    profile_from(d, parts.sections.len(), parts.toric.dim())
}

fn profile_from(d: &AbelianVarietyDatum, rank_f: usize, mu: usize) -> Result<RankProfile> {
    let n = d.half_rank();
    if !(rank_f - mu).is_multiple_of(2) {
        return Err(Error::InconsistentRanks(format!("rk D^f = {rank_f} and μ = {mu} differ by an odd number")));
    }
    let alpha = (rank_f - mu) / 2;
    if alpha + mu > n {
        return Err(Error::InconsistentRanks(format!("α + μ = {} exceeds n = {n}", alpha + mu)));
    }
    Ok(RankProfile {
        n,
        mu,
        alpha,
        lambda: n - alpha - mu,
    })
}

#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub verdict: ReductionType,
    pub profile: RankProfile,
    pub horizontal_rank: usize,
    pub unipotence_level: Option<usize>,
}

/// Good reduction iff a full horizontal basis exists; semistable iff the
/// module is unipotent. Both are cross-checked against the rank profile.
pub fn reduction_type(d: &AbelianVarietyDatum) -> Result<ReductionReport> {
    let profile = rank_profile(d)?;
    let horizontal_rank = d.module.horizontal_sections()?.len();
    let level = d.module.unipotent_filtration()?.level();
    let good = horizontal_rank == d.module.rank();
    let verdict = match (good, level.is_some()) {
        (true, _) => ReductionType::Good,
        (false, true) => ReductionType::SemistableNotGood,
        (false, false) => ReductionType::NotSemistable,
    };
    let by_ranks = match (profile.mu, profile.lambda) {
        (0, 0) => ReductionType::Good,
        (_, 0) => ReductionType::SemistableNotGood,
        _ => ReductionType::NotSemistable,
    };
    if verdict != by_ranks {
        return Err(Error::DiagnosticConflict(format!(
            "module criterion gives {} but ranks (μ = {}, λ = {}) give {}",
            verdict.name(),
            profile.mu,
            profile.lambda,
            by_ranks.name()
        )));
    }
    Ok(ReductionReport {
        verdict,
        profile,
        horizontal_rank,
        unipotence_level: level,
    })
}

/// One graded piece of a weight filtration, with its Frobenius as a
/// Weil–Deligne representation (`N = 0`).
#[derive(Clone, Debug)]
pub struct WeightPiece {
    pub index: i64,
    pub rank: usize,
    pub rep: WeilDeligneRep,
    pub report: PurityReport,
}

/// `W_{−2} = D^t ⊂ W_{−1} = D^f ⊂ W_0 = D`.
#[derive(Clone, Debug)]
pub struct SemistableFiltration {
    /// `(k, basis of W_k)` for `k = −2, −1, 0`; bases are columns over the
    /// ring in the module basis.
    pub steps: Vec<(i64, Vec<Vec<LaurentElement>>)>,
    pub graded: Vec<WeightPiece>,
    /// `WD(W_k) = M_{k+1}` for every `k`.
    pub monodromy_match: bool,
    pub rep: WeilDeligneRep,
}

impl SemistableFiltration {
    pub fn ranks(&self) -> Vec<(i64, usize)> {
        self.steps.iter().map(|(k, b)| (*k, b.len())).collect()
    }
}

/// Frobenius on a constant piece as a representation with `N = 0`.
fn constant_rep(phi: &PadicMatrix, d: &PhiNablaModule, label: String) -> Result<WeilDeligneRep> {
    let q = d.params().q().try_into().map_err(|_| Error::BadParams("q too large".into()))?;
    let phi = if phi.nrows() == 0 {
        Matrix::zeros(0, 0, &Quadratic::zero())
    } else {
        let lin = linearize(phi, d.params().degree());
        to_quad(&recognize_rational(&lin).ok_or_else(|| {
            Error::InvalidRepresentation(format!("Frobenius on {label} is not rational at working precision"))
        })?)
    };
    let n = Matrix::zeros(phi.nrows(), phi.nrows(), &Quadratic::zero());
    Ok(WeilDeligneRep::new(q, phi, n, None, Convention::Geometric)?.with_label(label))
}

fn piece(index: i64, phi: &PadicMatrix, d: &PhiNablaModule) -> Result<WeightPiece> {
    let rep = constant_rep(phi, d, format!("Gr_{index}"))?;
    let report = rep.purity_check(index)?;
    if let Some(bad) = &report.offending {
        return Err(Error::PurityFailure {
            index,
            expected: index.to_string(),
            detail: format!("eigenvalue {} has weight {:?}", bad.description, bad.weight.as_ref().map(|w| w.to_string())),
        });
    }
    Ok(WeightPiece {
        index,
        rank: phi.nrows(),
        rep,
        report,
    })
}

fn combine(sections: &[Vec<LaurentElement>], coeffs: &[Vec<PadicNumber>], d: &PhiNablaModule) -> Vec<Vec<LaurentElement>> {
    let params = d.params();
    coeffs
        .iter()
        .map(|c| {
            (0..d.rank())
                .map(|i| {
                    sections.iter().zip(c).fold(LaurentElement::zero(params), |acc, (s, x)| {
                        acc + s[i].scale(x)
                    })
                })
                .collect()
        })
        .collect()
}

/// The weight filtration of a semistable datum, with every graded piece
/// checked pure (weights `−2, −1, 0` in the geometric normalization; the
/// arithmetic mirror negates them) and compared with the monodromy
/// filtration of the extracted representation.
pub fn semistable_weight_filtration(d: &AbelianVarietyDatum, mmax: u32) -> Result<SemistableFiltration> {
    let red = reduction_type(d)?;
    if red.verdict == ReductionType::NotSemistable {
        return Err(Error::NotUnipotent);
    }
    let m = &d.module;
    let r = m.rank();
    let params = m.params();
    let k0 = params.integer(0);
    let parts = fixed_parts(d)?;
    let kf = parts.sections.len();
    let whole_f = Subspace::whole(kf, &k0);
    let zero_f = Subspace::zero(kf, &k0);
    let toric_vecs = parts.toric.basis_vectors();
    let w2 = combine(&parts.sections, &toric_vecs, m);
    let mut graded = Vec::new();
    if let Some(b) = &parts.frobenius {
        graded.push(piece(-2, &induced_on_quotient(b, &parts.toric, &zero_f), m)?);
        graded.push(piece(-1, &induced_on_quotient(b, &whole_f, &parts.toric), m)?);
    }
    if kf < r {
        let Unipotence::Unipotent(filt) = m.unipotent_filtration()? else {
            return Err(Error::NotUnipotent);
        };
        if filt.level > 2 {
            return Err(Error::NotLevelTwo(filt.level));
        }
        let top = filt.gauged.quotient_block(filt.step_ranks[0]);
        if !top.is_constant() {
            return Err(Error::NonConstantFrobenius);
        }
        if let Some(a) = top.frobenius() {
            graded.push(piece(0, &a.map(&k0, |x| x.constant_term()), m)?);
        }
    }
    graded.retain(|g| g.rank > 0);
    let identity: Vec<Vec<LaurentElement>> = (0..r)
        .map(|j| {
            (0..r)
                .map(|i| if i == j { LaurentElement::one(params) } else { LaurentElement::zero(params) })
                .collect()
        })
        .collect();
    let steps = vec![(-2, w2), (-1, parts.sections.clone()), (0, identity)];

    // WD(W_k) against M_{k+1}: horizontal sections have constant
    // coordinates in the normal-form basis.
    let ex = extract(m, mmax)?;
    let filt = ex.rep.monodromy_filtration()?;
    let u_inv = ex.gauge.inverse_matrix();
    let mut monodromy_match = true;
    for (k, basis) in &steps {
        let mut vecs = Vec::new();
        for v in basis {
            let c = u_inv.mul_vec(v);
            let c: Option<Vec<Quadratic>> = c
                .iter()
                .map(|x| x.is_constant().then(|| x.constant_term().to_rational()).flatten().map(Quadratic::rational))
                .collect();
            match c {
                Some(c) => vecs.push(c),
                None if *k == 0 => {}
                None => monodromy_match = false,
            }
        }
        let image = if *k == 0 {
            Subspace::whole(r, &Quadratic::zero())
        } else {
            Subspace::span(r, &vecs, &Quadratic::zero())
        };
        if image != filt.get(k + 1) {
            monodromy_match = false;
        }
    }
    Ok(SemistableFiltration {
        steps,
        graded,
        monodromy_match,
        rep: ex.rep,
    })
}

/// Weight–monodromy check: quasi-purity of weight `i` of the extracted
/// representation.
pub fn check_weight_monodromy(m: &PhiNablaModule, i: i64, mmax: u32) -> Result<QuasiPurityReport> {
    wd_of_cohomology(m, i, mmax)?.quasi_purity_check(i)
}

/// Cohomology of a proper curve with a finite boundary:
/// `0 → H¹(X̄) → H¹(X) → H⁰(D)(−1) → H²(X̄) → 0`.
#[derive(Clone, Debug)]
pub struct OpenCurveDatum {
    pub h1_compact: PhiNablaModule,
    pub h0_boundary_twisted: PhiNablaModule,
    pub h2_compact: PhiNablaModule,
    /// `rank h2 × rank h0` matrix of the connecting map.
    pub boundary_map: SeriesMatrix,
}

impl OpenCurveDatum {
    /// Checks shapes and that the boundary map commutes with φ and ∇.
    pub fn new(
        h1_compact: PhiNablaModule,
        h0_boundary_twisted: PhiNablaModule,
        h2_compact: PhiNablaModule,
        boundary_map: SeriesMatrix,
    ) -> Result<Self> {
        let (r0, r2) = (h0_boundary_twisted.rank(), h2_compact.rank());
        if boundary_map.nrows() != r2 || boundary_map.ncols() != r0 {
            return Err(Error::DimensionMismatch(format!(
                "boundary map is {}×{}, expected {r2}×{r0}",
                boundary_map.nrows(),
                boundary_map.ncols()
            )));
        }
        let delta = &boundary_map;
        if let (Some(a0), Some(a2)) = (h0_boundary_twisted.frobenius(), h2_compact.frobenius()) {
            if !delta.mul(a0).sub(&a2.mul(&sigma_matrix(delta))).is_zero() {
                return Err(Error::NotEquivariant("boundary map does not commute with Frobenius".into()));
            }
        }
        if let (Some(g0), Some(g2)) = (h0_boundary_twisted.connection(), h2_compact.connection()) {
            let lhs = d_dt_matrix(delta).add(&g2.mul(delta));
            if !lhs.sub(&delta.mul(g0)).is_zero() {
                return Err(Error::NotEquivariant("boundary map is not horizontal".into()));
            }
        }
        Ok(OpenCurveDatum {
            h1_compact,
            h0_boundary_twisted,
            h2_compact,
            boundary_map,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ExcisionReport {
    /// `Gr_1 = H¹(X̄)`.
    pub gr1: WeilDeligneRep,
    pub gr1_report: QuasiPurityReport,
    /// `Gr_2 = ker(H⁰(D)(−1) → H²(X̄))`.
    pub gr2: WeilDeligneRep,
    pub gr2_report: PurityReport,
    pub rank: usize,
    /// No boundary contribution: the proper case.
    pub proper: bool,
}

/// `^gW_1 = H¹(X̄) ⊂ ^gW_2 = H¹(X)`, with `Gr_1` quasi-pure of weight 1 and
/// `Gr_2` pure of weight 2.
pub fn excision_weight_filtration(c: &OpenCurveDatum, mmax: u32) -> Result<ExcisionReport> {
    let h0 = &c.h0_boundary_twisted;
    let params = h0.params();
    let k0 = params.integer(0);
    if h0.connection().is_some_and(|g| !g.is_zero()) {
        return Err(Error::NotEquivariant("boundary cohomology must have trivial connection".into()));
    }
    if c.boundary_map.entries().any(|x| !x.is_constant()) {
        return Err(Error::NotEquivariant("boundary map must be constant".into()));
    }
    let delta = c.boundary_map.map(&k0, |x| x.constant_term());
    let kernel = if h0.rank() == 0 { Vec::new() } else { delta.kernel() };
    let sections: Vec<Vec<LaurentElement>> = kernel
        .iter()
        .map(|v| v.iter().map(|x| LaurentElement::constant(params, x.clone())).collect())
        .collect();
    let b = if sections.is_empty() {
        Matrix::zeros(0, 0, &k0)
    } else {
        h0.induced_frobenius(&sections)?
    };
    let gr2 = constant_rep(&b, h0, "Gr_2".into())?;
    let gr2_report = gr2.purity_check(2)?;
    if let Some(bad) = &gr2_report.offending {
        return Err(Error::PurityFailure {
            index: 2,
            expected: "2".into(),
            detail: format!("eigenvalue {} of the boundary kernel", bad.description),
        });
    }
    let gr1 = wd_of_cohomology(&c.h1_compact, 1, mmax)?;
    let gr1_report = gr1.quasi_purity_check(1)?;
    if let Some(e) = gr1_report.failure() {
        return Err(e);
    }
    Ok(ExcisionReport {
        rank: gr1.dim() + gr2.dim(),
        proper: gr2.dim() == 0,
        gr1,
        gr1_report,
        gr2,
        gr2_report,
    })
}

/// Compatibility of a p-adic representation with a family of ℓ-adic ones.
pub fn ell_independence_check(
    p_adic: &WeilDeligneRep,
    ell_family: &[WeilDeligneRep],
    n_max: u32,
) -> Result<FamilyVerdict> {
    let mut all = vec![p_adic.clone()];
    all.extend(ell_family.iter().cloned());
    compatibility_family(&all, n_max)
}

/// Quadratic-coefficient matrix from integers, for hand-built data.
pub fn integer_quad_matrix(rows: &[&[i64]]) -> QuadMatrix {
    Matrix::from_rows(
        rows.iter().map(|r| r.iter().map(|&x| Quadratic::from_integer(x)).collect()).collect(),
        &Quadratic::zero(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::series_matrix;
    use crate::series::RingParams;
    use crate::weil_deligne::Verdict;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn params() -> RingParams {
        RingParams::laurent(5, 20, 32).unwrap()
    }

    fn kt(pr: &RingParams) -> PhiNablaModule {
        let p = pr.p() as i64;
        let a = series_matrix(pr, &[vec![vec![(0, q(1))], vec![]], vec![vec![], vec![(0, q(p))]]]);
        let g = series_matrix(pr, &[vec![vec![], vec![(-1, q(1))]], vec![vec![], vec![]]]);
        PhiNablaModule::new(pr.clone(), 2, Some(a), Some(g), "KT").unwrap()
    }

    fn symplectic(pr: &RingParams) -> SeriesMatrix {
        series_matrix(pr, &[vec![vec![], vec![(0, q(1))]], vec![vec![(0, q(-1))], vec![]]])
    }

    fn kt_datum() -> AbelianVarietyDatum {
        let pr = params();
        AbelianVarietyDatum::new(kt(&pr).tate_twist(1), None, Some(symplectic(&pr))).unwrap()
    }

    fn good_datum(a: i64) -> AbelianVarietyDatum {
        let pr = params();
        let c = Matrix::from_rows(vec![vec![q(0), q(-5)], vec![q(1), q(a)]], &q(0));
        let m = PhiNablaModule::constant(&pr, &c, "good").unwrap().tate_twist(1);
        AbelianVarietyDatum::new(m, None, Some(symplectic(&pr))).unwrap()
    }

    #[test]
    fn kummer_tate_ranks() {
        let d = kt_datum();
        let prof = rank_profile(&d).unwrap();
        assert_eq!((prof.n, prof.mu, prof.alpha, prof.lambda), (1, 1, 0, 0));
        assert_eq!(reduction_type(&d).unwrap().verdict, ReductionType::SemistableNotGood);
        assert_eq!(rank_profile(&d.dual_datum().unwrap()).unwrap(), prof);
    }

    #[test]
    fn good_reduction_ranks() {
        let d = good_datum(2);
        let prof = rank_profile(&d).unwrap();
        assert_eq!((prof.mu, prof.alpha, prof.lambda), (0, 1, 0));
        assert_eq!(reduction_type(&d).unwrap().verdict, ReductionType::Good);
        let w = semistable_weight_filtration(&d, 24).unwrap();
        assert_eq!(w.graded.len(), 1);
        assert_eq!(w.graded[0].index, -1);
        assert!(w.monodromy_match);
    }

    #[test]
    fn kummer_tate_weight_filtration() {
        let w = semistable_weight_filtration(&kt_datum(), 24).unwrap();
        assert_eq!(w.ranks(), vec![(-2, 1), (-1, 1), (0, 2)]);
        let idx: Vec<i64> = w.graded.iter().map(|g| g.index).collect();
        assert_eq!(idx, vec![-2, 0]);
        assert!(w.monodromy_match);
    }

    #[test]
    fn not_semistable() {
        let pr = params();
        let a = series_matrix(&pr, &[vec![vec![(2, q(1))], vec![]], vec![vec![], vec![(2, q(1))]]]);
        let g = series_matrix(&pr, &[vec![vec![(-1, BigRational::new(1.into(), 2.into()))], vec![]], vec![vec![], vec![(-1, BigRational::new(1.into(), 2.into()))]]]);
        let m = PhiNablaModule::new(pr, 2, Some(a), Some(g), "half").unwrap();
        let d = AbelianVarietyDatum::new(m, None, None).unwrap();
        let prof = rank_profile(&d).unwrap();
        assert_eq!((prof.mu, prof.alpha, prof.lambda), (0, 0, 1));
        assert_eq!(reduction_type(&d).unwrap().verdict, ReductionType::NotSemistable);
    }

    #[test]
    fn weight_monodromy_on_kummer_tate() {
        let r = check_weight_monodromy(&kt(&params()), 1, 24).unwrap();
        assert_eq!(r.verdict, Verdict::QuasiPure);
    }

    #[test]
    fn excision_two_points() {
        let pr = params();
        let h0 = PhiNablaModule::trivial(&pr, 2).tate_twist(-1);
        let h2 = PhiNablaModule::trivial(&pr, 1).tate_twist(-1);
        let delta = series_matrix(&pr, &[vec![vec![(0, q(1))], vec![(0, q(1))]]]);
        let c = OpenCurveDatum::new(kt(&pr), h0, h2, delta).unwrap();
        let rep = excision_weight_filtration(&c, 24).unwrap();
        assert_eq!(rep.gr2.dim(), 1);
        assert_eq!(rep.rank, 3);
        assert!(!rep.proper);
    }
}
