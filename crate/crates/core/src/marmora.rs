//! Extraction of Weil–Deligne representations from tamely quasi-unipotent
//! (φ,∇)-modules: Kummer pullback, unipotent normal form and log-solutions.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Subspace};
use crate::module::{
    recognize_rational, GaugeChange, Grading, PadicMatrix, PhiNablaModule, QMatrix,
    Unipotence, UnipotentFiltration,
};
use crate::quadratic::Quadratic;
use crate::series::{LaurentElement, RingMode};
use crate::weil_deligne::{Convention, Inertia, QuadMatrix, WeilDeligneRep};

/// Fundamental solution `Σ_j C_j (log t)^j` in the normal-form basis, with
/// `D(log t) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSolutionBasis {
    /// `C_j = (−N)^j / j!`; `C_0 = I`.
    pub coefficients: Vec<QMatrix>,
    /// Matrix of `D` on the normal-form basis (constant, nilpotent).
    pub monodromy: QMatrix,
}

impl LogSolutionBasis {
    pub fn from_monodromy(n: &QMatrix) -> Self {
        let d = n.nrows();
        let zero = BigRational::zero();
        let minus_n = n.neg();
        let mut coefficients = vec![Matrix::identity(d, &zero)];
        let mut k = 1i64;
        loop {
            let next = coefficients
                .last()
                .unwrap()
                .mul(&minus_n)
                .scale(&BigRational::new(1.into(), k.into()));
            if next.is_zero() {
                break;
            }
            coefficients.push(next);
            k += 1;
        }
        LogSolutionBasis {
            coefficients,
            monodromy: n.clone(),
        }
    }

    /// Highest power of `log t` plus one.
    pub fn log_degree(&self) -> usize {
        self.coefficients.len()
    }

    /// Applies `D` to `Σ_j c_j (log t)^j` (coefficient vectors `c_j` in
    /// the normal-form basis): `Σ_j (N c_j + (j+1) c_{j+1}) (log t)^j`.
    pub fn apply_d(&self, v: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
        let d = self.monodromy.nrows();
        (0..v.len())
            .map(|j| {
                let mut out = self.monodromy.mul_vec(&v[j]);
                if let Some(next) = v.get(j + 1) {
                    let f = BigRational::from_integer(((j + 1) as i64).into());
                    for i in 0..d {
                        out[i] = &out[i] + &next[i] * &f;
                    }
                }
                out
            })
            .collect()
    }

    /// Column `k` of the fundamental solution as log-coefficient vectors.
    pub fn solution(&self, k: usize) -> Vec<Vec<BigRational>> {
        self.coefficients.iter().map(|c| c.column(k)).collect()
    }
}

/// Everything computed on the way from a module to its representation.
#[derive(Clone, Debug)]
pub struct Extraction {
    /// Degree of the Kummer cover.
    pub e: u32,
    pub exponents: Vec<BigRational>,
    pub level: usize,
    pub step_ranks: Vec<usize>,
    /// Inertia class (mod `e`) of each normal-form basis vector.
    pub classes: Vec<u32>,
    /// Columns: the normal-form basis in terms of the pulled-back basis.
    pub gauge: GaugeChange,
    /// Pulled-back module in the normal-form basis: `tG` constant nilpotent,
    /// Frobenius constant.
    pub normal_form: PhiNablaModule,
    pub solutions: LogSolutionBasis,
    pub rep: WeilDeligneRep,
}

/// Degree `e` of the tame cover killing the exponents: the least common
/// multiple of their denominators, checked for tameness.
pub fn tame_degree(exponents: &[BigRational], p: u64, mmax: u32) -> Result<u32> {
    let mut e = num_bigint::BigInt::one();
    for x in exponents {
        let den = x.denom();
        if (den % p).is_zero() {
            return Err(Error::NotTame(format!("exponent {x} has p in its denominator")));
        }
        if den > &num_bigint::BigInt::from(mmax) {
            return Err(Error::NotTame(format!("denominator of {x} exceeds {mmax}")));
        }
        e = e.lcm(den);
    }
    // Divisors of the lcm satisfying e·λ ∈ ℤ for every exponent: only the
    // lcm itself, but kept explicit so the choice is visible.
    let e = e.to_u32().ok_or_else(|| Error::NotTame("cover degree too large".into()))?;
    let ok = |d: u32| {
        exponents
            .iter()
            .all(|x| (x * BigRational::from_integer(d.into())).is_integer())
    };
    Ok((1..=e).find(|d| e % d == 0 && ok(*d)).unwrap_or(e))
}

/// Primitive `e`-th root of unity in a quadratic field.
pub fn root_of_unity(e: u32) -> Result<Quadratic> {
    let half = |a: i64, b: i64, d: i64| {
        Quadratic::new(BigRational::new(a.into(), 2.into()), BigRational::new(b.into(), 2.into()), d)
    };
    Ok(match e {
        1 => Quadratic::one(),
        2 => Quadratic::from_integer(-1),
        3 => half(-1, 1, -3),
        4 => Quadratic::sqrt(-1),
        6 => half(1, 1, -3),
        _ => return Err(Error::InertiaNotRepresentable(e)),
    })
}

/// Removes the non-constant part of the strictly block upper triangular
/// `tG` of a unipotent normal form, one superdiagonal at a time.
fn eliminate_nonconstant(
    filt: &UnipotentFiltration,
) -> Result<(PhiNablaModule, GaugeChange)> {
    let blocks = filt.blocks();
    let mut cur = filt.gauged.clone();
    let mut total = filt.gauge.clone();
    let params = cur.params().clone();
    let zero = LaurentElement::zero(&params);
    let r = cur.rank();
    for d in 1..blocks.len() {
        let h = cur.log_connection().expect("connection present");
        let mut u = Matrix::identity(r, &zero);
        let mut changed = false;
        for b in 0..blocks.len() - d {
            for i in blocks[b].clone() {
                for j in blocks[b + d].clone() {
                    let x = h[(i, j)].integrate_log();
                    if !x.is_zero() {
                        u[(i, j)] = x.negated();
                        changed = true;
                    }
                }
            }
        }
        if changed {
            let g = GaugeChange::new(u)?;
            cur = cur.gauge(&g)?;
            total = total.then(&g);
        }
    }
    Ok((cur, total))
}

/// `A σ(A) ⋯ σ^{a−1}(A)`: the linear Frobenius over the degree-`a`
/// unramified extension.
pub(crate) fn linearize(a: &PadicMatrix, degree: usize) -> PadicMatrix {
    let mut out = a.clone();
    let mut s = a.clone();
    for _ in 1..degree {
        s = s.map(&s.zero_element().clone(), |x| x.sigma());
        out = out.mul(&s);
    }
    out
}

pub(crate) fn to_quad(m: &QMatrix) -> QuadMatrix {
    m.map(&Quadratic::zero(), |x| Quadratic::rational(x.clone()))
}

/// The full extraction, with intermediate data.
pub fn extract(m: &PhiNablaModule, mmax: u32) -> Result<Extraction> {
    // Tameness is read off the residue alone, so it is decided before the
    // Frobenius is looked at.
    let params = m.params().clone();
    let res = m.residue_exponents()?;
    if res.unresolved > 0 {
        return Err(Error::NotTame(format!(
            "{} residue exponents are not rational",
            res.unresolved
        )));
    }
    let e = tame_degree(&res.exponents, params.p(), mmax)?;
    m.frobenius().ok_or(Error::MissingStructure("Frobenius"))?;
    let report = m.check_compatibility()?;
    if !report.compatible {
        return Err(Error::Incompatible(report.min_valuation));
    }
    let pulled = if e == 1 { m.clone() } else { m.kummer_pullback(e)? };
    let filt = match pulled.graded_unipotent_filtration(&Grading::uniform(e, m.rank()))? {
        Unipotence::Unipotent(f) => f,
        Unipotence::NotUnipotent { level, remaining_rank } => {
            return Err(Error::NotTame(format!(
                "pullback of degree {e} is not unipotent (rank {remaining_rank} left after {level} steps)"
            )))
        }
    };
    let (normal, gauge) = eliminate_nonconstant(&filt)?;
    let h = normal.log_connection().expect("connection present");
    let a = normal.frobenius().expect("checked").clone();
    if h.entries().chain(a.entries()).any(|x| !x.is_constant()) {
        return Err(Error::NonConstantFrobenius);
    }
    let k0 = params.integer(0);
    let n_p = h.map(&k0, |x| x.constant_term());
    let a_p = a.map(&k0, |x| x.constant_term());
    let n_q = recognize_rational(&n_p).ok_or(Error::NonConstantFrobenius)?;
    let phi_q = recognize_rational(&linearize(&a_p, params.degree())).ok_or(Error::NonConstantFrobenius)?;
    let inertia = if e == 1 {
        None
    } else {
        let zeta = root_of_unity(e)?;
        let diag: Vec<Quadratic> = filt.classes.iter().map(|&c| pow_quad(&zeta, c)).collect();
        Some(Inertia {
            order: e,
            matrix: Matrix::diagonal(&diag, &Quadratic::zero()),
        })
    };
    let q = params
        .q()
        .to_u64()
        .ok_or_else(|| Error::BadParams("q does not fit in 64 bits".into()))?;
    let rep = WeilDeligneRep::new(q, to_quad(&phi_q), to_quad(&n_q), inertia, Convention::Geometric)?
        .with_label(m.label().to_string());
    Ok(Extraction {
        e,
        exponents: res.exponents,
        level: filt.level,
        step_ranks: filt.step_ranks.clone(),
        classes: filt.classes.clone(),
        gauge,
        normal_form: normal,
        solutions: LogSolutionBasis::from_monodromy(&n_q),
        rep,
    })
}

fn pow_quad(z: &Quadratic, k: u32) -> Quadratic {
    (0..k).fold(Quadratic::one(), |acc, _| acc * z.clone())
}

pub fn wd_extract(m: &PhiNablaModule, mmax: u32) -> Result<WeilDeligneRep> {
    Ok(extract(m, mmax)?.rep)
}

/// `H^i_p`: base change to the Robba window, then extraction; the label
/// records the degree.
pub fn wd_of_cohomology(m: &PhiNablaModule, i: i64, mmax: u32) -> Result<WeilDeligneRep> {
    let target = m.params().to_laurent();
    let m = if m.params().mode() == RingMode::Laurent { m.clone() } else { m.rebase(&target)? };
    let label = format!("H^{i}_p({})", m.label());
    Ok(wd_extract(&m, mmax)?.with_label(label))
}

/// Normal form of a unipotent module of level ≤ 2: `D(e) = D(f) = 0` and
/// `D(g)` lies in the constant span of `e`.
#[derive(Clone, Debug)]
pub struct KeyTwoForm {
    pub gauge: GaugeChange,
    pub module: PhiNablaModule,
    pub e: Vec<usize>,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    /// `D(g_k) = Σ_i d[(i, k)] e_i`.
    pub d: PadicMatrix,
}

pub fn key2_normal_form(m: &PhiNablaModule) -> Result<KeyTwoForm> {
    let filt = match m.unipotent_filtration()? {
        Unipotence::Unipotent(f) => f,
        Unipotence::NotUnipotent { .. } => return Err(Error::NotUnipotent),
    };
    if filt.level > 2 {
        return Err(Error::NotLevelTwo(filt.level));
    }
    let (normal, gauge) = eliminate_nonconstant(&filt)?;
    let params = m.params().clone();
    let k0 = params.integer(0);
    let r = m.rank();
    if filt.level <= 1 {
        return Ok(KeyTwoForm {
            gauge,
            module: normal,
            e: Vec::new(),
            f: (0..r).collect(),
            g: Vec::new(),
            d: Matrix::zeros(0, 0, &k0),
        });
    }
    let (k1, k2) = (filt.step_ranks[0], filt.step_ranks[1]);
    let h = normal.log_connection().expect("connection present");
    if h.entries().any(|x| !x.is_constant()) {
        return Err(Error::NonConstantFrobenius);
    }
    let n12 = h.block(0, k1, k1, r).map(&k0, |x| x.constant_term());
    // New basis of the first block: independent columns of N12, then
    // standard vectors.
    let (_, pivots) = n12.rref();
    let mut cols: Vec<Vec<_>> = pivots.iter().map(|&c| n12.column(c)).collect();
    let rank_e = cols.len();
    let mut basis = Subspace::span(k1, &cols, &k0);
    for i in 0..k1 {
        let mut v = vec![k0.clone(); k1];
        v[i] = params.integer(1);
        if !basis.contains(&v) {
            basis = basis.sum(&Subspace::span(k1, &[v.clone()], &k0));
            cols.push(v);
        }
    }
    let zero = LaurentElement::zero(&params);
    let mut u = Matrix::identity(r, &zero);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..k1 {
            u[(i, j)] = LaurentElement::constant(&params, c[i].clone());
        }
    }
    let g = GaugeChange::new(u)?;
    let module = normal.gauge(&g)?;
    let h2 = module.log_connection().expect("connection present");
    let d = h2.block(0, rank_e, k1, k1 + k2).map(&k0, |x| x.constant_term());
    Ok(KeyTwoForm {
        gauge: gauge.then(&g),
        module,
        e: (0..rank_e).collect(),
        f: (rank_e..k1).collect(),
        g: (k1..r).collect(),
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::series_matrix;
    use crate::series::RingParams;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn params() -> RingParams {
        RingParams::laurent(5, 20, 32).unwrap()
    }

    fn kt(pr: &RingParams) -> PhiNablaModule {
        let p = pr.p() as i64;
        let a = series_matrix(pr, &[vec![vec![(0, q(1, 1))], vec![]], vec![vec![], vec![(0, q(p, 1))]]]);
        let g = series_matrix(pr, &[vec![vec![], vec![(-1, q(1, 1))]], vec![vec![], vec![]]]);
        PhiNablaModule::new(pr.clone(), 2, Some(a), Some(g), "KT").unwrap()
    }

    fn half(pr: &RingParams) -> PhiNablaModule {
        let p = pr.p() as i64;
        let a = series_matrix(pr, &[vec![vec![((p - 1) / 2, q(1, 1))]]]);
        let g = series_matrix(pr, &[vec![vec![(-1, q(1, 2))]]]);
        PhiNablaModule::new(pr.clone(), 1, Some(a), Some(g), "half").unwrap()
    }

    #[test]
    fn kummer_tate_gives_sp2() {
        let ex = extract(&kt(&params()), 24).unwrap();
        assert_eq!(ex.e, 1);
        assert_eq!(ex.level, 2);
        let rep = ex.rep;
        assert_eq!(rep.phi(), &to_quad(&Matrix::diagonal(&[q(1, 1), q(5, 1)], &q(0, 1))));
        assert_eq!(rep.monodromy()[(0, 1)], Quadratic::one());
        assert!(rep.inertia().is_none());
        assert_eq!(ex.solutions.log_degree(), 2);
    }

    #[test]
    fn half_exponent_needs_quadratic_cover() {
        let ex = extract(&half(&params()), 24).unwrap();
        assert_eq!(ex.e, 2);
        let t = ex.rep.inertia().unwrap();
        assert_eq!(t.order, 2);
        assert_eq!(t.matrix[(0, 0)], Quadratic::from_integer(-1));
        assert!(ex.rep.monodromy().is_zero());
        assert_eq!(ex.rep.phi()[(0, 0)], Quadratic::one());
    }

    #[test]
    fn wild_exponent_is_not_tame() {
        let pr = params();
        let g = series_matrix(&pr, &[vec![vec![(-1, q(1, 5))]]]);
        let m = PhiNablaModule::new(pr, 1, None, Some(g), "wild").unwrap();
        assert!(matches!(extract(&m, 24), Err(Error::NotTame(_))));
        assert!(matches!(tame_degree(&[q(1, 5)], 5, 24), Err(Error::NotTame(_))));
        assert!(matches!(tame_degree(&[q(1, 25)], 7, 24), Err(Error::NotTame(_))));
        assert_eq!(tame_degree(&[q(1, 2), q(1, 3)], 5, 24).unwrap(), 6);
    }

    #[test]
    fn twist_commutes_with_extraction() {
        let m = kt(&params());
        let a = wd_extract(&m.tate_twist(1), 24).unwrap();
        let b = wd_extract(&m, 24).unwrap().twist(1);
        assert_eq!(a.phi(), b.phi());
        assert_eq!(a.monodromy(), b.monodromy());
    }

    #[test]
    fn key2_on_kummer_tate() {
        let k = key2_normal_form(&kt(&params())).unwrap();
        assert_eq!((k.e.len(), k.f.len(), k.g.len()), (1, 0, 1));
        assert_eq!(k.d[(0, 0)], params().integer(1));
    }

    #[test]
    fn log_solutions_are_horizontal() {
        let n = Matrix::from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]], &q(0, 1));
        let sol = LogSolutionBasis::from_monodromy(&n);
        for k in 0..2 {
            let d = sol.apply_d(&sol.solution(k));
            assert!(d.iter().flatten().all(|x| x.is_zero()));
        }
    }
}
