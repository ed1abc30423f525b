//! One PASS/FAIL line per acceptance criterion; nonzero exit on any failure.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use phinabla::diagnostics::{
    excision_weight_filtration, rank_profile, reduction_type, semistable_weight_filtration, ReductionType,
};
use phinabla::json::{parse, AbelianJson, CurveJson, FamilyJson, ModuleJson, Overrides};
use phinabla::marmora::extract;
use phinabla::module::{series_matrix, GaugeChange};
use phinabla::oracle_kit::{
    axiom_filtrations, count_points_weierstrass, ode_recurrence_solutions, same_flag, verify_monodromy_axioms,
};
use phinabla::weil_deligne::{compare_tables, compatibility_family, Verdict};
use phinabla::{Error, Matrix, PhiNablaModule, QMatrix, Rational, RingParams};
use phinabla_cli::commands::{family_members, Options};
use phinabla_cli::selftest::{self, indexed_filtration};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn corpus(name: &str) -> String {
    let path: PathBuf = selftest::default_corpus().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn module(name: &str) -> PhiNablaModule {
    parse::<ModuleJson>(&corpus(name)).unwrap().build(&Overrides::default()).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, format!("took {t:?}, limit {limit:?}"))
}

fn elementary(pr: &RingParams, i: usize, c: i64, k: i64) -> GaugeChange {
    let mut rows = vec![vec![vec![(0, q(1))], vec![]], vec![vec![], vec![(0, q(1))]]];
    rows[i][1 - i] = vec![(k, q(c))];
    GaugeChange::new(series_matrix(pr, &rows)).unwrap()
}

fn compatibility_identity() -> Outcome {
    let start = Instant::now();
    let kt = module("kummer_tate.json");
    let pr = kt.params().clone();
    ensure((pr.p(), pr.precision(), pr.window().1) == (5, 20, 32), "corpus parameters changed")?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut modules = vec![kt.clone()];
    for _ in 0..10 {
        let mut c = || {
            let v: i64 = rng.gen_range(1..=3);
            if rng.gen_bool(0.5) {
                -v
            } else {
                v
            }
        };
        let (c1, c2) = (c(), c());
        let (k1, k2) = (rng.gen_range(-1..=1), rng.gen_range(-1..=1));
        let g = elementary(&pr, 0, c1, k1).then(&elementary(&pr, 1, c2, k2));
        ensure(g.matrix().det().constant_term() == pr.integer(1), "gauge determinant is not 1")?;
        modules.push(kt.gauge(&g).map_err(|e| e.to_string())?);
    }
    for (i, m) in modules.iter().enumerate() {
        let r = m.check_compatibility().map_err(|e| e.to_string())?;
        ensure(r.residual.is_zero() && r.compatible && !r.truncated, format!("module {i}: residual nonzero"))?;
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("11 modules, residual exactly zero, {:?}", start.elapsed()))
}

fn random_nilpotent(rng: &mut ChaCha8Rng, d: usize) -> QMatrix {
    let mut n = Matrix::zeros(d, d, &q(0));
    for i in 0..d {
        for j in i + 1..d {
            if rng.gen_bool(0.6) {
                n[(i, j)] = q(rng.gen_range(-2..=2));
            }
        }
    }
    let mut u = Matrix::identity(d, &q(1));
    for _ in 0..2 * d {
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        if i != j {
            let mut e = Matrix::identity(d, &q(1));
            e[(i, j)] = q(rng.gen_range(-2..=2));
            u = u.mul(&e);
        }
    }
    u.mul(&n).mul(&u.inverse().unwrap())
}

fn monodromy_filtration_correct() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut compared = 0;
    for trial in 0..200 {
        let d = rng.gen_range(1..=6);
        let n = random_nilpotent(&mut rng, d);
        let rows: Vec<Vec<Rational>> = (0..d).map(|i| (0..d).map(|j| n[(i, j)].clone()).collect()).collect();
        let (ours, s) = indexed_filtration(&n)?;
        let check = verify_monodromy_axioms(&rows, &ours);
        ensure(check.holds(), format!("trial {trial}: {:?}", check.violations))?;
        if d <= 4 {
            let all = axiom_filtrations(&rows);
            ensure(all.len() == 1, format!("trial {trial}: {} candidates satisfy the axioms", all.len()))?;
            ensure(same_flag(&all[0], &ours, s + 1), format!("trial {trial}: differs from the unique filtration"))?;
            compared += 1;
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("200 matrices satisfy both axioms, {compared} matched the exhaustive search"))
}

fn weight_monodromy() -> Outcome {
    let kt = extract(&module("kummer_tate.json"), 24).map_err(|e| e.to_string())?.rep;
    let r = kt.quasi_purity_check(1).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::QuasiPure, format!("Kummer-Tate verdict {}", r.verdict.name()))?;
    let ws: Vec<Option<Rational>> = r.graded.iter().flat_map(|g| g.weights.iter().map(|w| w.weight.clone())).collect();
    ensure(ws == vec![Some(q(0)), Some(q(2))], format!("graded weights {ws:?}"))?;
    for (file, p, coeffs) in [
        ("good_h1_p2.json", 2u64, [0, 0, 1, 0, 0]),
        ("good_h1_p5.json", 5, [0, 0, 0, 1, 0]),
        ("good_h1_p7.json", 7, [0, 0, 0, 0, 1]),
    ] {
        let count = count_points_weierstrass(p, coeffs).map_err(|e| e.to_string())?;
        let rep = extract(&module(file), 24).map_err(|e| e.to_string())?.rep;
        let phi = rep.phi();
        // Frobenius is the companion matrix of T² − aT + p.
        ensure(phi[(1, 1)].to_rational() == Some(q(count.trace)), format!("{file}: trace differs from point count"))?;
        ensure(phi.det().to_rational() == Some(q(p as i64)), format!("{file}: α·ᾱ ≠ p"))?;
        let r = rep.quasi_purity_check(1).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Pure, format!("{file}: {}", r.verdict.name()))?;
        let exact = r.graded.iter().all(|g| g.weights.iter().all(|w| w.exact && w.weight == Some(q(1))));
        ensure(exact, format!("{file}: weights not exactly 1"))?;
    }
    Ok("Kummer-Tate quasi-pure with weights {0, 2}; p = 2, 5, 7 pure of weight 1".into())
}

/// `dim D^t` from recurrence solutions and the pairing, independently of
/// the main path. Solutions are constant on these data.
fn oracle_toric_rank(d: &AbelianJson) -> Result<(usize, usize), String> {
    let m = d.module.build(&Overrides::default()).map_err(|e| e.to_string())?;
    let g = m.connection().ok_or("no connection")?;
    let lm: Vec<Vec<Vec<(i64, Rational)>>> = (0..g.nrows())
        .map(|i| (0..g.ncols()).map(|j| g[(i, j)].to_rational_terms().unwrap()).collect())
        .collect();
    let sols = ode_recurrence_solutions(&lm, m.params().min_exponent(), m.params().max_exponent())
        .map_err(|e| e.to_string())?
        .solutions;
    let consts: Vec<Vec<Rational>> = sols
        .iter()
        .map(|s| {
            s.iter()
                .map(|c| c.iter().filter(|(e, _)| *e == 0).map(|(_, x)| x.clone()).next().unwrap_or(q(0)))
                .collect()
        })
        .collect();
    let pr = m.params();
    let p = d.pairing.as_ref().ok_or("no pairing")?;
    let pm: Vec<Vec<Rational>> = p
        .iter()
        .map(|row| row.iter().map(|x| x.build(pr).unwrap().constant_term().to_rational().unwrap()).collect())
        .collect();
    let k = consts.len();
    let gram: Vec<Vec<Rational>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mut acc = q(0);
                    for a in 0..pm.len() {
                        for b in 0..pm.len() {
                            acc += &consts[i][a] * &pm[a][b] * &consts[j][b];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let rank = if k == 0 { 0 } else { Matrix::from_rows(gram, &q(0)).rank() };
    Ok((k, k - rank))
}

fn reduction_criterion() -> Outcome {
    let cases = [
        ("good_elliptic.json", ReductionType::Good),
        ("kt_abelian.json", ReductionType::SemistableNotGood),
        ("half_abelian.json", ReductionType::NotSemistable),
    ];
    for (i, (file, want)) in cases.iter().enumerate() {
        let j = parse::<AbelianJson>(&corpus(file)).map_err(|e| e.to_string())?;
        let d = j.build(&Overrides::default()).map_err(|e| e.to_string())?;
        let r = reduction_type(&d).map_err(|e| e.to_string())?;
        ensure(r.verdict == *want, format!("{file}: {} instead of {}", r.verdict.name(), want.name()))?;
        if i < 2 {
            let prof = rank_profile(&d).map_err(|e| e.to_string())?;
            let (df, dt) = oracle_toric_rank(&j)?;
            ensure(d.module().rank() == 2 * prof.n, format!("{file}: rk D ≠ 2n"))?;
            ensure(df == prof.mu + 2 * prof.alpha, format!("{file}: rk D^f = {df} ≠ μ + 2α"))?;
            ensure(dt == prof.mu, format!("{file}: rk D^t = {dt} ≠ μ"))?;
        }
    }
    Ok("GOOD, SEMISTABLE_NOT_GOOD, NOT_SEMISTABLE; rank identities exact".into())
}

fn filtration_match() -> Outcome {
    let d = parse::<AbelianJson>(&corpus("kt_abelian.json"))
        .and_then(|j| j.build(&Overrides::default()))
        .map_err(|e| e.to_string())?;
    let w = semistable_weight_filtration(&d, 24).map_err(|e| e.to_string())?;
    ensure(w.monodromy_match, "WD(W_k) differs from M_{k+1}")?;
    let m = w.rep.monodromy_filtration().map_err(|e| e.to_string())?;
    for (k, r) in w.ranks() {
        ensure(m.get(k + 1).dim() == r, format!("rank of W_{k} is {r}, M_{} has {}", k + 1, m.get(k + 1).dim()))?;
    }
    Ok(format!("W ranks {:?} match M shifted by one", w.ranks()))
}

fn excision() -> Outcome {
    let open = parse::<CurveJson>(&corpus("tate_open_curve.json"))
        .and_then(|j| j.build(&Overrides::default()))
        .map_err(|e| e.to_string())?;
    let delta_rank = open.boundary_map.map(&open.h1_compact.params().integer(0), |x| x.constant_term()).rank();
    ensure(delta_rank == 1, "boundary map should have rank 1")?;
    let r = excision_weight_filtration(&open, 24).map_err(|e| e.to_string())?;
    ensure(r.gr1_report.verdict == Verdict::QuasiPure, "Gr_1 not quasi-pure of weight 1")?;
    ensure(r.gr2_report.pure && r.gr2_report.weight == 2, "Gr_2 not pure of weight 2")?;
    ensure(r.gr2.dim() == 1 && r.rank == 3 && !r.proper, "wrong ranks for the open curve")?;
    let proper = parse::<CurveJson>(&corpus("proper_curve.json"))
        .and_then(|j| j.build(&Overrides::default()))
        .map_err(|e| e.to_string())?;
    let p = excision_weight_filtration(&proper, 24).map_err(|e| e.to_string())?;
    ensure(p.proper && p.gr2.dim() == 0 && p.rank == p.gr1.dim(), "empty boundary is not the proper case")?;
    Ok("Gr_1 quasi-pure of weight 1, Gr_2 pure of weight 2 (rank 1); empty boundary is proper".into())
}

fn ell_independence() -> Outcome {
    let fam = parse::<FamilyJson>(&corpus("family_tate.json")).map_err(|e| e.to_string())?;
    let reps = family_members(&fam, &Options::default()).map_err(|e| e.to_string())?;
    let v = compatibility_family(&reps, 6).map_err(|e| e.to_string())?;
    ensure(v.compatible, "family should be compatible")?;
    let mut tables = v.tables.clone();
    let (&key, value) = tables[1].entries.iter().find(|((_, n, _), _)| *n == 3).ok_or("no n = 3 entry")?;
    let bumped = value + q(1);
    tables[1].entries.insert(key, bumped);
    let d = compare_tables(&tables).ok_or("perturbed table still agrees")?;
    ensure((d.member, d.k, d.n, d.j) == (1, key.0, key.1, key.2), format!("witness {d} is not the perturbed entry"))?;
    Ok(format!("compatible for n ≤ 6; perturbation caught at (k, n) = ({}, {})", d.k, d.n))
}

fn tame_extraction() -> Outcome {
    let ex = extract(&module("half_exponent.json"), 24).map_err(|e| e.to_string())?;
    ensure(ex.e == 2, format!("cover degree {}", ex.e))?;
    ensure(ex.normal_form.is_constant(), "not constant after pullback")?;
    let t = ex.rep.inertia().ok_or("no inertia")?;
    let one = Matrix::identity(t.matrix.nrows(), &phinabla::Quadratic::from_integer(1));
    ensure(t.order == 2 && t.matrix != one && t.matrix.pow(2) == one, "inertia order is not exactly 2")?;
    match extract(&module("wild_exponent.json"), 24) {
        Err(Error::NotTame(_)) => Ok("λ = 1/2 constant after e = 2, inertia of order 2; 1/p raises NotTame".into()),
        other => Err(format!("wild exponent gave {:?}", other.map(|e| e.e))),
    }
}

fn precision_robustness() -> Outcome {
    let start = Instant::now();
    let st = selftest::run(&selftest::default_corpus(), &Options::default());
    if let Some(c) = st.checks.iter().find(|c| !c.pass) {
        return Err(format!("{}: {}", c.name, c.detail));
    }
    let stable = st.checks.iter().filter(|c| c.name.starts_with("precision stability")).count();
    ensure(stable >= 10, "corpus too small")?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("selftest green ({} checks, {stable} corpus files stable), {:?}", st.checks.len(), start.elapsed()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("compatibility identity under gauge", compatibility_identity),
        ("monodromy filtration correctness", monodromy_filtration_correct),
        ("weight-monodromy at desk scale", weight_monodromy),
        ("reduction criterion and rank identities", reduction_criterion),
        ("weight filtration matches monodromy filtration", filtration_match),
        ("excision weight filtration", excision),
        ("l-independence of traces", ell_independence),
        ("Kummer pullback and tame extraction", tame_extraction),
        ("precision robustness and selftest", precision_robustness),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("PASS {}. {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {}. {name}: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
