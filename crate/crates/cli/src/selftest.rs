//! Oracle comparisons and precision stability.
//!
//! Every check pits a main-path computation against something computed
//! differently: exhaustive point counts, the brute-force filtration
//! lattice, the term-by-term recurrence, exact root separation.

use std::path::{Path, PathBuf};

use phinabla::json::{parse, AbelianJson, CurveJson, FamilyJson, ModuleJson, Overrides};
use phinabla::marmora::extract;
use phinabla::oracle_kit::{
    axiom_filtrations, algebraic_weight, count_points_weierstrass, ode_recurrence_solutions, same_flag,
    verify_monodromy_axioms, IndexedFiltration, LaurentMatrix,
};
use phinabla::weil_deligne::{monodromy_filtration, polynomial_weights};
use phinabla::{Convention, Matrix, PhiNablaModule, QMatrix, QuadMatrix, Quadratic, Rational};
use serde_json::{json, Value};

use crate::commands::{analyze, compat, error_kind, excision, reduction, wd, Options, Outcome};
use crate::render::{paint, Tone};

pub fn default_corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples")
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Selftest {
    pub checks: Vec<Check>,
}

impl Selftest {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    fn push_result(&mut self, name: impl Into<String>, r: Result<String, String>) {
        match r {
            Ok(d) => self.push(name, true, d),
            Err(d) => self.push(name, false, d),
        }
    }

    pub fn outcome(&self) -> Outcome {
        let mut text = String::new();
        for c in &self.checks {
            let tag = if c.pass { paint("PASS", Tone::Good) } else { paint("FAIL", Tone::Bad) };
            text.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        text.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        let json = json!({
            "pass": self.pass(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
        });
        Outcome {
            json,
            text,
            exit: if self.pass() { 0 } else { 1 },
        }
    }
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn read(dir: &Path, name: &str) -> Result<String, String> {
    std::fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"))
}

fn load_module(dir: &Path, name: &str, opts: &Options) -> Result<PhiNablaModule, String> {
    parse::<ModuleJson>(&read(dir, name)?)
        .and_then(|j| j.build(&opts.overrides))
        .map_err(|e| e.to_string())
}

fn rational_matrix(m: &QuadMatrix) -> Option<QMatrix> {
    m.try_map(&q(0), |x| x.to_rational().ok_or(())).ok()
}

/// Point counts over `F_p` against the characteristic polynomial of the
/// extracted Frobenius.
fn point_counts(st: &mut Selftest, dir: &Path, opts: &Options) {
    let curves: [(&str, u64, [i64; 5]); 3] = [
        ("good_h1_p2.json", 2, [0, 0, 1, 0, 0]),
        ("good_h1_p5.json", 5, [0, 0, 0, 1, 0]),
        ("good_h1_p7.json", 7, [0, 0, 0, 0, 1]),
    ];
    for (file, p, coeffs) in curves {
        let r = (|| {
            let count = count_points_weierstrass(p, coeffs).map_err(|e| e.to_string())?;
            let m = load_module(dir, file, opts)?;
            let rep = extract(&m, opts.mmax).map_err(|e| e.to_string())?.rep;
            let phi = rational_matrix(rep.phi()).ok_or("Frobenius is not rational")?;
            let ours = phi.charpoly();
            let theirs: Vec<Rational> = count.charpoly.iter().map(|&c| q(c)).collect();
            if ours == theirs {
                Ok(format!("#E(F_{p}) = {}, a = {}", count.count, count.trace))
            } else {
                Err(format!("charpoly {ours:?} but point count gives {theirs:?}"))
            }
        })();
        st.push_result(format!("point count vs Frobenius ({file})"), r);
    }
}

/// Polynomials whose root weights are known from their factorization.
pub const WEIGHT_CASES: &[(&[i64], u64)] = &[
    (&[2, 0, 1], 2),
    (&[5, -2, 1], 5),
    (&[7, 4, 1], 7),
    (&[-1, 1], 5),
    (&[-25, 1], 5),
    (&[-3, 1], 5),
    (&[25, -10, 10, -2, 1], 5),
    (&[-125, 0, 0, 0, 0, 0, 1], 5),
    (&[9, 0, 1], 3),
    (&[1, 0, 0, 1], 7),
];

fn weights(st: &mut Selftest) {
    for &(poly, qq) in WEIGHT_CASES {
        let r = (|| {
            let oracle = algebraic_weight(poly, qq).map_err(|e| e.to_string())?;
            let f: Vec<Rational> = poly.iter().map(|&c| q(c)).collect();
            let mut ours: Vec<Option<Rational>> = polynomial_weights(&f, qq, Convention::Geometric)
                .map_err(|e| e.to_string())?
                .into_iter()
                .map(|w| w.weight)
                .collect();
            ours.sort();
            if ours == oracle {
                Ok(format!("{} roots", ours.len()))
            } else {
                Err(format!("weights {ours:?} but oracle gives {oracle:?}"))
            }
        })();
        st.push_result(format!("root weights vs oracle ({poly:?}, q = {qq})"), r);
    }
}

/// Nilpotent matrices of the given Jordan type, conjugated by a fixed
/// unimodular matrix.
pub fn conjugated_jordan(blocks: &[usize]) -> QMatrix {
    let d: usize = blocks.iter().sum();
    let mut j = Matrix::zeros(d, d, &q(0));
    let mut at = 0;
    for &b in blocks {
        for i in 0..b.saturating_sub(1) {
            j[(at + i, at + i + 1)] = q(1);
        }
        at += b;
    }
    let u = Matrix::from_fn(d, d, &q(0), |r, c| {
        if r == c || c == r + 1 || (r == 0 && c == d - 1) {
            q(1)
        } else {
            q(0)
        }
    });
    let ui = u.inverse().expect("unimodular");
    u.mul(&j).mul(&ui)
}

pub fn to_quad(m: &QMatrix) -> QuadMatrix {
    m.map(&Quadratic::from_integer(0), |x| Quadratic::rational(x.clone()))
}

fn rows(m: &QMatrix) -> Vec<Vec<Rational>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].clone()).collect()).collect()
}

/// The main-path monodromy filtration as an oracle filtration.
pub fn indexed_filtration(n: &QMatrix) -> Result<(IndexedFiltration, i64), String> {
    let f = monodromy_filtration(&to_quad(n)).map_err(|e| e.to_string())?;
    let s = f.s;
    let mut spaces = Vec::new();
    for k in -s..s {
        let vs = f
            .get(k)
            .basis_vectors()
            .into_iter()
            .map(|v| v.iter().map(|x| x.to_rational().ok_or("irrational basis vector".to_string())).collect())
            .collect::<Result<Vec<Vec<Rational>>, String>>()?;
        spaces.push(vs);
    }
    Ok((
        IndexedFiltration {
            dim: n.nrows(),
            lowest: -s,
            spaces,
        },
        s,
    ))
}

fn filtrations(st: &mut Selftest) {
    let types: &[&[usize]] = &[&[1], &[2], &[3], &[2, 1], &[2, 2], &[3, 1], &[4], &[3, 2], &[2, 2, 1]];
    for blocks in types {
        let n = conjugated_jordan(blocks);
        let r = (|| {
            let (ours, s) = indexed_filtration(&n)?;
            let check = verify_monodromy_axioms(&rows(&n), &ours);
            if !check.holds() {
                return Err(format!("axioms fail: {:?}", check.violations));
            }
            let all = axiom_filtrations(&rows(&n));
            if all.len() != 1 {
                return Err(format!("{} lattice filtrations satisfy the axioms", all.len()));
            }
            if !same_flag(&all[0], &ours, s + 1) {
                return Err("differs from the unique filtration".into());
            }
            Ok(format!("unique, s = {s}"))
        })();
        st.push_result(format!("monodromy filtration vs oracle (Jordan type {blocks:?})"), r);
    }
}

fn laurent_matrix(m: &PhiNablaModule) -> Option<LaurentMatrix> {
    let g = m.connection()?;
    (0..g.nrows())
        .map(|i| (0..g.ncols()).map(|j| g[(i, j)].to_rational_terms()).collect())
        .collect()
}

fn sections(st: &mut Selftest, dir: &Path, files: &[String], opts: &Options) {
    for file in files {
        let Ok(m) = load_module(dir, file, opts) else { continue };
        let Some(g) = laurent_matrix(&m) else { continue };
        let r = (|| {
            let (lo, hi) = (m.params().min_exponent(), m.params().max_exponent());
            let oracle = ode_recurrence_solutions(&g, lo, hi).map_err(|e| e.to_string())?;
            let ours = m.horizontal_sections().map_err(|e| e.to_string())?;
            if ours.len() == oracle.solutions.len() {
                Ok(format!("{} sections", ours.len()))
            } else {
                Err(format!("{} sections but the recurrence finds {}", ours.len(), oracle.solutions.len()))
            }
        })();
        st.push_result(format!("horizontal sections vs recurrence ({file})"), r);
    }
}

/// What a corpus file is, judged by which schema accepts it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Module,
    Abelian,
    Curve,
    Family,
}

pub fn kind_of(text: &str) -> Option<Kind> {
    if parse::<ModuleJson>(text).is_ok() {
        Some(Kind::Module)
    } else if parse::<AbelianJson>(text).is_ok() {
        Some(Kind::Abelian)
    } else if parse::<CurveJson>(text).is_ok() {
        Some(Kind::Curve)
    } else if parse::<FamilyJson>(text).is_ok() {
        Some(Kind::Family)
    } else {
        None
    }
}

/// Reports for a corpus file: error kinds stand in for failed commands.
pub fn reports(text: &str, opts: &Options) -> Vec<Value> {
    let one = |r: crate::commands::CmdResult| match r {
        Ok(o) => o.json,
        Err(f) => json!({"error": error_kind(&f.error)}),
    };
    match kind_of(text) {
        Some(Kind::Module) => vec![one(analyze(text, opts)), one(wd(text, opts))],
        Some(Kind::Abelian) => vec![one(reduction(text, opts))],
        Some(Kind::Curve) => vec![one(excision(text, opts))],
        Some(Kind::Family) => vec![one(compat(text, opts))],
        None => vec![json!({"error": "Parse"})],
    }
}

/// A report with the precision-dependent parts removed.
pub fn invariants(v: &Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.iter()
                .filter(|(k, _)| !matches!(k.as_str(), "params" | "tool" | "gauge"))
                .map(|(k, v)| (k.clone(), invariants(v)))
                .collect(),
        ),
        Value::Array(a) => Value::Array(a.iter().map(invariants).collect()),
        x => x.clone(),
    }
}

fn with_precision(opts: &Options, precision: u32, window: u32) -> Options {
    Options {
        overrides: Overrides {
            precision: Some(precision),
            t_window: Some(window),
        },
        ..*opts
    }
}

fn stability(st: &mut Selftest, dir: &Path, files: &[String], opts: &Options) {
    let lo = with_precision(opts, 20, 32);
    let hi = with_precision(opts, 40, 64);
    for file in files {
        let r = (|| {
            let text = read(dir, file)?;
            let a: Vec<Value> = reports(&text, &lo).iter().map(invariants).collect();
            let b: Vec<Value> = reports(&text, &hi).iter().map(invariants).collect();
            if a == b {
                Ok("invariants agree at (20, 32) and (40, 64)".into())
            } else {
                Err(format!("{a:?} vs {b:?}"))
            }
        })();
        st.push_result(format!("precision stability ({file})"), r);
    }
}

/// Documented verdicts on named corpus files.
pub const EXPECTED: &[(&str, &str, &str)] = &[
    ("kummer_tate.json", "verdict", "QUASI_PURE"),
    ("constant_trivial.json", "verdict", "PURE"),
    ("half_exponent.json", "verdict", "PURE"),
    ("wild_exponent.json", "error", "NotTame"),
    ("good_elliptic.json", "verdict", "GOOD"),
    ("kt_abelian.json", "verdict", "SEMISTABLE_NOT_GOOD"),
    ("half_abelian.json", "verdict", "NOT_SEMISTABLE"),
    ("tate_open_curve.json", "verdict", "QUASI_PURE"),
    ("proper_curve.json", "verdict", "PURE"),
    ("family_tate.json", "verdict", "COMPATIBLE"),
    ("family_mismatch.json", "verdict", "INCOMPATIBLE"),
];

fn expected(st: &mut Selftest, dir: &Path, opts: &Options) {
    for &(file, key, want) in EXPECTED {
        let r = (|| {
            let text = read(dir, file)?;
            let first = reports(&text, opts).into_iter().next().unwrap_or(Value::Null);
            match first.get(key).and_then(Value::as_str) {
                Some(got) if got == want => Ok(format!("{key} {got}")),
                got => Err(format!("expected {key} {want}, got {got:?}")),
            }
        })();
        st.push_result(format!("documented example ({file})"), r);
    }
}

fn corpus_files(dir: &Path) -> Vec<String> {
    let mut files: Vec<String> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .filter(|n| n.ends_with(".json"))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}

pub fn run(dir: &Path, opts: &Options) -> Selftest {
    let mut st = Selftest::default();
    let files = corpus_files(dir);
    if files.is_empty() {
        st.push("corpus", false, format!("no example files in {}", dir.display()));
        return st;
    }
    point_counts(&mut st, dir, opts);
    weights(&mut st);
    filtrations(&mut st);
    sections(&mut st, dir, &files, opts);
    expected(&mut st, dir, opts);
    stability(&mut st, dir, &files, opts);
    st
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_drop_precision_fields() {
        let v = json!({"params": {"precision": 20}, "tool": "x", "trace": {"gauge": [], "level": 2}});
        assert_eq!(invariants(&v), json!({"trace": {"level": 2}}));
    }

    #[test]
    fn conjugated_jordan_keeps_type() {
        let n = conjugated_jordan(&[3, 1]);
        assert_eq!(n.rank(), 2);
        assert_eq!(n.pow(2).rank(), 1);
        assert!(n.pow(3).is_zero());
    }

    #[test]
    fn kinds() {
        assert_eq!(kind_of(r#"{"members": []}"#), Some(Kind::Family));
        assert_eq!(kind_of("[]"), None);
    }
}
