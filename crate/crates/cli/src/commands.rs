//! Subcommands. Each takes the contents of its input file and returns a
//! JSON report plus its text rendering.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use phinabla::diagnostics::{
    excision_weight_filtration, reduction_type, semistable_weight_filtration, ReductionType,
};
use phinabla::json::{
    parse, AbelianJson, CurveJson, FamilyJson, LaurentJson, MemberJson, ModuleJson, Overrides, ParamsJson,
    WdJson,
};
use phinabla::marmora::extract;
use phinabla::module::Unipotence;
use phinabla::weil_deligne::{compatibility_family, GradedWeights, Verdict, WeightedRoot};
use phinabla::{Convention, Error, WeilDeligneRep};
use serde_json::{json, Value};

use crate::render::{paint, Tone};

pub const VERSION: &str = concat!("phinabla ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Geometric,
    Arithmetic,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Geometric => Convention::Geometric,
            ConventionArg::Arithmetic => Convention::Arithmetic,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "phinabla", version, about = "Weil–Deligne diagnostics for (φ,∇)-modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// p-adic precision of coefficients (overrides the file).
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Exponent window |e| ≤ M for series (overrides the file).
    #[arg(long = "t-window", global = true)]
    pub t_window: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = ConventionArg::Geometric)]
    pub convention: ConventionArg,
    /// Largest residue-exponent denominator accepted as tame.
    #[arg(long, global = true, default_value_t = 24)]
    pub mmax: u32,
    /// Largest Frobenius power in trace tables.
    #[arg(long, global = true, default_value_t = 6)]
    pub nmax: u32,
    /// Weight to test quasi-purity against (inferred when omitted).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub weight: Option<i64>,
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compatibility, exponents, unipotence and weight–monodromy of a module.
    Analyze { path: PathBuf },
    /// Weil–Deligne representation of a module, with its derivation.
    Wd { path: PathBuf },
    /// Reduction type, rank profile and weight filtration of an abelian
    /// variety datum.
    Reduction { path: PathBuf },
    /// Weight filtration of an open curve from the excision sequence.
    Excision { path: PathBuf },
    /// Compatibility of a family of representations.
    Compat { path: PathBuf },
    /// Oracle comparisons and precision stability over the example corpus.
    Selftest {
        /// Directory of example files (defaults to the shipped corpus).
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub overrides: Overrides,
    pub convention: Convention,
    pub mmax: u32,
    pub nmax: u32,
    pub weight: Option<i64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            overrides: Overrides::default(),
            convention: Convention::Geometric,
            mmax: 24,
            nmax: 6,
            weight: None,
        }
    }
}

impl Options {
    pub fn from_cli(cli: &Cli) -> Self {
        Options {
            overrides: Overrides {
                precision: cli.precision,
                t_window: cli.t_window,
            },
            convention: cli.convention.into(),
            mmax: cli.mmax,
            nmax: cli.nmax,
            weight: cli.weight,
        }
    }
}

/// A finished report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub exit: u8,
}

/// A failed command; `partial` holds whatever was computed before the
/// error.
#[derive(Debug, Clone)]
pub struct Failure {
    pub error: Error,
    pub partial: Option<Outcome>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, partial: None }
    }
}

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => EXIT_PARSE,
        _ => EXIT_DOMAIN,
    }
}

/// Variant name of an error, for machine-readable output.
pub fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

pub fn error_json(e: &Error) -> Value {
    json!({
        "error": error_kind(e),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    })
}

pub type CmdResult = std::result::Result<Outcome, Failure>;

fn weight_str(w: &WeightedRoot) -> String {
    match &w.weight {
        Some(x) if x.is_integer() => x.numer().to_string(),
        Some(x) => format!("{}/{}", x.numer(), x.denom()),
        None => "not Weil".into(),
    }
}

fn graded_json(g: &[GradedWeights]) -> Value {
    Value::Array(
        g.iter()
            .map(|g| {
                json!({
                    "index": g.index,
                    "rank": g.rank,
                    "weights": g.weights.iter().map(weight_str).collect::<Vec<_>>(),
                    "expected_weight": g.expected_weight,
                    "pure": g.pure,
                })
            })
            .collect(),
    )
}

fn verdict_tone(ok: bool) -> Tone {
    if ok {
        Tone::Good
    } else {
        Tone::Bad
    }
}

fn graded_text(out: &mut String, g: &[GradedWeights]) {
    for g in g {
        let ws: Vec<String> = g.weights.iter().map(weight_str).collect();
        out.push_str(&format!(
            "  Gr_{:<3} rank {}  weights [{}]  expected {}  {}\n",
            g.index,
            g.rank,
            ws.join(", "),
            g.expected_weight,
            if g.pure { "pure" } else { "NOT pure" }
        ));
    }
}

fn quasi_purity(rep: &WeilDeligneRep, weight: Option<i64>) -> phinabla::Result<(Option<i64>, Verdict, Vec<GradedWeights>)> {
    let i = match weight {
        Some(i) => Some(i),
        None => rep.infer_weight()?,
    };
    match i {
        Some(i) => {
            let r = rep.quasi_purity_check(i)?;
            Ok((Some(i), r.verdict, r.graded))
        }
        None => {
            // No single weight fits; report against the first piece.
            let r = rep.quasi_purity_check(0)?;
            Ok((None, Verdict::NotQuasiPure, r.graded))
        }
    }
}

fn rep_summary(rep: &WeilDeligneRep) -> phinabla::Result<Value> {
    let weights = rep.weights()?;
    Ok(json!({
        "dim": rep.dim(),
        "n_rank": rep.monodromy().rank(),
        "inertia_order": rep.inertia_order(),
        "weights": weights.iter().map(weight_str).collect::<Vec<_>>(),
        "convention": rep.convention().name(),
    }))
}

pub fn analyze(text: &str, opts: &Options) -> CmdResult {
    let module = parse::<ModuleJson>(text)?.build(&opts.overrides)?;
    let mut report = serde_json::Map::new();
    let mut out = String::new();
    report.insert("tool".into(), json!(VERSION));
    report.insert("label".into(), json!(module.label()));
    report.insert("params".into(), serde_json::to_value(ParamsJson::of(module.params())).expect("serializable"));
    report.insert("convention".into(), json!(opts.convention.name()));
    out.push_str(&format!("{VERSION}\nmodule: {}\n", module.label()));
    out.push_str(&format!(
        "params: p = {}, a = {}, precision = {}, t-window = {}\nconvention: {}\n",
        module.params().p(),
        module.params().degree(),
        module.params().precision(),
        module.params().window().1,
        opts.convention
    ));
    let compat = if module.frobenius().is_some() && module.connection().is_some() {
        let c = module.check_compatibility()?;
        out.push_str(&format!(
            "compatibility: {}{}\n",
            if c.compatible { "exact" } else { "FAILS" },
            c.min_valuation.map(|v| format!(" (residual valuation {v})")).unwrap_or_default()
        ));
        json!({"compatible": c.compatible, "residual_valuation": c.min_valuation, "truncated": c.truncated})
    } else {
        Value::Null
    };
    report.insert("compatibility".into(), compat);
    let res = module.residue_exponents()?;
    let exps: Vec<String> = res.exponents.iter().map(|x| x.to_string()).collect();
    out.push_str(&format!("residue exponents: [{}]", exps.join(", ")));
    if res.unresolved > 0 {
        out.push_str(&format!(" and {} unresolved", res.unresolved));
    }
    out.push('\n');
    report.insert("residue_exponents".into(), json!(exps));
    report.insert("unresolved_exponents".into(), json!(res.unresolved));
    let level = match module.unipotent_filtration() {
        Ok(Unipotence::Unipotent(f)) => Some(f.level),
        Ok(Unipotence::NotUnipotent { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    out.push_str(&match level {
        Some(l) => format!("unipotence level: {l}\n"),
        None => "unipotence level: not unipotent\n".into(),
    });
    report.insert("unipotence_level".into(), json!(level));
    let ex = match extract(&module, opts.mmax) {
        Ok(ex) => ex,
        Err(error) => {
            report.insert("wd".into(), Value::Null);
            report.insert("verdict".into(), json!(error_kind(&error)));
            out.push_str(&format!("extraction: {}\n", paint(&error.to_string(), Tone::Bad)));
            let partial = Outcome {
                json: Value::Object(report),
                text: out,
                exit: exit_code(&error),
            };
            return Err(Failure {
                error,
                partial: Some(partial),
            });
        }
    };
    let rep = ex.rep.to_convention(opts.convention);
    report.insert("cover_degree".into(), json!(ex.e));
    report.insert("wd".into(), rep_summary(&rep)?);
    let (weight, verdict, graded) = quasi_purity(&rep, opts.weight)?;
    out.push_str(&format!(
        "WD: dim {}, N rank {}, inertia order {}, cover degree {}\n",
        rep.dim(),
        rep.monodromy().rank(),
        rep.inertia_order(),
        ex.e
    ));
    out.push_str(&format!(
        "verdict: {} (weight {})\n",
        paint(verdict.name(), verdict_tone(verdict.is_ok())),
        weight.map_or("none".into(), |w| w.to_string())
    ));
    graded_text(&mut out, &graded);
    report.insert("verdict".into(), json!(verdict.name()));
    report.insert("weight".into(), json!(weight));
    report.insert("graded".into(), graded_json(&graded));
    Ok(Outcome {
        json: Value::Object(report),
        text: out,
        exit: 0,
    })
}

fn matrix_text(name: &str, rows: &[Vec<String>]) -> String {
    let mut s = format!("{name}:\n");
    for r in rows {
        s.push_str(&format!("  [{}]\n", r.join(", ")));
    }
    s
}

pub fn wd(text: &str, opts: &Options) -> CmdResult {
    let module = parse::<ModuleJson>(text)?.build(&opts.overrides)?;
    let ex = extract(&module, opts.mmax)?;
    let rep = ex.rep.to_convention(opts.convention);
    let wdj = WdJson::of(&rep);
    let gauge: Vec<Vec<LaurentJson>> = (0..ex.gauge.rank())
        .map(|i| (0..ex.gauge.rank()).map(|j| LaurentJson::of(&ex.gauge.matrix()[(i, j)])).collect())
        .collect();
    let exps: Vec<String> = ex.exponents.iter().map(|x| x.to_string()).collect();
    let json = json!({
        "wd": wdj,
        "trace": {
            "cover_degree": ex.e,
            "exponents": exps,
            "level": ex.level,
            "step_ranks": ex.step_ranks,
            "classes": ex.classes,
            "gauge": gauge,
        },
    });
    let mut out = format!("{VERSION}\nmodule: {}\n", module.label());
    out.push_str(&format!("residue exponents: [{}]\n", exps.join(", ")));
    out.push_str(&format!("Kummer cover degree e = {}\n", ex.e));
    out.push_str(&format!("unipotence level {} with steps {:?}\n", ex.level, ex.step_ranks));
    out.push_str(&format!("inertia classes {:?}\n", ex.classes));
    out.push_str(&format!("normal-form gauge:\n{}", ex.gauge.matrix()));
    out.push_str(&format!("\nq = {}, convention {}\n", rep.q(), rep.convention()));
    out.push_str(&matrix_text("Phi", &wdj.phi));
    out.push_str(&matrix_text("N", &wdj.n));
    if let Some(t) = &wdj.inertia {
        out.push_str(&matrix_text(&format!("inertia (order {})", t.order), &t.matrix));
    }
    Ok(Outcome { json, text: out, exit: 0 })
}

pub fn reduction(text: &str, opts: &Options) -> CmdResult {
    let datum = parse::<AbelianJson>(text)?.build(&opts.overrides)?;
    let red = reduction_type(&datum)?;
    let p = red.profile;
    let mut out = format!("{VERSION}\nmodule: {}\n", datum.module().label());
    out.push_str(&format!(
        "verdict: {}\nranks: n = {}, μ = {}, α = {}, λ = {} (horizontal rank {})\n",
        paint(red.verdict.name(), verdict_tone(red.verdict != ReductionType::NotSemistable)),
        p.n,
        p.mu,
        p.alpha,
        p.lambda,
        red.horizontal_rank
    ));
    let mut json = json!({
        "verdict": red.verdict.name(),
        "ranks": {
            "n": p.n, "mu": p.mu, "alpha": p.alpha, "lambda": p.lambda,
            "horizontal": red.horizontal_rank,
            "unipotence_level": red.unipotence_level,
        },
        "filtration": [],
        "graded": [],
        "convention": opts.convention.name(),
    });
    if red.verdict != ReductionType::NotSemistable {
        let w = semistable_weight_filtration(&datum, opts.mmax)?;
        out.push_str("weight filtration (homological weights; cohomological mirror in parentheses):\n");
        for (k, r) in w.ranks() {
            out.push_str(&format!("  W_{k}: rank {r}\n"));
        }
        let mut graded = Vec::new();
        for g in &w.graded {
            let ws: Vec<String> = g.report.weights.iter().map(weight_str).collect();
            let mirror: Vec<String> = g
                .report
                .weights
                .iter()
                .map(|x| x.weight.as_ref().map_or("not Weil".into(), |w| (-w).to_string()))
                .collect();
            out.push_str(&format!(
                "  Gr_{}: rank {}, weights [{}] ([{}]), {}\n",
                g.index,
                g.rank,
                ws.join(", "),
                mirror.join(", "),
                if g.report.pure { "pure" } else { "NOT pure" }
            ));
            graded.push(json!({
                "index": g.index, "rank": g.rank, "weights": ws, "mirror_weights": mirror, "pure": g.report.pure,
            }));
        }
        out.push_str(&format!(
            "monodromy filtration matches W shifted by one: {}\n",
            if w.monodromy_match { "yes" } else { "NO" }
        ));
        json["filtration"] = Value::Array(w.ranks().iter().map(|(k, r)| json!({"index": k, "rank": r})).collect());
        json["graded"] = Value::Array(graded);
        json["monodromy_match"] = json!(w.monodromy_match);
    }
    Ok(Outcome { json, text: out, exit: 0 })
}

pub fn excision(text: &str, opts: &Options) -> CmdResult {
    let datum = parse::<CurveJson>(text)?.build(&opts.overrides)?;
    let r = excision_weight_filtration(&datum, opts.mmax)?;
    let gr1 = r.gr1.dim();
    let gr2 = r.gr2.dim();
    let w2: Vec<String> = r.gr2_report.weights.iter().map(weight_str).collect();
    let gr1_weights: Vec<String> = r.gr1.weights()?.iter().map(weight_str).collect();
    let verdict = r.gr1_report.verdict;
    let json = json!({
        "verdict": verdict.name(),
        "ranks": {"h1_compact": gr1, "boundary_kernel": gr2, "total": r.rank},
        "filtration": [{"index": 1, "rank": gr1}, {"index": 2, "rank": r.rank}],
        "graded": [
            {"index": 1, "rank": gr1, "weights": gr1_weights, "pure": verdict == Verdict::Pure},
            {"index": 2, "rank": gr2, "weights": w2, "pure": r.gr2_report.pure},
        ],
        "monodromy_graded": graded_json(&r.gr1_report.graded),
        "proper": r.proper,
        "convention": opts.convention.name(),
    });
    let mut out = format!("{VERSION}\n");
    out.push_str(&format!("W_1 = H^1 of the compactification: rank {gr1}, {}\n", paint(verdict.name(), verdict_tone(verdict.is_ok()))));
    graded_text(&mut out, &r.gr1_report.graded);
    out.push_str(&format!("Gr_2 = kernel of the boundary map: rank {gr2}, weights [{}], pure of weight 2\n", w2.join(", ")));
    out.push_str(&format!("H^1 of the open curve: rank {}{}\n", r.rank, if r.proper { " (proper case)" } else { "" }));
    Ok(Outcome { json, text: out, exit: 0 })
}

/// Representations of a family file, modules extracted first.
pub fn family_members(f: &FamilyJson, opts: &Options) -> phinabla::Result<Vec<WeilDeligneRep>> {
    f.members
        .iter()
        .map(|m| match m {
            MemberJson::Module { module } => {
                let m = module.build(&opts.overrides)?;
                Ok(extract(&m, opts.mmax)?.rep)
            }
            MemberJson::Rep(r) => r.build(),
        })
        .collect()
}

pub fn compat(text: &str, opts: &Options) -> CmdResult {
    let fam = parse::<FamilyJson>(text)?;
    let reps = family_members(&fam, opts)?;
    let v = compatibility_family(&reps, opts.nmax)?;
    let verdict = if v.compatible { "COMPATIBLE" } else { "INCOMPATIBLE" };
    let disc = v.discrepancy.as_ref().map(|d| {
        json!({
            "member": d.member, "k": d.k, "n": d.n, "j": d.j,
            "expected": d.expected.to_string(), "found": d.found.to_string(),
        })
    });
    let labels: Vec<String> = reps.iter().map(|r| r.label().to_string()).collect();
    let json = json!({
        "verdict": verdict,
        "members": labels,
        "nmax": opts.nmax,
        "discrepancy": disc,
        "convention": opts.convention.name(),
    });
    let mut out = format!("{VERSION}\nfamily: {}\n", fam.label);
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&format!("  member {i}: {l}\n"));
    }
    out.push_str(&format!("traces Tr(Phi^n T^j | Gr_k), n ≤ {}\n", opts.nmax));
    out.push_str(&format!("verdict: {}\n", paint(verdict, verdict_tone(v.compatible))));
    if let Some(d) = &v.discrepancy {
        out.push_str(&format!("  {d}\n"));
    }
    Ok(Outcome { json, text: out, exit: 0 })
}

/// Dispatches a parsed command line. I/O failures count as parse errors.
pub fn run(cli: &Cli) -> CmdResult {
    let opts = Options::from_cli(cli);
    let read = |p: &PathBuf| {
        std::fs::read_to_string(p).map_err(|e| Failure::from(Error::Parse(format!("{}: {e}", p.display()))))
    };
    match &cli.command {
        Command::Analyze { path } => analyze(&read(path)?, &opts),
        Command::Wd { path } => wd(&read(path)?, &opts),
        Command::Reduction { path } => reduction(&read(path)?, &opts),
        Command::Excision { path } => excision(&read(path)?, &opts),
        Command::Compat { path } => compat(&read(path)?, &opts),
        Command::Selftest { corpus } => {
            let dir = corpus.clone().unwrap_or_else(crate::selftest::default_corpus);
            Ok(crate::selftest::run(&dir, &opts).outcome())
        }
    }
}
