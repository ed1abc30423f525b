//! JSON formats for series, modules, Weil–Deligne representations and the
//! diagnostic data files.
//!
//! Coefficients are strings: `"m/n"` or `"p^v*u"` (`"p^v*[u0,u1,..]"` over
//! an unramified extension). Matrix entries of representations are exact
//! `"m/n"` or `"a+b*sqrt(d)"`.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{AbelianVarietyDatum, OpenCurveDatum};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::module::{PhiNablaModule, SeriesMatrix};
use crate::padic::PadicNumber;
use crate::quadratic::{parse_rational, Quadratic};
use crate::series::{LaurentElement, RingMode, RingParams};
use crate::weil_deligne::{Convention, Inertia, QuadMatrix, WeilDeligneRep};

pub const DEFAULT_PRECISION: u32 = 20;
pub const DEFAULT_T_WINDOW: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingModeJson {
    #[default]
    Laurent,
    PowerSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsJson {
    pub p: u64,
    #[serde(default = "one")]
    pub a: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_window: Option<u32>,
    #[serde(default)]
    pub ring_mode: RingModeJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<i64>>,
}

fn one() -> usize {
    1
}

/// Precision and window chosen on the command line; they take precedence
/// over the values stored in a file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub t_window: Option<u32>,
}

impl ParamsJson {
    pub fn build(&self, ov: &Overrides) -> Result<RingParams> {
        let precision = ov.precision.or(self.precision).unwrap_or(DEFAULT_PRECISION);
        let window = ov.t_window.or(self.t_window).unwrap_or(DEFAULT_T_WINDOW);
        let (mode, neg) = match self.ring_mode {
            RingModeJson::Laurent => (RingMode::Laurent, window),
            RingModeJson::PowerSeries => (RingMode::PowerSeries, 0),
        };
        RingParams::with_extension(self.p, self.a, self.modulus.as_deref(), precision, neg, window, mode)
    }

    pub fn of(params: &RingParams) -> Self {
        ParamsJson {
            p: params.p(),
            a: params.degree(),
            precision: Some(params.precision()),
            t_window: Some(params.window().1),
            ring_mode: match params.mode() {
                RingMode::Laurent => RingModeJson::Laurent,
                RingMode::PowerSeries => RingModeJson::PowerSeries,
            },
            modulus: (params.degree() > 1).then(|| params.field().modulus()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaurentJson {
    pub terms: Vec<(i64, String)>,
}

pub fn parse_coefficient(params: &RingParams, s: &str) -> Result<PadicNumber> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad coefficient '{s}'"));
    let Some((head, unit)) = s.split_once('*') else {
        return Ok(params.scalar(&parse_rational(s)?));
    };
    let (p, v) = head.split_once('^').ok_or_else(bad)?;
    let p: u64 = p.trim().parse().map_err(|_| bad())?;
    if p != params.p() {
        return Err(Error::Parse(format!("coefficient '{s}' uses prime {p}, expected {}", params.p())));
    }
    let v: i64 = v.trim().parse().map_err(|_| bad())?;
    let unit = unit.trim();
    let coeffs: Vec<BigInt> = match unit.strip_prefix('[').and_then(|u| u.strip_suffix(']')) {
        Some(list) => list
            .split(',')
            .map(|c| c.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?,
        None => vec![unit.parse().map_err(|_| bad())?],
    };
    if coeffs.len() > params.degree() {
        return Err(bad());
    }
    Ok(PadicNumber::from_parts(params.field(), v, coeffs, v + params.precision() as i64))
}

impl LaurentJson {
    pub fn build(&self, params: &RingParams) -> Result<LaurentElement> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            if !params.in_window(*e) {
                return Err(Error::Parse(format!("exponent {e} lies outside the t-window")));
            }
            terms.push((*e, parse_coefficient(params, c)?));
        }
        Ok(LaurentElement::from_terms(params, terms))
    }

    pub fn of(x: &LaurentElement) -> Self {
        LaurentJson {
            terms: x.terms().map(|(e, c)| (e, c.to_string())).collect(),
        }
    }
}

fn build_matrix(rows: &[Vec<LaurentJson>], n: usize, params: &RingParams, what: &str) -> Result<SeriesMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("{what} must be {n}×{n}")));
    }
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|x| x.build(params)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_rows(rows, &LaurentElement::zero(params)))
}

fn build_rect(rows: &[Vec<LaurentJson>], r: usize, c: usize, params: &RingParams, what: &str) -> Result<SeriesMatrix> {
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Parse(format!("{what} must be {r}×{c}")));
    }
    let zero = LaurentElement::zero(params);
    let mut m = Matrix::zeros(r, c, &zero);
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = x.build(params)?;
        }
    }
    Ok(m)
}

fn matrix_json(m: &SeriesMatrix) -> Vec<Vec<LaurentJson>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| LaurentJson::of(&m[(i, j)])).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleJson {
    pub params: ParamsJson,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frobenius: Option<Vec<Vec<LaurentJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<Vec<Vec<LaurentJson>>>,
    #[serde(default)]
    pub label: String,
}

impl ModuleJson {
    pub fn build(&self, ov: &Overrides) -> Result<PhiNablaModule> {
        let params = self.params.build(ov)?;
        self.build_over(&params)
    }

    fn build_over(&self, params: &RingParams) -> Result<PhiNablaModule> {
        let n = self.rank;
        let frob = self.frobenius.as_ref().map(|m| build_matrix(m, n, params, "frobenius")).transpose()?;
        let conn = self.connection.as_ref().map(|m| build_matrix(m, n, params, "connection")).transpose()?;
        PhiNablaModule::new(params.clone(), n, frob, conn, self.label.clone())
    }

    pub fn of(m: &PhiNablaModule) -> Self {
        ModuleJson {
            params: ParamsJson::of(m.params()),
            rank: m.rank(),
            frobenius: m.frobenius().map(matrix_json),
            connection: m.connection().map(matrix_json),
            label: m.label().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaJson {
    pub order: u32,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WdJson {
    pub q: u64,
    pub dim: usize,
    pub phi: Vec<Vec<String>>,
    #[serde(rename = "N")]
    pub n: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<InertiaJson>,
    #[serde(default = "geometric")]
    pub convention: Convention,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
}

fn geometric() -> Convention {
    Convention::Geometric
}

fn quad_matrix(rows: &[Vec<String>], d: usize, what: &str) -> Result<QuadMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse(format!("{what} must be {d}×{d}")));
    }
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|x| x.parse::<Quadratic>()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_rows(rows, &Quadratic::from_integer(0)))
}

fn quad_rows(m: &QuadMatrix) -> Vec<Vec<String>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect())
        .collect()
}

impl WdJson {
    pub fn build(&self) -> Result<WeilDeligneRep> {
        let phi = quad_matrix(&self.phi, self.dim, "phi")?;
        let n = quad_matrix(&self.n, self.dim, "N")?;
        let inertia = self
            .inertia
            .as_ref()
            .map(|t| {
                Ok::<_, Error>(Inertia {
                    order: t.order,
                    matrix: quad_matrix(&t.matrix, self.dim, "inertia matrix")?,
                })
            })
            .transpose()?;
        Ok(WeilDeligneRep::new(self.q, phi, n, inertia, self.convention)?.with_label(self.label.clone()))
    }

    pub fn of(rep: &WeilDeligneRep) -> Self {
        WdJson {
            q: rep.q(),
            dim: rep.dim(),
            phi: quad_rows(rep.phi()),
            n: quad_rows(rep.monodromy()),
            inertia: rep.inertia().map(|t| InertiaJson {
                order: t.order,
                matrix: quad_rows(&t.matrix),
            }),
            convention: rep.convention(),
            label: rep.label().to_string(),
        }
    }
}

/// `{"module", "dual_module"?, "pairing"?}`; every module carries its own
/// params, which must agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbelianJson {
    pub module: ModuleJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_module: Option<ModuleJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<Vec<LaurentJson>>>,
}

impl AbelianJson {
    pub fn build(&self, ov: &Overrides) -> Result<AbelianVarietyDatum> {
        let params = self.module.params.build(ov)?;
        let module = self.module.build_over(&params)?;
        let dual = self.dual_module.as_ref().map(|d| same_params(d, &self.module)?.build_over(&params)).transpose()?;
        let pairing = self
            .pairing
            .as_ref()
            .map(|p| build_matrix(p, module.rank(), &params, "pairing"))
            .transpose()?;
        AbelianVarietyDatum::new(module, dual, pairing)
    }
}

fn same_params<'a>(m: &'a ModuleJson, reference: &ModuleJson) -> Result<&'a ModuleJson> {
    let (a, b) = (&m.params, &reference.params);
    if (a.p, a.a, &a.modulus, a.ring_mode) != (b.p, b.a, &b.modulus, b.ring_mode) {
        return Err(Error::Parse("modules in one file must share p, a, modulus and ring mode".into()));
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveJson {
    pub h1_compact: ModuleJson,
    pub h0_boundary_twisted: ModuleJson,
    pub h2_compact: ModuleJson,
    pub boundary_map: Vec<Vec<LaurentJson>>,
}

impl CurveJson {
    pub fn build(&self, ov: &Overrides) -> Result<OpenCurveDatum> {
        let params = self.h1_compact.params.build(ov)?;
        let h1 = self.h1_compact.build_over(&params)?;
        let h0 = same_params(&self.h0_boundary_twisted, &self.h1_compact)?.build_over(&params)?;
        let h2 = same_params(&self.h2_compact, &self.h1_compact)?.build_over(&params)?;
        let delta = build_rect(&self.boundary_map, h2.rank(), h0.rank(), &params, "boundary_map")?;
        OpenCurveDatum::new(h1, h0, h2, delta)
    }
}

/// A family member: an explicit representation or a module to extract one
/// from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemberJson {
    Module { module: ModuleJson },
    Rep(WdJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    #[serde(default)]
    pub label: String,
    pub members: Vec<MemberJson>,
}

/// Any of the input files, told apart by their top-level keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyInput {
    Module(ModuleJson),
    Rep(WdJson),
    Abelian(AbelianJson),
    Curve(CurveJson),
    Family(FamilyJson),
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KT: &str = r#"{
        "params": {"p": 5},
        "rank": 2,
        "frobenius": [[{"terms": [[0, "1"]]}, {"terms": []}], [{"terms": []}, {"terms": [[0, "5"]]}]],
        "connection": [[{"terms": []}, {"terms": [[-1, "1"]]}], [{"terms": []}, {"terms": []}]],
        "label": "Kummer-Tate"
    }"#;

    #[test]
    fn module_round_trip() {
        let j: ModuleJson = parse(KT).unwrap();
        let m = j.build(&Overrides::default()).unwrap();
        assert_eq!(m.params().precision(), DEFAULT_PRECISION);
        let back = ModuleJson::of(&m);
        let again = back.build(&Overrides::default()).unwrap();
        assert_eq!(again.frobenius(), m.frobenius());
        let hi = j.build(&Overrides { precision: Some(40), t_window: Some(64) }).unwrap();
        assert_eq!(hi.params().window(), (64, 64));
    }

    #[test]
    fn coefficients() {
        let params = RingParams::laurent(5, 20, 8).unwrap();
        assert_eq!(parse_coefficient(&params, "5^2*3").unwrap(), params.integer(75));
        assert_eq!(parse_coefficient(&params, "-1/2").unwrap(), params.scalar(&parse_rational("-1/2").unwrap()));
        assert!(parse_coefficient(&params, "7^1*1").is_err());
        assert!(parse_coefficient(&params, "x").is_err());
    }

    #[test]
    fn wd_round_trip() {
        let text = r#"{"q": 5, "dim": 2, "phi": [["1","0"],["0","5"]], "N": [["0","1"],["0","0"]]}"#;
        let rep = parse::<WdJson>(text).unwrap().build().unwrap();
        assert_eq!(WdJson::of(&rep).build().unwrap(), rep);
        let bad = r#"{"q": 5, "dim": 2, "phi": [["1","0"],["0","1"]], "N": [["0","1"],["0","0"]]}"#;
        assert!(parse::<WdJson>(bad).unwrap().build().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse::<ModuleJson>(r#"{"params": {"p": 5}, "rank": 0, "bogus": 1}"#).is_err());
    }
}
