//! JSON formats for objects, morphisms and Q-system files, plus the numeric
//! conventions shared by every report.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::category::{CategoryData, MatrixJson};
use crate::error::{QcatError, Result};
use crate::frobenius::QSystem;
use crate::morphism::{Morphism, ObjectExpr};

/// One summand of an object: a tensor word of label names with a multiplicity.
/// The empty word is the unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummandJson {
    pub word: Vec<String>,
    #[serde(default = "one")]
    pub mult: usize,
}

fn one() -> usize {
    1
}

pub type ObjectJson = Vec<SummandJson>;

pub fn object_to_json(cat: &CategoryData, x: &ObjectExpr) -> ObjectJson {
    x.summands
        .iter()
        .map(|s| SummandJson { word: s.word.iter().map(|&a| cat.labels[a].clone()).collect(), mult: s.mult })
        .collect()
}

pub fn object_from_json(cat: &CategoryData, x: &ObjectJson) -> Result<ObjectExpr> {
    let mut parts = Vec::new();
    for s in x {
        let word = s.word.iter().map(|l| cat.label_index(l)).collect::<Result<Vec<_>>>()?;
        parts.push((word, s.mult));
    }
    Ok(ObjectExpr::from_parts(parts))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockJson {
    pub sector: String,
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// A morphism as its blocks over the simple sectors. Empty blocks are
/// omitted; sectors missing on input are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphismJson {
    pub dom: ObjectJson,
    pub cod: ObjectJson,
    pub blocks: Vec<BlockJson>,
}

pub fn morphism_to_json(cat: &CategoryData, f: &Morphism) -> MorphismJson {
    let blocks = f
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.is_empty())
        .map(|(c, b)| {
            let m = MatrixJson::from_mat(b);
            BlockJson { sector: cat.labels[c].clone(), rows: m.rows, cols: m.cols, re: m.re, im: m.im }
        })
        .collect();
    MorphismJson { dom: object_to_json(cat, &f.dom), cod: object_to_json(cat, &f.cod), blocks }
}

pub fn morphism_from_json(cat: &CategoryData, f: &MorphismJson) -> Result<Morphism> {
    let dom = object_from_json(cat, &f.dom)?;
    let cod = object_from_json(cat, &f.cod)?;
    let mut out = Morphism::zero(cat, &dom, &cod);
    let mut seen = vec![false; cat.rank()];
    for b in &f.blocks {
        let c = cat.label_index(&b.sector)?;
        if std::mem::replace(&mut seen[c], true) {
            return Err(QcatError::Schema(format!("sector {} given twice", b.sector)));
        }
        let m = MatrixJson { rows: b.rows, cols: b.cols, re: b.re.clone(), im: b.im.clone() }.to_mat()?;
        if m.shape() != out.blocks[c].shape() {
            let (r, k) = out.blocks[c].shape();
            return Err(QcatError::Shape(format!("block {} is {}x{}, expected {r}x{k}", b.sector, b.rows, b.cols)));
        }
        out.blocks[c] = m;
    }
    Ok(out)
}

/// `{category_ref, theta, w, x}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSystemFile {
    pub category_ref: String,
    pub theta: ObjectJson,
    pub w: MorphismJson,
    pub x: MorphismJson,
}

pub fn qsystem_to_file(cat: &CategoryData, q: &QSystem, category_ref: &str) -> QSystemFile {
    QSystemFile {
        category_ref: category_ref.to_string(),
        theta: object_to_json(cat, &q.theta),
        w: morphism_to_json(cat, &q.w),
        x: morphism_to_json(cat, &q.x),
    }
}

/// Builds the Q-system of a file; only shapes are checked here.
pub fn qsystem_from_file(cat: &CategoryData, file: &QSystemFile) -> Result<QSystem> {
    let theta = object_from_json(cat, &file.theta)?;
    let w = morphism_from_json(cat, &file.w)?;
    let x = morphism_from_json(cat, &file.x)?;
    QSystem::new(cat, theta, w, x)
}

pub fn load_qsystem(cat: &CategoryData, source: &[u8]) -> Result<QSystem> {
    let file: QSystemFile = serde_json::from_slice(source).map_err(|e| QcatError::Parse(e.to_string()))?;
    qsystem_from_file(cat, &file)
}

pub fn load_morphism(cat: &CategoryData, source: &[u8]) -> Result<Morphism> {
    let f: MorphismJson = serde_json::from_slice(source).map_err(|e| QcatError::Parse(e.to_string()))?;
    morphism_from_json(cat, &f)
}

/// Significant digits of every number in a report.
pub const REPORT_DIGITS: usize = 12;

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let y: f64 = format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x);
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

/// Rounds every float in a JSON tree; integers are left alone.
pub fn round_value(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(0.0), digits);
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(xs) => xs.iter_mut().for_each(|x| round_value(x, digits)),
        Value::Object(m) => m.values_mut().for_each(|x| round_value(x, digits)),
        _ => {}
    }
}

/// Serializes a report with [`REPORT_DIGITS`] significant digits.
pub fn report_string<T: Serialize>(report: &T) -> Result<String> {
    let mut v = serde_json::to_value(report).map_err(|e| QcatError::Parse(e.to_string()))?;
    round_value(&mut v, REPORT_DIGITS);
    serde_json::to_string_pretty(&v).map_err(|e| QcatError::Parse(e.to_string()))
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "bool",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// Field-wise comparison of two reports. Numbers agree when
/// `|a - b| <= tol·max(1, |a|, |b|)`. Differing keys or value kinds are a
/// schema mismatch; everything else is listed as `path: a != b`.
pub fn diff_reports(a: &Value, b: &Value, tol: f64) -> Result<Vec<String>> {
    let mut out = Vec::new();
    diff_at("$", a, b, tol, &mut out)?;
    Ok(out)
}

fn diff_at(path: &str, a: &Value, b: &Value, tol: f64, out: &mut Vec<String>) -> Result<()> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let kx: Vec<&String> = x.keys().collect();
            let ky: Vec<&String> = y.keys().collect();
            if kx != ky {
                return Err(QcatError::SchemaMismatch(format!("{path}: keys {kx:?} vs {ky:?}")));
            }
            for (k, va) in x {
                diff_at(&format!("{path}.{k}"), va, &y[k], tol, out)?;
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: length {} != {}", x.len(), y.len()));
                return Ok(());
            }
            for (i, (va, vb)) in x.iter().zip(y).enumerate() {
                diff_at(&format!("{path}[{i}]"), va, vb, tol, out)?;
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            let close = (x - y).abs() <= tol * 1f64.max(x.abs()).max(y.abs());
            if !close {
                out.push(format!("{path}: {x} != {y}"));
            }
        }
        (Value::Null, Value::Number(_)) | (Value::Number(_), Value::Null) => out.push(format!("{path}: {a} != {b}")),
        _ if kind(a) != kind(b) => {
            return Err(QcatError::SchemaMismatch(format!("{path}: {} vs {}", kind(a), kind(b))));
        }
        _ => {
            if a != b {
                out.push(format!("{path}: {a} != {b}"));
            }
        }
    }
    Ok(())
}
