//! Serializable reports of the analyses, one per command-line verb.

use serde::Serialize;
use serde_json::{json, Value};

use crate::braided::{
    braided_product, canonical_checks, canonical_qsystem, centp_residual, centre_projection, full_centre, z_matrix,
    Canonical,
};
use crate::category::{modular_data, validate_category, CategoryData, MatrixJson};
use crate::decompose::ReducedQSystem;
use crate::decompose::{central_decomposition, check_intermediate, intermediate_checks, irreducible_decomposition};
use crate::error::{QcatError, Result};
use crate::frobenius::{check, check_commutative, QSystem};
use crate::io::{morphism_to_json, object_to_json, qsystem_to_file, report_string};
use crate::modrep::{
    boundary_conditions_with, enumerate_bimodules, enumerate_modules, validate_module, ModuleClass, ModuleSide,
};
use crate::morphism::{hom_dim, Morphism, Sign};

/// A verb's JSON body and whether all of its checks passed.
#[derive(Clone, Debug)]
pub struct Report {
    pub verb: String,
    pub pass: bool,
    pub body: Value,
}

impl Report {
    fn new(verb: &str, pass: bool, mut body: Value) -> Report {
        if let Value::Object(m) = &mut body {
            m.insert("pass".into(), Value::Bool(pass));
        }
        Report { verb: verb.into(), pass, body }
    }

    pub fn to_json(&self) -> Result<String> {
        report_string(&self.body)
    }

    pub fn to_table(&self) -> String {
        let mut v = self.body.clone();
        crate::io::round_value(&mut v, crate::io::REPORT_DIGITS);
        let mut out = format!("{}\n", self.verb);
        table_rows("", &v, &mut out);
        out
    }
}

fn is_matrix(v: &Value) -> bool {
    v.get("rows").is_some() && v.get("cols").is_some() && v.get("re").is_some() && v.as_object().unwrap().len() == 4
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn complex_text(re: f64, im: f64) -> String {
    let chop = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let (re, im) = (chop(re), chop(im));
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else {
        format!("{re}{:+}i", im)
    }
}

fn table_rows(path: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(_) if is_matrix(v) => {
            let rows = v["rows"].as_u64().unwrap_or(0) as usize;
            let cols = v["cols"].as_u64().unwrap_or(0) as usize;
            let num = |key: &str, k: usize| v[key].get(k).and_then(Value::as_f64).unwrap_or(0.0);
            out.push_str(&format!("{path}\n"));
            for i in 0..rows {
                let cells: Vec<String> = (0..cols)
                    .map(|j| format!("{:>24}", complex_text(num("re", i * cols + j), num("im", i * cols + j))))
                    .collect();
                out.push_str(&format!("  {}\n", cells.join(" ")));
            }
        }
        Value::Object(m) => {
            for (k, x) in m {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                table_rows(&p, x, out);
            }
        }
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = xs.iter().map(scalar_text).collect();
            out.push_str(&format!("{path:<40} [{}]\n", items.join(", ")));
        }
        Value::Array(xs) if xs.iter().all(|x| x.as_array().is_some_and(|r| r.iter().all(Value::is_number))) => {
            out.push_str(&format!("{path}\n"));
            for r in xs {
                let cells: Vec<String> = r.as_array().unwrap().iter().map(|x| format!("{:>6}", x)).collect();
                out.push_str(&format!("  {}\n", cells.join(" ")));
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                table_rows(&format!("{path}[{i}]"), x, out);
            }
        }
        other => out.push_str(&format!("{path:<40} {}\n", scalar_text(other))),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn reduced_json(cat: &CategoryData, red: &ReducedQSystem, category_ref: &str) -> Value {
    json!({
        "projection": morphism_to_json(cat, &red.projection),
        "child": qsystem_to_file(cat, &red.child, category_ref),
        "d": red.child.d,
        "n_spectrum": red.n_spectrum,
        "n_scalar": red.n_scalar,
        "n_coefficient": red.n_coefficient,
        "normalization": red.normalization,
        "checks": red.checks,
    })
}

pub fn validate(cat: &CategoryData) -> Result<Report> {
    let rep = validate_category(cat);
    Ok(Report::new("validate", rep.pass, to_value(&rep)))
}

pub fn modular(cat: &CategoryData) -> Result<Report> {
    let md = modular_data(cat);
    let pass = !md.is_modular || md.residuals.max() < cat.tol;
    let body = json!({
        "labels": cat.labels,
        "dims": cat.dims,
        "twists": cat.twists.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "global_dim": md.global_dim,
        "d_r": md.d_r,
        "is_modular": md.is_modular,
        "central_charge_phase": [md.omega.re, md.omega.im],
        "S": MatrixJson::from_mat(&md.s_matrix),
        "T": MatrixJson::from_mat(&md.t_matrix),
        "residuals": md.residuals,
    });
    Ok(Report::new("modular", pass, body))
}

pub fn check_qsystem(cat: &CategoryData, q: &QSystem) -> Result<Report> {
    let rep = check(cat, q)?;
    let (commutative, comm_res) = check_commutative(cat, q)?;
    let mut body = to_value(&rep);
    body["commutative"] = json!(commutative);
    body["commutativity_residual"] = json!(comm_res);
    Ok(Report::new("check-qsystem", rep.pass(), body))
}

pub fn centre(cat: &CategoryData, q: &QSystem, sign: Sign, category_ref: &str) -> Result<Report> {
    let p = centre_projection(cat, q, sign)?;
    let checks = intermediate_checks(cat, q, &p)?;
    let centp = centp_residual(cat, q, &p, sign)?;
    let red = check_intermediate(cat, q, &p)?;
    let (commutative, comm_res) = check_commutative(cat, &red.child)?;
    let pass = red.checks.pass() && commutative && centp < cat.tol.sqrt();
    let body = json!({
        "sign": sign.symbol(),
        "intermediate_checks": checks,
        "centp_residual": centp,
        "commutative": commutative,
        "commutativity_residual": comm_res,
        "centre": reduced_json(cat, &red, category_ref),
    });
    Ok(Report::new("centre", pass, body))
}

pub fn intermediate(cat: &CategoryData, q: &QSystem, p: &Morphism, category_ref: &str) -> Result<Report> {
    let checks = intermediate_checks(cat, q, p)?;
    let red = check_intermediate(cat, q, p)?;
    let body = json!({ "checks": checks, "reduced": reduced_json(cat, &red, category_ref) });
    Ok(Report::new("intermediate", red.checks.pass(), body))
}

/// Kind of decomposition performed by [`decompose`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompositionKind {
    Central,
    Irreducible,
}

pub fn decompose(
    cat: &CategoryData,
    q: &QSystem,
    kind: DecompositionKind,
    seed: u64,
    category_ref: &str,
) -> Result<Report> {
    let (parts, extra): (Vec<ReducedQSystem>, Vec<Value>) = match kind {
        DecompositionKind::Central => {
            let parts = central_decomposition(cat, q, seed)?;
            let n = parts.len();
            (parts, vec![Value::Null; n])
        }
        DecompositionKind::Irreducible => {
            let s = irreducible_decomposition(cat, q, seed)?;
            let extra = s.iter().map(|x| json!({ "pair_residuals": x.residuals })).collect();
            (s.into_iter().map(|x| x.reduced).collect(), extra)
        }
    };
    let pass = parts.iter().all(|p| p.checks.pass());
    let summands: Vec<Value> = parts
        .iter()
        .zip(extra)
        .map(|(p, e)| {
            let mut v = reduced_json(cat, p, category_ref);
            if let Value::Object(m) = e {
                v.as_object_mut().unwrap().extend(m);
            }
            v
        })
        .collect();
    let body = json!({
        "kind": match kind { DecompositionKind::Central => "central", DecompositionKind::Irreducible => "irreducible" },
        "summands": summands,
    });
    Ok(Report::new("decompose", pass, body))
}

pub fn braided_product_report(
    cat: &CategoryData,
    a: &QSystem,
    b: &QSystem,
    sign: Sign,
    category_ref: &str,
) -> Result<Report> {
    let q = braided_product(cat, a, b, sign)?;
    let rep = check(cat, &q)?;
    let (commutative, comm_res) = check_commutative(cat, &q)?;
    let body = json!({
        "sign": sign.symbol(),
        "d": q.d,
        "axioms": rep,
        "commutative": commutative,
        "commutativity_residual": comm_res,
        "product": qsystem_to_file(cat, &q, category_ref),
    });
    Ok(Report::new("braided-product", rep.pass(), body))
}

fn double_ref(category_ref: &str) -> String {
    format!("double({category_ref})")
}

pub fn canonical(cat: &CategoryData, category_ref: &str) -> Result<Report> {
    let can = canonical_qsystem(cat)?;
    let (ok, axioms, comm) = canonical_checks(&can)?;
    let body = json!({
        "d_r": can.d_r,
        "global_dim": cat.global_dim(),
        "axiom_residual": axioms,
        "commutativity_residual": comm,
        "labels": can.double.labels,
        "qsystem": qsystem_to_file(&can.double, &can.q, &double_ref(category_ref)),
    });
    Ok(Report::new("canonical", ok, body))
}

pub fn full_centre_report(cat: &CategoryData, q: &QSystem, category_ref: &str) -> Result<Report> {
    let can = canonical_qsystem(cat)?;
    let z = full_centre(&can, q)?;
    let (commutative, comm_res) = check_commutative(&can.double, &z.child)?;
    let pass = z.checks.pass() && commutative && (z.child.d - can.d_r).abs() < cat.tol.sqrt();
    let body = json!({
        "d_z": z.child.d,
        "d_r": can.d_r,
        "commutative": commutative,
        "commutativity_residual": comm_res,
        "full_centre": reduced_json(&can.double, &z, &double_ref(category_ref)),
    });
    Ok(Report::new("full-centre", pass, body))
}

pub fn zmatrix(cat: &CategoryData, q: &QSystem) -> Result<Report> {
    let can = canonical_qsystem(cat)?;
    let z = z_matrix(cat, &can, q)?;
    let pass = z.zs_residual < cat.tol && z.zt_residual < cat.tol;
    let mut body = to_value(&z);
    body["labels"] = json!(cat.labels);
    Ok(Report::new("zmatrix", pass, body))
}

fn classes_json(cat: &CategoryData, classes: &[ModuleClass]) -> Result<(bool, Vec<Value>)> {
    let mut pass = true;
    let mut out = Vec::new();
    for (i, c) in classes.iter().enumerate() {
        let rep = validate_module(cat, &c.module)?;
        pass &= rep.pass();
        out.push(json!({
            "label": format!("m{i}"),
            "beta": object_to_json(cat, &c.module.beta),
            "dim": c.dim,
            "fingerprint": c.fingerprint,
            "checks": rep,
        }));
    }
    Ok((pass, out))
}

pub fn modules(cat: &CategoryData, q: &QSystem, side: ModuleSide, seed: u64) -> Result<Report> {
    let classes = enumerate_modules(cat, q, side, seed)?;
    let (pass, list) = classes_json(cat, &classes)?;
    let body = json!({ "side": side, "count": classes.len(), "modules": list });
    Ok(Report::new("modules", pass, body))
}

/// Also reports `dim Hom(Θ^A, Θ^B)` of the full centres when the category is modular.
pub fn bimodules(cat: &CategoryData, a: &QSystem, b: &QSystem, seed: u64) -> Result<Report> {
    let classes = enumerate_bimodules(cat, a, b, seed)?;
    let (mut pass, list) = classes_json(cat, &classes)?;
    let centre_hom = if modular_data(cat).is_modular {
        let can = canonical_qsystem(cat)?;
        let (za, zb) = (full_centre(&can, a)?, full_centre(&can, b)?);
        let n = hom_dim(&can.double, &za.child.theta, &zb.child.theta);
        pass &= n == classes.len();
        Some(n)
    } else {
        None
    };
    let body = json!({ "count": classes.len(), "centre_hom_dim": centre_hom, "bimodules": list });
    Ok(Report::new("bimodules", pass, body))
}

pub fn boundary(cat: &CategoryData, a: &QSystem, b: &QSystem, sign: Sign, seed: u64) -> Result<Report> {
    if !modular_data(cat).is_modular {
        return Err(QcatError::NotModular);
    }
    let can: Canonical = canonical_qsystem(cat)?;
    let d = &can.double;
    let rep = boundary_conditions_with(cat, &can, a, b, sign, seed)?;
    let bimodules: Vec<Value> = rep
        .conditions
        .iter()
        .map(|c| json!({ "label": c.label, "beta": object_to_json(cat, &c.module.beta), "dim": c.dim }))
        .collect();
    let idempotents: Vec<Value> =
        rep.conditions.iter().map(|c| to_value(&morphism_to_json(d, &c.idempotent))).collect();
    let channels: Vec<Value> = rep
        .channels
        .iter()
        .map(|ch| {
            json!({
                "sector": d.labels[ch.sector],
                "left": cat.labels[ch.left],
                "right": cat.labels[ch.right],
                "slot_a": ch.slot_a,
                "slot_b": ch.slot_b,
                "dim": ch.dim,
            })
        })
        .collect();
    let pass = rep.pass(10.0 * cat.tol.max(1e-9));
    let body = json!({
        "sign": sign.symbol(),
        "d_a": rep.d_a,
        "d_b": rep.d_b,
        "d_r": rep.d_r,
        "d_za": rep.d_za,
        "d_zb": rep.d_zb,
        "bimodules": bimodules,
        "channels": channels,
        "idempotents": idempotents,
        "smT": MatrixJson::from_mat(&rep.smt),
        "coefficients": MatrixJson::from_mat(&rep.coefficients),
        "phases": MatrixJson::from_mat(&rep.phases),
        "pairing": MatrixJson::from_mat(&rep.pairing),
        "pairing_constant": rep.pairing_constant,
        "residuals": rep.residuals,
        "cross_check": if rep.cross_check { "pass" } else { "fail" },
    });
    Ok(Report::new("boundary", pass, body))
}
