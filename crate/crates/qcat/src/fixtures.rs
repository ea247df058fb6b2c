//! Built-in categories: Ising, the pointed Z₂ category with symmetric
//! braiding, and the trivial category.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::category::{category_to_file, CategoryData, CategoryFile, RawCategory};
use crate::error::{QcatError, Result};
use crate::frobenius::{from_conjugate_pair, QSystem};
use crate::io::{qsystem_to_file, QSystemFile};
use crate::linalg::{self, c, cis, Mat};
use crate::morphism::ObjectExpr;

fn scalar(z: crate::linalg::C64) -> Mat {
    Mat::from_element(1, 1, z)
}

/// Labels `1, tau, sigma`.
pub fn ising() -> CategoryData {
    let (t, s) = (1, 2);
    let fusion = vec![(t, t, 0, 1), (t, s, s, 1), (s, t, s, 1), (s, s, 0, 1), (s, s, t, 1)];
    let mut shell = RawCategory {
        labels: vec!["1".into(), "tau".into(), "sigma".into()],
        dual: vec![0, 1, 2],
        fusion: fusion.clone(),
        ..Default::default()
    };
    let n = |a: usize, b: usize, cc: usize| -> usize {
        if a == 0 {
            return usize::from(b == cc);
        }
        if b == 0 {
            return usize::from(a == cc);
        }
        fusion.iter().find(|&&(x, y, z, _)| x == a && y == b && z == cc).map_or(0, |e| e.3)
    };
    let h = 1.0 / 2f64.sqrt();
    for a in 1..3 {
        for b in 1..3 {
            for cc in 1..3 {
                for d in 0..3 {
                    let rows: usize = (0..3).map(|e| n(a, b, e) * n(e, cc, d)).sum();
                    if rows == 0 {
                        continue;
                    }
                    let m = match (a, b, cc, d) {
                        (2, 2, 2, 2) => Mat::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]),
                        (2, 1, 2, 1) | (1, 2, 1, 2) => scalar(c(-1.0, 0.0)),
                        _ => linalg::identity(rows),
                    };
                    shell.f.push(([a, b, cc, d], m));
                }
            }
        }
    }
    shell.r = vec![
        ([s, s, 0], scalar(cis(-PI / 8.0))),
        ([s, s, t], scalar(cis(3.0 * PI / 8.0))),
        ([s, t, s], scalar(c(0.0, -1.0))),
        ([t, s, s], scalar(c(0.0, -1.0))),
        ([t, t, 0], scalar(c(-1.0, 0.0))),
    ];
    CategoryData::from_raw(shell).expect("Ising data")
}

/// Labels `1, g` with `g² = 1`, trivial associator and symmetric braiding.
pub fn z2() -> CategoryData {
    CategoryData::from_raw(RawCategory {
        labels: vec!["1".into(), "g".into()],
        dual: vec![0, 1],
        fusion: vec![(1, 1, 0, 1)],
        f: vec![([1, 1, 1, 1], linalg::identity(1))],
        r: vec![([1, 1, 0], linalg::identity(1))],
        tol: None,
    })
    .expect("Z2 data")
}

pub fn trivial() -> CategoryData {
    CategoryData::from_raw(RawCategory { labels: vec!["1".into()], dual: vec![0], ..Default::default() })
        .expect("trivial data")
}

/// Category and Q-system files of a built-in fixture: Ising with the Q-system
/// of `σσ̄`, Z₂ with that of `gḡ`, and the trivial category with the trivial
/// Q-system. The Q-system file refers to the category as `<name>.json`.
pub fn fixture_files(name: &str) -> Result<(CategoryFile, QSystemFile)> {
    let cat = by_name(name)?;
    let q = match name {
        "trivial" => QSystem::trivial(&cat),
        _ => from_conjugate_pair(&cat, &ObjectExpr::simple(cat.rank() - 1))?,
    };
    Ok((category_to_file(&cat), qsystem_to_file(&cat, &q, &format!("{name}.json"))))
}

/// Writes `<name>.json` and `<name>_q.json` into `dir` and returns their paths.
pub fn write_fixture(name: &str, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let (cat, q) = fixture_files(name)?;
    std::fs::create_dir_all(dir)?;
    let paths = (dir.join(format!("{name}.json")), dir.join(format!("{name}_q.json")));
    let text = |v: serde_json::Result<String>| v.map(|t| t + "\n").map_err(|e| QcatError::Parse(e.to_string()));
    std::fs::write(&paths.0, text(serde_json::to_string_pretty(&cat))?)?;
    std::fs::write(&paths.1, text(serde_json::to_string_pretty(&q))?)?;
    Ok(paths)
}

pub fn by_name(name: &str) -> Result<CategoryData> {
    match name {
        "ising" => Ok(ising()),
        "z2" => Ok(z2()),
        "trivial" => Ok(trivial()),
        _ => Err(QcatError::UnknownFixture(name.to_string())),
    }
}
