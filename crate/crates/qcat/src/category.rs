//! Braided fusion categories given by fusion rules, F-symbols and R-symbols.
//!
//! Label index 0 is always the monoidal unit. F-matrices use the convention
//! that the right-nested tree `a(bc)` with channels `(f, μ, ν)` expands as
//! `Σ F[(e,α,β),(f,μ,ν)]` times the left-nested tree `(ab)c` with channels
//! `(e, α, β)`. R-matrices act on splitting vertices: `ε_{a,b} t^{ab}_{c,μ} =
//! Σ_ν R^{ab}_c[ν,μ] t^{ba}_{c,ν}`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{QcatError, Result};
use crate::linalg::{self, c, max_abs_diff, Mat, C64};
use crate::morphism::Cache;

/// Default numerical tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Left basis `(e, α, β)` or right basis `(f, μ, ν)` entry of an F-matrix.
pub type Channel = (usize, usize, usize);

pub struct CategoryData {
    pub labels: Vec<String>,
    pub dual: Vec<usize>,
    fusion: Vec<usize>,
    f: HashMap<[usize; 4], Mat>,
    r: HashMap<[usize; 3], Mat>,
    pub dims: Vec<f64>,
    pub twists: Vec<C64>,
    pub tol: f64,
    /// `(rank of left factor, rank of right factor)` for Deligne products.
    pub factors: Option<(usize, usize)>,
    pub(crate) cache: Cache,
}

impl std::fmt::Debug for CategoryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CategoryData")
            .field("labels", &self.labels)
            .field("dims", &self.dims)
            .field("tol", &self.tol)
            .finish()
    }
}

impl Clone for CategoryData {
    fn clone(&self) -> Self {
        CategoryData {
            labels: self.labels.clone(),
            dual: self.dual.clone(),
            fusion: self.fusion.clone(),
            f: self.f.clone(),
            r: self.r.clone(),
            dims: self.dims.clone(),
            twists: self.twists.clone(),
            tol: self.tol,
            factors: self.factors,
            cache: Cache::default(),
        }
    }
}

/// Raw presentation used to build a [`CategoryData`].
#[derive(Clone, Debug, Default)]
pub struct RawCategory {
    pub labels: Vec<String>,
    pub dual: Vec<usize>,
    /// `(a, b, c, N)`; unit fusions may be omitted.
    pub fusion: Vec<(usize, usize, usize, usize)>,
    pub f: Vec<([usize; 4], Mat)>,
    pub r: Vec<([usize; 3], Mat)>,
    pub tol: Option<f64>,
}

impl CategoryData {
    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    /// Fusion multiplicity `N_{ab}^c`.
    #[inline]
    pub fn n(&self, a: usize, b: usize, c: usize) -> usize {
        let k = self.rank();
        self.fusion[(a * k + b) * k + c]
    }

    /// Labels `c` with `N_{ab}^c > 0`, in label order.
    pub fn channels(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.rank()).filter(|&c| self.n(a, b, c) > 0).collect()
    }

    pub fn label_index(&self, name: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == name).ok_or_else(|| QcatError::UnknownLabel(name.to_string()))
    }

    pub fn global_dim(&self) -> f64 {
        self.dims.iter().map(|d| d * d).sum()
    }

    pub fn is_multiplicity_free(&self) -> bool {
        self.fusion.iter().all(|&n| n <= 1)
    }

    /// Row basis `(e, α, β)` of `F^{abc}_d`.
    pub fn f_left_basis(&self, a: usize, b: usize, c: usize, d: usize) -> Vec<Channel> {
        let mut out = Vec::new();
        for e in 0..self.rank() {
            let n1 = self.n(a, b, e);
            let n2 = self.n(e, c, d);
            for al in 0..n1 {
                for be in 0..n2 {
                    out.push((e, al, be));
                }
            }
        }
        out
    }

    /// Column basis `(f, μ, ν)` of `F^{abc}_d`.
    pub fn f_right_basis(&self, a: usize, b: usize, c: usize, d: usize) -> Vec<Channel> {
        let mut out = Vec::new();
        for f in 0..self.rank() {
            let n1 = self.n(b, c, f);
            let n2 = self.n(a, f, d);
            for mu in 0..n1 {
                for nu in 0..n2 {
                    out.push((f, mu, nu));
                }
            }
        }
        out
    }

    /// The matrix `F^{abc}_d`; empty when no channel exists.
    pub fn fmat(&self, a: usize, b: usize, c: usize, d: usize) -> &Mat {
        static EMPTY: std::sync::OnceLock<Mat> = std::sync::OnceLock::new();
        self.f.get(&[a, b, c, d]).unwrap_or_else(|| EMPTY.get_or_init(|| Mat::zeros(0, 0)))
    }

    /// The matrix `R^{ab}_c` of size `N_{ab}^c`.
    pub fn rmat(&self, a: usize, b: usize, c: usize) -> &Mat {
        static EMPTY: std::sync::OnceLock<Mat> = std::sync::OnceLock::new();
        self.r.get(&[a, b, c]).unwrap_or_else(|| EMPTY.get_or_init(|| Mat::zeros(0, 0)))
    }

    /// `R^{-ab}_c = (R^{ba}_c)^†`, the data of the opposite braiding.
    pub fn rmat_inv(&self, a: usize, b: usize, c: usize) -> Mat {
        self.rmat(b, a, c).adjoint()
    }

    /// The complex-conjugate category: same fusion rules, conjugated F and R.
    /// Its braiding is the reverse of the original one up to relabelling by duals.
    pub fn conjugate(&self) -> CategoryData {
        let mut c = self.clone();
        c.f.values_mut().for_each(|m| *m = m.conjugate());
        c.r.values_mut().for_each(|m| *m = m.conjugate());
        c.twists = self.twists.iter().map(|t| t.conj()).collect();
        c
    }

    pub fn from_raw(raw: RawCategory) -> Result<Self> {
        let k = raw.labels.len();
        if k == 0 {
            return Err(QcatError::Schema("no labels".into()));
        }
        if raw.dual.len() != k {
            return Err(QcatError::Schema("dual map incomplete".into()));
        }
        let mut fusion = vec![usize::MAX; k * k * k];
        let idx = |a: usize, b: usize, c: usize| (a * k + b) * k + c;
        for &(a, b, cc, n) in &raw.fusion {
            if a >= k || b >= k || cc >= k {
                return Err(QcatError::Schema("fusion label out of range".into()));
            }
            let slot = &mut fusion[idx(a, b, cc)];
            if *slot != usize::MAX && *slot != n {
                return Err(QcatError::Data(format!(
                    "conflicting fusion entries for ({},{},{})",
                    raw.labels[a], raw.labels[b], raw.labels[cc]
                )));
            }
            *slot = n;
        }
        for a in 0..k {
            for b in 0..k {
                let unit_default = usize::from(a == b);
                for (x, y) in [(0, a), (a, 0)] {
                    let s = &mut fusion[idx(x, y, b)];
                    if *s == usize::MAX {
                        *s = unit_default;
                    }
                }
            }
        }
        for v in fusion.iter_mut() {
            if *v == usize::MAX {
                *v = 0;
            }
        }
        let tol = raw.tol.unwrap_or(DEFAULT_TOL);
        let mut cat = CategoryData {
            labels: raw.labels,
            dual: raw.dual,
            fusion,
            f: HashMap::new(),
            r: HashMap::new(),
            dims: vec![],
            twists: vec![],
            tol,
            factors: None,
            cache: Cache::default(),
        };
        cat.check_fusion()?;
        let mut fmap: HashMap<[usize; 4], Mat> = HashMap::new();
        for (key, m) in raw.f {
            if fmap.insert(key, m).is_some() {
                return Err(QcatError::Schema(format!("duplicate F entry {}", cat.key_name(&key))));
            }
        }
        let mut rmap: HashMap<[usize; 3], Mat> = HashMap::new();
        for (key, m) in raw.r {
            if rmap.insert(key, m).is_some() {
                return Err(QcatError::Schema(format!("duplicate R entry {}", cat.key_name(&key))));
            }
        }
        for a in 0..k {
            for b in 0..k {
                for cc in 0..k {
                    for d in 0..k {
                        let rows = cat.f_left_basis(a, b, cc, d).len();
                        let cols = cat.f_right_basis(a, b, cc, d).len();
                        if rows != cols {
                            return Err(QcatError::Data(format!(
                                "F^{{{},{},{}}}_{} is not square",
                                cat.labels[a], cat.labels[b], cat.labels[cc], cat.labels[d]
                            )));
                        }
                        let key = [a, b, cc, d];
                        match fmap.remove(&key) {
                            Some(m) => {
                                if m.nrows() != rows || m.ncols() != cols {
                                    return Err(QcatError::Schema(format!(
                                        "F{} has shape {}x{}, expected {}x{}",
                                        cat.key_name(&key),
                                        m.nrows(),
                                        m.ncols(),
                                        rows,
                                        cols
                                    )));
                                }
                                if rows > 0 {
                                    cat.f.insert(key, m);
                                }
                            }
                            None if rows == 0 => {}
                            None if a == 0 || b == 0 || cc == 0 => {
                                cat.f.insert(key, linalg::identity(rows));
                            }
                            None => return Err(QcatError::Schema(format!("missing F entry {}", cat.key_name(&key)))),
                        }
                    }
                }
            }
        }
        if let Some(key) = fmap.keys().next() {
            return Err(QcatError::Schema(format!("F entry {} not allowed by fusion", cat.key_name(key))));
        }
        for a in 0..k {
            for b in 0..k {
                for cc in 0..k {
                    let n = cat.n(a, b, cc);
                    let key = [a, b, cc];
                    match rmap.remove(&key) {
                        Some(m) => {
                            if m.nrows() != n || m.ncols() != n {
                                return Err(QcatError::Schema(format!("R{} has wrong shape", cat.key_name(&key))));
                            }
                            if n > 0 {
                                cat.r.insert(key, m);
                            }
                        }
                        None if n == 0 => {}
                        None if a == 0 || b == 0 => {
                            cat.r.insert(key, linalg::identity(n));
                        }
                        None => return Err(QcatError::Schema(format!("missing R entry {}", cat.key_name(&key)))),
                    }
                }
            }
        }
        if let Some(key) = rmap.keys().next() {
            return Err(QcatError::Schema(format!("R entry {} not allowed by fusion", cat.key_name(key))));
        }
        for (key, m) in cat.f.iter().map(|(k, m)| (k.to_vec(), m)).chain(cat.r.iter().map(|(k, m)| (k.to_vec(), m))) {
            let n = m.nrows();
            let err = max_abs_diff(&(m.adjoint() * m), &linalg::identity(n));
            if err > tol {
                return Err(QcatError::Data(format!(
                    "symbol {} is not unitary (residual {:e})",
                    cat.key_name(&key),
                    err
                )));
            }
        }
        cat.dims = cat.perron_frobenius()?;
        cat.twists = (0..k)
            .map(|a| {
                let mut s = C64::new(0.0, 0.0);
                for cc in cat.channels(a, a) {
                    s += linalg::trace(cat.rmat(a, a, cc)) * cat.dims[cc];
                }
                s / cat.dims[a]
            })
            .collect();
        Ok(cat)
    }

    fn key_name(&self, key: &[usize]) -> String {
        let names: Vec<&str> = key.iter().map(|&i| self.labels[i].as_str()).collect();
        match names.len() {
            4 => format!("({},{},{};{})", names[0], names[1], names[2], names[3]),
            3 => format!("({},{};{})", names[0], names[1], names[2]),
            _ => format!("{:?}", names),
        }
    }

    fn check_fusion(&self) -> Result<()> {
        let k = self.rank();
        for a in 0..k {
            let d = self.dual[a];
            if d >= k || self.dual[d] != a {
                return Err(QcatError::Data(format!("dual of {} is not an involution", self.labels[a])));
            }
            for b in 0..k {
                if self.n(0, a, b) != usize::from(a == b) || self.n(a, 0, b) != usize::from(a == b) {
                    return Err(QcatError::Data(format!("unit fusion broken at {}", self.labels[a])));
                }
                if self.n(a, b, 0) != usize::from(b == d) {
                    return Err(QcatError::Data(format!(
                        "N_{{{},{}}}^1 must equal δ with the dual",
                        self.labels[a], self.labels[b]
                    )));
                }
            }
        }
        if self.dual[0] != 0 {
            return Err(QcatError::Data("unit must be self-dual".into()));
        }
        Ok(())
    }

    fn perron_frobenius(&self) -> Result<Vec<f64>> {
        let k = self.rank();
        let mut m = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                for cc in 0..k {
                    m[b * k + cc] += self.n(a, b, cc) as f64;
                }
            }
        }
        for i in 0..k {
            m[i * k + i] += 1.0;
        }
        let mut v = vec![1.0; k];
        for _ in 0..100_000 {
            let mut nv = vec![0.0; k];
            for i in 0..k {
                for j in 0..k {
                    nv[i] += m[i * k + j] * v[j];
                }
            }
            let s = nv[0];
            for x in nv.iter_mut() {
                *x /= s;
            }
            let diff = nv.iter().zip(&v).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
            v = nv;
            if diff < 1e-15 {
                break;
            }
        }
        for a in 0..k {
            for b in 0..k {
                let rhs: f64 = (0..k).map(|cc| self.n(a, b, cc) as f64 * v[cc]).sum();
                if (v[a] * v[b] - rhs).abs() > self.tol.max(1e-12) * rhs.max(1.0) * 10.0 {
                    return Err(QcatError::Data("dimensions are not multiplicative".into()));
                }
            }
        }
        Ok(v)
    }
}

/// Residual report of all pentagon and hexagon instances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pentagon_max: f64,
    pub pentagon_worst: Option<String>,
    pub hexagon_max: f64,
    pub hexagon_worst: Option<String>,
    pub hexagon_inv_max: f64,
    pub hexagon_inv_worst: Option<String>,
    pub failures: Vec<String>,
    pub tol: f64,
    pub pass: bool,
}

/// Checks every pentagon and both hexagon identities by brute force.
pub fn validate_category(cat: &CategoryData) -> ValidationReport {
    let k = cat.rank();
    let tol = cat.tol;
    let mut failures = Vec::new();
    let mut pent = (0.0f64, None);
    for a in 0..k {
        for b in 0..k {
            for cc in 0..k {
                for d in 0..k {
                    for e in 0..k {
                        let res = pentagon_residual(cat, a, b, cc, d, e);
                        let name = format!(
                            "pentagon({},{},{},{};{})",
                            cat.labels[a], cat.labels[b], cat.labels[cc], cat.labels[d], cat.labels[e]
                        );
                        if res > tol {
                            failures.push(format!("{name} residual {res:.3e}"));
                        }
                        if res > pent.0 || pent.1.is_none() && res >= pent.0 && res > 0.0 {
                            pent = (res, Some(name));
                        }
                    }
                }
            }
        }
    }
    let mut hexes = Vec::new();
    for inverse in [false, true] {
        let mut worst = (0.0f64, None);
        for a in 0..k {
            for b in 0..k {
                for cc in 0..k {
                    for d in 0..k {
                        let res = hexagon_residual(cat, a, b, cc, d, inverse);
                        let name = format!(
                            "hexagon{}({},{},{};{})",
                            if inverse { "-" } else { "+" },
                            cat.labels[a],
                            cat.labels[b],
                            cat.labels[cc],
                            cat.labels[d]
                        );
                        if res > tol {
                            failures.push(format!("{name} residual {res:.3e}"));
                        }
                        if res > worst.0 {
                            worst = (res, Some(name));
                        }
                    }
                }
            }
        }
        hexes.push(worst);
    }
    let hex_inv = hexes.pop().unwrap();
    let hex = hexes.pop().unwrap();
    ValidationReport {
        pentagon_max: pent.0,
        pentagon_worst: pent.1,
        hexagon_max: hex.0,
        hexagon_worst: hex.1,
        hexagon_inv_max: hex_inv.0,
        hexagon_inv_worst: hex_inv.1,
        pass: failures.is_empty(),
        failures,
        tol,
    }
}

fn position(basis: &[Channel], ch: Channel) -> Option<usize> {
    basis.iter().position(|&x| x == ch)
}

/// Max residual of the pentagon relating the trees of `a b c d` in sector `e`.
pub fn pentagon_residual(cat: &CategoryData, a: usize, b: usize, c_: usize, d: usize, e: usize) -> f64 {
    let k = cat.rank();
    // right-nested a(b(cd)): (g,γ1), (h,γ2), γ3
    let mut rights = Vec::new();
    for g in 0..k {
        for h in 0..k {
            for g1 in 0..cat.n(c_, d, g) {
                for g2 in 0..cat.n(b, g, h) {
                    for g3 in 0..cat.n(a, h, e) {
                        rights.push((g, g1, h, g2, g3));
                    }
                }
            }
        }
    }
    // left-nested ((ab)c)d: (i,α1), (j,β1), β2
    let mut lefts = Vec::new();
    for i in 0..k {
        for j in 0..k {
            for a1 in 0..cat.n(a, b, i) {
                for b1 in 0..cat.n(i, c_, j) {
                    for b2 in 0..cat.n(j, d, e) {
                        lefts.push((i, a1, j, b1, b2));
                    }
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for &(g, g1, h, g2, g3) in &rights {
        for &(i, a1, j, b1, b2) in &lefts {
            let mut lhs = C64::new(0.0, 0.0);
            let fabg = cat.fmat(a, b, g, e);
            let ficd = cat.fmat(i, c_, d, e);
            let lb1 = cat.f_left_basis(a, b, g, e);
            let rb1 = cat.f_right_basis(a, b, g, e);
            let lb2 = cat.f_left_basis(i, c_, d, e);
            let rb2 = cat.f_right_basis(i, c_, d, e);
            for a2 in 0..cat.n(i, g, e) {
                let (Some(r1), Some(c1)) = (position(&lb1, (i, a1, a2)), position(&rb1, (h, g2, g3))) else {
                    continue;
                };
                let (Some(r2), Some(c2)) = (position(&lb2, (j, b1, b2)), position(&rb2, (g, g1, a2))) else {
                    continue;
                };
                lhs += fabg[(r1, c1)] * ficd[(r2, c2)];
            }
            let mut rhs = C64::new(0.0, 0.0);
            let fbcd = cat.fmat(b, c_, d, h);
            let lb3 = cat.f_left_basis(b, c_, d, h);
            let rb3 = cat.f_right_basis(b, c_, d, h);
            let fabc = cat.fmat(a, b, c_, j);
            let lb5 = cat.f_left_basis(a, b, c_, j);
            let rb5 = cat.f_right_basis(a, b, c_, j);
            let Some(c3) = position(&rb3, (g, g1, g2)) else { continue };
            for kk in 0..k {
                let fakd = cat.fmat(a, kk, d, e);
                let lb4 = cat.f_left_basis(a, kk, d, e);
                let rb4 = cat.f_right_basis(a, kk, d, e);
                for k1 in 0..cat.n(b, c_, kk) {
                    for k2 in 0..cat.n(kk, d, h) {
                        let Some(r3) = position(&lb3, (kk, k1, k2)) else { continue };
                        for l1 in 0..cat.n(a, kk, j) {
                            let (Some(r4), Some(c4)) = (position(&lb4, (j, l1, b2)), position(&rb4, (h, k2, g3)))
                            else {
                                continue;
                            };
                            let (Some(r5), Some(c5)) = (position(&lb5, (i, a1, b1)), position(&rb5, (kk, k1, l1)))
                            else {
                                continue;
                            };
                            rhs += fbcd[(r3, c3)] * fakd[(r4, c4)] * fabc[(r5, c5)];
                        }
                    }
                }
            }
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Max residual of the hexagon `ε_{a,bc} = (1_b×ε_{a,c})(ε_{a,b}×1_c)` in sector `d`,
/// for the braiding or (when `inverse`) the opposite braiding.
pub fn hexagon_residual(cat: &CategoryData, a: usize, b: usize, c_: usize, d: usize, inverse: bool) -> f64 {
    let k = cat.rank();
    let r = |x: usize, y: usize, z: usize| -> Mat {
        if inverse {
            cat.rmat_inv(x, y, z)
        } else {
            cat.rmat(x, y, z).clone()
        }
    };
    let f1 = cat.fmat(a, b, c_, d);
    let l1 = cat.f_left_basis(a, b, c_, d);
    let r1 = cat.f_right_basis(a, b, c_, d);
    let f2 = cat.fmat(b, a, c_, d);
    let l2 = cat.f_left_basis(b, a, c_, d);
    let r2 = cat.f_right_basis(b, a, c_, d);
    let f3 = cat.fmat(b, c_, a, d);
    let l3 = cat.f_left_basis(b, c_, a, d);
    let r3 = cat.f_right_basis(b, c_, a, d);
    let mut worst = 0.0f64;
    // columns: right trees a(bc) (f, μ, ν); rows: left trees (bc)a (f', μ', ν')
    for (ci, &(f, mu, nu)) in r1.iter().enumerate() {
        let raf = r(a, f, d);
        for &(fp, mup, nup) in &l3 {
            let lhs = if fp == f && mup == mu { raf[(nup, nu)] } else { C64::new(0.0, 0.0) };
            let mut rhs = C64::new(0.0, 0.0);
            for (li, &(e, al, be)) in l1.iter().enumerate() {
                let coef = f1[(li, ci)];
                if coef.norm() == 0.0 {
                    continue;
                }
                let rab = r(a, b, e);
                for alp in 0..cat.n(b, a, e) {
                    let Some(row2) = position(&l2, (e, alp, be)) else { continue };
                    let c2 = coef * rab[(alp, al)];
                    for (gi, &(g, ka, la)) in r2.iter().enumerate() {
                        let c3 = c2 * f2[(row2, gi)].conj();
                        if c3.norm() == 0.0 {
                            continue;
                        }
                        let rac = r(a, c_, g);
                        for kap in 0..cat.n(c_, a, g) {
                            let Some(col3) = position(&r3, (g, kap, la)) else { continue };
                            let Some(row3) = position(&l3, (fp, mup, nup)) else { continue };
                            rhs += c3 * rac[(kap, ka)] * f3[(row3, col3)];
                        }
                    }
                }
            }
            let _ = k;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// S, T and related modular data.
#[derive(Clone, Debug)]
pub struct ModularData {
    pub s_matrix: Mat,
    pub t_matrix: Mat,
    pub omega: C64,
    pub global_dim: f64,
    pub d_r: f64,
    pub is_modular: bool,
    pub residuals: ModularResiduals,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModularResiduals {
    pub symmetric: f64,
    pub unitary: f64,
    pub st_cubed: f64,
    pub s_fourth: f64,
    pub s_squared_c: f64,
}

impl ModularResiduals {
    pub fn max(&self) -> f64 {
        self.symmetric.max(self.unitary).max(self.st_cubed).max(self.s_fourth).max(self.s_squared_c)
    }
}

/// Charge conjugation matrix `C_{ab} = δ_{b,ā}`.
pub fn conjugation_matrix(cat: &CategoryData) -> Mat {
    let k = cat.rank();
    Mat::from_fn(k, k, |a, b| if cat.dual[a] == b { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// Double-braiding traces normalized by `dim(C)^{-1/2}`.
pub fn s_matrix(cat: &CategoryData) -> Mat {
    let k = cat.rank();
    let dr = cat.global_dim().sqrt();
    Mat::from_fn(k, k, |a, b| {
        let mut s = C64::new(0.0, 0.0);
        for cc in cat.channels(a, b) {
            let mono = cat.rmat(b, a, cc) * cat.rmat(a, b, cc);
            s += linalg::trace(&mono) * cat.dims[cc];
        }
        s / dr
    })
}

pub fn modular_data(cat: &CategoryData) -> ModularData {
    let k = cat.rank();
    let s = s_matrix(cat);
    let global_dim = cat.global_dim();
    let d_r = global_dim.sqrt();
    let p_minus: C64 = (0..k).map(|a| cat.twists[a].inv() * cat.dims[a] * cat.dims[a]).sum::<C64>() / d_r;
    let omega = principal_cbrt(p_minus);
    let t = Mat::from_fn(k, k, |a, b| if a == b { omega * cat.twists[a] } else { C64::new(0.0, 0.0) });
    let id = linalg::identity(k);
    let unitary = max_abs_diff(&(s.adjoint() * &s), &id);
    let s2 = &s * &s;
    let residuals = match t.clone().try_inverse() {
        Some(tinv) => {
            let st = &s * tinv;
            ModularResiduals {
                symmetric: max_abs_diff(&s, &s.transpose()),
                unitary,
                st_cubed: max_abs_diff(&(&st * &st * &st), &s2),
                s_fourth: max_abs_diff(&(&s2 * &s2), &id),
                s_squared_c: max_abs_diff(&s2, &conjugation_matrix(cat)),
            }
        }
        None => ModularResiduals {
            symmetric: max_abs_diff(&s, &s.transpose()),
            unitary,
            st_cubed: f64::INFINITY,
            s_fourth: max_abs_diff(&(&s2 * &s2), &id),
            s_squared_c: max_abs_diff(&s2, &conjugation_matrix(cat)),
        },
    };
    ModularData { s_matrix: s, t_matrix: t, omega, global_dim, d_r, is_modular: unitary < cat.tol, residuals }
}

/// Modular data, failing when the braiding is degenerate.
pub fn require_modular(cat: &CategoryData) -> Result<ModularData> {
    let md = modular_data(cat);
    if md.is_modular {
        Ok(md)
    } else {
        Err(QcatError::Degenerate)
    }
}

fn principal_cbrt(z: C64) -> C64 {
    if z.norm() == 0.0 {
        return z;
    }
    C64::from_polar(z.norm().cbrt(), z.arg() / 3.0)
}

/// Index of the label `(a, b)` in a Deligne product with right rank `kr`.
#[inline]
pub fn pair_index(a: usize, b: usize, kr: usize) -> usize {
    a * kr + b
}

/// Deligne product `L ⊠ R`; with `reverse_right` the right factor carries the
/// opposite braiding.
pub fn deligne_product(left: &CategoryData, right: &CategoryData, reverse_right: bool) -> Result<CategoryData> {
    let kl = left.rank();
    let kr = right.rank();
    let k = kl * kr;
    let split = |x: usize| (x / kr, x % kr);
    let mut labels = Vec::with_capacity(k);
    let mut dual = Vec::with_capacity(k);
    for a in 0..kl {
        for b in 0..kr {
            labels.push(format!("({},{})", left.labels[a], right.labels[b]));
            dual.push(pair_index(left.dual[a], right.dual[b], kr));
        }
    }
    let mut fusion = Vec::new();
    for x in 0..k {
        for y in 0..k {
            for z in 0..k {
                let (a, b) = split(x);
                let (c_, d) = split(y);
                let (e, f) = split(z);
                let n = left.n(a, c_, e) * right.n(b, d, f);
                if n > 0 {
                    fusion.push((x, y, z, n));
                }
            }
        }
    }
    let mut shell = CategoryData {
        labels: labels.clone(),
        dual: dual.clone(),
        fusion: vec![0; k * k * k],
        f: HashMap::new(),
        r: HashMap::new(),
        dims: vec![],
        twists: vec![],
        tol: left.tol.max(right.tol),
        factors: None,
        cache: Cache::default(),
    };
    for &(x, y, z, n) in &fusion {
        shell.fusion[(x * k + y) * k + z] = n;
    }
    let mut fs = Vec::new();
    for a in 0..k {
        for b in 0..k {
            for c_ in 0..k {
                for d in 0..k {
                    let lb = shell.f_left_basis(a, b, c_, d);
                    if lb.is_empty() {
                        continue;
                    }
                    let rb = shell.f_right_basis(a, b, c_, d);
                    let (a1, a2) = split(a);
                    let (b1, b2) = split(b);
                    let (c1, c2) = split(c_);
                    let (d1, d2) = split(d);
                    let fl = left.fmat(a1, b1, c1, d1);
                    let fr = right.fmat(a2, b2, c2, d2);
                    let ll = left.f_left_basis(a1, b1, c1, d1);
                    let lr = left.f_right_basis(a1, b1, c1, d1);
                    let rl = right.f_left_basis(a2, b2, c2, d2);
                    let rr = right.f_right_basis(a2, b2, c2, d2);
                    let mut m = Mat::zeros(lb.len(), rb.len());
                    for (i, &(e, al, be)) in lb.iter().enumerate() {
                        let (e1, e2) = split(e);
                        let (al1, al2) = (al / right.n(a2, b2, e2), al % right.n(a2, b2, e2));
                        let (be1, be2) = (be / right.n(e2, c2, d2), be % right.n(e2, c2, d2));
                        let li = position(&ll, (e1, al1, be1)).unwrap();
                        let ri = position(&rl, (e2, al2, be2)).unwrap();
                        for (j, &(f, mu, nu)) in rb.iter().enumerate() {
                            let (f1, f2) = split(f);
                            let (mu1, mu2) = (mu / right.n(b2, c2, f2), mu % right.n(b2, c2, f2));
                            let (nu1, nu2) = (nu / right.n(a2, f2, d2), nu % right.n(a2, f2, d2));
                            let lj = position(&lr, (f1, mu1, nu1)).unwrap();
                            let rj = position(&rr, (f2, mu2, nu2)).unwrap();
                            m[(i, j)] = fl[(li, lj)] * fr[(ri, rj)];
                        }
                    }
                    fs.push(([a, b, c_, d], m));
                }
            }
        }
    }
    let mut rs = Vec::new();
    for &(x, y, z, _) in &fusion {
        let (a, b) = split(x);
        let (c_, d) = split(y);
        let (e, f) = split(z);
        let rl = left.rmat(a, c_, e).clone();
        let rr = if reverse_right { right.rmat_inv(b, d, f) } else { right.rmat(b, d, f).clone() };
        rs.push(([x, y, z], linalg::kron(&rl, &rr)));
    }
    let mut cat = CategoryData::from_raw(RawCategory { labels, dual, fusion, f: fs, r: rs, tol: Some(shell.tol) })?;
    cat.factors = Some((kl, kr));
    Ok(cat)
}

// ---------------------------------------------------------------------------
// File format

/// Row-major complex matrix with parallel real and imaginary arrays.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_mat(m: &Mat) -> Self {
        let mut re_ = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                re_.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { rows: m.nrows(), cols: m.ncols(), re: re_, im }
    }

    pub fn to_mat(&self) -> Result<Mat> {
        let n = self.rows * self.cols;
        if self.re.len() != n || (self.im.len() != n && !self.im.is_empty()) {
            return Err(QcatError::Schema(format!("matrix data length does not match {}x{}", self.rows, self.cols)));
        }
        Ok(Mat::from_fn(self.rows, self.cols, |i, j| {
            let k = i * self.cols + j;
            C64::new(self.re[k], self.im.get(k).copied().unwrap_or(0.0))
        }))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FEntry {
    pub abc_d: [String; 4],
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct REntry {
    pub ab_c: [String; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CategoryFile {
    pub labels: Vec<String>,
    pub dual: BTreeMap<String, String>,
    pub fusion: Vec<(String, String, String, usize)>,
    #[serde(rename = "F")]
    pub f: Vec<FEntry>,
    #[serde(rename = "R")]
    pub r: Vec<REntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// Parses a category file. The unit label `"1"` is moved to index 0; the other
/// labels keep their declared order.
pub fn load_category(source: &[u8]) -> Result<CategoryData> {
    let file: CategoryFile = serde_json::from_slice(source).map_err(|e| QcatError::Parse(e.to_string()))?;
    category_from_file(&file)
}

pub fn category_from_file(file: &CategoryFile) -> Result<CategoryData> {
    let mut labels = file.labels.clone();
    let unit = labels.iter().position(|l| l == "1").ok_or_else(|| QcatError::Schema("no unit label \"1\"".into()))?;
    let u = labels.remove(unit);
    labels.insert(0, u);
    let mut seen = std::collections::HashSet::new();
    for l in &labels {
        if !seen.insert(l) {
            return Err(QcatError::Schema(format!("duplicate label {l}")));
        }
    }
    let index = |name: &str| -> Result<usize> {
        labels.iter().position(|l| l == name).ok_or_else(|| QcatError::UnknownLabel(name.to_string()))
    };
    let mut dual = vec![usize::MAX; labels.len()];
    for (a, b) in &file.dual {
        dual[index(a)?] = index(b)?;
    }
    if dual.contains(&usize::MAX) {
        return Err(QcatError::Schema("dual map incomplete".into()));
    }
    let mut fusion = Vec::new();
    for (a, b, c_, n) in &file.fusion {
        fusion.push((index(a)?, index(b)?, index(c_)?, *n));
    }
    let mut fs = Vec::new();
    for e in &file.f {
        let key = [index(&e.abc_d[0])?, index(&e.abc_d[1])?, index(&e.abc_d[2])?, index(&e.abc_d[3])?];
        let m = MatrixJson { rows: e.rows, cols: e.cols, re: e.re.clone(), im: e.im.clone() }.to_mat()?;
        fs.push((key, m));
    }
    let mut rs = Vec::new();
    for e in &file.r {
        let key = [index(&e.ab_c[0])?, index(&e.ab_c[1])?, index(&e.ab_c[2])?];
        let n = (e.re.len() as f64).sqrt().round() as usize;
        let rows = e.rows.unwrap_or(n);
        let cols = e.cols.unwrap_or(n);
        let m = MatrixJson { rows, cols, re: e.re.clone(), im: e.im.clone() }.to_mat()?;
        rs.push((key, m));
    }
    CategoryData::from_raw(RawCategory { labels, dual, fusion, f: fs, r: rs, tol: file.tol })
}

/// Serializes the category, omitting entries fixed by the unit defaults.
pub fn category_to_file(cat: &CategoryData) -> CategoryFile {
    let k = cat.rank();
    let name = |i: usize| cat.labels[i].clone();
    let mut fusion = Vec::new();
    for a in 1..k {
        for b in 1..k {
            for c_ in 0..k {
                let n = cat.n(a, b, c_);
                if n > 0 {
                    fusion.push((name(a), name(b), name(c_), n));
                }
            }
        }
    }
    let mut f = Vec::new();
    let mut keys: Vec<&[usize; 4]> = cat.f.keys().filter(|k| k[..3].iter().all(|&x| x != 0)).collect();
    keys.sort();
    for key in keys {
        let m = MatrixJson::from_mat(&cat.f[key]);
        f.push(FEntry {
            abc_d: [name(key[0]), name(key[1]), name(key[2]), name(key[3])],
            rows: m.rows,
            cols: m.cols,
            re: m.re,
            im: m.im,
        });
    }
    let mut r = Vec::new();
    let mut rkeys: Vec<&[usize; 3]> = cat.r.keys().filter(|k| k[0] != 0 && k[1] != 0).collect();
    rkeys.sort();
    for key in rkeys {
        let m = MatrixJson::from_mat(&cat.r[key]);
        let scalar = m.rows == 1;
        r.push(REntry {
            ab_c: [name(key[0]), name(key[1]), name(key[2])],
            rows: if scalar { None } else { Some(m.rows) },
            cols: if scalar { None } else { Some(m.cols) },
            re: m.re,
            im: m.im,
        });
    }
    CategoryFile {
        labels: cat.labels.clone(),
        dual: (0..k).map(|a| (name(a), name(cat.dual[a]))).collect(),
        fusion,
        f,
        r,
        tol: Some(cat.tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::cis;
    use std::f64::consts::PI;

    #[test]
    fn ising_is_coherent() {
        let cat = fixtures::ising();
        let rep = validate_category(&cat);
        assert!(rep.pass, "{:?}", rep.failures);
        assert!(rep.pentagon_max < 1e-12 && rep.hexagon_max < 1e-12 && rep.hexagon_inv_max < 1e-12);
    }

    #[test]
    fn flipped_f_sign_is_caught() {
        let cat = fixtures::ising();
        let mut file = category_to_file(&cat);
        let e = file.f.iter_mut().find(|e| e.abc_d == ["sigma", "tau", "sigma", "tau"]).unwrap();
        e.re[0] = 1.0;
        let bad = category_from_file(&file).unwrap();
        let rep = validate_category(&bad);
        assert!(!rep.pass);
        assert!(rep.pentagon_worst.unwrap().starts_with("pentagon("));
    }

    #[test]
    fn ising_dims_and_twists() {
        let cat = fixtures::ising();
        assert!((cat.dims[2] - 2f64.sqrt()).abs() < 1e-12);
        assert!((cat.dims[1] - 1.0).abs() < 1e-12);
        assert!((cat.twists[2] - cis(PI / 8.0)).norm() < 1e-12);
        assert!((cat.twists[1] + 1.0).norm() < 1e-12);
    }

    #[test]
    fn ising_s_matrix() {
        let cat = fixtures::ising();
        let md = modular_data(&cat);
        let r2 = 2f64.sqrt();
        let want = Mat::from_row_slice(3, 3, &[1.0, 1.0, r2, 1.0, 1.0, -r2, r2, -r2, 0.0].map(|v| c(v / 2.0, 0.0)));
        assert!(max_abs_diff(&md.s_matrix, &want) < 1e-12);
        assert!(md.is_modular);
        assert!(md.residuals.max() < 1e-9, "{:?}", md.residuals);
    }

    #[test]
    fn z2_is_degenerate() {
        let cat = fixtures::z2();
        assert!(validate_category(&cat).pass);
        assert!(!modular_data(&cat).is_modular);
        assert!(matches!(require_modular(&cat), Err(QcatError::Degenerate)));
    }

    #[test]
    fn trivial_category() {
        let cat = fixtures::trivial();
        assert_eq!(cat.dims, vec![1.0]);
        assert!((cat.twists[0] - 1.0).norm() < 1e-15);
        assert!(validate_category(&cat).pass);
    }

    #[test]
    fn file_round_trip() {
        let cat = fixtures::ising();
        let json = serde_json::to_vec(&category_to_file(&cat)).unwrap();
        let back = load_category(&json).unwrap();
        assert_eq!(back.labels, cat.labels);
        assert!(validate_category(&back).pass);
    }

    #[test]
    fn missing_entry_is_a_schema_error() {
        let cat = fixtures::ising();
        let mut file = category_to_file(&cat);
        file.r.retain(|e| e.ab_c != ["sigma", "sigma", "tau"]);
        assert!(matches!(category_from_file(&file), Err(QcatError::Schema(_))));
        assert!(matches!(load_category(b"{"), Err(QcatError::Parse(_))));
    }

    #[test]
    fn non_unitary_entry_is_a_data_error() {
        let cat = fixtures::ising();
        let mut file = category_to_file(&cat);
        file.r[0].re[0] *= 2.0;
        assert!(matches!(category_from_file(&file), Err(QcatError::Data(_))));
    }

    #[test]
    fn deligne_with_reverse() {
        let cat = fixtures::ising();
        let d = deligne_product(&cat, &cat, true).unwrap();
        assert_eq!(d.rank(), 9);
        assert!((d.global_dim() - 16.0).abs() < 1e-9);
        let ss = pair_index(2, 2, 3);
        assert!((d.twists[ss] - 1.0).norm() < 1e-12);
        assert!(validate_category(&d).pass);
        let t = deligne_product(&fixtures::trivial(), &cat, false).unwrap();
        assert_eq!(t.dims, cat.dims);
        assert_eq!(t.labels[2], "(1,sigma)");
    }
}
