//! Q-systems: axioms, normalization, commutativity and the finite-dimensional
//! algebras `Hom₀(θ,θ)` and `Hom(θ,1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::category::CategoryData;
use crate::error::{QcatError, Result};
use crate::linalg::{self, herm_eig, herm_fn, Mat, C64};
use crate::morphism::{
    braiding, compose_all, hom_basis, id, solve_linear, standard_pair, tensor, tensor_all, Morphism, ObjectExpr, Sign,
};

/// Default seed of every randomized routine.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// A standard C* Frobenius algebra `(θ, w, x)`.
#[derive(Clone, Debug)]
pub struct QSystem {
    pub theta: ObjectExpr,
    pub w: Morphism,
    pub x: Morphism,
    pub d: f64,
}

impl QSystem {
    /// Wraps a triple after checking shapes; `d = √dim θ`.
    pub fn new(cat: &CategoryData, theta: ObjectExpr, w: Morphism, x: Morphism) -> Result<QSystem> {
        check_shapes(&theta, &w, &x)?;
        let d = theta.dim(cat).sqrt();
        Ok(QSystem { theta, w, x, d })
    }

    /// The trivial Q-system `(1, 1, 1)`.
    pub fn trivial(cat: &CategoryData) -> QSystem {
        let u = ObjectExpr::unit();
        QSystem { theta: u.clone(), w: id(cat, &u), x: id(cat, &u), d: 1.0 }
    }

    /// `r = x∘w: 1 → θθ`.
    pub fn r(&self) -> Morphism {
        self.x.compose(&self.w).expect("Q-system shapes")
    }

    pub fn dim_theta(&self, cat: &CategoryData) -> f64 {
        self.theta.dim(cat)
    }
}

fn check_shapes(theta: &ObjectExpr, w: &Morphism, x: &Morphism) -> Result<()> {
    if w.dom != ObjectExpr::unit() || &w.cod != theta {
        return Err(QcatError::Shape("w must be a morphism 1 → θ".into()));
    }
    if &x.dom != theta || x.cod != theta.tensor(theta) {
        return Err(QcatError::Shape("x must be a morphism θ → θθ".into()));
    }
    Ok(())
}

/// Residuals of the Q-system axioms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    pub unit: f64,
    pub associativity: f64,
    pub frobenius: f64,
    pub special: f64,
    pub standard: f64,
    pub d: f64,
    pub dim_theta: f64,
    pub tol: f64,
    pub pass_unit: bool,
    pub pass_associativity: bool,
    pub pass_frobenius: bool,
    pub pass_special: bool,
    pub pass_standard: bool,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.pass_unit && self.pass_associativity && self.pass_frobenius && self.pass_special && self.pass_standard
    }

    pub fn max_residual(&self) -> f64 {
        self.unit.max(self.associativity).max(self.frobenius).max(self.special).max(self.standard)
    }
}

/// Distance of an endomorphism from the nearest multiple of the identity.
pub fn scalar_defect(f: &Morphism) -> (C64, f64) {
    let n: usize = f.blocks.iter().map(|b| b.nrows()).sum();
    if n == 0 {
        return (C64::new(0.0, 0.0), 0.0);
    }
    let lambda: C64 = f.blocks.iter().map(|b| b.trace()).sum::<C64>() / n as f64;
    let mut worst = 0.0f64;
    for b in &f.blocks {
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                let target = if i == j { lambda } else { C64::new(0.0, 0.0) };
                worst = worst.max((b[(i, j)] - target).norm());
            }
        }
    }
    (lambda, worst)
}

fn unit_residual(cat: &CategoryData, theta: &ObjectExpr, w: &Morphism, x: &Morphism) -> Result<f64> {
    let one = id(cat, theta);
    let l = tensor(cat, &w.adjoint(), &one).compose(x)?.dist(&one)?;
    let r = tensor(cat, &one, &w.adjoint()).compose(x)?.dist(&one)?;
    Ok(l.max(r))
}

fn assoc_residual(cat: &CategoryData, theta: &ObjectExpr, x: &Morphism) -> Result<f64> {
    let one = id(cat, theta);
    tensor(cat, x, &one).compose(x)?.dist(&tensor(cat, &one, x).compose(x)?)
}

fn frobenius_residual(cat: &CategoryData, theta: &ObjectExpr, x: &Morphism) -> Result<f64> {
    let one = id(cat, theta);
    let mid = x.compose(&x.adjoint())?;
    let a = tensor(cat, &one, &x.adjoint()).compose(&tensor(cat, x, &one))?;
    let b = tensor(cat, &x.adjoint(), &one).compose(&tensor(cat, &one, x))?;
    Ok(a.dist(&mid)?.max(b.dist(&mid)?))
}

pub fn check_qsystem(cat: &CategoryData, theta: &ObjectExpr, w: &Morphism, x: &Morphism) -> Result<AxiomReport> {
    check_shapes(theta, w, x)?;
    let tol = cat.tol;
    let dim_theta = theta.dim(cat);
    let d = dim_theta.sqrt();
    let unit = unit_residual(cat, theta, w, x)?;
    let associativity = assoc_residual(cat, theta, x)?;
    let frobenius = frobenius_residual(cat, theta, x)?;
    let xx = x.adjoint().compose(x)?;
    let (_, special) = scalar_defect(&xx);
    let ww = w.adjoint().compose(w)?;
    let standard = ww.dist(&id(cat, &ObjectExpr::unit()).scale_re(d))?.max(xx.dist(&id(cat, theta).scale_re(d))?);
    Ok(AxiomReport {
        unit,
        associativity,
        frobenius,
        special,
        standard,
        d,
        dim_theta,
        tol,
        pass_unit: unit < tol,
        pass_associativity: associativity < tol,
        pass_frobenius: frobenius < tol,
        pass_special: special < tol,
        pass_standard: standard < tol,
    })
}

pub fn check(cat: &CategoryData, q: &QSystem) -> Result<AxiomReport> {
    check_qsystem(cat, &q.theta, &q.w, &q.x)
}

fn loose(cat: &CategoryData) -> f64 {
    cat.tol.sqrt()
}

/// Normalizes a Frobenius triple to a special standard Q-system.
///
/// A triple satisfying only the unit and associativity laws is first made
/// special by [`iterate_specialize`].
pub fn make_special_standard(cat: &CategoryData, theta: &ObjectExpr, w: &Morphism, x: &Morphism) -> Result<QSystem> {
    normalize(cat, theta, w, x, true)
}

fn normalize(cat: &CategoryData, theta: &ObjectExpr, w: &Morphism, x: &Morphism, recurse: bool) -> Result<QSystem> {
    check_shapes(theta, w, x)?;
    let eps = loose(cat);
    let u = unit_residual(cat, theta, w, x)?;
    let a = assoc_residual(cat, theta, x)?;
    if u > eps || a > eps {
        return Err(QcatError::NotFrobenius(format!("unit {u:.3e}, associativity {a:.3e}")));
    }
    let f = frobenius_residual(cat, theta, x)?;
    if f > eps {
        if !recurse {
            return Err(QcatError::NotFrobenius(format!("Frobenius {f:.3e}")));
        }
        return match specialize(cat, theta, w, x, 10_000)? {
            Specialized::Converged { q, .. } => Ok(q),
            Specialized::Diverged { spectrum, .. } => {
                Err(QcatError::NotFrobenius(format!("specialization limit is singular (spectrum {spectrum:?})")))
            }
        };
    }
    let n = x.adjoint().compose(x)?;
    let (nh, nih) = sqrt_pair(cat, &n)?;
    let xh = x.compose(&nih)?;
    let wh = nh.compose(w)?;
    let dim = theta.dim(cat);
    let norm = crate::morphism::scalar(&wh.adjoint().compose(&wh)?);
    if (norm.re - dim).abs() > eps * dim.max(1.0) || norm.im.abs() > eps {
        return Err(QcatError::NonStandardizable(format!("w*n w = {:.6} but dim θ = {:.6}", norm.re, dim)));
    }
    let d = dim.sqrt();
    Ok(QSystem { theta: theta.clone(), w: wh.scale_re(1.0 / d.sqrt()), x: xh.scale_re(d.sqrt()), d })
}

/// `(n^{1/2}, n^{-1/2})` of a strictly positive endomorphism.
fn sqrt_pair(cat: &CategoryData, n: &Morphism) -> Result<(Morphism, Morphism)> {
    let mut s = n.clone();
    let mut si = n.clone();
    for (c, b) in n.blocks.iter().enumerate() {
        if b.is_empty() {
            continue;
        }
        let (vals, _) = herm_eig(b);
        if vals[0] <= cat.tol {
            return Err(QcatError::NotFrobenius(format!("x*x is not strictly positive (eigenvalue {:.3e})", vals[0])));
        }
        s.blocks[c] = herm_fn(b, f64::sqrt);
        si.blocks[c] = herm_fn(b, |v| 1.0 / v.sqrt());
    }
    Ok((s, si))
}

/// Result of the specialization recursion.
#[derive(Clone, Debug)]
pub enum Specialized {
    Converged { q: QSystem, iterations: usize },
    Diverged { spectrum: Vec<f64>, iterations: usize },
}

/// Runs `m_{k+1} = x*(m_k×m_k)x` (normalized) from the identity. An invertible
/// limit deforms the triple into a special one, which is then standardized.
pub fn iterate_specialize(
    cat: &CategoryData,
    theta: &ObjectExpr,
    w: &Morphism,
    x: &Morphism,
    max_iter: usize,
) -> Result<Specialized> {
    check_shapes(theta, w, x)?;
    let eps = loose(cat);
    let u = unit_residual(cat, theta, w, x)?;
    let a = assoc_residual(cat, theta, x)?;
    if u > eps || a > eps {
        return Err(QcatError::NotFrobenius(format!("unit {u:.3e}, associativity {a:.3e}")));
    }
    specialize(cat, theta, w, x, max_iter)
}

fn specialize(
    cat: &CategoryData,
    theta: &ObjectExpr,
    w: &Morphism,
    x: &Morphism,
    max_iter: usize,
) -> Result<Specialized> {
    let eps = loose(cat);
    let mut m = id(cat, theta);
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let next = x.adjoint().compose(&tensor(cat, &m, &m))?.compose(x)?;
        let top = spectrum(&next).into_iter().fold(0.0f64, f64::max);
        if top <= 0.0 {
            return Ok(Specialized::Diverged { spectrum: spectrum(&next), iterations });
        }
        let next = next.scale_re(1.0 / top);
        let diff = next.dist(&m)?;
        m = next;
        if diff < cat.tol {
            break;
        }
    }
    let spec = spectrum(&m);
    let min = spec.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= eps {
        return Ok(Specialized::Diverged { spectrum: spec, iterations });
    }
    let (nu, nu_inv) = sqrt_pair(cat, &m)?;
    let w2 = nu_inv.compose(w)?;
    let x2 = compose_all(&[&tensor(cat, &nu, &nu), x, &nu_inv])?;
    let q = normalize(cat, theta, &w2, &x2, false)?;
    Ok(Specialized::Converged { q, iterations })
}

fn spectrum(f: &Morphism) -> Vec<f64> {
    let mut out = Vec::new();
    for b in &f.blocks {
        if !b.is_empty() {
            out.extend(herm_eig(b).0);
        }
    }
    out
}

/// `‖ε_{θ,θ}∘x − x‖` and whether it is below tolerance.
pub fn check_commutative(cat: &CategoryData, q: &QSystem) -> Result<(bool, f64)> {
    let e = braiding(cat, &q.theta, &q.theta, Sign::Plus)?;
    let res = e.compose(&q.x)?.dist(&q.x)?;
    Ok((res < cat.tol, res))
}

/// A finite-dimensional *-algebra with an orthonormal basis of morphisms and a
/// faithful unital *-representation on matrices.
#[derive(Clone, Debug)]
pub struct AlgebraPresentation {
    pub basis: Vec<Morphism>,
    /// `basis[i]·basis[j] = Σ_k mult[i][j][k] basis[k]`.
    pub mult: Vec<Vec<Vec<C64>>>,
    /// `basis[i]* = Σ_k star[i][k] basis[k]`.
    pub star: Vec<Vec<C64>>,
    pub unit: Vec<C64>,
    pub rep: Vec<Mat>,
    /// Coordinates of a basis of the centre of the ambient algebra, when flagged.
    pub central: Option<Vec<Vec<C64>>>,
}

impl AlgebraPresentation {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn element(&self, cat: &CategoryData, coords: &[C64]) -> Morphism {
        let mut acc = Morphism::zero(cat, &self.basis[0].dom, &self.basis[0].cod);
        for (c, b) in coords.iter().zip(&self.basis) {
            acc = acc.add(&b.scale(*c)).expect("same shapes");
        }
        acc
    }

    pub fn represent(&self, coords: &[C64]) -> Mat {
        let n = self.rep[0].nrows();
        let mut acc = Mat::zeros(n, n);
        for (c, r) in coords.iter().zip(&self.rep) {
            acc += r * *c;
        }
        acc
    }

    /// Maximal residual of closure under product and star, checked in the representation.
    pub fn closure_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let p = &self.rep[i] * &self.rep[j];
                worst = worst.max(linalg::max_abs_diff(&p, &self.represent(&self.mult[i][j])));
            }
            worst = worst.max(linalg::max_abs_diff(&self.rep[i].adjoint(), &self.represent(&self.star[i])));
        }
        worst
    }
}

fn coords_in(basis: &[Morphism], v: &Morphism) -> Vec<C64> {
    let vv = v.to_vector();
    basis.iter().map(|b| b.to_vector().iter().zip(&vv).map(|(x, y)| x.conj() * y).sum()).collect()
}

fn flatten_blocks(f: &Morphism) -> Mat {
    let n: usize = f.blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = f.blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in &f.blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Algebra of endomorphisms under composition, with the block-diagonal representation.
pub fn endomorphism_algebra(basis: Vec<Morphism>) -> Result<AlgebraPresentation> {
    if basis.is_empty() {
        return Err(QcatError::Shape("empty algebra".into()));
    }
    let rep: Vec<Mat> = basis.iter().map(flatten_blocks).collect();
    let mut mult = Vec::with_capacity(basis.len());
    for a in &basis {
        let mut row = Vec::with_capacity(basis.len());
        for b in &basis {
            row.push(coords_in(&basis, &a.compose(b)?));
        }
        mult.push(row);
    }
    let star = basis.iter().map(|b| coords_in(&basis, &b.adjoint())).collect();
    let one = Morphism {
        dom: basis[0].dom.clone(),
        cod: basis[0].cod.clone(),
        blocks: basis[0].blocks.iter().map(|b| linalg::identity(b.nrows())).collect(),
    };
    let unit = coords_in(&basis, &one);
    Ok(AlgebraPresentation { basis, mult, star, unit, rep, central: None })
}

/// `Hom₀(θ,θ) = {t : (1×t)x = xt = (t×1)x}`.
pub fn hom0_algebra(cat: &CategoryData, q: &QSystem) -> Result<AlgebraPresentation> {
    let one = id(cat, &q.theta);
    let basis = solve_linear(cat, &q.theta, &q.theta, cat.tol, |t| {
        let xt = q.x.compose(t)?;
        Ok(vec![tensor(cat, &one, t).compose(&q.x)?.sub(&xt)?, xt.sub(&tensor(cat, t, &one).compose(&q.x)?)?])
    })?;
    endomorphism_algebra(basis)
}

/// `Hom(θ,1)` with `q₁∗q₂ = (q₁×q₂)x` and `q* = ((1×q)xw)*`, represented by
/// `q ↦ (1×q)x ∈ End(θ)`. The centre `(q×1)x = (1×q)x` is flagged.
pub fn relative_commutant_algebra(cat: &CategoryData, q: &QSystem) -> Result<AlgebraPresentation> {
    let u = ObjectExpr::unit();
    let basis = hom_basis(cat, &q.theta, &u);
    if basis.is_empty() {
        return Err(QcatError::Shape("Hom(θ,1) is zero".into()));
    }
    let one = id(cat, &q.theta);
    let rep_of = |t: &Morphism| -> Result<Mat> { Ok(flatten_blocks(&tensor(cat, &one, t).compose(&q.x)?)) };
    let rep = basis.iter().map(rep_of).collect::<Result<Vec<_>>>()?;
    let prod = |a: &Morphism, b: &Morphism| -> Result<Morphism> { tensor(cat, a, b).compose(&q.x) };
    let star_of =
        |a: &Morphism| -> Result<Morphism> { Ok(tensor(cat, &one, a).compose(&q.x)?.compose(&q.w)?.adjoint()) };
    let mut mult = Vec::new();
    for a in &basis {
        let mut row = Vec::new();
        for b in &basis {
            row.push(coords_in(&basis, &prod(a, b)?));
        }
        mult.push(row);
    }
    let star = basis.iter().map(|b| star_of(b).map(|s| coords_in(&basis, &s))).collect::<Result<Vec<_>>>()?;
    let unit = coords_in(&basis, &q.w.adjoint());
    let central = solve_linear(cat, &q.theta, &u, cat.tol, |t| {
        Ok(vec![tensor(cat, t, &one).compose(&q.x)?.sub(&tensor(cat, &one, t).compose(&q.x)?)?])
    })?;
    let central = central.iter().map(|c| coords_in(&basis, c)).collect();
    Ok(AlgebraPresentation { basis, mult, star, unit, rep, central: Some(central) })
}

/// Minimal projections grouped by central support.
#[derive(Clone, Debug)]
pub struct MinimalProjections {
    /// Central projections as coordinate vectors.
    pub central: Vec<Vec<C64>>,
    /// `(central block, coordinates)` of minimal projections.
    pub minimal: Vec<(usize, Vec<C64>)>,
}

fn random_hermitian_in(rng: &mut ChaCha8Rng, mats: &[Mat]) -> Mat {
    let n = mats[0].nrows();
    let mut h = Mat::zeros(n, n);
    for m in mats {
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        h += m * z;
    }
    linalg::hermitize(&h)
}

fn solve_coords(rep: &[Mat], target: &Mat, tol: f64) -> Result<Vec<C64>> {
    let n2 = target.len();
    let mut a = Mat::zeros(n2, rep.len());
    for (j, r) in rep.iter().enumerate() {
        for (i, v) in r.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let b = Mat::from_iterator(n2, 1, target.iter().copied());
    let x = linalg::least_squares(&a, &b, 1e-13);
    let res = linalg::max_abs(&(&a * &x - &b));
    if res > tol.sqrt() {
        return Err(QcatError::Consistency(format!("projection not in the algebra (residual {res:.3e})")));
    }
    Ok(x.iter().copied().collect())
}

fn spectral_projections(h: &Mat, range: &Mat, gap: f64) -> Vec<Mat> {
    let hr = range.adjoint() * h * range;
    let (vals, vecs) = herm_eig(&hr);
    let groups = linalg::cluster(&vals, gap);
    groups
        .into_iter()
        .map(|g| {
            let mut v = Mat::zeros(range.nrows(), g.len());
            for (k, &i) in g.iter().enumerate() {
                v.set_column(k, &(range * vecs.column(i)));
            }
            &v * v.adjoint()
        })
        .collect()
}

/// Minimal projections of a finite-dimensional C*-algebra via seeded random
/// self-adjoint elements of the centre and of each central block.
pub fn minimal_projections(alg: &AlgebraPresentation, seed: u64, tol: f64) -> Result<MinimalProjections> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = alg.rep[0].nrows();
    let k = alg.dim();
    // centre: Σ c_i A_i commuting with every A_j
    let mut a = Mat::zeros(k * n * n, k);
    for (i, ai) in alg.rep.iter().enumerate() {
        for (j, aj) in alg.rep.iter().enumerate() {
            let comm = ai * aj - aj * ai;
            for (r, v) in comm.iter().enumerate() {
                a[(j * n * n + r, i)] = *v;
            }
        }
    }
    let cen = linalg::null_space(&a, tol);
    let central_mats: Vec<Mat> = (0..cen.ncols())
        .map(|j| {
            let coords: Vec<C64> = cen.column(j).iter().copied().collect();
            alg.represent(&coords)
        })
        .collect();
    let scale = alg.rep.iter().map(linalg::max_abs).fold(1.0, f64::max);
    let gap = 1e-6 * scale;
    let h = random_hermitian_in(&mut rng, &central_mats);
    let unit_rep = alg.represent(&alg.unit);
    let unit_range = linalg::range_basis(&unit_rep);
    let mut central = Vec::new();
    let mut minimal = Vec::new();
    for e in spectral_projections(&h, &unit_range, gap) {
        let block = central.len();
        central.push(solve_coords(&alg.rep, &e, tol)?);
        let range = linalg::range_basis(&e);
        let ha = random_hermitian_in(&mut rng, &alg.rep);
        let compressed = &e * ha * &e;
        for p in spectral_projections(&compressed, &range, gap) {
            minimal.push((block, solve_coords(&alg.rep, &p, tol)?));
        }
    }
    Ok(MinimalProjections { central, minimal })
}

/// Minimal central projections of `Hom₀` as morphisms.
pub fn central_projections(cat: &CategoryData, q: &QSystem, seed: u64) -> Result<Vec<Morphism>> {
    let alg = hom0_algebra(cat, q)?;
    let mp = minimal_projections(&alg, seed, cat.tol)?;
    Ok(mp.central.iter().map(|c| alg.element(cat, c)).collect())
}

/// The Q-system `(X̄X, r_X, 1×r̄_X×1)` of a conjugate pair.
pub fn from_conjugate_pair(cat: &CategoryData, x: &ObjectExpr) -> Result<QSystem> {
    let p = standard_pair(cat, x)?;
    let xb = x.conj(cat);
    let theta = xb.tensor(x);
    let xm = tensor_all(cat, &[&id(cat, &xb), &p.rbar, &id(cat, x)]);
    Ok(QSystem { d: theta.dim(cat).sqrt(), theta, w: p.r, x: xm })
}

/// Result of a unitary-equivalence search.
#[derive(Clone, Debug)]
pub struct Equivalence {
    pub equivalent: bool,
    pub residual: f64,
    pub unitary: Option<Morphism>,
}

fn equivalence_residual(cat: &CategoryData, a: &QSystem, b: &QSystem, u: &Morphism) -> Result<f64> {
    let r1 = u.compose(&a.w)?.dist(&b.w)?;
    let r2 = tensor(cat, u, u).compose(&a.x)?.dist(&b.x.compose(u)?)?;
    let r3 = u.adjoint().compose(u)?.dist(&id(cat, &a.theta))?;
    Ok(r1.max(r2).max(r3))
}

fn polar(f: &Morphism) -> Morphism {
    let mut out = f.clone();
    for b in out.blocks.iter_mut() {
        *b = linalg::polar_unitary(b);
    }
    out
}

/// Searches for a unitary `u: θ → θ'` with `uw = w'` and `(u×u)x = x'u` by
/// alternating linear least squares followed by a polar projection.
pub fn unitarily_equivalent(cat: &CategoryData, a: &QSystem, b: &QSystem, seed: u64) -> Result<Equivalence> {
    let not = Equivalence { equivalent: false, residual: f64::INFINITY, unitary: None };
    if a.theta.sector_mults(cat) != b.theta.sector_mults(cat) {
        return Ok(not);
    }
    let basis = hom_basis(cat, &a.theta, &b.theta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda: f64 = 1e-2;
    let mut best = not;
    let rows_of = |u: &Morphism, v: &Morphism| -> Result<Vec<C64>> {
        let mut out = tensor(cat, u, v).compose(&a.x)?.sub(&b.x.compose(v)?)?.to_vector();
        out.extend(tensor(cat, v, u).compose(&a.x)?.sub(&b.x.compose(v)?)?.to_vector());
        out.extend(v.compose(&a.w)?.to_vector());
        out.extend(v.scale_re(lambda.sqrt()).to_vector());
        Ok(out)
    };
    for attempt in 0..24 {
        let mut u = Morphism::zero(cat, &a.theta, &b.theta);
        for blk in u.blocks.iter_mut() {
            for z in blk.iter_mut() {
                *z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        if attempt == 0 {
            for blk in u.blocks.iter_mut() {
                let n = blk.nrows();
                *blk = linalg::identity(n);
            }
        }
        u = polar(&u);
        for _ in 0..200 {
            let cols = basis.iter().map(|v| rows_of(&u, v)).collect::<Result<Vec<_>>>()?;
            let m = cols[0].len();
            let mut mat = Mat::zeros(m, basis.len());
            for (j, col) in cols.iter().enumerate() {
                for (i, z) in col.iter().enumerate() {
                    mat[(i, j)] = *z;
                }
            }
            let zero_x = Morphism::zero(cat, &a.theta, &b.theta.tensor(&b.theta));
            let mut rhs = zero_x.to_vector();
            rhs.extend(zero_x.to_vector());
            rhs.extend(b.w.to_vector());
            rhs.extend(u.scale_re(lambda.sqrt()).to_vector());
            let rhs = Mat::from_iterator(rhs.len(), 1, rhs);
            let sol = linalg::least_squares(&mat, &rhs, 1e-14);
            let v = Morphism::from_vector(cat, &a.theta, &b.theta, &sol.iter().copied().collect::<Vec<_>>());
            let next = polar(&v);
            let step = next.dist(&u)?;
            u = next;
            if step < cat.tol * 1e-2 {
                break;
            }
        }
        let res = equivalence_residual(cat, a, b, &u)?;
        if res < best.residual {
            best = Equivalence { equivalent: res < 10.0 * cat.tol, residual: res, unitary: Some(u) };
        }
        if best.equivalent {
            break;
        }
    }
    Ok(best)
}

/// Transports the algebra structure along an invertible `u ∈ End(θ)`:
/// `w ↦ uw` and `x ↦ (v×v)xv⁻¹` with `v = u^{-*}`, so that the product `x*`
/// becomes `u x* (u⁻¹×u⁻¹)`. Unit and associativity are preserved.
pub fn deform(cat: &CategoryData, q: &QSystem, u: &Morphism) -> Result<(Morphism, Morphism)> {
    let mut v = u.clone();
    for b in v.blocks.iter_mut() {
        *b = b.clone().try_inverse().ok_or_else(|| QcatError::Shape("deformation is not invertible".into()))?.adjoint();
    }
    let w = u.compose(&q.w)?;
    let x = compose_all(&[&tensor(cat, &v, &v), &q.x, &u.adjoint()])?;
    Ok((w, x))
}

/// Sector projection of an object onto the simple `c`.
pub fn sector_projection(cat: &CategoryData, x: &ObjectExpr, c: usize) -> Morphism {
    let mut p = Morphism::zero(cat, x, x);
    let n = p.blocks[c].nrows();
    p.blocks[c] = linalg::identity(n);
    p
}
