//! Modules and bimodules of Q-systems, their tensor product, the traced
//! intertwiners `D_m` and the classification of boundary conditions between
//! two full centres.
//!
//! Every module is stored as a bimodule: a left `A`-module is an `A`-`1`
//! bimodule and a right `B`-module a `1`-`B` bimodule, where `1` is the
//! trivial Q-system. Since the unit object is the empty word, `θ^A β 1` and
//! `θ^A β` are the same object.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::braided::{
    braided_product, canonical_qsystem, full_centre_signed, lift_morphism, lift_object, lift_qsystem, Canonical,
};
use crate::category::{modular_data, CategoryData};
use crate::decompose::{range_isometry, ReducedQSystem};
use crate::error::{QcatError, Result};
use crate::frobenius::{endomorphism_algebra, minimal_projections, scalar_defect, QSystem};
use crate::linalg::{self, herm_fn, re, Mat, C64};
use crate::morphism::{
    braiding, compose_all, conj_morphism, hom_basis, id, left_trace, scalar, sector_isometry, solve_linear,
    standard_pair, tensor, tensor_all, trace, Morphism, ObjectExpr, Sign,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleSide {
    Left,
    Right,
    Bi,
}

/// `(β, m)` with `m: β → θ^A β θ^B`.
#[derive(Clone, Debug)]
pub struct Module {
    pub side: ModuleSide,
    pub beta: ObjectExpr,
    pub m: Morphism,
    pub a: QSystem,
    pub b: QSystem,
}

impl Module {
    /// Wraps a one- or two-sided action after checking shapes.
    pub fn new(
        cat: &CategoryData,
        side: ModuleSide,
        q: &QSystem,
        q2: Option<&QSystem>,
        beta: ObjectExpr,
        m: Morphism,
    ) -> Result<Module> {
        let one = QSystem::trivial(cat);
        let (a, b) = match (side, q2) {
            (ModuleSide::Left, None) => (q.clone(), one),
            (ModuleSide::Right, None) => (one, q.clone()),
            (ModuleSide::Bi, Some(q2)) => (q.clone(), q2.clone()),
            _ => return Err(QcatError::Shape("a bimodule needs two Q-systems, a module one".into())),
        };
        let module = Module { side, beta, m, a, b };
        module.check_shape()?;
        Ok(module)
    }

    pub fn action_target(&self) -> ObjectExpr {
        ObjectExpr::tensor_all(&[&self.a.theta, &self.beta, &self.b.theta])
    }

    fn check_shape(&self) -> Result<()> {
        if self.m.dom != self.beta || self.m.cod != self.action_target() {
            return Err(QcatError::Shape("m must be a morphism β → θ^A β θ^B".into()));
        }
        Ok(())
    }

    /// `d_A d_B`, the standard value of `m*m`.
    pub fn d(&self) -> f64 {
        self.a.d * self.b.d
    }

    pub fn dim(&self, cat: &CategoryData) -> f64 {
        self.beta.dim(cat)
    }

    /// Left action `(1×1×w_B*)m`.
    pub fn left_action(&self, cat: &CategoryData) -> Result<Morphism> {
        tensor_all(cat, &[&id(cat, &self.a.theta), &id(cat, &self.beta), &self.b.w.adjoint()]).compose(&self.m)
    }

    /// Right action `(w_A*×1×1)m`.
    pub fn right_action(&self, cat: &CategoryData) -> Result<Morphism> {
        tensor_all(cat, &[&self.a.w.adjoint(), &id(cat, &self.beta), &id(cat, &self.b.theta)]).compose(&self.m)
    }
}

/// Residuals of the module axioms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleReport {
    pub unit: f64,
    pub representation: f64,
    pub standard: f64,
    pub projection: f64,
    pub tol: f64,
    pub pass_unit: bool,
    pub pass_representation: bool,
    pub pass_standard: bool,
    pub pass_projection: bool,
}

impl ModuleReport {
    pub fn pass(&self) -> bool {
        self.pass_unit && self.pass_representation && self.pass_standard && self.pass_projection
    }

    pub fn max_residual(&self) -> f64 {
        self.unit.max(self.representation).max(self.standard).max(self.projection)
    }
}

/// Unit, representation and standardness residuals, and the projection
/// residual of `E = (d_Ad_B)⁻¹ mm*`.
pub fn validate_module(cat: &CategoryData, module: &Module) -> Result<ModuleReport> {
    module.check_shape()?;
    let (a, b, beta) = (&module.a, &module.b, &module.beta);
    let m = &module.m;
    let one_b = id(cat, beta);
    let unit = tensor_all(cat, &[&a.w.adjoint(), &one_b, &b.w.adjoint()]).compose(m)?.dist(&one_b)?;
    let lhs = tensor_all(cat, &[&id(cat, &a.theta), m, &id(cat, &b.theta)]).compose(m)?;
    let rhs = tensor_all(cat, &[&a.x, &one_b, &b.x]).compose(m)?;
    let representation = lhs.dist(&rhs)?;
    let d = module.d();
    let standard = m.adjoint().compose(m)?.dist(&one_b.scale_re(d))?;
    let e = m.compose(&m.adjoint())?.scale_re(1.0 / d);
    let projection = e.compose(&e)?.dist(&e)?;
    let tol = cat.tol;
    Ok(ModuleReport {
        unit,
        representation,
        standard,
        projection,
        tol,
        pass_unit: unit < tol,
        pass_representation: representation < tol,
        pass_standard: standard < tol,
        pass_projection: projection < tol,
    })
}

/// The induced (bi)module `β = θ^A ρ θ^B`, `m = x^A × 1_ρ × x^B`.
pub fn free_module(cat: &CategoryData, a: &QSystem, b: &QSystem, rho: &ObjectExpr, side: ModuleSide) -> Module {
    let beta = ObjectExpr::tensor_all(&[&a.theta, rho, &b.theta]);
    let m = tensor_all(cat, &[&a.x, &id(cat, rho), &b.x]);
    Module { side, beta, m, a: a.clone(), b: b.clone() }
}

/// Free left, right or bimodule over `ρ`; `q2` is the right Q-system of a bimodule.
pub fn free_module_of(
    cat: &CategoryData,
    q: &QSystem,
    q2: Option<&QSystem>,
    rho: &ObjectExpr,
    side: ModuleSide,
) -> Result<Module> {
    let one = QSystem::trivial(cat);
    match (side, q2) {
        (ModuleSide::Left, None) => Ok(free_module(cat, q, &one, rho, side)),
        (ModuleSide::Right, None) => Ok(free_module(cat, &one, q, rho, side)),
        (ModuleSide::Bi, Some(q2)) => Ok(free_module(cat, q, q2, rho, side)),
        _ => Err(QcatError::Shape("a bimodule needs two Q-systems, a module one".into())),
    }
}

/// The Q-system as a bimodule over itself, `(θ, (x×1)x)`.
pub fn trivial_bimodule(cat: &CategoryData, q: &QSystem) -> Result<Module> {
    let m = tensor(cat, &q.x, &id(cat, &q.theta)).compose(&q.x)?;
    Ok(Module { side: ModuleSide::Bi, beta: q.theta.clone(), m, a: q.clone(), b: q.clone() })
}

fn same_qsystem(p: &QSystem, q: &QSystem) -> bool {
    p.theta == q.theta && p.x.dist(&q.x).is_ok_and(|r| r < 1e-12) && p.w.dist(&q.w).is_ok_and(|r| r < 1e-12)
}

fn check_parents(m1: &Module, m2: &Module) -> Result<()> {
    if !same_qsystem(&m1.a, &m2.a) || !same_qsystem(&m1.b, &m2.b) {
        return Err(QcatError::Mismatch("modules over different Q-systems".into()));
    }
    Ok(())
}

/// Orthonormal basis of `{t: β₁ → β₂ : (1×t×1)m₁ = m₂t}`.
pub fn morphism_space(cat: &CategoryData, m1: &Module, m2: &Module) -> Result<Vec<Morphism>> {
    check_parents(m1, m2)?;
    let (ta, tb) = (id(cat, &m1.a.theta), id(cat, &m1.b.theta));
    solve_linear(cat, &m1.beta, &m2.beta, cat.tol, |t| {
        Ok(vec![tensor_all(cat, &[&ta, t, &tb]).compose(&m1.m)?.sub(&m2.m.compose(t)?)?])
    })
}

/// `m₂*(1×t×1)m₁`, a module morphism for every `t ∈ Hom(β₁, β₂)`.
pub fn sandwich(cat: &CategoryData, m1: &Module, m2: &Module, t: &Morphism) -> Result<Morphism> {
    let (ta, tb) = (id(cat, &m1.a.theta), id(cat, &m1.b.theta));
    compose_all(&[&m2.m.adjoint(), &tensor_all(cat, &[&ta, t, &tb]), &m1.m])
}

/// Replaces `m` by the standard action `(1×n×1) m n⁻¹`, `n = (m*m/d)^{1/2}`.
pub fn standardize(cat: &CategoryData, module: &Module) -> Result<Module> {
    let d = module.d();
    let mm = module.m.adjoint().compose(&module.m)?.scale_re(1.0 / d);
    let (_, defect) = scalar_defect(&mm);
    if defect < cat.tol && (scalar(&mm).re - 1.0).abs() < cat.tol {
        return Ok(module.clone());
    }
    let mut n = mm.clone();
    let mut ni = mm.clone();
    for (c, b) in mm.blocks.iter().enumerate() {
        if b.is_empty() {
            continue;
        }
        if linalg::herm_eig(b).0[0] <= cat.tol {
            return Err(QcatError::NonStandardizable("m*m is singular".into()));
        }
        n.blocks[c] = herm_fn(b, f64::sqrt);
        ni.blocks[c] = herm_fn(b, |v| 1.0 / v.sqrt());
    }
    let m =
        compose_all(&[&tensor_all(cat, &[&id(cat, &module.a.theta), &n, &id(cat, &module.b.theta)]), &module.m, &ni])?;
    let out = Module { m, ..module.clone() };
    let rep = validate_module(cat, &out)?;
    if !rep.pass_standard {
        return Err(QcatError::NonStandardizable(format!("residual {:.3e}", rep.standard)));
    }
    Ok(out)
}

/// The submodule cut out by a module projection `p`, on `θ_p = ⊕` simples.
pub fn submodule(cat: &CategoryData, module: &Module, p: &Morphism) -> Result<Module> {
    let s = range_isometry(cat, p);
    let m = compose_all(&[
        &tensor_all(cat, &[&id(cat, &module.a.theta), &s.adjoint(), &id(cat, &module.b.theta)]),
        &module.m,
        &s,
    ])?;
    standardize(cat, &Module { beta: s.dom.clone(), m, ..module.clone() })
}

/// Irreducible summands from the minimal projections of the self-morphism algebra.
pub fn decompose_module(cat: &CategoryData, module: &Module, seed: u64) -> Result<Vec<Module>> {
    let basis = morphism_space(cat, module, module)?;
    if basis.len() == 1 {
        return Ok(vec![standardize(cat, module)?]);
    }
    let alg = endomorphism_algebra(basis)?;
    let mp = minimal_projections(&alg, seed, cat.tol)?;
    mp.minimal.iter().map(|(_, coords)| submodule(cat, module, &alg.element(cat, coords))).collect()
}

/// An irreducible module class with its multiplicities against the free modules.
#[derive(Clone, Debug)]
pub struct ModuleClass {
    pub module: Module,
    /// `dim Hom(m, free(ρ))` for every simple `ρ`.
    pub fingerprint: Vec<usize>,
    pub dim: f64,
}

fn classify(cat: &CategoryData, candidates: Vec<Module>, frees: &[Module]) -> Result<Vec<ModuleClass>> {
    let prints: Vec<Vec<usize>> = candidates
        .par_iter()
        .map(|c| frees.iter().map(|f| morphism_space(cat, c, f).map(|b| b.len())).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut classes: Vec<ModuleClass> = Vec::new();
    for (c, fp) in candidates.into_iter().zip(prints) {
        let mut known = false;
        for k in classes
            .iter()
            .filter(|k| k.fingerprint == fp && k.module.beta.sector_mults(cat) == c.beta.sector_mults(cat))
        {
            if !morphism_space(cat, &k.module, &c)?.is_empty() {
                known = true;
                break;
            }
        }
        if !known {
            let dim = c.dim(cat);
            classes.push(ModuleClass { module: c, fingerprint: fp, dim });
        }
    }
    Ok(classes)
}

fn enumerate(cat: &CategoryData, a: &QSystem, b: &QSystem, side: ModuleSide, seed: u64) -> Result<Vec<ModuleClass>> {
    let frees: Vec<Module> = (0..cat.rank()).map(|r| free_module(cat, a, b, &ObjectExpr::simple(r), side)).collect();
    let parts: Vec<Vec<Module>> = frees.par_iter().map(|f| decompose_module(cat, f, seed)).collect::<Result<_>>()?;
    let mut classes = classify(cat, parts.into_iter().flatten().collect(), &frees)?;
    classes.sort_by(|x, y| y.fingerprint.cmp(&x.fingerprint));
    Ok(classes)
}

/// Irreducible left or right modules up to equivalence.
pub fn enumerate_modules(cat: &CategoryData, q: &QSystem, side: ModuleSide, seed: u64) -> Result<Vec<ModuleClass>> {
    let one = QSystem::trivial(cat);
    match side {
        ModuleSide::Left => enumerate(cat, q, &one, side, seed),
        ModuleSide::Right => enumerate(cat, &one, q, side, seed),
        ModuleSide::Bi => enumerate(cat, q, q, side, seed),
    }
}

/// Irreducible `A`-`B` bimodules up to equivalence.
pub fn enumerate_bimodules(cat: &CategoryData, a: &QSystem, b: &QSystem, seed: u64) -> Result<Vec<ModuleClass>> {
    enumerate(cat, a, b, ModuleSide::Bi, seed)
}

/// Direct sum of two modules over the same Q-systems.
pub fn direct_sum(cat: &CategoryData, m1: &Module, m2: &Module) -> Result<Module> {
    check_parents(m1, m2)?;
    let parts = [m1.beta.clone(), m2.beta.clone()];
    let beta = ObjectExpr::direct_sum(&parts);
    let (ta, tb) = (id(cat, &m1.a.theta), id(cat, &m1.b.theta));
    let mut m = Morphism::zero(cat, &beta, &ObjectExpr::tensor_all(&[&m1.a.theta, &beta, &m1.b.theta]));
    for (j, part) in [m1, m2].iter().enumerate() {
        let s = crate::morphism::part_isometry(cat, &parts, j);
        m = m.add(&compose_all(&[&tensor_all(cat, &[&ta, &s, &tb]), &part.m, &s.adjoint()])?)?;
    }
    Ok(Module { side: m1.side, beta, m, a: m1.a.clone(), b: m1.b.clone() })
}

/// `m₁ ⊗_B m₂` for an `A`-`B` bimodule `m₁` and a `B`-`C` bimodule `m₂`.
pub fn bimodule_tensor(cat: &CategoryData, m1: &Module, m2: &Module) -> Result<Module> {
    if !same_qsystem(&m1.b, &m2.a) {
        return Err(QcatError::Mismatch("middle Q-systems differ".into()));
    }
    let q = &m1.b;
    let rb = q.r();
    let (b1, b2) = (&m1.beta, &m2.beta);
    let m1r = m1.right_action(cat)?;
    let m2l = m2.left_action(cat)?;
    let p = tensor_all(cat, &[&id(cat, b1), &rb.adjoint(), &id(cat, b2)])
        .compose(&tensor(cat, &m1r, &m2l))?
        .scale_re(1.0 / q.d);
    let hat =
        tensor_all(cat, &[&id(cat, &m1.a.theta), &id(cat, b1), &rb.adjoint(), &id(cat, b2), &id(cat, &m2.b.theta)])
            .compose(&tensor(cat, &m1.m, &m2.m))?;
    let s = range_isometry(cat, &p);
    let m = compose_all(&[&tensor_all(cat, &[&id(cat, &m1.a.theta), &s.adjoint(), &id(cat, &m2.b.theta)]), &hat, &s])?
        .scale_re(1.0 / q.d);
    let side = if m1.side == ModuleSide::Bi && m2.side == ModuleSide::Bi {
        ModuleSide::Bi
    } else if m1.side == ModuleSide::Left {
        ModuleSide::Left
    } else {
        m2.side
    };
    Ok(Module { side, beta: s.dom.clone(), m, a: m1.a.clone(), b: m2.b.clone() })
}

/// Projection `p = d_B⁻¹(1×r_B*×1)(m₁^R×m₂^L)` onto the bimodule tensor product.
pub fn tensor_projection(cat: &CategoryData, m1: &Module, m2: &Module) -> Result<Morphism> {
    let q = &m1.b;
    Ok(tensor_all(cat, &[&id(cat, &m1.beta), &q.r().adjoint(), &id(cat, &m2.beta)])
        .compose(&tensor(cat, &m1.right_action(cat)?, &m2.left_action(cat)?))?
        .scale_re(1.0 / q.d))
}

fn self_conjugacy(cat: &CategoryData, q: &QSystem) -> Result<Morphism> {
    let p = standard_pair(cat, &q.theta)?;
    let tb = q.theta.conj(cat);
    tensor(cat, &p.r.adjoint(), &id(cat, &q.theta)).compose(&tensor(cat, &id(cat, &tb), &q.r()))
}

/// The conjugate `B`-`A` bimodule on `β̄`.
pub fn conjugate_module(cat: &CategoryData, module: &Module) -> Result<Module> {
    let cm = conj_morphism(cat, &module.m.adjoint())?.adjoint();
    let ua = self_conjugacy(cat, &module.a)?;
    let ub = self_conjugacy(cat, &module.b)?;
    let beta = module.beta.conj(cat);
    let m = tensor_all(cat, &[&ub, &id(cat, &beta), &ua]).compose(&cm)?;
    let side = match module.side {
        ModuleSide::Left => ModuleSide::Right,
        ModuleSide::Right => ModuleSide::Left,
        ModuleSide::Bi => ModuleSide::Bi,
    };
    Ok(Module { side, beta, m, a: module.b.clone(), b: module.a.clone() })
}

/// `D_m(ρ) = LTr_β((ε_{θA,β}×1)(1×ε_{ρ,β}ε_{β,ρ})((1×r_B*)(m×1)×1)) ∈ Hom(θ^Bρ, θ^Aρ)`.
/// With `ρ` absent the monodromy factor is dropped.
pub fn d_intertwiner(cat: &CategoryData, module: &Module, rho: Option<&ObjectExpr>, sign: Sign) -> Result<Morphism> {
    let (ta, tb, beta) = (&module.a.theta, &module.b.theta, &module.beta);
    let act = tensor_all(cat, &[&id(cat, ta), &id(cat, beta), &module.b.r().adjoint()]).compose(&tensor(
        cat,
        &module.m,
        &id(cat, tb),
    ))?;
    let braid = braiding(cat, ta, beta, sign)?;
    match rho {
        None => left_trace(cat, &braid.compose(&act)?, beta, tb, ta),
        Some(rho) => {
            let mono = braiding(cat, rho, beta, sign.flip())?.compose(&braiding(cat, beta, rho, sign.flip())?)?;
            let f = compose_all(&[
                &tensor(cat, &braid, &id(cat, rho)),
                &tensor(cat, &id(cat, ta), &mono),
                &tensor(cat, &act, &id(cat, rho)),
            ])?;
            left_trace(cat, &f, beta, &tb.tensor(rho), &ta.tensor(rho))
        }
    }
}

/// Restriction to intermediate Q-systems: `m_P = c (n_A^{-1/2}S_A* × 1 × n_B^{-1/2}S_B*) m`
/// with `c = dim(θ_{A_P})^{1/4} dim(θ_{B_P})^{1/4}`.
pub fn restrict_module(
    cat: &CategoryData,
    module: &Module,
    left: Option<&ReducedQSystem>,
    right: Option<&ReducedQSystem>,
) -> Result<Module> {
    let cut = |r: Option<&ReducedQSystem>, q: &QSystem| -> Result<(Morphism, f64, QSystem)> {
        match r {
            None => Ok((id(cat, &q.theta), 1.0, q.clone())),
            Some(r) => {
                if r.isometry.cod != q.theta {
                    return Err(QcatError::Mismatch("projection does not belong to the parent Q-system".into()));
                }
                let mut nih = r.n_p.clone();
                for (c, b) in r.n_p.blocks.iter().enumerate() {
                    if !b.is_empty() {
                        nih.blocks[c] = herm_fn(b, |v| 1.0 / v.sqrt());
                    }
                }
                let f = r.child.theta.dim(cat).powf(0.25);
                Ok((nih.compose(&r.isometry.adjoint())?, f, r.child.clone()))
            }
        }
    };
    let (sa, fa, a) = cut(left, &module.a)?;
    let (sb, fb, b) = cut(right, &module.b)?;
    let m = tensor_all(cat, &[&sa, &id(cat, &module.beta), &sb]).compose(&module.m)?.scale_re(fa * fb);
    Ok(Module { side: module.side, beta: module.beta.clone(), m, a, b })
}

/// `R[A] = (A⊗1) ×^± R` in the double.
pub fn r_extension(can: &Canonical, a: &QSystem, sign: Sign) -> Result<QSystem> {
    let d = &can.double;
    braided_product(d, &lift_qsystem(d, a)?, &can.q, sign)
}

/// `R[m]` on `(β⊗1)Θ`: the `R`-leg splits through `(X×1)X`, its outer copies are
/// braided past `β` and `θ^B`, and `m⊗1` supplies the `A` and `B` actions.
pub fn r_bimodule(can: &Canonical, module: &Module, sign: Sign) -> Result<Module> {
    let d = &can.double;
    let th = &can.q.theta;
    let a1 = lift_qsystem(d, &module.a)?;
    let b1 = lift_qsystem(d, &module.b)?;
    let beta1 = lift_object(d, &module.beta)?;
    let m1 = lift_morphism(d, &module.m)?;
    let (ta, tb) = (id(d, &a1.theta), id(d, &b1.theta));
    let one_beta = id(d, &beta1);
    let one_th = id(d, th);
    let x2 = tensor(d, &can.q.x, &one_th).compose(&can.q.x)?;
    let m = compose_all(&[
        &tensor_all(d, &[&ta, &braiding(d, &beta1, th, sign)?, &one_th, &braiding(d, th, &b1.theta, sign.flip())?]),
        &tensor_all(d, &[&ta, &one_beta, &x2, &tb]),
        &tensor_all(d, &[&ta, &one_beta, &braiding(d, &b1.theta, th, sign)?]),
        &tensor(d, &m1, &one_th),
    ])?;
    let ra = braided_product(d, &a1, &can.q, sign)?;
    let rb = braided_product(d, &b1, &can.q, sign)?;
    Ok(Module { side: ModuleSide::Bi, beta: beta1.tensor(th), m, a: ra, b: rb })
}

/// `T₁∗T₂ = X^{A*}(T₁×T₂)X^B` on `Hom(Θ^B, Θ^A)`.
pub fn convolution(cat: &CategoryData, qa: &QSystem, qb: &QSystem, t1: &Morphism, t2: &Morphism) -> Result<Morphism> {
    check_hom(qa, qb, t1)?;
    check_hom(qa, qb, t2)?;
    compose_all(&[&qa.x.adjoint(), &tensor(cat, t1, t2), &qb.x])
}

/// `F(T) = (R_B*×1)(1×T*×1)(1×R_A)`, antilinear and involutive.
pub fn frobenius_conj(cat: &CategoryData, qa: &QSystem, qb: &QSystem, t: &Morphism) -> Result<Morphism> {
    check_hom(qa, qb, t)?;
    compose_all(&[
        &tensor(cat, &qb.r().adjoint(), &id(cat, &qa.theta)),
        &tensor_all(cat, &[&id(cat, &qb.theta), &t.adjoint(), &id(cat, &qa.theta)]),
        &tensor(cat, &id(cat, &qb.theta), &qa.r()),
    ])
}

/// `(T₂, T₁) = Tr_{Θ^B}(T₁*T₂)`.
pub fn trace_pairing(cat: &CategoryData, t1: &Morphism, t2: &Morphism) -> Result<C64> {
    trace(cat, &t1.adjoint().compose(t2)?)
}

/// The convolution unit `W^A W^{B*}`.
pub fn convolution_unit(qa: &QSystem, qb: &QSystem) -> Result<Morphism> {
    qa.w.compose(&qb.w.adjoint())
}

fn check_hom(qa: &QSystem, qb: &QSystem, t: &Morphism) -> Result<()> {
    if t.dom != qb.theta || t.cod != qa.theta {
        return Err(QcatError::Shape("operator is not in Hom(Θ^B, Θ^A)".into()));
    }
    Ok(())
}

/// Minimal idempotents of the commutative convolution algebra, computed from the
/// spectrum of a seeded random element by Lagrange interpolation.
pub fn convolution_idempotents(cat: &CategoryData, qa: &QSystem, qb: &QSystem, seed: u64) -> Result<Vec<Morphism>> {
    let basis = hom_basis(cat, &qb.theta, &qa.theta);
    let n = basis.len();
    let unit = convolution_unit(qa, qb)?;
    if n == 0 {
        return Ok(vec![]);
    }
    let coords = |t: &Morphism| -> Vec<C64> { t.to_vector() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let mut t = Morphism::zero(cat, &qb.theta, &qa.theta);
        for b in &basis {
            t = t.add(&b.scale(C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))?;
        }
        let mut l = Mat::zeros(n, n);
        for (j, b) in basis.iter().enumerate() {
            let v = coords(&convolution(cat, qa, qb, &t, b)?);
            for (i, x) in v.iter().enumerate() {
                l[(i, j)] = *x;
            }
        }
        let vals = match l.clone().schur().eigenvalues() {
            Some(v) => v,
            None => continue,
        };
        let vals: Vec<C64> = vals.iter().copied().collect();
        let gap = vals
            .iter()
            .enumerate()
            .flat_map(|(i, a)| vals[i + 1..].iter().map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
        if gap < 1e-4 {
            continue;
        }
        let mut out = Vec::with_capacity(n);
        for (k, lk) in vals.iter().enumerate() {
            let mut e = unit.clone();
            for (j, lj) in vals.iter().enumerate() {
                if j == k {
                    continue;
                }
                let factor = t.sub(&unit.scale(*lj))?.scale((lk - lj).inv());
                e = convolution(cat, qa, qb, &e, &factor)?;
            }
            out.push(e);
        }
        return Ok(out);
    }
    Err(QcatError::Consistency("no random element with a simple spectrum".into()))
}

/// One irreducible bimodule in a boundary report.
#[derive(Clone, Debug)]
pub struct BoundaryCondition {
    pub label: String,
    pub module: Module,
    pub dim: f64,
    pub idempotent: Morphism,
}

/// A column of `S_{mT}`: the sector `(σ,τ)` of the double and multiplicity slots in `Θ^A`, `Θ^B`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Channel {
    pub sector: usize,
    pub left: usize,
    pub right: usize,
    pub slot_a: usize,
    pub slot_b: usize,
    pub dim: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryResiduals {
    pub self_adjoint: f64,
    pub idempotency: f64,
    pub completeness: f64,
    pub pairing: f64,
    pub smt_unitarity: f64,
    pub oracle: f64,
    pub bimodules: f64,
}

impl BoundaryResiduals {
    pub fn max(&self) -> f64 {
        [
            self.self_adjoint,
            self.idempotency,
            self.completeness,
            self.pairing,
            self.smt_unitarity,
            self.oracle,
            self.bimodules,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct BoundaryReport {
    pub sign: Sign,
    pub d_a: f64,
    pub d_b: f64,
    pub d_r: f64,
    pub d_za: f64,
    pub d_zb: f64,
    pub conditions: Vec<BoundaryCondition>,
    pub channels: Vec<Channel>,
    pub pairing: Mat,
    pub pairing_constant: f64,
    /// `S_{mT}`, rows indexed by bimodules and columns by channels.
    pub smt: Mat,
    /// `c_m(T) = (d_Ad_B/dim β) conj(S_{mT})`.
    pub coefficients: Mat,
    /// `ω_m(T) = d_R conj(c_m(T)) / dim(σ⊗τ)^{1/2}`; `Ψ^A_T = ω Ψ^B_T` in the representation `m` when `|ω| = 1`.
    pub phases: Mat,
    pub oracle: Vec<Morphism>,
    pub residuals: BoundaryResiduals,
    pub cross_check: bool,
}

impl BoundaryReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.cross_check && self.residuals.max() < tol
    }
}

fn sector_channels(d: &CategoryData, ta: &ObjectExpr, tb: &ObjectExpr) -> Result<Vec<Channel>> {
    let kr = d.factors.map(|f| f.1).unwrap_or(1);
    let mut out = Vec::new();
    for z in 0..d.rank() {
        for slot_a in 0..ta.sector_mult(d, z) {
            for slot_b in 0..tb.sector_mult(d, z) {
                out.push(Channel { sector: z, left: z / kr, right: z % kr, slot_a, slot_b, dim: d.dims[z] });
            }
        }
    }
    Ok(out)
}

/// Boundary conditions between the full centres of `A` and `B`: the idempotents
/// `I_m = dim(β)/(d_A²d_B²d_R²) D_{R[m]|Z}` for every irreducible `A`-`B` bimodule,
/// checked against the minimal convolution idempotents.
pub fn boundary_conditions(
    cat: &CategoryData,
    a: &QSystem,
    b: &QSystem,
    sign: Sign,
    seed: u64,
) -> Result<BoundaryReport> {
    if !modular_data(cat).is_modular {
        return Err(QcatError::NotModular);
    }
    let can = canonical_qsystem(cat)?;
    boundary_conditions_with(cat, &can, a, b, sign, seed)
}

pub fn boundary_conditions_with(
    cat: &CategoryData,
    can: &Canonical,
    a: &QSystem,
    b: &QSystem,
    sign: Sign,
    seed: u64,
) -> Result<BoundaryReport> {
    let d = &can.double;
    let tol = cat.tol;
    let (za, zb) = rayon::join(|| full_centre_signed(can, a, sign), || full_centre_signed(can, b, sign));
    let (za, zb) = (za?, zb?);
    let (qa, qb) = (&za.child, &zb.child);
    let classes = enumerate_bimodules(cat, a, b, seed)?;
    let d_r = can.d_r;
    let norm = (a.d * b.d * d_r).powi(2);
    let conditions: Vec<BoundaryCondition> = classes
        .par_iter()
        .enumerate()
        .map(|(i, class)| -> Result<BoundaryCondition> {
            let rm = r_bimodule(can, &class.module, sign)?;
            let restricted = restrict_module(d, &rm, Some(&za), Some(&zb))?;
            let dm = d_intertwiner(d, &restricted, None, sign)?;
            Ok(BoundaryCondition {
                label: format!("m{i}"),
                module: class.module.clone(),
                dim: class.dim,
                idempotent: dm.scale_re(class.dim / norm),
            })
        })
        .collect::<Result<_>>()?;
    let channels = sector_channels(d, &qa.theta, &qb.theta)?;
    let smt_row = |c: &BoundaryCondition| -> Result<Vec<C64>> {
        let dm = c.idempotent.scale_re(norm / c.dim);
        channels
            .iter()
            .map(|ch| {
                let ta = sector_isometry(d, &qa.theta, ch.sector, ch.slot_a)?;
                let tb = sector_isometry(d, &qb.theta, ch.sector, ch.slot_b)?;
                Ok(trace(d, &compose_all(&[&ta.adjoint(), &dm, &tb])?)? / (a.d * b.d * d_r * d_r * ch.dim.sqrt()))
            })
            .collect()
    };
    let rows: Vec<Vec<C64>> = conditions.iter().map(smt_row).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..conditions.len()).collect();
    let key = |i: usize| -> Vec<i64> {
        let mut out: Vec<i64> = classes[i].fingerprint.iter().map(|&f| -(f as i64)).collect();
        out.extend(rows[i].iter().flat_map(|z| [(-z.re * 1e6).round() as i64, (-z.im * 1e6).round() as i64]));
        out
    };
    order.sort_by_key(|&i| key(i));
    let mut conditions: Vec<BoundaryCondition> = order.iter().map(|&i| conditions[i].clone()).collect();
    for (i, c) in conditions.iter_mut().enumerate() {
        c.label = format!("m{i}");
    }
    let k = conditions.len();
    let hom = hom_basis(d, &qb.theta, &qa.theta).len();
    let bimodules = (k as f64 - hom as f64).abs();

    let unit = convolution_unit(qa, qb)?;
    let mut sum = Morphism::zero(d, &qb.theta, &qa.theta);
    let mut self_adjoint = 0f64;
    let mut idempotency = 0f64;
    for (i, ci) in conditions.iter().enumerate() {
        sum = sum.add(&ci.idempotent)?;
        self_adjoint = self_adjoint.max(frobenius_conj(d, qa, qb, &ci.idempotent)?.dist(&ci.idempotent)?);
        for (j, cj) in conditions.iter().enumerate() {
            let p = convolution(d, qa, qb, &ci.idempotent, &cj.idempotent)?;
            let target = if i == j { ci.idempotent.clone() } else { Morphism::zero(d, &qb.theta, &qa.theta) };
            idempotency = idempotency.max(p.dist(&target)?);
        }
    }
    let completeness = sum.dist(&unit)?;

    let pairing_constant = (a.d * b.d).powi(2) * d_r.powi(4);
    let dms: Vec<Morphism> = conditions.iter().map(|c| c.idempotent.scale_re(norm / c.dim)).collect();
    let pairing = Mat::from_fn(k, k, |i, j| trace_pairing(d, &dms[i], &dms[j]).unwrap_or(C64::new(f64::NAN, 0.0)));
    let pairing_res = linalg::max_abs_diff(&pairing, &(linalg::identity(k) * re(pairing_constant)));

    let smt = Mat::from_fn(k, channels.len(), |i, j| rows[order[i]][j]);
    let smt_unitarity = if smt.is_square() {
        linalg::max_abs_diff(&(smt.adjoint() * &smt), &linalg::identity(k))
    } else {
        f64::INFINITY
    };
    let coefficients = Mat::from_fn(k, channels.len(), |i, j| smt[(i, j)].conj() * (a.d * b.d / conditions[i].dim));
    let phases = Mat::from_fn(k, channels.len(), |i, j| coefficients[(i, j)].conj() * (d_r / channels[j].dim.sqrt()));

    let oracle = convolution_idempotents(d, qa, qb, seed)?;
    let mut oracle_res = if oracle.len() == k { 0f64 } else { f64::INFINITY };
    for c in &conditions {
        let best = oracle.iter().map(|o| o.dist(&c.idempotent).unwrap_or(f64::INFINITY)).fold(f64::INFINITY, f64::min);
        oracle_res = oracle_res.max(best);
    }
    let cross_check = oracle_res <= 10.0 * tol;
    let residuals = BoundaryResiduals {
        self_adjoint,
        idempotency,
        completeness,
        pairing: pairing_res,
        smt_unitarity,
        oracle: oracle_res,
        bimodules,
    };
    Ok(BoundaryReport {
        sign,
        d_a: a.d,
        d_b: b.d,
        d_r,
        d_za: qa.d,
        d_zb: qb.d,
        conditions,
        channels,
        pairing,
        pairing_constant,
        smt,
        coefficients,
        phases,
        oracle,
        residuals,
        cross_check,
    })
}

/// Whether `a` equals `b` after permuting rows and columns.
pub fn equal_up_to_ordering(a: &Mat, b: &Mat, tol: f64) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let rows = permutations(a.nrows());
    let cols = permutations(a.ncols());
    rows.iter().any(|r| {
        cols.iter().any(|c| (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| (a[(r[i], c[j])] - b[(i, j)]).norm() < tol)))
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Like [`boundary_conditions`] but failing with a consistency error when the
/// formula and the oracle disagree.
pub fn checked_boundary_conditions(
    cat: &CategoryData,
    a: &QSystem,
    b: &QSystem,
    sign: Sign,
    seed: u64,
) -> Result<BoundaryReport> {
    let rep = boundary_conditions(cat, a, b, sign, seed)?;
    if !rep.cross_check {
        return Err(QcatError::Consistency(format!(
            "idempotents differ from the convolution oracle by {:.3e}",
            rep.residuals.oracle
        )));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braided::{centre_projection, full_centre};
    use crate::category::s_matrix;
    use crate::fixtures;
    use crate::frobenius::{from_conjugate_pair, DEFAULT_SEED};

    fn ising_q(cat: &CategoryData) -> QSystem {
        from_conjugate_pair(cat, &ObjectExpr::simple(2)).unwrap()
    }

    fn sigma() -> ObjectExpr {
        ObjectExpr::simple(2)
    }

    #[test]
    fn qsystem_is_a_module_over_itself() {
        let cat = fixtures::ising();
        let q = ising_q(&cat);
        let free = free_module_of(&cat, &q, None, &ObjectExpr::unit(), ModuleSide::Left).unwrap();
        assert_eq!(free.beta, q.theta);
        assert!(validate_module(&cat, &free).unwrap().pass());
        assert_eq!(morphism_space(&cat, &free, &free).unwrap().len(), 1);
        assert!(validate_module(&cat, &trivial_bimodule(&cat, &q).unwrap()).unwrap().pass());
        let right = free_module_of(&cat, &q, None, &sigma(), ModuleSide::Right).unwrap();
        assert!(validate_module(&cat, &right).unwrap().pass());
    }

    #[test]
    fn wrong_normalization_is_reported() {
        let cat = fixtures::ising();
        let q = ising_q(&cat);
        let mut m = free_module_of(&cat, &q, None, &sigma(), ModuleSide::Left).unwrap();
        m.m = m.m.scale_re(2.0);
        let rep = validate_module(&cat, &m).unwrap();
        assert!(!rep.pass_unit && !rep.pass_standard);
    }

    #[test]
    fn modules_of_the_ising_qsystem() {
        let cat = fixtures::ising();
        let q = ising_q(&cat);
        let free = free_module_of(&cat, &q, None, &sigma(), ModuleSide::Left).unwrap();
        assert_eq!(morphism_space(&cat, &free, &free).unwrap().len(), 2);
        let parts = decompose_module(&cat, &free, DEFAULT_SEED).unwrap();
        assert_eq!(parts.len(), 2);
        for p in &parts {
            assert_eq!(p.beta, sigma());
            assert!(validate_module(&cat, p).unwrap().pass());
        }
        assert!(morphism_space(&cat, &parts[0], &parts[1]).unwrap().is_empty());
        let classes = enumerate_modules(&cat, &q, ModuleSide::Left, DEFAULT_SEED).unwrap();
        assert_eq!(classes.len(), 3);
        for c in &classes {
            assert!(c.fingerprint.iter().any(|&n| n > 0));
        }
    }

    #[test]
    fn modules_of_the_trivial_qsystem_are_objects() {
        let cat = fixtures::ising();
        let one = QSystem::trivial(&cat);
        let free = free_module_of(&cat, &one, None, &sigma(), ModuleSide::Left).unwrap();
        assert_eq!(free.beta, sigma());
        assert!(free.m.dist(&id(&cat, &sigma())).unwrap() < 1e-12);
        assert_eq!(enumerate_modules(&cat, &one, ModuleSide::Right, DEFAULT_SEED).unwrap().len(), 3);
    }

    #[test]
    fn bimodule_counts() {
        let cat = fixtures::ising();
        let q = ising_q(&cat);
        let one = QSystem::trivial(&cat);
        let bm = enumerate_bimodules(&cat, &one, &one, DEFAULT_SEED).unwrap();
        let betas: Vec<ObjectExpr> = bm.iter().map(|c| c.module.beta.clone()).collect();
        assert_eq!(betas, vec![ObjectExpr::unit(), ObjectExpr::simple(1), sigma()]);
        let free = free_module_of(&cat, &q, Some(&q), &ObjectExpr::unit(), ModuleSide::Bi).unwrap();
        assert_eq!(decompose_module(&cat, &free, DEFAULT_SEED).unwrap().len(), 2);
        let aa = enumerate_bimodules(&cat, &q, &q, DEFAULT_SEED).unwrap();
        assert_eq!(aa.len(), 3);
        let dims: Vec<f64> = aa.iter().map(|c| c.dim).collect();
        assert!((dims[0] - 2.0).abs() < 1e-12 && (dims[2] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sandwich_is_a_bimodule_morphism() {
        let cat = fixtures::ising();
        let q = ising_q(&cat);
        let m1 = free_module_of(&cat, &q, Some(&q), &ObjectExpr::unit(), ModuleSide::Bi).unwrap();
        let m2 = free_module_of(&cat, &q, Some(&q), &ObjectExpr::simple(1), ModuleSide::Bi).unwrap();
        let space = morphism_space(&cat, &m1, &m2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        let mut t = Morphism::zero(&cat, &m1.beta, &m2.beta);
        for b in hom_basis(&cat, &m1.beta, &m2.beta) {
            t = t.add(&b.scale(C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))).unwrap();
        }
        let s = sandwich(&cat, &m1, &m2, &t).unwrap();
        let v: Vec<C64> = s.to_vector();
        let coords: Vec<C64> =
            space.iter().map(|b| b.to_vector().iter().zip(&v).map(|(x, y)| x.conj() * y).sum()).collect();
        let mut back = Morphism::zero(&cat, &m1.beta, &m2.beta);
        for (c, b) in coords.iter().zip(&space) {
            back = back.add(&b.scale(*c)).unwrap();
        }
        assert!(s.norm() > 1e-6);
        assert!(back.dist(&s).unwrap() < 1e-9);
    }

    #[test]
    fn tensor_product_of_sigma_with_itself() {
        let cat = fixtures::ising();
        let one = QSystem::trivial(&cat);
        let bm = enumerate_bimodules(&cat, &one, &one, DEFAULT_SEED).unwrap();
        let s = &bm[2].module;
        let p = tensor_projection(&cat, s, s).unwrap();
        assert!(p.compose(&p).unwrap().dist(&p).unwrap() < 1e-12);
        let ss = bimodule_tensor(&cat, s, s).unwrap();
        assert!(validate_module(&cat, &ss).unwrap().pass());
        let parts = decompose_module(&cat, &ss, DEFAULT_SEED).unwrap();
        let mut betas: Vec<ObjectExpr> = parts.iter().map(|m| m.beta.clone()).collect();
        betas.sort_by_key(|b| b.summands[0].word.clone());
        assert_eq!(betas, vec![ObjectExpr::simple(0), ObjectExpr::simple(1)]);
        let d_ss = d_intertwiner(&cat, &ss, None, Sign::Plus).unwrap();
        let d_s = d_intertwiner(&cat, s, None, Sign::Plus).unwrap();
        assert!(d_s.compose(&d_s).unwrap().dist(&d_ss.scale_re(one.d)).unwrap() < 1e-9);
    }

    #[test]
    fn tensoring_with_the_trivial_bimodule() {
        let cat = fixtures::ising();
        let q = ising_q(&cat);
        let aa = enumerate_bimodules(&cat, &q, &q, DEFAULT_SEED).unwrap();
        let unit = trivial_bimodule(&cat, &q).unwrap();
        for c in &aa {
            let t = bimodule_tensor(&cat, &c.module, &unit).unwrap();
            assert!(validate_module(&cat, &t).unwrap().pass());
            assert!((t.dim(&cat) - c.dim).abs() < 1e-9);
            assert_eq!(morphism_space(&cat, &t, &c.module).unwrap().len(), 1);
            let lhs = d_intertwiner(&cat, &c.module, None, Sign::Plus)
                .unwrap()
                .compose(&d_intertwiner(&cat, &unit, None, Sign::Plus).unwrap())
                .unwrap();
            let rhs = d_intertwiner(&cat, &t, None, Sign::Plus).unwrap().scale_re(q.d);
            assert!(lhs.dist(&rhs).unwrap() < 1e-9);
        }
    }

    #[test]
    fn d_intertwiner_properties() {
        let cat = fixtures::ising();
        let q = ising_q(&cat);
        let aa = enumerate_bimodules(&cat, &q, &q, DEFAULT_SEED).unwrap();
        let mut sum_d = Morphism::zero(&cat, &q.theta, &q.theta);
        for c in &aa {
            let dm = d_intertwiner(&cat, &c.module, None, Sign::Plus).unwrap();
            let v = scalar(&compose_all(&[&q.w.adjoint(), &dm, &q.w]).unwrap());
            assert!((v.re - c.dim).abs() < 1e-9 && v.im.abs() < 1e-9);
            let bar = conjugate_module(&cat, &c.module).unwrap();
            assert!(validate_module(&cat, &bar).unwrap().pass());
            let dbar = d_intertwiner(&cat, &bar, None, Sign::Plus).unwrap();
            assert!(dbar.dist(&dm.adjoint()).unwrap() < 1e-9);
            sum_d = sum_d.add(&dm).unwrap();
        }
        let sum = direct_sum(&cat, &aa[0].module, &aa[1].module).unwrap();
        assert!(validate_module(&cat, &sum).unwrap().pass());
        let lhs = d_intertwiner(&cat, &sum, None, Sign::Plus).unwrap();
        let rhs = d_intertwiner(&cat, &aa[0].module, None, Sign::Plus)
            .unwrap()
            .add(&d_intertwiner(&cat, &aa[1].module, None, Sign::Plus).unwrap())
            .unwrap();
        assert!(lhs.dist(&rhs).unwrap() < 1e-9);
    }

    #[test]
    fn trivial_bimodule_gives_the_centre_projection() {
        let cat = fixtures::ising();
        let can = canonical_qsystem(&cat).unwrap();
        let d = &can.double;
        let ra = r_extension(&can, &ising_q(&cat), Sign::Plus).unwrap();
        let t = trivial_bimodule(d, &ra).unwrap();
        for s in [Sign::Plus, Sign::Minus] {
            let dm = d_intertwiner(d, &t, None, s).unwrap();
            let p = centre_projection(d, &ra, s).unwrap();
            assert!(dm.dist(&p.scale_re(ra.d)).unwrap() < 1e-9);
            assert!(dm.dist(&centre_projection(d, &ra, s.flip()).unwrap().scale_re(ra.d)).unwrap() > 1.0);
        }
    }

    #[test]
    fn r_bimodule_and_twisted_intertwiner() {
        let cat = fixtures::ising();
        let can = canonical_qsystem(&cat).unwrap();
        let d = &can.double;
        let one = QSystem::trivial(&cat);
        let one_d = lift_qsystem(d, &one).unwrap();
        for c in enumerate_bimodules(&cat, &one, &one, DEFAULT_SEED).unwrap() {
            let rm = r_bimodule(&can, &c.module, Sign::Plus).unwrap();
            assert!(validate_module(d, &rm).unwrap().pass());
            let lifted = Module {
                side: ModuleSide::Bi,
                beta: lift_object(d, &c.module.beta).unwrap(),
                m: lift_morphism(d, &c.module.m).unwrap(),
                a: one_d.clone(),
                b: one_d.clone(),
            };
            let lhs = d_intertwiner(d, &rm, None, Sign::Plus).unwrap();
            let rhs = d_intertwiner(d, &lifted, Some(&can.q.theta), Sign::Plus).unwrap().scale_re(can.d_r);
            assert!(lhs.dist(&rhs).unwrap() < 1e-9);
        }
    }

    #[test]
    fn restriction_to_the_full_centre() {
        let cat = fixtures::ising();
        let can = canonical_qsystem(&cat).unwrap();
        let d = &can.double;
        let q = ising_q(&cat);
        let ra = r_extension(&can, &q, Sign::Plus).unwrap();
        let z = full_centre(&can, &q).unwrap();
        let free = free_module_of(d, &ra, None, &ObjectExpr::unit(), ModuleSide::Left).unwrap();
        let same = restrict_module(d, &free, None, None).unwrap();
        assert!(same.m.dist(&free.m).unwrap() < 1e-15);
        let rz = restrict_module(d, &free, Some(&z), None).unwrap();
        let rep = validate_module(d, &rz).unwrap();
        assert!(rep.pass(), "{rep:?}");
        let norm = rz.m.adjoint().compose(&rz.m).unwrap();
        assert!(norm.dist(&id(d, &rz.beta).scale_re(z.child.d)).unwrap() < 1e-9);
    }

    #[test]
    fn convolution_algebra() {
        let cat = fixtures::ising();
        let can = canonical_qsystem(&cat).unwrap();
        let d = &can.double;
        let z = full_centre(&can, &QSystem::trivial(&cat)).unwrap();
        let qz = &z.child;
        let basis = hom_basis(d, &qz.theta, &qz.theta);
        let unit = convolution_unit(qz, qz).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        let mut random = || {
            let mut t = Morphism::zero(d, &qz.theta, &qz.theta);
            for b in &basis {
                t = t.add(&b.scale(C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))).unwrap();
            }
            t
        };
        let (t1, t2) = (random(), random());
        assert!(convolution(d, qz, qz, &t1, &unit).unwrap().dist(&t1).unwrap() < 1e-9);
        let a = convolution(d, qz, qz, &t1, &t2).unwrap();
        let b = convolution(d, qz, qz, &t2, &t1).unwrap();
        assert!(a.dist(&b).unwrap() < 1e-9);
        let ff = frobenius_conj(d, qz, qz, &frobenius_conj(d, qz, qz, &t1).unwrap()).unwrap();
        assert!(ff.dist(&t1).unwrap() < 1e-9);
        let p = trace_pairing(d, &t1, &t1).unwrap();
        assert!(p.re > 0.0 && p.im.abs() < 1e-9);
        let e = convolution_idempotents(d, qz, qz, DEFAULT_SEED).unwrap();
        assert_eq!(e.len(), basis.len());
    }

    #[test]
    fn cardy_boundary_conditions() {
        let cat = fixtures::ising();
        let one = QSystem::trivial(&cat);
        let rep = checked_boundary_conditions(&cat, &one, &one, Sign::Plus, DEFAULT_SEED).unwrap();
        assert_eq!(rep.conditions.len(), 3);
        assert!(rep.residuals.max() < 1e-8, "{:?}", rep.residuals);
        assert!((rep.pairing_constant - 16.0).abs() < 1e-12);
        assert!(equal_up_to_ordering(&rep.smt, &s_matrix(&cat), 1e-9));
        let cols: Vec<usize> = rep.channels.iter().map(|c| c.left).collect();
        assert_eq!(cols, vec![0, 1, 2]);
        let mut patterns: Vec<(i64, i64)> =
            (0..3).map(|i| (rep.phases[(i, 1)].re.round() as i64, rep.phases[(i, 2)].re.round() as i64)).collect();
        patterns.sort();
        assert_eq!(patterns, vec![(-1, 0), (1, -1), (1, 1)]);
    }

    #[test]
    fn mirrored_boundary_conditions() {
        let cat = fixtures::ising();
        let one = QSystem::trivial(&cat);
        let rep = boundary_conditions(&cat, &one, &one, Sign::Minus, DEFAULT_SEED).unwrap();
        assert!(rep.pass(1e-8));
        assert!(equal_up_to_ordering(&rep.smt, &s_matrix(&cat).map(|z| z.conj()), 1e-9));
    }

    #[test]
    fn permutation_matching() {
        let a = Mat::from_fn(2, 2, |i, j| re((2 * i + j) as f64));
        let b = Mat::from_fn(2, 2, |i, j| a[(1 - i, 1 - j)]);
        assert!(equal_up_to_ordering(&a, &b, 1e-12));
        assert!(!equal_up_to_ordering(&a, &a.transpose(), 1e-12));
    }
}
