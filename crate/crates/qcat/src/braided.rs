//! Braided products, centres, the canonical Q-system of the double and the full centre.
//!
//! The double of `C` is realized as `C ⊠ C̄`, where `C̄` carries the complex
//! conjugate F and R data. The label `(ρ, σ)` of the double stands for `ρ ⊠ σ̄`
//! in `C ⊠ C^opp`, so the canonical object is `⊕ (ρ, ρ)`.

use serde::{Deserialize, Serialize};

use crate::category::{deligne_product, modular_data, pair_index, CategoryData};
use crate::decompose::{check_intermediate, intermediate_checks, IntermediateChecks, ReducedQSystem};
use crate::error::{QcatError, Result};
use crate::frobenius::{check, check_commutative, QSystem};
use crate::linalg::{self, re, Mat};
use crate::morphism::{
    braiding, compose_all, id, right_trace, tensor, tensor_all, word_trees, Morphism, ObjectExpr, Sign, Summand,
};

/// `C ⊠ C̄`.
pub fn double(cat: &CategoryData) -> Result<CategoryData> {
    deligne_product(cat, &cat.conjugate(), false)
}

fn right_rank(d: &CategoryData) -> Result<usize> {
    d.factors.map(|(_, kr)| kr).ok_or_else(|| QcatError::Mismatch("category is not a Deligne product".into()))
}

/// `X ↦ X ⊗ 1` into a Deligne product.
pub fn lift_object(d: &CategoryData, x: &ObjectExpr) -> Result<ObjectExpr> {
    let kr = right_rank(d)?;
    Ok(ObjectExpr {
        summands: x
            .summands
            .iter()
            .map(|s| Summand { word: s.word.iter().map(|&a| pair_index(a, 0, kr)).collect(), mult: s.mult })
            .collect(),
    })
}

/// `f ↦ f ⊗ 1`. Trees of lifted words are the lifted trees in the same order.
pub fn lift_morphism(d: &CategoryData, f: &Morphism) -> Result<Morphism> {
    let kr = right_rank(d)?;
    let dom = lift_object(d, &f.dom)?;
    let cod = lift_object(d, &f.cod)?;
    let mut out = Morphism::zero(d, &dom, &cod);
    for (c, b) in f.blocks.iter().enumerate() {
        let t = pair_index(c, 0, kr);
        if out.blocks[t].shape() != b.shape() {
            return Err(QcatError::Shape("lifted block shape mismatch".into()));
        }
        out.blocks[t] = b.clone();
    }
    Ok(out)
}

pub fn lift_qsystem(d: &CategoryData, q: &QSystem) -> Result<QSystem> {
    Ok(QSystem { theta: lift_object(d, &q.theta)?, w: lift_morphism(d, &q.w)?, x: lift_morphism(d, &q.x)?, d: q.d })
}

/// `A ×^± B`: `θ = θ^Aθ^B`, `w = w^A×w^B`, `x = (1×ε^±×1)(x^A×x^B)`.
pub fn braided_product(cat: &CategoryData, a: &QSystem, b: &QSystem, sign: Sign) -> Result<QSystem> {
    for q in [a, b] {
        q.theta.check_labels(cat).map_err(|_| QcatError::CategoryMismatch)?;
        if q.w.blocks.len() != cat.rank() {
            return Err(QcatError::CategoryMismatch);
        }
    }
    let theta = a.theta.tensor(&b.theta);
    let w = tensor(cat, &a.w, &b.w);
    let eps = braiding(cat, &a.theta, &b.theta, sign)?;
    let mid = tensor_all(cat, &[&id(cat, &a.theta), &eps, &id(cat, &b.theta)]);
    let x = mid.compose(&tensor(cat, &a.x, &b.x))?;
    Ok(QSystem { theta, w, x, d: a.d * b.d })
}

/// The centre projections `P^± = d⁻¹(r*×1)(1×ε^±_{θ,θ})(x×1)x`.
#[derive(Clone, Debug)]
pub struct CentreProjections {
    pub plus: Morphism,
    pub minus: Morphism,
    pub plus_checks: IntermediateChecks,
    pub minus_checks: IntermediateChecks,
    pub centp: [f64; 2],
}

pub fn centre_projection(cat: &CategoryData, q: &QSystem, sign: Sign) -> Result<Morphism> {
    let one = id(cat, &q.theta);
    let m = tensor(cat, &q.x, &one).compose(&q.x)?;
    let eps = braiding(cat, &q.theta, &q.theta, sign)?;
    let qm = compose_all(&[&tensor(cat, &q.r().adjoint(), &one), &tensor(cat, &one, &eps), &m])?;
    Ok(qm.scale_re(1.0 / q.d))
}

/// Residual of `(P×1)x = ε^∓_{θ,θ}(1×P)x`, the relation characterizing `P^±`.
pub fn centp_residual(cat: &CategoryData, q: &QSystem, p: &Morphism, sign: Sign) -> Result<f64> {
    let one = id(cat, &q.theta);
    let lhs = tensor(cat, p, &one).compose(&q.x)?;
    let eps = braiding(cat, &q.theta, &q.theta, sign.flip())?;
    let rhs = compose_all(&[&eps, &tensor(cat, &one, p), &q.x])?;
    lhs.dist(&rhs)
}

pub fn centre_projections(cat: &CategoryData, q: &QSystem) -> Result<CentreProjections> {
    let plus = centre_projection(cat, q, Sign::Plus)?;
    let minus = centre_projection(cat, q, Sign::Minus)?;
    Ok(CentreProjections {
        plus_checks: intermediate_checks(cat, q, &plus)?,
        minus_checks: intermediate_checks(cat, q, &minus)?,
        centp: [centp_residual(cat, q, &plus, Sign::Plus)?, centp_residual(cat, q, &minus, Sign::Minus)?],
        plus,
        minus,
    })
}

/// `C^±[Q]`, the maximal commutative intermediate Q-system.
pub fn centre_qsystem(cat: &CategoryData, q: &QSystem, sign: Sign) -> Result<ReducedQSystem> {
    let p = centre_projection(cat, q, sign)?;
    let red = check_intermediate(cat, q, &p)?;
    let (comm, res) = check_commutative(cat, &red.child)?;
    if !comm {
        return Err(QcatError::Consistency(format!("centre is not commutative (residual {res:.3e})")));
    }
    Ok(red)
}

/// `d_A⁻¹(w^Aw^{A*}×1)`, the projection onto `A` inside `A × B`.
pub fn braided_a_projection(cat: &CategoryData, a: &QSystem, b: &QSystem) -> Result<Morphism> {
    Ok(tensor(cat, &a.w.compose(&a.w.adjoint())?.scale_re(1.0 / a.d), &id(cat, &b.theta)))
}

/// `d_B⁻¹(1×w^Bw^{B*})`, the projection onto `B` inside `A × B`.
pub fn braided_b_projection(cat: &CategoryData, a: &QSystem, b: &QSystem) -> Result<Morphism> {
    Ok(tensor(cat, &id(cat, &a.theta), &b.w.compose(&b.w.adjoint())?.scale_re(1.0 / b.d)))
}

/// Whether `P ≤ P'` as operators.
pub fn projection_below(p: &Morphism, p2: &Morphism, tol: f64) -> Result<bool> {
    let diff = p2.sub(p)?;
    Ok(diff.blocks.iter().all(|b| b.is_empty() || linalg::herm_eig(b).0[0] > -tol.sqrt()))
}

/// The canonical Q-system of the double together with the double itself.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub double: CategoryData,
    pub q: QSystem,
    pub d_r: f64,
}

/// `Θ = ⊕_ρ (ρ,ρ)` in the double.
pub fn canonical_object(d: &CategoryData) -> Result<ObjectExpr> {
    let (kl, kr) = d.factors.ok_or_else(|| QcatError::Mismatch("category is not a Deligne product".into()))?;
    if kl != kr {
        return Err(QcatError::Mismatch("factors differ in rank".into()));
    }
    Ok(ObjectExpr::from_parts((0..kl).map(|r| (vec![pair_index(r, r, kr)], 1)).collect()))
}

/// `W = d_R^{1/2} T_1`, `X = d_R^{-1/2} Σ (d_ρd_σ/d_τ)^{1/2} (T_ρ×T_σ)(Σ_a t_a ⊗ t̄_a)T_τ*`.
pub fn canonical_qsystem(cat: &CategoryData) -> Result<Canonical> {
    if cat.rank() == 0 {
        return Err(QcatError::NotRational);
    }
    let k = cat.rank();
    let d = double(cat)?;
    let theta = canonical_object(&d)?;
    let d_r = cat.global_dim().sqrt();
    let u = ObjectExpr::unit();
    let mut w = Morphism::zero(&d, &u, &theta);
    w.blocks[0][(0, 0)] = re(d_r.sqrt());
    let tt = theta.tensor(&theta);
    let mut x = Morphism::zero(&d, &theta, &tt);
    for tau in 0..k {
        let z = pair_index(tau, tau, k);
        let offs = tt.offsets(&d, z);
        let col = theta.offsets(&d, z)[tau][0];
        for rho in 0..k {
            for sigma in 0..k {
                let n = cat.n(rho, sigma, tau);
                if n == 0 {
                    continue;
                }
                let coef = re((cat.dims[rho] * cat.dims[sigma] / cat.dims[tau]).sqrt() / d_r.sqrt());
                let base = offs[rho * k + sigma][0];
                if rho == 0 || sigma == 0 {
                    x.blocks[z][(base, col)] = coef;
                    continue;
                }
                let wt = word_trees(&d, &[pair_index(rho, rho, k), pair_index(sigma, sigma, k)]);
                for a in 0..n {
                    let pos = wt
                        .position(z, &vec![(z, a * n + a)])
                        .ok_or_else(|| QcatError::Consistency("missing tree in the double".into()))?;
                    x.blocks[z][(base + pos, col)] = coef;
                }
            }
        }
    }
    let q = QSystem { theta, w, x, d: d_r };
    Ok(Canonical { double: d, q, d_r })
}

/// `Z[A] = C⁺[(A⊗1) ×⁺ R]`, computed in the double of `cat`.
pub fn full_centre(can: &Canonical, a: &QSystem) -> Result<ReducedQSystem> {
    full_centre_signed(can, a, Sign::Plus)
}

/// `C^±[(A⊗1) ×^± R]`; the minus sign is the mirror image.
pub fn full_centre_signed(can: &Canonical, a: &QSystem, sign: Sign) -> Result<ReducedQSystem> {
    let d = &can.double;
    let a1 = lift_qsystem(d, a)?;
    let prod = braided_product(d, &a1, &can.q, sign)?;
    centre_qsystem(d, &prod, sign)
}

/// Modular invariant `Z_{ρσ}` with its commutation residuals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZMatrix {
    pub z: Vec<Vec<i64>>,
    pub zs_residual: f64,
    pub zt_residual: f64,
    pub rounding: f64,
}

/// Multiplicities of `(ρ, σ)` in a projection of an object of the double, from block traces.
pub fn z_from_projection(cat: &CategoryData, p: &Morphism) -> Result<(Vec<Vec<i64>>, f64)> {
    let k = cat.rank();
    let mut z = vec![vec![0i64; k]; k];
    let mut worst = 0f64;
    for (rho, row) in z.iter_mut().enumerate() {
        for (sigma, e) in row.iter_mut().enumerate() {
            let b = &p.blocks[pair_index(rho, sigma, k)];
            let t = if b.is_empty() { 0.0 } else { linalg::trace(b).re };
            let r = t.round();
            worst = worst.max((t - r).abs());
            if (t - r).abs() > cat.tol.sqrt() {
                return Err(QcatError::Rounding(t));
            }
            *e = r as i64;
        }
    }
    Ok((z, worst))
}

pub fn z_matrix(cat: &CategoryData, can: &Canonical, a: &QSystem) -> Result<ZMatrix> {
    let md = modular_data(cat);
    if !md.is_modular {
        return Err(QcatError::NotModular);
    }
    let zc = full_centre(can, a)?;
    let (z, rounding) = z_from_projection(cat, &zc.projection)?;
    let k = cat.rank();
    let zm = Mat::from_fn(k, k, |i, j| re(z[i][j] as f64));
    let zs_residual = linalg::max_abs_diff(&(&zm * &md.s_matrix), &(&md.s_matrix * &zm));
    let zt_residual = linalg::max_abs_diff(&(&zm * &md.t_matrix), &(&md.t_matrix * &zm));
    Ok(ZMatrix { z, zs_residual, zt_residual, rounding })
}

/// `RTr_Θ(ε_{Θ,X} ε_{X,Θ})` for `X = ρ ⊗ 1` in the double of a modular category.
pub fn killing_check(d: &CategoryData, rho: usize) -> Result<Morphism> {
    let kr = right_rank(d)?;
    if !rho.is_multiple_of(kr) {
        return Err(QcatError::Mismatch("label is not of the form (ρ, 1)".into()));
    }
    if !modular_data(d).is_modular {
        return Err(QcatError::NotModular);
    }
    let theta = canonical_object(d)?;
    let x = ObjectExpr::simple(rho);
    let dbl = braiding(d, &theta, &x, Sign::Plus)?.compose(&braiding(d, &x, &theta, Sign::Plus)?)?;
    right_trace(d, &dbl, &theta, &x, &x)
}

/// Runs the commutativity and axiom checks of a canonical Q-system.
pub fn canonical_checks(can: &Canonical) -> Result<(bool, f64, f64)> {
    let ax = check(&can.double, &can.q)?;
    let (comm, res) = check_commutative(&can.double, &can.q)?;
    Ok((ax.pass() && comm, ax.max_residual(), res))
}
