//! Reduced Q-systems and the central, irreducible and intermediate
//! decompositions.

use serde::{Deserialize, Serialize};

use crate::category::CategoryData;
use crate::error::{QcatError, Result};
use crate::frobenius::{
    check, endomorphism_algebra, hom0_algebra, minimal_projections, scalar_defect, AxiomReport, QSystem,
};
use crate::linalg::{self, herm_eig, herm_fn, re, Mat};
use crate::morphism::{compose_all, id, part_isometry, scalar, solve_linear, tensor, Morphism, ObjectExpr};

/// A Q-system cut down by a projection `P = SS*`.
#[derive(Clone, Debug)]
pub struct ReducedQSystem {
    pub projection: Morphism,
    pub isometry: Morphism,
    pub child: QSystem,
    pub n_p: Morphism,
    pub n_spectrum: Vec<f64>,
    /// Whether `n_P` is a multiple of the identity, and the multiple.
    pub n_scalar: bool,
    pub n_coefficient: Option<f64>,
    pub normalization: f64,
    pub checks: AxiomReport,
}

/// Residuals of the relations `(P×P)x = (P×1)xP = (1×P)xP`.
pub fn two_to_three_residual(cat: &CategoryData, q: &QSystem, p: &Morphism) -> Result<f64> {
    let one = id(cat, &q.theta);
    let a = tensor(cat, p, p).compose(&q.x)?;
    let b = compose_all(&[&tensor(cat, p, &one), &q.x, p])?;
    let c = compose_all(&[&tensor(cat, &one, p), &q.x, p])?;
    Ok(a.dist(&b)?.max(a.dist(&c)?))
}

fn projection_residual(p: &Morphism) -> Result<f64> {
    Ok(p.compose(p)?.dist(p)?.max(p.dist(&p.adjoint())?))
}

/// Orthonormal range basis of a projection as an isometry `θ_P → θ` with
/// `θ_P` a sum of simples.
pub fn range_isometry(cat: &CategoryData, p: &Morphism) -> Morphism {
    let ranges: Vec<Mat> = p.blocks.iter().map(linalg::range_basis).collect();
    let sub = ObjectExpr::from_parts(
        ranges.iter().enumerate().filter(|(_, r)| r.ncols() > 0).map(|(c, r)| (vec![c], r.ncols())).collect(),
    );
    let mut s = Morphism::zero(cat, &sub, &p.cod);
    for (c, r) in ranges.into_iter().enumerate() {
        if r.ncols() > 0 {
            s.blocks[c] = r;
        }
    }
    s
}

/// The reduced Q-system `(θ_P, w_P, x_P)` with the `dim(θ_P)^{±1/4} n_P^{∓1/2}` rescaling.
pub fn reduced_qsystem(cat: &CategoryData, q: &QSystem, p: &Morphism) -> Result<ReducedQSystem> {
    let eps = cat.tol.sqrt();
    if p.dom != q.theta || p.cod != q.theta {
        return Err(QcatError::Shape("projection must be an endomorphism of θ".into()));
    }
    let pr = projection_residual(p)?;
    if pr > eps {
        return Err(QcatError::NotProjection(format!("residual {pr:.3e}")));
    }
    let t = two_to_three_residual(cat, q, p)?;
    if t > eps {
        return Err(QcatError::Condition(format!("2-to-3 relation fails (residual {t:.3e})")));
    }
    let s = range_isometry(cat, p);
    let sub = s.dom.clone();
    let dim_p = sub.dim(cat);
    let r = q.r();
    let pp = tensor(cat, p, p);
    let normalization = scalar(&compose_all(&[&r.adjoint(), &pp, &r])?).re;
    if (normalization - dim_p).abs() > eps * dim_p.max(1.0) {
        return Err(QcatError::Normalization(format!("r*(P×P)r = {normalization:.9} but dim θ_P = {dim_p:.9}")));
    }
    let n = compose_all(&[&s.adjoint(), &q.x.adjoint(), &pp, &q.x, &s])?;
    let mut n_spectrum = Vec::new();
    let mut nh = n.clone();
    let mut nih = n.clone();
    for (c, b) in n.blocks.iter().enumerate() {
        if b.is_empty() {
            continue;
        }
        let (vals, _) = herm_eig(b);
        if vals[0] <= cat.tol {
            return Err(QcatError::Normalization(format!("n_P is singular (eigenvalue {:.3e})", vals[0])));
        }
        n_spectrum.extend(vals);
        nh.blocks[c] = herm_fn(b, f64::sqrt);
        nih.blocks[c] = herm_fn(b, |v| 1.0 / v.sqrt());
    }
    let (lambda, defect) = scalar_defect(&n);
    let n_scalar = defect < eps;
    let f = dim_p.powf(0.25);
    let w = nh.compose(&s.adjoint())?.compose(&q.w)?.scale_re(1.0 / f);
    let half = nih.compose(&s.adjoint())?;
    let x = compose_all(&[&tensor(cat, &half, &half), &q.x, &s, &nh])?.scale_re(f);
    let child = QSystem { theta: sub, w, x, d: dim_p.sqrt() };
    let checks = check(cat, &child)?;
    Ok(ReducedQSystem {
        projection: p.clone(),
        isometry: s,
        child,
        n_p: n,
        n_spectrum,
        n_scalar,
        n_coefficient: n_scalar.then_some(lambda.re),
        normalization,
        checks,
    })
}

/// One factor Q-system per minimal central projection of `Hom₀`.
pub fn central_decomposition(cat: &CategoryData, q: &QSystem, seed: u64) -> Result<Vec<ReducedQSystem>> {
    let alg = hom0_algebra(cat, q)?;
    let mp = minimal_projections(&alg, seed, cat.tol)?;
    mp.central.iter().map(|c| reduced_qsystem(cat, q, &alg.element(cat, c))).collect()
}

/// One summand of the irreducible decomposition.
#[derive(Clone, Debug)]
pub struct IrreducibleSummand {
    pub p: Morphism,
    pub pbar: Morphism,
    pub projection: Morphism,
    pub reduced: ReducedQSystem,
    /// Residuals of `(1×p)x = xp`, `(p̄×1)x = xp̄`, `(p×1)x = (1×p̄)x` and `[p, p̄] = 0`.
    pub residuals: [f64; 4],
}

/// `p̄ = (w*p × 1)x`, the partner of a left-module projection `p`.
pub fn pbar_of(cat: &CategoryData, q: &QSystem, p: &Morphism) -> Result<Morphism> {
    tensor(cat, &q.w.adjoint().compose(p)?, &id(cat, &q.theta)).compose(&q.x)
}

pub fn pair_residuals(cat: &CategoryData, q: &QSystem, p: &Morphism, pbar: &Morphism) -> Result<[f64; 4]> {
    let one = id(cat, &q.theta);
    let r1 = tensor(cat, &one, p).compose(&q.x)?.dist(&q.x.compose(p)?)?;
    let r2 = tensor(cat, pbar, &one).compose(&q.x)?.dist(&q.x.compose(pbar)?)?;
    let r3 = tensor(cat, p, &one).compose(&q.x)?.dist(&tensor(cat, &one, pbar).compose(&q.x)?)?;
    let r4 = p.compose(pbar)?.dist(&pbar.compose(p)?)?;
    Ok([r1, r2, r3, r4])
}

/// Decomposes a simple Q-system along minimal projections of
/// `{t : (1×t)x = xt}`.
pub fn irreducible_decomposition(cat: &CategoryData, q: &QSystem, seed: u64) -> Result<Vec<IrreducibleSummand>> {
    let h0 = hom0_algebra(cat, q)?;
    if h0.dim() != 1 {
        return Err(QcatError::NotSimple(h0.dim()));
    }
    let one = id(cat, &q.theta);
    let basis = solve_linear(cat, &q.theta, &q.theta, cat.tol, |t| {
        Ok(vec![tensor(cat, &one, t).compose(&q.x)?.sub(&q.x.compose(t)?)?])
    })?;
    let alg = endomorphism_algebra(basis)?;
    let mp = minimal_projections(&alg, seed, cat.tol)?;
    let mut out = Vec::new();
    for (_, coords) in &mp.minimal {
        let p = alg.element(cat, coords);
        let pbar = pbar_of(cat, q, &p)?;
        let projection = pbar.compose(&p)?;
        let residuals = pair_residuals(cat, q, &p, &pbar)?;
        let reduced = reduced_qsystem(cat, q, &projection)?;
        out.push(IrreducibleSummand { p, pbar, projection, reduced, residuals });
    }
    Ok(out)
}

/// Verification report of an intermediate projection.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntermediateChecks {
    pub projection: f64,
    pub two_to_three: f64,
    pub pw: f64,
}

pub fn intermediate_checks(cat: &CategoryData, q: &QSystem, p: &Morphism) -> Result<IntermediateChecks> {
    Ok(IntermediateChecks {
        projection: projection_residual(p)?,
        two_to_three: two_to_three_residual(cat, q, p)?,
        pw: p.compose(&q.w)?.dist(&q.w)?,
    })
}

/// Verifies `P` as an intermediate projection and returns the intermediate Q-system.
pub fn check_intermediate(cat: &CategoryData, q: &QSystem, p: &Morphism) -> Result<ReducedQSystem> {
    let eps = cat.tol.sqrt();
    let c = intermediate_checks(cat, q, p)?;
    let mut failed = Vec::new();
    if c.projection > eps {
        failed.push(format!("projection ({:.3e})", c.projection));
    }
    if c.two_to_three > eps {
        failed.push(format!("2to3 ({:.3e})", c.two_to_three));
    }
    if c.pw > eps {
        failed.push(format!("pw ({:.3e})", c.pw));
    }
    if !failed.is_empty() {
        return Err(QcatError::Condition(failed.join(", ")));
    }
    reduced_qsystem(cat, q, p)
}

/// `θ = ⊕θᵢ`, `w = Σ √(dᵢ/d) sᵢwᵢ`, `x = Σ √(d/dᵢ) (sᵢ×sᵢ)xᵢsᵢ*` with `d² = Σ dᵢ²`.
pub fn direct_sum_qsystems(cat: &CategoryData, parts: &[QSystem]) -> Result<QSystem> {
    if parts.is_empty() {
        return Err(QcatError::Shape("no parts".into()));
    }
    if parts.len() == 1 {
        return Ok(parts[0].clone());
    }
    for p in parts {
        p.theta.check_labels(cat).map_err(|_| QcatError::CategoryMismatch)?;
        if p.w.blocks.len() != cat.rank() {
            return Err(QcatError::CategoryMismatch);
        }
    }
    let objs: Vec<ObjectExpr> = parts.iter().map(|p| p.theta.clone()).collect();
    let theta = ObjectExpr::direct_sum(&objs);
    let d = parts.iter().map(|p| p.d * p.d).sum::<f64>().sqrt();
    let u = ObjectExpr::unit();
    let mut w = Morphism::zero(cat, &u, &theta);
    let mut x = Morphism::zero(cat, &theta, &theta.tensor(&theta));
    for (i, p) in parts.iter().enumerate() {
        let s = part_isometry(cat, &objs, i);
        w = w.add(&s.compose(&p.w)?.scale(re((p.d / d).sqrt())))?;
        let xi = compose_all(&[&tensor(cat, &s, &s), &p.x, &s.adjoint()])?;
        x = x.add(&xi.scale(re((d / p.d).sqrt())))?;
    }
    Ok(QSystem { theta, w, x, d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frobenius::{from_conjugate_pair, sector_projection, unitarily_equivalent, DEFAULT_SEED};

    #[test]
    fn identity_projection_returns_parent() {
        let cat = fixtures::ising();
        let q = from_conjugate_pair(&cat, &ObjectExpr::simple(2)).unwrap();
        let red = reduced_qsystem(&cat, &q, &id(&cat, &q.theta)).unwrap();
        assert!(red.checks.pass());
        assert!(unitarily_equivalent(&cat, &red.child, &q, DEFAULT_SEED).unwrap().equivalent);
    }

    #[test]
    fn unit_projection_gives_trivial() {
        let cat = fixtures::ising();
        let q = from_conjugate_pair(&cat, &ObjectExpr::simple(2)).unwrap();
        let p = q.w.compose(&q.w.adjoint()).unwrap().scale_re(1.0 / q.d);
        let red = check_intermediate(&cat, &q, &p).unwrap();
        assert_eq!(red.child.theta, ObjectExpr::unit());
        assert!(red.checks.pass());
        assert!(red.n_scalar);
        assert!((red.n_coefficient.unwrap() - 1.0 / q.d).abs() < 1e-9);
    }

    #[test]
    fn direct_sum_round_trip() {
        let cat = fixtures::ising();
        let q = from_conjugate_pair(&cat, &ObjectExpr::simple(2)).unwrap();
        let s = direct_sum_qsystems(&cat, &[q.clone(), q.clone()]).unwrap();
        assert!(check(&cat, &s).unwrap().pass());
        assert!((s.d - 2.0).abs() < 1e-12);
        let parts = central_decomposition(&cat, &s, DEFAULT_SEED).unwrap();
        assert_eq!(parts.len(), 2);
        for p in &parts {
            assert!(p.checks.pass());
            assert!(unitarily_equivalent(&cat, &p.child, &q, DEFAULT_SEED).unwrap().equivalent);
        }
        let t = QSystem::trivial(&cat);
        let tt = direct_sum_qsystems(&cat, &[t.clone(), t]).unwrap();
        assert!((tt.d - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(hom0_algebra(&cat, &tt).unwrap().dim(), 2);
    }

    #[test]
    fn irreducible_decomposition_of_reducible_homomorphism() {
        let cat = fixtures::ising();
        let s = ObjectExpr::simple(2);
        let q = from_conjugate_pair(&cat, &s.sum(&s)).unwrap();
        let parts = irreducible_decomposition(&cat, &q, DEFAULT_SEED).unwrap();
        assert_eq!(parts.len(), 2);
        let ising = from_conjugate_pair(&cat, &s).unwrap();
        for p in &parts {
            assert!(p.residuals.iter().all(|&r| r < 1e-9), "{:?}", p.residuals);
            assert!(p.reduced.checks.pass());
            assert!(unitarily_equivalent(&cat, &p.reduced.child, &ising, DEFAULT_SEED).unwrap().equivalent);
        }
        let total = parts.iter().fold(Morphism::zero(&cat, &q.theta, &q.theta), |acc, p| acc.add(&p.p).unwrap());
        assert!(total.dist(&id(&cat, &q.theta)).unwrap() < 1e-9);
    }

    #[test]
    fn unit_channel_projection_has_nonscalar_normalizer() {
        let cat = fixtures::ising();
        let x = ObjectExpr::unit().sum(&ObjectExpr::simple(2));
        let q = from_conjugate_pair(&cat, &x).unwrap();
        let p = sector_projection(&cat, &q.theta, 0);
        let red = check_intermediate(&cat, &q, &p).unwrap();
        assert!(!red.n_scalar);
        assert!((red.normalization - 2.0).abs() < 1e-9);
        let mut spec = red.n_spectrum.clone();
        spec.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((spec[0] - 1.0 / 2f64.sqrt()).abs() < 1e-9 && (spec[1] - 1.0).abs() < 1e-9);
        assert!(red.checks.pass());
    }
}
