#![allow(dead_code)]

use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use qcat::braided::{canonical_object, canonical_qsystem, lift_object, Canonical};
use qcat::decompose::{central_decomposition, check_intermediate, direct_sum_qsystems};
use qcat::fixtures;
use qcat::frobenius::{check, deform, from_conjugate_pair, sector_projection, unitarily_equivalent, QSystem};
use qcat::linalg::{self, herm_fn, Mat, C64};
use qcat::morphism::{braiding, compose_all, id, left_trace, right_trace, standard_pair, tensor, trace};
use qcat::{CategoryData, Morphism, ObjectExpr, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0xC0FFEE;

pub fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, ..Config::default() }
}

/// Runs a property and returns the failure message, if any.
pub fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(config(cases));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub fn ising() -> &'static CategoryData {
    static CAT: OnceLock<CategoryData> = OnceLock::new();
    CAT.get_or_init(fixtures::ising)
}

pub fn ising_canonical() -> &'static Canonical {
    static CAN: OnceLock<Canonical> = OnceLock::new();
    CAN.get_or_init(|| canonical_qsystem(ising()).unwrap())
}

pub fn ising_q() -> QSystem {
    from_conjugate_pair(ising(), &ObjectExpr::simple(2)).unwrap()
}

/// Objects of Ising used as random choices: `1, τ, σ, σσ, τσ, 1⊕σ, τ⊕σ`.
pub fn object_pool() -> Vec<ObjectExpr> {
    let (t, s) = (1, 2);
    vec![
        ObjectExpr::unit(),
        ObjectExpr::simple(t),
        ObjectExpr::simple(s),
        ObjectExpr::word(vec![s, s]),
        ObjectExpr::word(vec![t, s]),
        ObjectExpr::unit().sum(&ObjectExpr::simple(s)),
        ObjectExpr::simple(t).sum(&ObjectExpr::simple(s)),
    ]
}

pub fn c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_morphism(cat: &CategoryData, x: &ObjectExpr, y: &ObjectExpr, rng: &mut ChaCha8Rng) -> Morphism {
    let mut f = Morphism::zero(cat, x, y);
    for b in f.blocks.iter_mut() {
        for z in b.iter_mut() {
            *z = c64(rng);
        }
    }
    f
}

fn map_blocks(f: &Morphism, g: impl Fn(&Mat) -> Mat) -> Morphism {
    let mut out = f.clone();
    for b in out.blocks.iter_mut() {
        if !b.is_empty() {
            *b = g(b);
        }
    }
    out
}

pub fn random_unitary(cat: &CategoryData, x: &ObjectExpr, rng: &mut ChaCha8Rng) -> Morphism {
    map_blocks(&random_morphism(cat, x, x, rng), linalg::polar_unitary)
}

/// `exp(h)` for a random hermitian `h` scaled to operator norm `size`.
pub fn random_positive(cat: &CategoryData, x: &ObjectExpr, size: f64, rng: &mut ChaCha8Rng) -> Morphism {
    let f = random_morphism(cat, x, x, rng);
    let h = f.add(&f.adjoint()).unwrap();
    let norm =
        h.blocks.iter().map(|b| herm_fn(b, f64::abs).iter().map(|z| z.norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
    let h = h.scale_re(size / norm.max(1e-12));
    map_blocks(&h, |b| herm_fn(b, f64::exp))
}

pub fn close(a: &Morphism, b: &Morphism, tol: f64) -> Result<(), TestCaseError> {
    let d = a.dist(b).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let scale = 1f64.max(a.norm()).max(b.norm());
    prop_assert!(d <= tol * scale, "distance {d:e} exceeds {tol:e}");
    Ok(())
}

fn fail(e: impl std::fmt::Display) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

/// `LTr_α((s×1_β')t) = LTr_α'(t(s×1_β))` and its right-handed mirror, plus `Tr 1_α = dim α`.
pub fn trace_property(cases: u32) -> Result<(), String> {
    let pool = object_pool();
    let n = pool.len();
    run(cases, (0..n, 0..n, 0..n, 0..n, any::<u64>()), |(ia, ia2, ib, ib2, seed)| {
        let cat = ising();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, a2, b, b2) = (&pool[ia], &pool[ia2], &pool[ib], &pool[ib2]);
        let s = random_morphism(cat, a2, a, &mut rng);

        let t = random_morphism(cat, &a.tensor(b), &a2.tensor(b2), &mut rng);
        let lhs = left_trace(cat, &tensor(cat, &s, &id(cat, b2)).compose(&t).map_err(fail)?, a, b, b2).map_err(fail)?;
        let rhs = left_trace(cat, &t.compose(&tensor(cat, &s, &id(cat, b))).map_err(fail)?, a2, b, b2).map_err(fail)?;
        close(&lhs, &rhs, 1e-9)?;

        let t = random_morphism(cat, &b.tensor(a), &b2.tensor(a2), &mut rng);
        let lhs =
            right_trace(cat, &tensor(cat, &id(cat, b2), &s).compose(&t).map_err(fail)?, a, b, b2).map_err(fail)?;
        let rhs =
            right_trace(cat, &t.compose(&tensor(cat, &id(cat, b), &s)).map_err(fail)?, a2, b, b2).map_err(fail)?;
        close(&lhs, &rhs, 1e-9)?;

        let tr = trace(cat, &id(cat, a)).map_err(fail)?;
        prop_assert!((tr - C64::new(a.dim(cat), 0.0)).norm() < 1e-9);
        Ok(())
    })
}

/// Left and right traces agree for the standard pair and differ once the pair
/// is deformed by `n` with `n*n ≠ 1`.
pub fn left_right_traces(cases: u32) -> Result<(), String> {
    let pool = object_pool();
    run(cases, (1..pool.len(), 0.2f64..1.0, any::<u64>()), |(i, size, seed)| {
        let cat = ising();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = &pool[i];
        let xb = x.conj(cat);
        let u = ObjectExpr::unit();
        let p = standard_pair(cat, x).map_err(fail)?;
        let ltr = |r: &Morphism, f: &Morphism| {
            compose_all(&[&r.adjoint(), &tensor(cat, &id(cat, &xb), f), r]).map(|m| m.blocks[0][(0, 0)])
        };
        let rtr = |rb: &Morphism, f: &Morphism| {
            compose_all(&[&rb.adjoint(), &tensor(cat, f, &id(cat, &xb)), rb]).map(|m| m.blocks[0][(0, 0)])
        };
        let f = random_morphism(cat, x, x, &mut rng);
        let (l, r) = (ltr(&p.r, &f).map_err(fail)?, rtr(&p.rbar, &f).map_err(fail)?);
        prop_assert!((l - r).norm() < 1e-9 * 1f64.max(l.norm()), "standard pair: {l} vs {r}");
        let lt = left_trace(cat, &f, x, &u, &u).map_err(fail)?.blocks[0][(0, 0)];
        prop_assert!((lt - l).norm() < 1e-9 * 1f64.max(l.norm()));

        let n = random_positive(cat, x, size, &mut rng);
        let n_inv_adj = map_blocks(&n.adjoint(), |b| b.clone().try_inverse().unwrap());
        let r2 = tensor(cat, &id(cat, &xb), &n).compose(&p.r).map_err(fail)?;
        let rb2 = tensor(cat, &n_inv_adj, &id(cat, &xb)).compose(&p.rbar).map_err(fail)?;
        let zig = tensor(cat, &id(cat, x), &r2.adjoint()).compose(&tensor(cat, &rb2, &id(cat, x))).map_err(fail)?;
        close(&zig, &id(cat, x), 1e-9)?;
        let mut gap = 0f64;
        for b in qcat::morphism::hom_basis(cat, x, x) {
            gap = gap.max((ltr(&r2, &b).map_err(fail)? - rtr(&rb2, &b).map_err(fail)?).norm());
        }
        prop_assert!(gap > 1e-3, "deformed pair still has equal traces (gap {gap:e})");
        Ok(())
    })
}

pub fn qsystem_pool() -> Vec<QSystem> {
    let cat = ising();
    let mut out = vec![QSystem::trivial(cat)];
    for x in object_pool().iter().skip(1).take(5) {
        out.push(from_conjugate_pair(cat, x).unwrap());
    }
    out
}

/// Triples that satisfy unit, associativity and specialness also satisfy the
/// Frobenius relation. Unitary gauges keep all three; invertible ones break
/// specialness, and the implication is then checked vacuously.
pub fn unit_assoc_special_implies_frobenius(cases: u32) -> Result<(), String> {
    let pool = qsystem_pool();
    run(cases, (0..pool.len(), any::<bool>(), any::<u64>()), |(i, unitary, seed)| {
        let cat = ising();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = &pool[i];
        let u = if unitary {
            random_unitary(cat, &q.theta, &mut rng)
        } else {
            random_positive(cat, &q.theta, 0.5, &mut rng).compose(&random_unitary(cat, &q.theta, &mut rng)).unwrap()
        };
        let (w, x) = deform(cat, q, &u).map_err(fail)?;
        let rep = qcat::frobenius::check_qsystem(cat, &q.theta, &w, &x).map_err(fail)?;
        if unitary {
            prop_assert!(rep.pass_unit && rep.pass_associativity && rep.pass_special, "{rep:?}");
        }
        if rep.pass_unit && rep.pass_associativity && rep.pass_special {
            prop_assert!(rep.frobenius < 1e-9, "Frobenius residual {:e}", rep.frobenius);
        }
        Ok(())
    })
}

/// The ring of `Θ_can` around `ρ⊗1` is `d_R²` times the projection onto its unit channel.
pub fn killing_ring(cases: u32) -> Result<(), String> {
    run(cases, (0usize..3, 0usize..3, 0usize..3, any::<u64>()), |(m0, m1, m2, seed)| {
        prop_assume!(m0 + m1 + m2 > 0);
        let cat = ising();
        let can = ising_canonical();
        let d = &can.double;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = ObjectExpr::from_parts(vec![(vec![], m0), (vec![1], m1), (vec![2], m2)]);
        let x = lift_object(d, &rho).map_err(fail)?;
        let theta = canonical_object(d).map_err(fail)?;
        let dbl = braiding(d, &theta, &x, Sign::Plus)
            .and_then(|b| b.compose(&braiding(d, &x, &theta, Sign::Plus)?))
            .map_err(fail)?;
        let ring = right_trace(d, &dbl, &theta, &x, &x).map_err(fail)?;
        let expected = sector_projection(d, &x, 0).scale_re(can.d_r * can.d_r);
        close(&ring, &expected, 1e-9)?;
        let f = random_morphism(d, &x, &x, &mut rng);
        close(&ring.compose(&f).map_err(fail)?, &f.compose(&ring).map_err(fail)?, 1e-9)?;
        prop_assert!(rho.sector_mults(cat)[0] == m0);
        Ok(())
    })
}

/// Direct sums of gauge-transformed simple Q-systems decompose back into
/// their summands up to unitary equivalence.
pub fn direct_sum_round_trip(cases: u32) -> Result<(), String> {
    let pool: Vec<QSystem> = qsystem_pool().into_iter().take(4).collect();
    let n = pool.len();
    run(cases, (prop::collection::vec(0..n, 2..=3), any::<u64>()), |(picks, seed)| {
        let cat = ising();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parts: Vec<QSystem> = picks
            .iter()
            .map(|&i| {
                let q = &pool[i];
                let u = random_unitary(cat, &q.theta, &mut rng);
                let (w, x) = deform(cat, q, &u).unwrap();
                QSystem::new(cat, q.theta.clone(), w, x).unwrap()
            })
            .collect();
        let sum = direct_sum_qsystems(cat, &parts).map_err(fail)?;
        prop_assert!(check(cat, &sum).map_err(fail)?.pass());
        let pieces = central_decomposition(cat, &sum, seed).map_err(fail)?;
        prop_assert_eq!(pieces.len(), parts.len());
        let mut used = vec![false; parts.len()];
        for piece in &pieces {
            prop_assert!(piece.checks.pass());
            let mut found = false;
            for (j, part) in parts.iter().enumerate() {
                if used[j] || (part.d - piece.child.d).abs() > 1e-9 {
                    continue;
                }
                if unitarily_equivalent(cat, &piece.child, part, seed).map_err(fail)?.equivalent {
                    used[j] = true;
                    found = true;
                    break;
                }
            }
            prop_assert!(found, "a central summand matches no input");
        }
        Ok(())
    })
}

/// For the Q-system of `1⊕σ` and the projection onto the unit sector of `θ`,
/// in any unitary gauge, `n_P` has spectrum `{2^{-1/2}, 1}` and is reported as non-scalar.
pub fn nonscalar_normalizer_is_reported(cases: u32) -> Result<(), String> {
    let cat = ising();
    let q = from_conjugate_pair(cat, &ObjectExpr::unit().sum(&ObjectExpr::simple(2))).unwrap();
    run(cases, any::<u64>(), |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(cat, &q.theta, &mut rng);
        let (w, x) = deform(cat, &q, &u).map_err(fail)?;
        let g = QSystem::new(cat, q.theta.clone(), w, x).map_err(fail)?;
        let p = compose_all(&[&u, &sector_projection(cat, &q.theta, 0), &u.adjoint()]).map_err(fail)?;
        let red = check_intermediate(cat, &g, &p).map_err(fail)?;
        prop_assert!(!red.n_scalar);
        prop_assert!(red.n_coefficient.is_none());
        let lo = red.n_spectrum.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = red.n_spectrum.iter().copied().fold(0.0, f64::max);
        prop_assert!((lo - 0.5f64.sqrt()).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9, "{:?}", red.n_spectrum);
        prop_assert!((red.normalization - 2.0).abs() < 1e-9);
        prop_assert!(red.checks.pass());
        Ok(())
    })
}

/// `q` in the gauge of a random unitary of `θ`.
pub fn gauged(cat: &CategoryData, q: &QSystem, rng: &mut ChaCha8Rng) -> QSystem {
    let u = random_unitary(cat, &q.theta, rng);
    let (w, x) = deform(cat, q, &u).unwrap();
    QSystem::new(cat, q.theta.clone(), w, x).unwrap()
}
