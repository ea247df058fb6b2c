//! Objects, fusion-tree bases and morphisms as per-sector block matrices.
//!
//! An [`ObjectExpr`] is a formal direct sum of tensor words of simple labels.
//! Its basis in sector `c` is ordered by summand, then multiplicity copy, then
//! left-nested fusion tree. A tree of the word `a₁…aₙ` is the sequence of
//! `(intermediate label, vertex)` pairs for the couplings `2..=n`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::category::CategoryData;
use crate::error::{QcatError, Result};
use crate::linalg::{self, max_abs, re, Mat, C64};

pub type Word = Vec<usize>;
pub type Tree = Vec<(usize, usize)>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Summand {
    pub word: Word,
    pub mult: usize,
}

/// Formal direct sum of tensor words. The empty word is the unit object and
/// the empty sum is the zero object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ObjectExpr {
    pub summands: Vec<Summand>,
}

impl ObjectExpr {
    pub fn zero() -> Self {
        ObjectExpr { summands: vec![] }
    }

    pub fn unit() -> Self {
        Self::word(vec![])
    }

    /// A single word; unit labels are dropped.
    pub fn word(w: Word) -> Self {
        let w: Word = w.into_iter().filter(|&a| a != 0).collect();
        ObjectExpr { summands: vec![Summand { word: w, mult: 1 }] }
    }

    pub fn simple(a: usize) -> Self {
        Self::word(vec![a])
    }

    pub fn from_parts(parts: Vec<(Word, usize)>) -> Self {
        ObjectExpr {
            summands: parts
                .into_iter()
                .filter(|(_, m)| *m > 0)
                .map(|(w, m)| Summand { word: w.into_iter().filter(|&a| a != 0).collect(), mult: m })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.summands.is_empty()
    }

    /// Direct sum; summands are concatenated.
    pub fn sum(&self, other: &ObjectExpr) -> ObjectExpr {
        let mut s = self.summands.clone();
        s.extend(other.summands.iter().cloned());
        ObjectExpr { summands: s }
    }

    pub fn direct_sum(parts: &[ObjectExpr]) -> ObjectExpr {
        ObjectExpr { summands: parts.iter().flat_map(|p| p.summands.iter().cloned()).collect() }
    }

    /// Tensor product, summand-major in the left factor.
    pub fn tensor(&self, other: &ObjectExpr) -> ObjectExpr {
        let mut s = Vec::with_capacity(self.summands.len() * other.summands.len());
        for a in &self.summands {
            for b in &other.summands {
                let mut w = a.word.clone();
                w.extend_from_slice(&b.word);
                s.push(Summand { word: w, mult: a.mult * b.mult });
            }
        }
        ObjectExpr { summands: s }
    }

    pub fn tensor_all(parts: &[&ObjectExpr]) -> ObjectExpr {
        parts.iter().fold(ObjectExpr::unit(), |acc, p| acc.tensor(p))
    }

    /// Conjugate object: reversed words of dual labels.
    pub fn conj(&self, cat: &CategoryData) -> ObjectExpr {
        ObjectExpr {
            summands: self.summands.iter().map(|s| Summand { word: conj_word(cat, &s.word), mult: s.mult }).collect(),
        }
    }

    pub fn dim(&self, cat: &CategoryData) -> f64 {
        self.summands.iter().map(|s| s.mult as f64 * s.word.iter().map(|&a| cat.dims[a]).product::<f64>()).sum()
    }

    /// Number of basis vectors in sector `c`.
    pub fn sector_mult(&self, cat: &CategoryData, c: usize) -> usize {
        self.summands.iter().map(|s| s.mult * word_trees(cat, &s.word).count(c)).sum()
    }

    pub fn sector_mults(&self, cat: &CategoryData) -> Vec<usize> {
        (0..cat.rank()).map(|c| self.sector_mult(cat, c)).collect()
    }

    /// Offsets of every `(summand, copy)` inside the sector-`c` basis.
    pub fn offsets(&self, cat: &CategoryData, c: usize) -> Vec<Vec<usize>> {
        let mut off = 0;
        self.summands
            .iter()
            .map(|s| {
                let n = word_trees(cat, &s.word).count(c);
                (0..s.mult)
                    .map(|_| {
                        let o = off;
                        off += n;
                        o
                    })
                    .collect()
            })
            .collect()
    }

    pub fn check_labels(&self, cat: &CategoryData) -> Result<()> {
        for s in &self.summands {
            for &a in &s.word {
                if a >= cat.rank() {
                    return Err(QcatError::UnknownLabel(format!("#{a}")));
                }
            }
        }
        Ok(())
    }

    pub fn display(&self, cat: &CategoryData) -> String {
        if self.summands.is_empty() {
            return "0".into();
        }
        self.summands
            .iter()
            .map(|s| {
                let w = if s.word.is_empty() {
                    "1".to_string()
                } else {
                    s.word.iter().map(|&a| cat.labels[a].as_str()).collect::<Vec<_>>().join("·")
                };
                if s.mult == 1 {
                    w
                } else {
                    format!("{}{}", s.mult, w)
                }
            })
            .collect::<Vec<_>>()
            .join(" ⊕ ")
    }
}

pub fn conj_word(cat: &CategoryData, w: &[usize]) -> Word {
    w.iter().rev().map(|&a| cat.dual[a]).collect()
}

// ---------------------------------------------------------------------------
// Fusion trees

/// Left-nested fusion trees of one word, bucketed by total charge.
#[derive(Debug)]
pub struct WordTrees {
    pub sectors: Vec<Vec<Tree>>,
    index: Vec<HashMap<Tree, usize>>,
}

impl WordTrees {
    pub fn count(&self, c: usize) -> usize {
        self.sectors[c].len()
    }

    pub fn position(&self, c: usize, t: &Tree) -> Option<usize> {
        self.index[c].get(t).copied()
    }
}

fn build_trees(cat: &CategoryData, w: &[usize]) -> WordTrees {
    let k = cat.rank();
    let mut sectors: Vec<Vec<Tree>> = vec![vec![]; k];
    match w.len() {
        0 => sectors[0].push(vec![]),
        1 => sectors[w[0]].push(vec![]),
        _ => {
            fn dfs(cat: &CategoryData, w: &[usize], cur: usize, pos: usize, t: &mut Tree, out: &mut Vec<Vec<Tree>>) {
                if pos == w.len() {
                    out[cur].push(t.clone());
                    return;
                }
                for c in 0..cat.rank() {
                    for v in 0..cat.n(cur, w[pos], c) {
                        t.push((c, v));
                        dfs(cat, w, c, pos + 1, t, out);
                        t.pop();
                    }
                }
            }
            let mut t = Vec::with_capacity(w.len() - 1);
            dfs(cat, w, w[0], 1, &mut t, &mut sectors);
        }
    }
    let index = sectors.iter().map(|ts| ts.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect()).collect();
    WordTrees { sectors, index }
}

pub fn word_trees(cat: &CategoryData, w: &[usize]) -> Arc<WordTrees> {
    if let Some(t) = cat.cache.trees.read().unwrap().get(w) {
        return t.clone();
    }
    let t = Arc::new(build_trees(cat, w));
    cat.cache.trees.write().unwrap().insert(w.to_vec(), t.clone());
    t
}

/// Basis entry of an object in one sector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub summand: usize,
    pub copy: usize,
    pub tree: Tree,
}

#[derive(Clone, Debug)]
pub struct FusionBasis {
    pub object: ObjectExpr,
    pub sectors: Vec<Vec<BasisEntry>>,
}

impl FusionBasis {
    pub fn mult(&self, c: usize) -> usize {
        self.sectors[c].len()
    }
}

pub fn fusion_basis(cat: &CategoryData, x: &ObjectExpr) -> Result<FusionBasis> {
    x.check_labels(cat)?;
    let mut sectors = vec![vec![]; cat.rank()];
    for (i, s) in x.summands.iter().enumerate() {
        let wt = word_trees(cat, &s.word);
        for (c, sec) in sectors.iter_mut().enumerate() {
            for p in 0..s.mult {
                for t in &wt.sectors[c] {
                    sec.push(BasisEntry { summand: i, copy: p, tree: t.clone() });
                }
            }
        }
    }
    Ok(FusionBasis { object: x.clone(), sectors })
}

/// Caches for recoupling unitaries, braidings and standard pairs.
#[derive(Default)]
pub(crate) struct Cache {
    pub trees: RwLock<HashMap<Word, Arc<WordTrees>>>,
    recouple: RwLock<HashMap<(Word, Word), Arc<Recoupling>>>,
    embed: RwLock<HashMap<(ObjectExpr, ObjectExpr), Arc<Embedding>>>,
    braid: RwLock<HashMap<(Word, Word), Arc<Morphism>>>,
    pairs: RwLock<HashMap<Word, Arc<StandardPair>>>,
}

/// External channel `(a, tree₁, b, tree₂, μ)`.
type ExtChannel = (usize, usize, usize, usize, usize);

/// For each sector, the unitary expressing `(tree₁ × tree₂) ∘ vertex` in the
/// canonical trees of the concatenated word.
#[derive(Debug)]
struct Recoupling {
    ext: Vec<Vec<ExtChannel>>,
    u: Vec<Mat>,
}

fn build_recoupling(cat: &CategoryData, w1: &[usize], w2: &[usize]) -> Recoupling {
    let k = cat.rank();
    let t1 = word_trees(cat, w1);
    let t2 = word_trees(cat, w2);
    let mut w12 = w1.to_vec();
    w12.extend_from_slice(w2);
    let t12 = word_trees(cat, &w12);
    let mut ext = vec![vec![]; k];
    for (c, e) in ext.iter_mut().enumerate() {
        for a in 0..k {
            for b in 0..k {
                for mu in 0..cat.n(a, b, c) {
                    for ia in 0..t1.count(a) {
                        for ib in 0..t2.count(b) {
                            e.push((a, ia, b, ib, mu));
                        }
                    }
                }
            }
        }
    }
    let mut u: Vec<Mat> = (0..k).map(|c| Mat::zeros(t12.count(c), ext[c].len())).collect();
    if w1.is_empty() || w2.is_empty() {
        for c in 0..k {
            for (j, &(_, ia, _, ib, _)) in ext[c].iter().enumerate() {
                let row = if w1.is_empty() { ib } else { ia };
                u[c][(row, j)] = re(1.0);
            }
        }
        return Recoupling { ext, u };
    }
    if w2.len() == 1 {
        for c in 0..k {
            for (j, &(a, ia, _, _, mu)) in ext[c].iter().enumerate() {
                let mut t = t1.sectors[a][ia].clone();
                t.push((c, mu));
                let row = t12.position(c, &t).expect("tree");
                u[c][(row, j)] = re(1.0);
            }
        }
        return Recoupling { ext, u };
    }
    let b = *w2.last().unwrap();
    let w2p = &w2[..w2.len() - 1];
    let t2p = word_trees(cat, w2p);
    let inner = recoupling(cat, w1, w2p);
    let mut inner_index: Vec<HashMap<ExtChannel, usize>> = Vec::with_capacity(k);
    for e in &inner.ext {
        inner_index.push(e.iter().enumerate().map(|(i, &x)| (x, i)).collect());
    }
    let mut w12p = w1.to_vec();
    w12p.extend_from_slice(w2p);
    let t12p = word_trees(cat, &w12p);
    for c in 0..k {
        for (j, &(a, ia, b2, ib, mu)) in ext[c].iter().enumerate() {
            let tree_y = &t2.sectors[b2][ib];
            let (bp_node, nu) = *tree_y.last().unwrap();
            debug_assert_eq!(bp_node, b2);
            let prefix: Tree = tree_y[..tree_y.len() - 1].to_vec();
            let bp = if w2p.len() == 1 { w2p[0] } else { prefix.last().unwrap().0 };
            let iyp = t2p.position(bp, &prefix).expect("prefix tree");
            let fm = cat.fmat(a, bp, b, c);
            let lb = cat.f_left_basis(a, bp, b, c);
            let rb = cat.f_right_basis(a, bp, b, c);
            let col = rb.iter().position(|&x| x == (b2, nu, mu)).expect("F column");
            for (row_f, &(f, al, be)) in lb.iter().enumerate() {
                let coef = fm[(row_f, col)];
                if coef.norm() == 0.0 {
                    continue;
                }
                let Some(&ie) = inner_index[f].get(&(a, ia, bp, iyp, al)) else { continue };
                for (it, tree) in t12p.sectors[f].iter().enumerate() {
                    let v = inner.u[f][(it, ie)];
                    if v.norm() == 0.0 {
                        continue;
                    }
                    let mut t = tree.clone();
                    t.push((c, be));
                    let row = t12.position(c, &t).expect("tree");
                    u[c][(row, j)] += coef * v;
                }
            }
        }
    }
    Recoupling { ext, u }
}

fn recoupling(cat: &CategoryData, w1: &[usize], w2: &[usize]) -> Arc<Recoupling> {
    let key = (w1.to_vec(), w2.to_vec());
    if let Some(r) = cat.cache.recouple.read().unwrap().get(&key) {
        return r.clone();
    }
    let r = Arc::new(build_recoupling(cat, w1, w2));
    cat.cache.recouple.write().unwrap().insert(key, r.clone());
    r
}

/// Embedding of the external basis of `X ⊗ Y` into the canonical basis of
/// the concatenated object, one matrix per sector.
#[derive(Debug)]
struct Embedding {
    /// Block offsets `(a, b, μ, offset)` of the external basis.
    blocks: Vec<Vec<(usize, usize, usize, usize)>>,
    w: Vec<Mat>,
}

fn build_embedding(cat: &CategoryData, x: &ObjectExpr, y: &ObjectExpr) -> Embedding {
    let k = cat.rank();
    let mx = x.sector_mults(cat);
    let my = y.sector_mults(cat);
    let xy = x.tensor(y);
    let ox: Vec<Vec<Vec<usize>>> = (0..k).map(|a| x.offsets(cat, a)).collect();
    let oy: Vec<Vec<Vec<usize>>> = (0..k).map(|b| y.offsets(cat, b)).collect();
    let mut blocks = vec![vec![]; k];
    let mut w = Vec::with_capacity(k);
    for (c, bc) in blocks.iter_mut().enumerate() {
        let mut off = 0;
        let mut block_off = HashMap::new();
        for (a, &ma) in mx.iter().enumerate() {
            for (b, &mb) in my.iter().enumerate() {
                for mu in 0..cat.n(a, b, c) {
                    bc.push((a, b, mu, off));
                    block_off.insert((a, b, mu), off);
                    off += ma * mb;
                }
            }
        }
        let oxy = xy.offsets(cat, c);
        let mut m = Mat::zeros(xy.sector_mult(cat, c), off);
        for (i, si) in x.summands.iter().enumerate() {
            for (j, sj) in y.summands.iter().enumerate() {
                let rc = recoupling(cat, &si.word, &sj.word);
                let ij = i * y.summands.len() + j;
                for p in 0..si.mult {
                    for q in 0..sj.mult {
                        let base = oxy[ij][p * sj.mult + q];
                        for (e, &(a, ia, b, ib, mu)) in rc.ext[c].iter().enumerate() {
                            let col = block_off[&(a, b, mu)] + (ox[a][i][p] + ia) * my[b] + oy[b][j][q] + ib;
                            for t in 0..rc.u[c].nrows() {
                                let v = rc.u[c][(t, e)];
                                if v.norm() != 0.0 {
                                    m[(base + t, col)] = v;
                                }
                            }
                        }
                    }
                }
            }
        }
        w.push(m);
    }
    Embedding { blocks, w }
}

fn embedding(cat: &CategoryData, x: &ObjectExpr, y: &ObjectExpr) -> Arc<Embedding> {
    let key = (x.clone(), y.clone());
    if let Some(e) = cat.cache.embed.read().unwrap().get(&key) {
        return e.clone();
    }
    let e = Arc::new(build_embedding(cat, x, y));
    cat.cache.embed.write().unwrap().insert(key, e.clone());
    e
}

// ---------------------------------------------------------------------------
// Morphisms

/// Intertwiner `dom → cod`; `blocks[c]` has shape `m_cod(c) × m_dom(c)`.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub dom: ObjectExpr,
    pub cod: ObjectExpr,
    pub blocks: Vec<Mat>,
}

impl Morphism {
    pub fn zero(cat: &CategoryData, dom: &ObjectExpr, cod: &ObjectExpr) -> Morphism {
        let blocks = (0..cat.rank()).map(|c| Mat::zeros(cod.sector_mult(cat, c), dom.sector_mult(cat, c))).collect();
        Morphism { dom: dom.clone(), cod: cod.clone(), blocks }
    }

    pub fn identity(cat: &CategoryData, x: &ObjectExpr) -> Morphism {
        let blocks = (0..cat.rank()).map(|c| linalg::identity(x.sector_mult(cat, c))).collect();
        Morphism { dom: x.clone(), cod: x.clone(), blocks }
    }

    /// Builds a morphism from explicit blocks, checking shapes.
    pub fn from_blocks(cat: &CategoryData, dom: &ObjectExpr, cod: &ObjectExpr, blocks: Vec<Mat>) -> Result<Morphism> {
        if blocks.len() != cat.rank() {
            return Err(QcatError::Shape("one block per label required".into()));
        }
        for (c, b) in blocks.iter().enumerate() {
            let want = (cod.sector_mult(cat, c), dom.sector_mult(cat, c));
            if b.shape() != want {
                return Err(QcatError::Shape(format!(
                    "block {} has shape {:?}, expected {:?}",
                    cat.labels[c],
                    b.shape(),
                    want
                )));
            }
        }
        Ok(Morphism { dom: dom.clone(), cod: cod.clone(), blocks })
    }

    pub fn adjoint(&self) -> Morphism {
        Morphism {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Morphism {
        Morphism { dom: self.dom.clone(), cod: self.cod.clone(), blocks: self.blocks.iter().map(|b| b * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Morphism {
        self.scale(re(s))
    }

    fn same_shape(&self, other: &Morphism) -> Result<()> {
        if self.dom != other.dom || self.cod != other.cod {
            return Err(QcatError::Shape("morphisms have different domain or codomain".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Morphism) -> Result<Morphism> {
        self.same_shape(other)?;
        Ok(Morphism {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Morphism) -> Result<Morphism> {
        self.add(&other.scale_re(-1.0))
    }

    /// Largest entry modulus over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().fold(0.0, |acc, b| acc.max(max_abs(b)))
    }

    pub fn dist(&self, other: &Morphism) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &Morphism) -> Result<Morphism> {
        if f.cod != self.dom {
            return Err(QcatError::Shape(format!(
                "cannot compose: codomain {:?} vs domain {:?}",
                f.cod.summands, self.dom.summands
            )));
        }
        Ok(Morphism {
            dom: f.dom.clone(),
            cod: self.cod.clone(),
            blocks: self.blocks.iter().zip(&f.blocks).map(|(g, f)| g * f).collect(),
        })
    }

    /// Flattens all blocks into one coordinate vector.
    pub fn to_vector(&self) -> Vec<C64> {
        let mut v = Vec::new();
        for b in &self.blocks {
            for j in 0..b.ncols() {
                for i in 0..b.nrows() {
                    v.push(b[(i, j)]);
                }
            }
        }
        v
    }

    pub fn from_vector(cat: &CategoryData, dom: &ObjectExpr, cod: &ObjectExpr, v: &[C64]) -> Morphism {
        let mut z = Morphism::zero(cat, dom, cod);
        let mut k = 0;
        for b in z.blocks.iter_mut() {
            for j in 0..b.ncols() {
                for i in 0..b.nrows() {
                    b[(i, j)] = v[k];
                    k += 1;
                }
            }
        }
        z
    }

    /// Hilbert–Schmidt inner product weighted by sector dimensions, `Tr(self* other)`.
    pub fn trace_inner(&self, cat: &CategoryData, other: &Morphism) -> C64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .enumerate()
            .map(|(c, (a, b))| (a.adjoint() * b).trace() * cat.dims[c])
            .sum()
    }
}

pub fn compose(g: &Morphism, f: &Morphism) -> Result<Morphism> {
    g.compose(f)
}

/// Composes a chain given in application order reversed: `fs[0] ∘ fs[1] ∘ …`.
pub fn compose_all(fs: &[&Morphism]) -> Result<Morphism> {
    let mut it = fs.iter().rev();
    let mut acc = (*it.next().expect("nonempty chain")).clone();
    for g in it {
        acc = g.compose(&acc)?;
    }
    Ok(acc)
}

pub fn adjoint(f: &Morphism) -> Morphism {
    f.adjoint()
}

/// Monoidal product of morphisms.
pub fn tensor(cat: &CategoryData, f: &Morphism, g: &Morphism) -> Morphism {
    let k = cat.rank();
    let e_dom = embedding(cat, &f.dom, &g.dom);
    let e_cod = embedding(cat, &f.cod, &g.cod);
    let dom = f.dom.tensor(&g.dom);
    let cod = f.cod.tensor(&g.cod);
    let mut blocks = Vec::with_capacity(k);
    for c in 0..k {
        let wd = &e_dom.w[c];
        let wc = &e_cod.w[c];
        let mut out = Mat::zeros(wc.nrows(), wd.nrows());
        if out.nrows() > 0 && out.ncols() > 0 {
            for (bi, &(a, b, _, off_d)) in e_dom.blocks[c].iter().enumerate() {
                let off_c = e_cod.blocks[c][bi].3;
                let fa = &f.blocks[a];
                let gb = &g.blocks[b];
                if fa.is_empty() || gb.is_empty() {
                    continue;
                }
                let kr = fa.kronecker(gb);
                let wc_b = wc.columns(off_c, kr.nrows());
                let wd_b = wd.columns(off_d, kr.ncols());
                out += wc_b * kr * wd_b.adjoint();
            }
        }
        blocks.push(out);
    }
    Morphism { dom, cod, blocks }
}

pub fn tensor_all(cat: &CategoryData, fs: &[&Morphism]) -> Morphism {
    let mut acc = fs[0].clone();
    for f in &fs[1..] {
        acc = tensor(cat, &acc, f);
    }
    acc
}

pub fn id(cat: &CategoryData, x: &ObjectExpr) -> Morphism {
    Morphism::identity(cat, x)
}

/// The `k`-th basis isometry `c → X` in sector `c`.
pub fn sector_isometry(cat: &CategoryData, x: &ObjectExpr, c: usize, k: usize) -> Result<Morphism> {
    let m = x.sector_mult(cat, c);
    if c >= cat.rank() || k >= m {
        return Err(QcatError::Index(format!("sector {c} has {m} basis vectors, asked for {k}")));
    }
    let dom = ObjectExpr::simple(c);
    let mut f = Morphism::zero(cat, &dom, x);
    f.blocks[c][(k, 0)] = re(1.0);
    Ok(f)
}

/// Isometric inclusion of copy `p` of summand `i` (as a single word) into `X`.
pub fn summand_isometry(cat: &CategoryData, x: &ObjectExpr, i: usize, p: usize) -> Morphism {
    let w = ObjectExpr { summands: vec![Summand { word: x.summands[i].word.clone(), mult: 1 }] };
    let mut f = Morphism::zero(cat, &w, x);
    for c in 0..cat.rank() {
        let off = x.offsets(cat, c)[i][p];
        for t in 0..f.blocks[c].ncols() {
            f.blocks[c][(off + t, t)] = re(1.0);
        }
    }
    f
}

/// Isometric inclusion of the `j`-th part of `ObjectExpr::direct_sum(parts)`.
pub fn part_isometry(cat: &CategoryData, parts: &[ObjectExpr], j: usize) -> Morphism {
    let total = ObjectExpr::direct_sum(parts);
    let mut f = Morphism::zero(cat, &parts[j], &total);
    let first: usize = parts[..j].iter().map(|p| p.summands.len()).sum();
    for c in 0..cat.rank() {
        let offs = total.offsets(cat, c);
        let local = parts[j].offsets(cat, c);
        for (i, s) in parts[j].summands.iter().enumerate() {
            let n = word_trees(cat, &s.word).count(c);
            for p in 0..s.mult {
                for t in 0..n {
                    f.blocks[c][(offs[first + i][p] + t, local[i][p] + t)] = re(1.0);
                }
            }
        }
    }
    f
}

// ---------------------------------------------------------------------------
// Braiding

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = QcatError;
    fn from_str(s: &str) -> Result<Sign> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(QcatError::Parse(format!("bad sign {s:?}"))),
        }
    }
}

fn word_braiding(cat: &CategoryData, w1: &[usize], w2: &[usize]) -> Result<Arc<Morphism>> {
    let key = (w1.to_vec(), w2.to_vec());
    if let Some(m) = cat.cache.braid.read().unwrap().get(&key) {
        return Ok(m.clone());
    }
    let x = ObjectExpr::word(w1.to_vec());
    let y = ObjectExpr::word(w2.to_vec());
    let m = if w1.is_empty() || w2.is_empty() {
        Morphism::identity(cat, &x.tensor(&y))
    } else if w1.len() == 1 && w2.len() == 1 {
        let (a, b) = (w1[0], w2[0]);
        let blocks = (0..cat.rank()).map(|c| cat.rmat(a, b, c).clone()).collect();
        Morphism { dom: x.tensor(&y), cod: y.tensor(&x), blocks }
    } else if w1.len() == 1 {
        let b = ObjectExpr::simple(w2[0]);
        let rest = ObjectExpr::word(w2[1..].to_vec());
        let first = tensor(cat, &*word_braiding(cat, w1, &w2[..1])?, &id(cat, &rest));
        let second = tensor(cat, &id(cat, &b), &*word_braiding(cat, w1, &w2[1..])?);
        second.compose(&first)?
    } else {
        let a = ObjectExpr::simple(w1[0]);
        let rest = ObjectExpr::word(w1[1..].to_vec());
        let first = tensor(cat, &id(cat, &a), &*word_braiding(cat, &w1[1..], w2)?);
        let second = tensor(cat, &*word_braiding(cat, &w1[..1], w2)?, &id(cat, &rest));
        second.compose(&first)?
    };
    let m = Arc::new(m);
    cat.cache.braid.write().unwrap().insert(key, m.clone());
    Ok(m)
}

/// `ε_{X,Y}: XY → YX`, or the opposite braiding `ε_{Y,X}*` for [`Sign::Minus`].
pub fn braiding(cat: &CategoryData, x: &ObjectExpr, y: &ObjectExpr, sign: Sign) -> Result<Morphism> {
    if sign == Sign::Minus {
        return Ok(braiding(cat, y, x, Sign::Plus)?.adjoint());
    }
    let dom = x.tensor(y);
    let cod = y.tensor(x);
    let mut out = Morphism::zero(cat, &dom, &cod);
    let ny = y.summands.len();
    let nx = x.summands.len();
    let od: Vec<Vec<Vec<usize>>> = (0..cat.rank()).map(|c| dom.offsets(cat, c)).collect();
    let oc: Vec<Vec<Vec<usize>>> = (0..cat.rank()).map(|c| cod.offsets(cat, c)).collect();
    for (i, si) in x.summands.iter().enumerate() {
        for (j, sj) in y.summands.iter().enumerate() {
            let e = word_braiding(cat, &si.word, &sj.word)?;
            for p in 0..si.mult {
                for q in 0..sj.mult {
                    let d_idx = i * ny + j;
                    let c_idx = j * nx + i;
                    let d_copy = p * sj.mult + q;
                    let c_copy = q * si.mult + p;
                    for c in 0..cat.rank() {
                        let b = &e.blocks[c];
                        if b.is_empty() {
                            continue;
                        }
                        let r0 = oc[c][c_idx][c_copy];
                        let c0 = od[c][d_idx][d_copy];
                        out.blocks[c].view_mut((r0, c0), b.shape()).copy_from(b);
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Conjugates and standard pairs

/// `r: 1 → X̄X` and `r̄: 1 → XX̄` solving the conjugacy relations with
/// `r*r = r̄*r̄ = dim X`.
#[derive(Clone, Debug)]
pub struct StandardPair {
    pub object: ObjectExpr,
    pub r: Morphism,
    pub rbar: Morphism,
}

fn simple_pair(cat: &CategoryData, a: usize) -> Result<StandardPair> {
    let x = ObjectExpr::simple(a);
    let xb = ObjectExpr::simple(cat.dual[a]);
    let u = ObjectExpr::unit();
    let sd = re(cat.dims[a].sqrt());
    let mut r = Morphism::zero(cat, &u, &xb.tensor(&x));
    r.blocks[0][(0, 0)] = sd;
    let mut rbar = Morphism::zero(cat, &u, &x.tensor(&xb));
    rbar.blocks[0][(0, 0)] = sd;
    if a == 0 {
        return Ok(StandardPair { object: x, r, rbar });
    }
    let zig = tensor(cat, &r.adjoint(), &id(cat, &xb)).compose(&tensor(cat, &id(cat, &xb), &rbar))?;
    let lambda = zig.blocks[cat.dual[a]][(0, 0)];
    if (lambda.norm() - 1.0).abs() > cat.tol.sqrt() {
        return Err(QcatError::Conjugacy(cat.labels[a].clone()));
    }
    let nu = lambda.inv();
    let rbar = rbar.scale(nu);
    let zag = tensor(cat, &id(cat, &x), &r.adjoint()).compose(&tensor(cat, &rbar, &id(cat, &x)))?;
    if zag.dist(&id(cat, &x))? > cat.tol.sqrt() {
        return Err(QcatError::Conjugacy(cat.labels[a].clone()));
    }
    Ok(StandardPair { object: x, r, rbar })
}

fn word_pair(cat: &CategoryData, w: &[usize]) -> Result<Arc<StandardPair>> {
    if let Some(p) = cat.cache.pairs.read().unwrap().get(w) {
        return Ok(p.clone());
    }
    let p = if w.len() <= 1 {
        simple_pair(cat, w.first().copied().unwrap_or(0))?
    } else {
        let y = ObjectExpr::simple(w[0]);
        let yb = y.conj(cat);
        let z = ObjectExpr::word(w[1..].to_vec());
        let zb = z.conj(cat);
        let py = word_pair(cat, &w[..1])?;
        let pz = word_pair(cat, &w[1..])?;
        let r = tensor_all(cat, &[&id(cat, &zb), &py.r, &id(cat, &z)]).compose(&pz.r)?;
        let rbar = tensor_all(cat, &[&id(cat, &y), &pz.rbar, &id(cat, &yb)]).compose(&py.rbar)?;
        StandardPair { object: ObjectExpr::word(w.to_vec()), r, rbar }
    };
    let p = Arc::new(p);
    cat.cache.pairs.write().unwrap().insert(w.to_vec(), p.clone());
    Ok(p)
}

pub fn standard_pair(cat: &CategoryData, x: &ObjectExpr) -> Result<StandardPair> {
    x.check_labels(cat)?;
    if x.summands.len() == 1 && x.summands[0].mult == 1 {
        let mut p = (*word_pair(cat, &x.summands[0].word)?).clone();
        p.object = x.clone();
        return Ok(p);
    }
    let xb = x.conj(cat);
    let u = ObjectExpr::unit();
    let mut r = Morphism::zero(cat, &u, &xb.tensor(x));
    let mut rbar = Morphism::zero(cat, &u, &x.tensor(&xb));
    for (i, s) in x.summands.iter().enumerate() {
        let wp = word_pair(cat, &s.word)?;
        for p in 0..s.mult {
            let si = summand_isometry(cat, x, i, p);
            let sbi = summand_isometry(cat, &xb, i, p);
            r = r.add(&tensor(cat, &sbi, &si).compose(&wp.r)?)?;
            rbar = rbar.add(&tensor(cat, &si, &sbi).compose(&wp.rbar)?)?;
        }
    }
    Ok(StandardPair { object: x.clone(), r, rbar })
}

/// Residuals of the two conjugacy relations and of standardness.
pub fn pair_residuals(cat: &CategoryData, p: &StandardPair) -> Result<[f64; 3]> {
    let x = &p.object;
    let xb = x.conj(cat);
    let z1 = tensor(cat, &p.r.adjoint(), &id(cat, &xb))
        .compose(&tensor(cat, &id(cat, &xb), &p.rbar))?
        .dist(&id(cat, &xb))?;
    let z2 = tensor(cat, &id(cat, x), &p.r.adjoint()).compose(&tensor(cat, &p.rbar, &id(cat, x)))?.dist(&id(cat, x))?;
    let d = x.dim(cat);
    let u = id(cat, &ObjectExpr::unit());
    let s1 = p.r.adjoint().compose(&p.r)?.dist(&u.scale_re(d))?;
    let s2 = p.rbar.adjoint().compose(&p.rbar)?.dist(&u.scale_re(d))?;
    Ok([z1, z2, s1.max(s2)])
}

/// Conjugate morphism `f̄: X̄ → Ȳ` for `f: X → Y`.
pub fn conj_morphism(cat: &CategoryData, f: &Morphism) -> Result<Morphism> {
    let x = &f.dom;
    let y = &f.cod;
    let xb = x.conj(cat);
    let yb = y.conj(cat);
    let px = standard_pair(cat, x)?;
    let py = standard_pair(cat, y)?;
    compose_all(&[
        &tensor(cat, &id(cat, &yb), &px.rbar.adjoint()),
        &tensor_all(cat, &[&id(cat, &yb), &f.adjoint(), &id(cat, &xb)]),
        &tensor(cat, &py.r, &id(cat, &xb)),
    ])
}

// ---------------------------------------------------------------------------
// Traces

/// `LTr_X(f) = (r*×1)(1×f)(r×1)` for `f ∈ Hom(Xβ, Xβ')`.
pub fn left_trace(
    cat: &CategoryData,
    f: &Morphism,
    x: &ObjectExpr,
    beta: &ObjectExpr,
    beta2: &ObjectExpr,
) -> Result<Morphism> {
    if f.dom != x.tensor(beta) || f.cod != x.tensor(beta2) {
        return Err(QcatError::Shape("left_trace: morphism is not in Hom(Xβ, Xβ')".into()));
    }
    let p = standard_pair(cat, x)?;
    let xb = x.conj(cat);
    compose_all(&[
        &tensor(cat, &p.r.adjoint(), &id(cat, beta2)),
        &tensor(cat, &id(cat, &xb), f),
        &tensor(cat, &p.r, &id(cat, beta)),
    ])
}

/// `RTr_X(f) = (1×r̄*)(f×1)(1×r̄)` for `f ∈ Hom(βX, β'X)`.
pub fn right_trace(
    cat: &CategoryData,
    f: &Morphism,
    x: &ObjectExpr,
    beta: &ObjectExpr,
    beta2: &ObjectExpr,
) -> Result<Morphism> {
    if f.dom != beta.tensor(x) || f.cod != beta2.tensor(x) {
        return Err(QcatError::Shape("right_trace: morphism is not in Hom(βX, β'X)".into()));
    }
    let p = standard_pair(cat, x)?;
    let xb = x.conj(cat);
    compose_all(&[
        &tensor(cat, &id(cat, beta2), &p.rbar.adjoint()),
        &tensor(cat, f, &id(cat, &xb)),
        &tensor(cat, &id(cat, beta), &p.rbar),
    ])
}

/// Scalar trace of an endomorphism, `Σ_c d_c tr f_c`.
pub fn trace(cat: &CategoryData, f: &Morphism) -> Result<C64> {
    if f.dom != f.cod {
        return Err(QcatError::Shape("trace of a non-endomorphism".into()));
    }
    Ok(f.blocks.iter().enumerate().map(|(c, b)| b.trace() * cat.dims[c]).sum())
}

/// Reads the scalar of an endomorphism of the unit object.
pub fn scalar(f: &Morphism) -> C64 {
    if f.blocks[0].nrows() == 1 && f.blocks[0].ncols() == 1 {
        f.blocks[0][(0, 0)]
    } else {
        C64::new(0.0, 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Frobenius reciprocity maps.
///
/// * left/down: `Hom(γ₂, αγ₁) → Hom(ᾱγ₂, γ₁)`, `t ↦ (r_α*×1)(1×t)`, `rest = γ₁`
/// * left/up: `Hom(ᾱγ₂, γ₁) → Hom(γ₂, αγ₁)`, `s ↦ (1×s)(r̄_α×1)`, `rest = γ₂`
/// * right/down: `Hom(γ₂, γ₁α) → Hom(γ₂ᾱ, γ₁)`, `t ↦ (1×r̄_α*)(t×1)`, `rest = γ₁`
/// * right/up: `Hom(γ₂ᾱ, γ₁) → Hom(γ₂, γ₁α)`, `s ↦ (s×1)(1×r_α)`, `rest = γ₂`
pub fn frobenius_rotate(
    cat: &CategoryData,
    f: &Morphism,
    alpha: &ObjectExpr,
    rest: &ObjectExpr,
    side: Side,
    dir: Direction,
) -> Result<Morphism> {
    let p = standard_pair(cat, alpha)?;
    let ab = alpha.conj(cat);
    match (side, dir) {
        (Side::Left, Direction::Down) => {
            if f.cod != alpha.tensor(rest) {
                return Err(QcatError::Shape("rotation: codomain is not αγ".into()));
            }
            tensor(cat, &p.r.adjoint(), &id(cat, rest)).compose(&tensor(cat, &id(cat, &ab), f))
        }
        (Side::Left, Direction::Up) => {
            if f.dom != ab.tensor(rest) {
                return Err(QcatError::Shape("rotation: domain is not ᾱγ".into()));
            }
            tensor(cat, &id(cat, alpha), f).compose(&tensor(cat, &p.rbar, &id(cat, rest)))
        }
        (Side::Right, Direction::Down) => {
            if f.cod != rest.tensor(alpha) {
                return Err(QcatError::Shape("rotation: codomain is not γα".into()));
            }
            tensor(cat, &id(cat, rest), &p.rbar.adjoint()).compose(&tensor(cat, f, &id(cat, &ab)))
        }
        (Side::Right, Direction::Up) => {
            if f.dom != rest.tensor(&ab) {
                return Err(QcatError::Shape("rotation: domain is not γᾱ".into()));
            }
            tensor(cat, f, &id(cat, alpha)).compose(&tensor(cat, &id(cat, rest), &p.r))
        }
    }
}

/// Basis of `Hom(X, Y)` as morphisms with a single unit matrix entry.
pub fn hom_basis(cat: &CategoryData, x: &ObjectExpr, y: &ObjectExpr) -> Vec<Morphism> {
    let mut out = Vec::new();
    for c in 0..cat.rank() {
        let (m, n) = (y.sector_mult(cat, c), x.sector_mult(cat, c));
        for j in 0..n {
            for i in 0..m {
                let mut f = Morphism::zero(cat, x, y);
                f.blocks[c][(i, j)] = re(1.0);
                out.push(f);
            }
        }
    }
    out
}

pub fn hom_dim(cat: &CategoryData, x: &ObjectExpr, y: &ObjectExpr) -> usize {
    (0..cat.rank()).map(|c| x.sector_mult(cat, c) * y.sector_mult(cat, c)).sum()
}

/// Solves for the subspace of `Hom(X, Y)` annihilated by a family of linear maps.
///
/// Returns an orthonormal basis (in block coordinates) of `{t : L(t) = 0}`.
pub fn solve_linear<F>(cat: &CategoryData, x: &ObjectExpr, y: &ObjectExpr, tol: f64, map: F) -> Result<Vec<Morphism>>
where
    F: Fn(&Morphism) -> Result<Vec<Morphism>> + Sync,
{
    use rayon::prelude::*;
    let basis = hom_basis(cat, x, y);
    let n = basis.len();
    if n == 0 {
        return Ok(vec![]);
    }
    let cols: Vec<Vec<C64>> = basis
        .par_iter()
        .map(|b| map(b).map(|vs| vs.iter().flat_map(|v| v.to_vector()).collect()))
        .collect::<Result<_>>()?;
    let rows = cols[0].len();
    let mut a = Mat::zeros(rows, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let ns = linalg::null_space(&a, tol);
    Ok((0..ns.ncols())
        .map(|j| {
            let v: Vec<C64> = ns.column(j).iter().copied().collect();
            Morphism::from_vector(cat, x, y, &v)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::cis;
    use std::f64::consts::PI;

    fn ising() -> CategoryData {
        fixtures::ising()
    }

    #[test]
    fn ising_trees() {
        let cat = ising();
        let s = 2;
        let ss = ObjectExpr::word(vec![s, s]);
        assert_eq!(ss.sector_mults(&cat), vec![1, 1, 0]);
        let sss = ObjectExpr::word(vec![s, s, s]);
        assert_eq!(sss.sector_mults(&cat), vec![0, 0, 2]);
        assert_eq!(ObjectExpr::unit().sector_mults(&cat), vec![1, 0, 0]);
    }

    #[test]
    fn tensor_of_identities() {
        let cat = ising();
        let x = ObjectExpr::word(vec![2, 1]).sum(&ObjectExpr::simple(2));
        let y = ObjectExpr::word(vec![2, 2]);
        let t = tensor(&cat, &id(&cat, &x), &id(&cat, &y));
        assert!(t.dist(&id(&cat, &x.tensor(&y))).unwrap() < 1e-12);
    }

    #[test]
    fn recoupling_is_unitary() {
        let cat = ising();
        let x = ObjectExpr::word(vec![2, 2]);
        let y = ObjectExpr::word(vec![2, 2, 2]);
        let e = embedding(&cat, &x, &y);
        for w in &e.w {
            assert!(linalg::max_abs_diff(&(w * w.adjoint()), &linalg::identity(w.nrows())) < 1e-12);
        }
    }

    #[test]
    fn ising_braiding_eigenvalues() {
        let cat = ising();
        let tau = ObjectExpr::simple(1);
        let e = braiding(&cat, &tau, &tau, Sign::Plus).unwrap();
        assert!((e.blocks[0][(0, 0)] + 1.0).norm() < 1e-12);
        let s = ObjectExpr::simple(2);
        let e = braiding(&cat, &s, &s, Sign::Plus).unwrap();
        let k = cis(PI / 8.0);
        assert!((e.blocks[0][(0, 0)] - k.inv()).norm() < 1e-12);
        assert!((e.blocks[1][(0, 0)] - k.powi(3)).norm() < 1e-12);
    }

    #[test]
    fn standard_pairs_of_words() {
        let cat = ising();
        for w in [vec![], vec![2], vec![2, 2], vec![2, 1, 2]] {
            let x = ObjectExpr::word(w);
            let p = standard_pair(&cat, &x).unwrap();
            let r = pair_residuals(&cat, &p).unwrap();
            assert!(r.iter().all(|&v| v < 1e-10), "{r:?}");
        }
        let x = ObjectExpr::simple(2).sum(&ObjectExpr::from_parts(vec![(vec![], 2)]));
        let p = standard_pair(&cat, &x).unwrap();
        assert!(pair_residuals(&cat, &p).unwrap().iter().all(|&v| v < 1e-10));
    }

    #[test]
    fn trace_of_sigma() {
        let cat = ising();
        let s = ObjectExpr::simple(2);
        let t = trace(&cat, &id(&cat, &s)).unwrap();
        assert!((t.re - 2f64.sqrt()).abs() < 1e-12);
        let u = ObjectExpr::unit();
        let lt = left_trace(&cat, &id(&cat, &s), &s, &u, &u).unwrap();
        assert!((scalar(&lt).re - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sector_isometries_resolve_identity() {
        let cat = ising();
        let x = ObjectExpr::word(vec![2, 2, 2]);
        let mut acc = Morphism::zero(&cat, &x, &x);
        for c in 0..3 {
            for k in 0..x.sector_mult(&cat, c) {
                let s = sector_isometry(&cat, &x, c, k).unwrap();
                acc = acc.add(&s.compose(&s.adjoint()).unwrap()).unwrap();
            }
        }
        assert!(acc.dist(&id(&cat, &x)).unwrap() < 1e-12);
        assert!(sector_isometry(&cat, &x, 0, 0).is_err());
    }
}
