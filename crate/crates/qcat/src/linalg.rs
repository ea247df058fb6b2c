//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Largest absolute entry, zero for empty matrices.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn hermitize(h: &Mat) -> Mat {
    (h + h.adjoint()) * re(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(h: &Mat) -> (Vec<f64>, Mat) {
    let n = h.nrows();
    if n == 0 {
        return (vec![], Mat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitize(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn herm_fn(h: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = herm_eig(h);
    let n = vals.len();
    let mut d = Mat::zeros(n, n);
    for (i, v) in vals.iter().enumerate() {
        d[(i, i)] = re(f(*v));
    }
    &vecs * d * vecs.adjoint()
}

/// Orthonormal basis of the kernel of `a`, singular values below `tol * max(1, |a|)`.
pub fn null_space(a: &Mat, tol: f64) -> Mat {
    let (m, n) = a.shape();
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    if m == 0 {
        return identity(n);
    }
    let padded = if m < n {
        let mut p = Mat::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let thr = tol * smax.max(1.0);
    let cols: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= thr).collect();
    let mut out = Mat::zeros(n, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        let row = v_t.row(i).adjoint();
        out.set_column(k, &row);
    }
    canonical_phases(&mut out);
    out
}

/// Fixes the phase of each column so that its largest entry is real positive.
pub fn canonical_phases(basis: &mut Mat) {
    for j in 0..basis.ncols() {
        let mut best = 0;
        let mut bn = -1.0;
        for i in 0..basis.nrows() {
            let v = basis[(i, j)].norm();
            if v > bn + 1e-12 {
                bn = v;
                best = i;
            }
        }
        if bn > 0.0 {
            let ph = basis[(best, j)] / bn;
            let inv = ph.conj();
            for i in 0..basis.nrows() {
                basis[(i, j)] *= inv;
            }
        }
    }
}

/// Orthonormal basis of the range of a (near) projection.
pub fn range_basis(p: &Mat) -> Mat {
    let (vals, vecs) = herm_eig(p);
    let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    let mut out = Mat::zeros(p.nrows(), cols.len());
    for (k, &i) in cols.iter().enumerate() {
        out.set_column(k, &vecs.column(i));
    }
    canonical_phases(&mut out);
    out
}

/// Unitary factor of the polar decomposition.
pub fn polar_unitary(m: &Mat) -> Mat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Minimum-norm least squares solution of `a x = b`.
pub fn least_squares(a: &Mat, b: &Mat, tol: f64) -> Mat {
    if a.ncols() == 0 {
        return Mat::zeros(0, b.ncols());
    }
    if a.nrows() == 0 {
        return Mat::zeros(a.ncols(), b.ncols());
    }
    let svd = a.clone().svd(true, true);
    svd.solve(b, tol).expect("svd solve")
}

pub fn trace(m: &Mat) -> C64 {
    m.diagonal().iter().sum()
}

/// Groups sorted real values into clusters of nearly equal values.
pub fn cluster(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for i in idx {
        if out.is_empty() || values[i] - last > gap {
            out.push(vec![i]);
        } else {
            out.last_mut().unwrap().push(i);
        }
        last = values[i];
    }
    out
}
