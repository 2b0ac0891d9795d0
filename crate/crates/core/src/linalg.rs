//! Thin wrappers over faer's dense decompositions, on row-major buffers.

use faer::{Mat, MatRef, Side};
use rayon::prelude::*;

use crate::C64;

/// Thin SVD with singular values sorted in descending order.
pub(crate) struct Svd {
    /// `rows × r`, row-major.
    pub u: Vec<C64>,
    pub s: Vec<f64>,
    /// `r × cols`, row-major (this is V†).
    pub vt: Vec<C64>,
    pub rows: usize,
    pub cols: usize,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// First `k` columns of U, row-major `rows × k`.
    pub fn u_cols(&self, k: usize) -> Vec<C64> {
        let r = self.rank();
        let mut out = Vec::with_capacity(self.rows * k);
        for i in 0..self.rows {
            out.extend_from_slice(&self.u[i * r..i * r + k]);
        }
        out
    }

    /// First `k` rows of V†, row-major `k × cols`.
    pub fn vt_rows(&self, k: usize) -> Vec<C64> {
        self.vt[..k * self.cols].to_vec()
    }
}

fn to_mat(data: &[C64], rows: usize, cols: usize) -> Mat<C64> {
    Mat::from_fn(rows, cols, |i, j| data[i * cols + j])
}

fn from_mat(m: MatRef<'_, C64>) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// `M·M†` for a row-major `rows × cols` matrix, written straight into a
/// row-major `rows × rows` buffer.
pub(crate) fn gram(m: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows * rows];
    // upper triangle row by row, then mirror
    out.par_chunks_mut(rows).enumerate().for_each(|(i, row)| {
        let a = &m[i * cols..(i + 1) * cols];
        for (j, cell) in row.iter_mut().enumerate().skip(i) {
            *cell = dot_conj(a, &m[j * cols..(j + 1) * cols]);
        }
    });
    for i in 0..rows {
        for j in 0..i {
            out[i * rows + j] = out[j * rows + i].conj();
        }
    }
    out
}

/// `Σ a_t conj(b_t)`.
fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    let (mut re, mut im) = ([0.0f64; 4], [0.0f64; 4]);
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            re[k] += x[k].re * y[k].re + x[k].im * y[k].im;
            im[k] += x[k].im * y[k].re - x[k].re * y[k].im;
        }
    }
    let mut acc = C64::new(re.iter().sum(), im.iter().sum());
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        acc += x * y.conj();
    }
    acc
}

/// SVD of a row-major `rows × cols` matrix.
pub(crate) fn svd(data: &[C64], rows: usize, cols: usize) -> Svd {
    let dec = to_mat(data, rows, cols)
        .thin_svd()
        .expect("svd failed to converge");
    let (u, v, sv) = (dec.U(), dec.V(), dec.S().column_vector());
    let r = sv.nrows();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        sv[b].re
            .partial_cmp(&sv[a].re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut u_out = Vec::with_capacity(rows * r);
    for i in 0..rows {
        for &k in &order {
            u_out.push(u[(i, k)]);
        }
    }
    let mut vt_out = Vec::with_capacity(r * cols);
    for &k in &order {
        for j in 0..cols {
            vt_out.push(v[(j, k)].conj());
        }
    }
    Svd {
        u: u_out,
        s: order.iter().map(|&k| sv[k].re).collect(),
        vt: vt_out,
        rows,
        cols,
    }
}

/// Thin QR of a row-major `rows × cols` matrix: `Q` is `rows × p`, `R` is
/// `p × cols` with `p = min(rows, cols)`.
pub(crate) fn qr(data: &[C64], rows: usize, cols: usize) -> (Vec<C64>, Vec<C64>) {
    let dec = to_mat(data, rows, cols).qr();
    (from_mat(dec.compute_thin_Q().as_ref()), from_mat(dec.thin_R()))
}

/// Conjugate transpose of a row-major `rows × cols` matrix.
pub(crate) fn dagger(data: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(rows * cols);
    for j in 0..cols {
        for i in 0..rows {
            out.push(data[i * cols + j].conj());
        }
    }
    out
}

/// `A† B` for row-major `A: k × m`, `B: k × n`.
pub(crate) fn dagger_matmul(a: &[C64], b: &[C64], k: usize, m: usize, n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    for p in 0..k {
        let arow = &a[p * m..(p + 1) * m];
        let brow = &b[p * n..(p + 1) * n];
        for (i, av) in arow.iter().enumerate() {
            let av = av.conj();
            if av.re == 0.0 && av.im == 0.0 {
                continue;
            }
            for (o, bv) in out[i * n..(i + 1) * n].iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}

/// Largest deviation of `A†A` (`A: rows × cols`) from the identity.
pub(crate) fn isometry_error(a: &[C64], rows: usize, cols: usize) -> f64 {
    let g = dagger_matmul(a, a, rows, cols, cols);
    let mut worst = 0.0f64;
    for i in 0..cols {
        for j in 0..cols {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[i * cols + j] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian row-major `dim × dim` matrix, ascending.
pub(crate) fn hermitian_eigenvalues(data: &[C64], dim: usize) -> Vec<f64> {
    let mut vals = to_mat(data, dim, dim)
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("eigendecomposition failed to converge");
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

/// Smallest eigenvalue of the real symmetric tridiagonal matrix with
/// diagonal `alpha` and off-diagonal `beta`.
pub(crate) fn tridiagonal_min(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let m = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if j == i + 1 {
            beta[i]
        } else if i == j + 1 {
            beta[j]
        } else {
            0.0
        }
    });
    m.self_adjoint_eigenvalues(Side::Lower)
        .expect("eigendecomposition failed to converge")
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}
