//! Dense complex tensors and the pairwise contraction primitive.
//!
//! Storage is a flat row-major `Vec<C64>` plus a shape. Every higher layer
//! (networks, tensor trains, the gradient tape) reduces its work to
//! [`contract_pair`], which permutes both operands into matrix form and runs a
//! single GEMM-shaped kernel.

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    /// Builds a tensor from a shape and row-major data.
    ///
    /// An empty shape is a scalar holding exactly one entry.
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.iter().any(|&e| e < 1) {
            return Err(Error::InvalidExtent(shape));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeMismatch {
                shape,
                expected,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("tensor entries must be finite".into()));
        }
        Ok(Self { shape, data })
    }

    /// Skips validation; callers guarantee `data.len() == product(shape)`.
    pub(crate) fn from_parts(shape: Vec<usize>, data: Vec<C64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn scalar(value: C64) -> Self {
        Self::from_parts(Vec::new(), vec![value])
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self::from_parts(shape, vec![C64::new(0.0, 0.0); len])
    }

    /// `dim × dim` identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(vec![dim, dim]);
        for i in 0..dim {
            t.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        t
    }

    pub fn from_real(shape: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(shape, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Value of a rank-0 (or single-entry) tensor.
    pub fn scalar_value(&self) -> Option<C64> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        let mut off = 0;
        for (&i, &e) in index.iter().zip(&self.shape) {
            off = off * e + i;
        }
        self.data[off]
    }

    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        let mut t = self.clone();
        t.reshape_in_place(shape)?;
        Ok(t)
    }

    pub fn reshape_in_place(&mut self, shape: Vec<usize>) -> Result<()> {
        if shape.iter().any(|&e| e < 1) {
            return Err(Error::InvalidExtent(shape));
        }
        let expected: usize = shape.iter().product();
        if expected != self.data.len() {
            return Err(Error::ShapeMismatch {
                shape,
                expected,
                got: self.data.len(),
            });
        }
        self.shape = shape;
        Ok(())
    }

    /// Reorders axes: output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.rank())?;
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        Ok(permute_unchecked(self, perm))
    }

    pub fn conj(&self) -> Self {
        Self::from_parts(self.shape.clone(), self.data.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_parts(self.shape.clone(), self.data.iter().map(|z| z * factor).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::SizeMismatch(format!(
                "cannot add shapes {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Self::from_parts(
            self.shape.clone(),
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Largest entrywise modulus of `self - other`; shapes must match.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape, "max_abs_diff on different shapes");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖self − other‖ / max(‖other‖, tiny)` in the Frobenius norm.
    pub fn rel_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape, "rel_distance on different shapes");
        let diff: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        diff / frobenius_norm(other).max(f64::MIN_POSITIVE)
    }
}

fn check_permutation(perm: &[usize], rank: usize) -> Result<()> {
    if perm.len() != rank {
        return Err(Error::ShapeError(format!(
            "permutation of length {} for rank {rank}",
            perm.len()
        )));
    }
    let mut seen = vec![false; rank];
    for &p in perm {
        if p >= rank {
            return Err(Error::AxisOutOfRange { axis: p, rank });
        }
        if seen[p] {
            return Err(Error::DuplicateAxis(p));
        }
        seen[p] = true;
    }
    Ok(())
}

pub(crate) fn permute_unchecked(t: &DenseTensor, perm: &[usize]) -> DenseTensor {
    let rank = t.rank();
    let new_shape: Vec<usize> = perm.iter().map(|&p| t.shape[p]).collect();
    if t.data.len() <= 1 {
        return DenseTensor::from_parts(new_shape, t.data.clone());
    }
    let mut src_strides = vec![1usize; rank];
    for k in (0..rank.saturating_sub(1)).rev() {
        src_strides[k] = src_strides[k + 1] * t.shape[k + 1];
    }
    let strides: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();

    // Odometer over the destination, innermost axis unrolled.
    let inner = new_shape[rank - 1];
    let inner_stride = strides[rank - 1];
    let mut out = Vec::with_capacity(t.data.len());
    let mut idx = vec![0usize; rank - 1];
    let mut base = 0usize;
    loop {
        for j in 0..inner {
            out.push(t.data[base + j * inner_stride]);
        }
        let mut k = rank - 1;
        loop {
            if k == 0 {
                return DenseTensor::from_parts(new_shape, out);
            }
            k -= 1;
            idx[k] += 1;
            base += strides[k];
            if idx[k] < new_shape[k] {
                break;
            }
            base -= strides[k] * new_shape[k];
            idx[k] = 0;
        }
    }
}

/// Row-major `m×k` times `k×n`.
pub(crate) fn matmul(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    if n == 1 {
        for i in 0..m {
            let row = &a[i * k..(i + 1) * k];
            out[i] = row.iter().zip(b).map(|(x, y)| x * y).sum();
        }
        return out;
    }
    for i in 0..m {
        let orow = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip.re == 0.0 && aip.im == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, bv) in orow.iter_mut().zip(brow) {
                *o += aip * bv;
            }
        }
    }
    out
}

fn validate_axes(rank: usize, axes: &[usize]) -> Result<()> {
    let mut seen = vec![false; rank];
    for &ax in axes {
        if ax >= rank {
            return Err(Error::AxisOutOfRange { axis: ax, rank });
        }
        if seen[ax] {
            return Err(Error::DuplicateAxis(ax));
        }
        seen[ax] = true;
    }
    Ok(())
}

/// Sums `a` and `b` over the paired axes.
///
/// The result carries the free axes of `a` in their original order followed by
/// the free axes of `b`. With no paired axes this is the outer product.
pub fn contract_pair(
    a: &DenseTensor,
    a_axes: &[usize],
    b: &DenseTensor,
    b_axes: &[usize],
) -> Result<DenseTensor> {
    if a_axes.len() != b_axes.len() {
        return Err(Error::AxisMismatch(format!(
            "{} axes on the left, {} on the right",
            a_axes.len(),
            b_axes.len()
        )));
    }
    validate_axes(a.rank(), a_axes)?;
    validate_axes(b.rank(), b_axes)?;
    for (&i, &j) in a_axes.iter().zip(b_axes) {
        if a.shape[i] != b.shape[j] {
            return Err(Error::AxisMismatch(format!(
                "axis {i} has extent {} but axis {j} has extent {}",
                a.shape[i], b.shape[j]
            )));
        }
    }
    Ok(contract_pair_unchecked(a, a_axes, b, b_axes))
}

pub(crate) fn contract_pair_unchecked(
    a: &DenseTensor,
    a_axes: &[usize],
    b: &DenseTensor,
    b_axes: &[usize],
) -> DenseTensor {
    let a_free: Vec<usize> = (0..a.rank()).filter(|ax| !a_axes.contains(ax)).collect();
    let b_free: Vec<usize> = (0..b.rank()).filter(|ax| !b_axes.contains(ax)).collect();

    let a_perm: Vec<usize> = a_free.iter().chain(a_axes).copied().collect();
    let b_perm: Vec<usize> = b_axes.iter().chain(&b_free).copied().collect();
    let a_mat = permuted_data(a, &a_perm);
    let b_mat = permuted_data(b, &b_perm);

    let m: usize = a_free.iter().map(|&ax| a.shape[ax]).product();
    let k: usize = a_axes.iter().map(|&ax| a.shape[ax]).product();
    let n: usize = b_free.iter().map(|&ax| b.shape[ax]).product();
    let data = matmul(&a_mat, &b_mat, m, k, n);

    let shape = a_free
        .iter()
        .map(|&ax| a.shape[ax])
        .chain(b_free.iter().map(|&ax| b.shape[ax]))
        .collect();
    DenseTensor::from_parts(shape, data)
}

fn permuted_data<'a>(t: &'a DenseTensor, perm: &[usize]) -> std::borrow::Cow<'a, [C64]> {
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        std::borrow::Cow::Borrowed(&t.data)
    } else {
        std::borrow::Cow::Owned(permute_unchecked(t, perm).data)
    }
}

/// Conjugate transpose. Even-rank tensors are read as operators whose first
/// half of axes are rows and second half columns.
pub fn adjoint(a: &DenseTensor) -> Result<DenseTensor> {
    let rank = a.rank();
    if !rank.is_multiple_of(2) {
        return Err(Error::ShapeError(format!(
            "rank {rank} tensor has no row/column split"
        )));
    }
    let half = rank / 2;
    let perm: Vec<usize> = (half..rank).chain(0..half).collect();
    Ok(permute_unchecked(a, &perm).conj())
}

pub fn frobenius_norm(a: &DenseTensor) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
