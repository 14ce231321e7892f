//! Dense linear algebra on `ndarray` storage, backed by `faer` kernels.
//!
//! Matrices live in `ndarray` arrays throughout the crate; the heavy kernels
//! (GEMM, Hermitian eigendecomposition, LU, QR) borrow them as `faer` views
//! without copying.

use faer::traits::ComplexField;
use faer::{Accum, MatMut, MatRef, Side};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::complex_normal;

pub type CMatrix = Array2<Complex64>;
pub type CVector = Array1<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn as_faer<'a, T>(a: &ArrayView2<'a, T>) -> MatRef<'a, T> {
    let (r, c) = a.dim();
    let s = a.strides();
    // SAFETY: the view keeps the buffer alive for 'a and ndarray strides are
    // element strides, which is what faer expects.
    unsafe { MatRef::from_raw_parts(a.as_ptr(), r, c, s[0], s[1]) }
}

fn as_faer_mut<'a, T>(a: &'a mut ArrayViewMut2<'_, T>) -> MatMut<'a, T> {
    let (r, c) = a.dim();
    let (s0, s1) = (a.strides()[0], a.strides()[1]);
    // SAFETY: exclusive borrow of the view for 'a.
    unsafe { MatMut::from_raw_parts_mut(a.as_mut_ptr(), r, c, s0, s1) }
}

fn to_ndarray<T: Copy>(m: MatRef<'_, T>) -> Array2<T> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    None,
    Adjoint,
}

fn gemm<T>(a: ArrayView2<T>, op_a: Op, b: ArrayView2<T>, op_b: Op) -> Array2<T>
where
    T: ComplexField + Copy + Default,
{
    let fa = as_faer(&a);
    let fb = as_faer(&b);
    let (m, k) = match op_a {
        Op::None => (fa.nrows(), fa.ncols()),
        Op::Adjoint => (fa.ncols(), fa.nrows()),
    };
    let (k2, n) = match op_b {
        Op::None => (fb.nrows(), fb.ncols()),
        Op::Adjoint => (fb.ncols(), fb.nrows()),
    };
    assert_eq!(k, k2, "inner dimensions differ: {k} vs {k2}");
    let mut out = Array2::<T>::default((m, n));
    if m == 0 || n == 0 {
        return out;
    }
    let one = T::one_impl();
    let par = faer::get_global_parallelism();
    {
        let mut view = out.view_mut();
        let dst = as_faer_mut(&mut view);
        match (op_a, op_b) {
            (Op::None, Op::None) => faer::linalg::matmul::matmul(dst, Accum::Replace, fa, fb, one, par),
            (Op::Adjoint, Op::None) => {
                faer::linalg::matmul::matmul(dst, Accum::Replace, fa.adjoint(), fb, one, par)
            }
            (Op::None, Op::Adjoint) => {
                faer::linalg::matmul::matmul(dst, Accum::Replace, fa, fb.adjoint(), one, par)
            }
            (Op::Adjoint, Op::Adjoint) => {
                faer::linalg::matmul::matmul(dst, Accum::Replace, fa.adjoint(), fb.adjoint(), one, par)
            }
        }
    }
    out
}

/// `a * b`
pub fn matmul<T>(a: ArrayView2<T>, b: ArrayView2<T>) -> Array2<T>
where
    T: ComplexField + Copy + Default,
{
    gemm(a, Op::None, b, Op::None)
}

/// `a^† * b`
pub fn matmul_adj_lhs<T>(a: ArrayView2<T>, b: ArrayView2<T>) -> Array2<T>
where
    T: ComplexField + Copy + Default,
{
    gemm(a, Op::Adjoint, b, Op::None)
}

/// `a * b^†`
pub fn matmul_adj_rhs<T>(a: ArrayView2<T>, b: ArrayView2<T>) -> Array2<T>
where
    T: ComplexField + Copy + Default,
{
    gemm(a, Op::None, b, Op::Adjoint)
}

pub fn matvec(a: ArrayView2<Complex64>, x: ArrayView1<Complex64>) -> CVector {
    let col = x.insert_axis(Axis(1));
    matmul(a, col).remove_axis(Axis(1))
}

pub fn identity(n: usize) -> CMatrix {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { ONE } else { ZERO })
}

pub fn to_complex(a: ArrayView2<f64>) -> CMatrix {
    a.mapv(|x| Complex64::new(x, 0.0))
}

/// Largest entry of `|A - A^†|`.
pub fn hermitian_defect(a: ArrayView2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(a: ArrayView2<Complex64>) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub fn frobenius_norm(a: ArrayView2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vector_norm(x: ArrayView1<Complex64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Make the largest-magnitude component of every column real and positive.
/// Ties go to the lowest row index.
pub fn fix_column_phases(v: &mut CMatrix) {
    for mut col in v.columns_mut() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for (i, z) in col.iter().enumerate() {
            let a = z.norm();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if best_abs > 0.0 {
            let phase = col[best].conj() / best_abs;
            col.mapv_inplace(|z| z * phase);
        }
    }
}

fn fix_column_signs(v: &mut Array2<f64>) {
    for mut col in v.columns_mut() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
}

/// Hermitian eigendecomposition: eigenvalues ascending, eigenvectors in
/// columns under the largest-component-real-positive phase convention.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Array1<f64>,
    pub vectors: CMatrix,
}

pub fn eigh(a: ArrayView2<Complex64>) -> Result<HermitianEigen> {
    square(a.nrows(), a.ncols())?;
    let evd = as_faer(&a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver did not converge: {e:?}")))?;
    let s = evd.S();
    let values = Array1::from_shape_fn(a.nrows(), |i| s[i].re);
    let mut vectors = to_ndarray(evd.U());
    fix_column_phases(&mut vectors);
    Ok(HermitianEigen { values, vectors })
}

/// Real symmetric eigendecomposition with the same conventions as [`eigh`].
pub fn eigh_real(a: ArrayView2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    square(a.nrows(), a.ncols())?;
    let evd = as_faer(&a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver did not converge: {e:?}")))?;
    let s = evd.S();
    let values = Array1::from_shape_fn(a.nrows(), |i| s[i]);
    let mut vectors = to_ndarray(evd.U());
    fix_column_signs(&mut vectors);
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(a: ArrayView2<Complex64>) -> Result<Array1<f64>> {
    square(a.nrows(), a.ncols())?;
    let vals = as_faer(&a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver did not converge: {e:?}")))?;
    Ok(Array1::from(vals))
}

pub fn eigvalsh_real(a: ArrayView2<f64>) -> Result<Array1<f64>> {
    square(a.nrows(), a.ncols())?;
    let vals = as_faer(&a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver did not converge: {e:?}")))?;
    Ok(Array1::from(vals))
}

/// Solve `a x = b` by partially pivoted LU.
pub fn solve(a: ArrayView2<Complex64>, b: ArrayView2<Complex64>) -> CMatrix {
    use faer::linalg::solvers::Solve;
    let lu = as_faer(&a).partial_piv_lu();
    let x = lu.solve(as_faer(&b));
    to_ndarray(x.as_ref())
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// diagonal of R made real-positive.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = Array2::from_shape_simple_fn((n, n), || complex_normal(rng));
    let qr = as_faer(&z.view()).qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let mut out = to_ndarray(q.as_ref());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        out.column_mut(j).mapv_inplace(|x| x * phase);
    }
    out
}

/// Unnormalized sinc, `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Ceiling that snaps values within a relative 1e-10 of an integer onto it,
/// so quantities that are integral up to roundoff do not jump by one.
pub fn ceil_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-10 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn square(r: usize, c: usize) -> Result<()> {
    if r != c {
        return Err(Error::DimensionMismatch { expected: r, found: c });
    }
    Ok(())
}
