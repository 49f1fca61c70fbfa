//! Dense matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant, for real or complex entries.

use ndarray::{Array2, ArrayView2, LinalgScalar};
use num_complex::Complex64;
use thiserror::Error;

/// Largest 1-norm accepted on input.
pub const MAX_INPUT_NORM: f64 = 1e6;

// Backward-error bound for the [13/13] approximant in double precision.
const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpmError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix 1-norm {0:e} is too large to exponentiate")]
    Overflow(f64),
    #[error("Padé denominator is singular")]
    Singular,
}

/// Entry types [`expm`] accepts: `f64` and `Complex64`.
pub trait Scalar: LinalgScalar + Send + Sync + std::fmt::Debug {
    fn magnitude(self) -> f64;
    fn from_real(x: f64) -> Self;
    fn finite(self) -> bool;
    /// Zeroes components smaller than `floor`.
    fn flushed(self, floor: f64) -> Self;
}

fn flush(x: f64, floor: f64) -> f64 {
    if x.abs() < floor {
        0.0
    } else {
        x
    }
}

impl Scalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn flushed(self, floor: f64) -> Self {
        flush(self, floor)
    }
}

impl Scalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn flushed(self, floor: f64) -> Self {
        Complex64::new(flush(self.re, floor), flush(self.im, floor))
    }
}

pub fn one_norm<T: Scalar>(a: &ArrayView2<T>) -> f64 {
    a.columns().into_iter().map(|c| c.iter().map(|v| v.magnitude()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(a)`.
pub fn expm<T: Scalar>(a: &ArrayView2<T>) -> Result<Array2<T>, ExpmError> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(ExpmError::NotSquare { rows, cols });
    }
    if a.iter().any(|v| !v.finite()) {
        return Err(ExpmError::NonFinite);
    }
    let n = rows;
    let eye = Array2::<T>::eye(n);
    let norm = one_norm(a);
    if norm == 0.0 {
        return Ok(eye);
    }
    if norm > MAX_INPUT_NORM {
        return Err(ExpmError::Overflow(norm));
    }

    let squarings = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scale = T::from_real(2f64.powi(-squarings));
    let a = a.mapv(|v| v * scale);

    let b = |i: usize| T::from_real(PADE_13[i]);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = a6.mapv(|v| v * b(13)) + a4.mapv(|v| v * b(11)) + a2.mapv(|v| v * b(9));
    let u_poly = a6.dot(&u_inner)
        + a6.mapv(|v| v * b(7))
        + a4.mapv(|v| v * b(5))
        + a2.mapv(|v| v * b(3))
        + eye.mapv(|v| v * b(1));
    let u = a.dot(&u_poly);

    let v_inner = a6.mapv(|v| v * b(12)) + a4.mapv(|v| v * b(10)) + a2.mapv(|v| v * b(8));
    let v = a6.dot(&v_inner)
        + a6.mapv(|v| v * b(6))
        + a4.mapv(|v| v * b(4))
        + a2.mapv(|v| v * b(2))
        + eye.mapv(|v| v * b(0));

    let mut result = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        flush_negligible(&mut result);
        result = result.dot(&result);
    }
    if result.iter().any(|v| !v.finite()) {
        return Err(ExpmError::Overflow(norm));
    }
    Ok(result)
}

/// Entries of banded exponentials decay far from the diagonal, and once
/// they reach the subnormal range every product touching them is an order
/// of magnitude slower. Anything this small is far below the rounding
/// error of the O(1) entries, so it is set to zero.
fn flush_negligible<T: Scalar>(m: &mut Array2<T>) {
    m.mapv_inplace(|v| v.flushed(1e-200));
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting, on
/// row-major copies so the inner loops run over contiguous rows.
fn solve<T: Scalar>(a: &Array2<T>, b: &Array2<T>) -> Result<Array2<T>, ExpmError> {
    let n = a.nrows();
    let m = b.ncols();
    let mut lu: Vec<T> = a.iter().copied().collect();
    let mut x: Vec<T> = b.iter().copied().collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| lu[i * n + col].magnitude().total_cmp(&lu[j * n + col].magnitude()))
            .unwrap_or(col);
        let pivot = lu[pivot_row * n + col];
        if pivot.magnitude() == 0.0 {
            return Err(ExpmError::Singular);
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap(col * n + j, pivot_row * n + j);
            }
            for j in 0..m {
                x.swap(col * m + j, pivot_row * m + j);
            }
        }
        let (lu_head, lu_tail) = lu.split_at_mut((col + 1) * n);
        let lu_pivot = &lu_head[col * n + col..(col + 1) * n];
        let (x_head, x_tail) = x.split_at_mut((col + 1) * m);
        let x_pivot = &x_head[col * m..];
        for (lu_row, x_row) in lu_tail.chunks_exact_mut(n).zip(x_tail.chunks_exact_mut(m)) {
            let factor = lu_row[col] / pivot;
            if factor.magnitude() == 0.0 {
                continue;
            }
            for (v, &p) in lu_row[col..].iter_mut().zip(lu_pivot) {
                *v = *v - factor * p;
            }
            for (v, &p) in x_row.iter_mut().zip(x_pivot) {
                *v = *v - factor * p;
            }
        }
    }
    for col in (0..n).rev() {
        let (x_head, x_tail) = x.split_at_mut((col + 1) * m);
        let row = &mut x_head[col * m..];
        for (k, x_k) in x_tail.chunks_exact(m).enumerate() {
            let coeff = lu[col * n + col + 1 + k];
            if coeff.magnitude() != 0.0 {
                for (v, &w) in row.iter_mut().zip(x_k) {
                    *v = *v - coeff * w;
                }
            }
        }
        let inv = T::one() / lu[col * n + col];
        row.iter_mut().for_each(|v| *v = *v * inv);
    }
    Ok(Array2::from_shape_vec((n, m), x).expect("shape matches buffer"))
}
