//! Dense complex linear algebra for the tiny systems this crate meets.
//!
//! Matrices here are 2x2 or 3x3 (effective and full drift), so the code
//! favours clarity over blocking. Storage is row-major in a flat slice.

use num_complex::Complex;

use crate::scalar::Real;

/// y = A x for a row-major n x n matrix.
pub fn mat_vec<T: Real>(n: usize, a: &[Complex<T>], x: &[Complex<T>]) -> Vec<Complex<T>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(x.len(), n);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a[i * n + j] * x[j])
                .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v)
        })
        .collect()
}

/// Solve A x = b in place by Gaussian elimination with partial pivoting.
///
/// On success `b` holds the solution and `a` is destroyed. Returns `None`
/// when a pivot vanishes to working precision, i.e. the matrix is singular.
pub fn solve_in_place<T: Real>(n: usize, a: &mut [Complex<T>], b: &mut [Complex<T>]) -> Option<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .norm_sqr()
                    .partial_cmp(&a[s * n + col].norm_sqr())
                    .expect("pivot magnitudes must be comparable")
            })
            .expect("column range is nonempty");
        if a[pivot_row * n + col].norm_sqr() == T::zero() {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }

        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor.norm_sqr() == T::zero() {
                continue;
            }
            for j in col..n {
                let sub = factor * a[col * n + j];
                a[row * n + j] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }

    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= a[row * n + j] * b[j];
        }
        b[row] = acc / a[row * n + row];
    }
    Some(())
}
