//! Dense LU factorization with partial pivoting over real or complex entries.

use std::ops::{Div, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;

/// Pivot magnitudes below this fraction of the largest matrix entry are
/// treated as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

pub trait Scalar:
    Copy + Zero + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular {
    /// Elimination step at which the pivot fell below threshold.
    pub step: usize,
    pub pivot: f64,
    pub scale: f64,
}

/// Square row-major matrix factored in place as `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self, Singular> {
        assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.modulus()));
        let threshold = SINGULAR_PIVOT_RATIO * scale;
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|r| (r, a[r * n + k].modulus()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if !(pivot > threshold) {
                return Err(Singular {
                    step: k,
                    pivot,
                    scale,
                });
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / d;
                a[r * n + k] = f;
                if f.is_zero() {
                    continue;
                }
                for c in k + 1..n {
                    let u = a[k * n + c];
                    a[r * n + c] = a[r * n + c] - f * u;
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc = acc - self.lu[r * n + c] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc = acc - self.lu[r * n + c] * x[c];
            }
            x[r] = acc / self.lu[r * n + r];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec<T: Scalar + std::ops::Add<Output = T>>(n: usize, a: &[T], x: &[T]) -> Vec<T> {
        (0..n)
            .map(|r| (0..n).fold(T::zero(), |acc, c| acc + a[r * n + c] * x[c]))
            .collect()
    }

    #[test]
    fn solves_real_system_needing_pivot() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x_true = [1.0, -2.0, 0.5];
        let b = matvec(3, &a, &x_true);
        let x = Lu::factor(3, a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(x_true) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn solves_complex_system() {
        let c = |re, im| Complex64::new(re, im);
        let a = vec![c(1.0, 2.0), c(0.0, 1.0), c(-1.0, 0.5), c(3.0, -1.0)];
        let x_true = [c(0.3, -0.2), c(1.0, 1.0)];
        let b = matvec(2, &a, &x_true);
        let x = Lu::factor(2, a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(x_true) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn reports_singular_matrix() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        let err = Lu::factor(2, a).unwrap_err();
        assert_eq!(err.step, 1);
        assert!(Lu::<f64>::factor(2, vec![0.0; 4]).is_err());
    }
}
