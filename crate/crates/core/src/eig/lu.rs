//! LU factorizations with partial pivoting.

use crate::lattice::DenseMatrix;
use crate::scalar::{cabs1, cone, czero, Real, C};

/// Dense LU with row pivoting, stored in place.
pub(crate) struct DenseLu<T> {
    n: usize,
    lu: Vec<C<T>>,
    piv: Vec<usize>,
    swaps: usize,
}

impl<T: Real> DenseLu<T> {
    /// Factor `m - shift * I`. Exactly singular pivots are replaced by `floor`.
    pub(crate) fn new(m: &DenseMatrix<T>, shift: C<T>, floor: T) -> Self {
        let n = m.dim();
        let mut lu: Vec<C<T>> = m.as_slice().to_vec();
        for i in 0..n {
            lu[i * n + i] = lu[i * n + i] - shift;
        }
        let mut piv: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| {
                    cabs1(lu[a * n + k])
                        .partial_cmp(&cabs1(lu[b * n + k]))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(k);
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
                swaps += 1;
            }
            let mut pivot = lu[k * n + k];
            if cabs1(pivot) == T::zero() {
                pivot = C::new(floor, T::zero());
                lu[k * n + k] = pivot;
            }
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != czero() {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] = lu[i * n + j] - f * u;
                    }
                }
            }
        }
        DenseLu { n, lu, piv, swaps }
    }

    pub(crate) fn determinant(&self) -> C<T> {
        let n = self.n;
        let mut d = if self.swaps.is_multiple_of(2) { cone() } else { -cone::<T>() };
        for i in 0..n {
            d = d * self.lu[i * n + i];
        }
        d
    }

    pub(crate) fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        let mut x: Vec<C<T>> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        back_substitute(&self.lu, n, &mut x);
        x
    }
}

/// Solve `U x = b` in place for row-major upper-triangular `u`, returning a
/// positive multiple of the solution. Whenever an entry would leave the safe
/// range everything computed so far is scaled down, so a nearly singular `u`
/// yields a finite vector along the true solution instead of overflowing.
fn back_substitute<T: Real>(u: &[C<T>], n: usize, x: &mut [C<T>]) {
    let big = T::max_value().sqrt() / T::of_usize(n.max(1));
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s = s - u[i * n + j] * x[j];
        }
        let d = u[i * n + i];
        // |s| / |d| > big, tested without dividing
        let excess = cabs1(s) / big;
        if excess > cabs1(d) {
            let scale = cabs1(d) / excess;
            for z in x.iter_mut() {
                *z = *z * scale;
            }
            s = s * scale;
        }
        x[i] = s / d;
    }
}

/// Determinant of `m - shift * I` by partial-pivoting LU.
pub fn determinant<T: Real>(m: &DenseMatrix<T>, shift: C<T>) -> C<T> {
    DenseLu::new(m, shift, T::zero()).determinant()
}

/// LU of an upper-Hessenberg `h - shift * I`; pivoting only between adjacent rows.
pub(crate) struct HessenbergLu<T> {
    n: usize,
    u: Vec<C<T>>,
    mult: Vec<C<T>>,
    swapped: Vec<bool>,
}

impl<T: Real> HessenbergLu<T> {
    pub(crate) fn new(h: &[C<T>], n: usize, shift: C<T>, floor: T) -> Self {
        let mut u = h.to_vec();
        for i in 0..n {
            u[i * n + i] = u[i * n + i] - shift;
        }
        let mut mult = vec![czero(); n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            if cabs1(u[(k + 1) * n + k]) > cabs1(u[k * n + k]) {
                for j in k..n {
                    u.swap(k * n + j, (k + 1) * n + j);
                }
                swapped[k] = true;
            }
            if cabs1(u[k * n + k]) == T::zero() {
                u[k * n + k] = C::new(floor, T::zero());
            }
            let f = u[(k + 1) * n + k] / u[k * n + k];
            mult[k] = f;
            u[(k + 1) * n + k] = czero();
            if f != czero() {
                for j in k + 1..n {
                    let a = u[k * n + j];
                    u[(k + 1) * n + j] = u[(k + 1) * n + j] - f * a;
                }
            }
        }
        if n > 0 && cabs1(u[(n - 1) * n + n - 1]) == T::zero() {
            u[(n - 1) * n + n - 1] = C::new(floor, T::zero());
        }
        HessenbergLu { n, u, mult, swapped }
    }

    pub(crate) fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                x.swap(k, k + 1);
            }
            x[k + 1] = x[k + 1] - self.mult[k] * x[k];
        }
        back_substitute(&self.u, n, &mut x);
        x
    }
}
