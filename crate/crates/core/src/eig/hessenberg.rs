//! Householder reduction to upper-Hessenberg form.

use crate::scalar::{cabs, czero, Real, C};

/// Reduce the row-major `n x n` matrix `a` in place. When `q` is given it is
/// overwritten with the accumulated unitary factor, `A = Q H Q^*`.
pub(crate) fn reduce<T: Real>(a: &mut [C<T>], n: usize, mut q: Option<&mut Vec<C<T>>>) {
    if let Some(q) = q.as_deref_mut() {
        q.clear();
        q.resize(n * n, czero());
        for i in 0..n {
            q[i * n + i] = C::new(T::one(), T::zero());
        }
    }
    if n < 3 {
        return;
    }
    let mut v = vec![czero::<T>(); n];
    for k in 0..n - 2 {
        let scale = (k + 1..n).fold(T::zero(), |m, i| m.max(cabs(a[i * n + k])));
        if scale == T::zero() {
            continue;
        }
        let tail = (k + 2..n).fold(T::zero(), |m, i| m.max(cabs(a[i * n + k])));
        if tail == T::zero() {
            // already in Hessenberg form for this column
            continue;
        }
        let mut norm2 = T::zero();
        for i in k + 1..n {
            let z = a[i * n + k] / scale;
            v[i] = z;
            norm2 = norm2 + z.norm_sqr();
        }
        let norm = norm2.sqrt();
        let x0 = v[k + 1];
        let ax0 = cabs(x0);
        let phase = if ax0 == T::zero() {
            C::new(T::one(), T::zero())
        } else {
            x0 / ax0
        };
        // v = x + phase*|x| e1, then H = I - 2 v v^* / (v^* v)
        v[k + 1] = x0 + phase * norm;
        let vnorm2: T = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        let tau = T::of(2.0) / vnorm2;

        // left: A <- (I - tau v v^*) A on rows k+1.., all columns >= k
        for j in k..n {
            let mut s = czero();
            for i in k + 1..n {
                s = s + v[i].conj() * a[i * n + j];
            }
            let s = s * tau;
            if s != czero() {
                for i in k + 1..n {
                    a[i * n + j] = a[i * n + j] - v[i] * s;
                }
            }
        }
        // right: A <- A (I - tau v v^*) on columns k+1.., all rows
        for i in 0..n {
            let mut s = czero();
            for j in k + 1..n {
                s = s + a[i * n + j] * v[j];
            }
            let s = s * tau;
            if s != czero() {
                for j in k + 1..n {
                    a[i * n + j] = a[i * n + j] - s * v[j].conj();
                }
            }
        }
        for i in k + 2..n {
            a[i * n + k] = czero();
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let mut s = czero();
                for j in k + 1..n {
                    s = s + q[i * n + j] * v[j];
                }
                let s = s * tau;
                if s != czero() {
                    for j in k + 1..n {
                        q[i * n + j] = q[i * n + j] - s * v[j].conj();
                    }
                }
            }
        }
    }
}
