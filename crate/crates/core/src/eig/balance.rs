//! Diagonal similarity scaling applied before the QR iteration.
//!
//! Strongly nonreciprocal chains are violently non-normal: the eigenvalue
//! condition numbers of an open chain grow like `r^-L`. A diagonal
//! similarity `B = D^-1 M D` does not change the spectrum but can remove that
//! non-normality almost entirely, so the eigenvalues are computed on `B`.

use crate::lattice::{DenseMatrix, MatrixKind};
use crate::scalar::{cabs, Real, C};

/// `B = D^-1 M D` with `D = diag(exp(log_scale))`.
pub(crate) struct Balanced<T> {
    pub(crate) matrix: DenseMatrix<T>,
    pub(crate) log_scale: Vec<T>,
}

pub(crate) fn balance<T: Real>(m: &DenseMatrix<T>) -> Balanced<T> {
    match m.kind {
        MatrixKind::Tridiagonal => balance_tridiagonal(m),
        _ => balance_osborne(m),
    }
}

/// Scale every bond to equal magnitude in both directions:
/// `log(d_{j+1}/d_j) = log|M_{j+1,j} / M_{j,j+1}| / 2`.
/// Bonds with a vanishing amplitude split the chain and are left unscaled.
fn balance_tridiagonal<T: Real>(m: &DenseMatrix<T>) -> Balanced<T> {
    let n = m.dim();
    let half = T::of(0.5);
    let mut log_scale = vec![T::zero(); n];
    for j in 0..n.saturating_sub(1) {
        let up = cabs(m[(j, j + 1)]);
        let down = cabs(m[(j + 1, j)]);
        let step = if up > T::zero() && down > T::zero() {
            half * (down.ln() - up.ln())
        } else {
            T::zero()
        };
        log_scale[j + 1] = log_scale[j] + step;
    }
    let mut b = m.clone();
    for j in 0..n.saturating_sub(1) {
        let ratio = (log_scale[j + 1] - log_scale[j]).exp();
        b[(j, j + 1)] = m[(j, j + 1)] * ratio;
        b[(j + 1, j)] = m[(j + 1, j)] / ratio;
    }
    Balanced { matrix: b, log_scale }
}

/// Radix-2 Osborne iteration on row and column 2-norms.
fn balance_osborne<T: Real>(m: &DenseMatrix<T>) -> Balanced<T> {
    let n = m.dim();
    let mut b = m.clone();
    let mut log_scale = vec![T::zero(); n];
    let two = T::of(2.0);
    let ln2 = T::LN_2();
    let threshold = T::of(0.95);
    for _sweep in 0..200 {
        let mut changed = false;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    let a = cabs(b[(j, i)]);
                    let e = cabs(b[(i, j)]);
                    c = c + a * a;
                    r = r + e * e;
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let (c0, r0) = (c.sqrt(), r.sqrt());
            let (mut cs, mut rs) = (c0, r0);
            let mut f = T::one();
            let mut k = 0i32;
            while cs < rs / two {
                cs = cs * two;
                rs = rs / two;
                f = f * two;
                k += 1;
                if k > 1000 {
                    break;
                }
            }
            while cs >= rs * two {
                cs = cs / two;
                rs = rs * two;
                f = f / two;
                k -= 1;
                if k < -1000 {
                    break;
                }
            }
            if k != 0 && (cs * cs + rs * rs) < threshold * (c0 * c0 + r0 * r0) {
                for j in 0..n {
                    b[(j, i)] = b[(j, i)] * f;
                    b[(i, j)] = b[(i, j)] / f;
                }
                log_scale[i] = log_scale[i] + T::of(k as f64) * ln2;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Balanced { matrix: b, log_scale }
}

/// Map an eigenvector `x` of `B` back to `D x`, rescaled so the exponentials
/// stay at or below one.
pub(crate) fn unbalance_vector<T: Real>(log_scale: &[T], x: &[C<T>]) -> Vec<C<T>> {
    let top = log_scale
        .iter()
        .zip(x)
        .filter(|(_, z)| cabs(**z) > T::zero())
        .map(|(&l, z)| l + cabs(*z).ln())
        .fold(T::neg_infinity(), T::max);
    let top = if top.is_finite() { top } else { T::zero() };
    log_scale
        .iter()
        .zip(x)
        .map(|(&l, &z)| {
            let mag = cabs(z);
            if mag == T::zero() {
                z
            } else {
                // z * exp(l - top) without forming exp(l) on its own
                let ln_mag = (l + mag.ln() - top).exp();
                z * (ln_mag / mag)
            }
        })
        .collect()
}
