//! Implicitly shifted single-shift QR on a complex Hessenberg matrix.

use crate::error::{Error, Result};
use crate::scalar::{cabs, cabs1, czero, Real, C};

/// Sweeps on one block before the refined deflation test is relaxed.
const STALL_SWEEPS: usize = 30;

pub(crate) struct QrOutcome<T> {
    pub(crate) eigenvalues: Vec<C<T>>,
    pub(crate) iterations: usize,
}

/// Eigenvalues of the row-major Hessenberg matrix `h`, destroying it.
/// `max_iter` bounds the total number of QR sweeps.
pub(crate) fn hessenberg_eigenvalues<T: Real>(
    h: &mut [C<T>],
    n: usize,
    max_iter: usize,
) -> Result<QrOutcome<T>> {
    let mut eig = vec![czero(); n];
    if n == 0 {
        return Ok(QrOutcome { eigenvalues: eig, iterations: 0 });
    }
    let ulp = T::epsilon();
    let safe_min = T::min_positive_value() * T::of_usize(n) / ulp;
    let at = |h: &[C<T>], i: usize, j: usize| h[i * n + j];

    let mut total = 0usize;
    let mut ihi = n - 1;
    loop {
        let mut its = 0usize;
        let mut pair = false;
        loop {
            // locate the start of the active unreduced block
            let mut l = ihi;
            while l > 0 {
                let sub = cabs1(at(h, l, l - 1));
                if sub <= safe_min {
                    break;
                }
                let mut s = cabs1(at(h, l - 1, l - 1)) + cabs1(at(h, l, l));
                if s == T::zero() {
                    s = (l.saturating_sub(1)..=ihi).fold(T::zero(), |acc, i| acc + cabs1(at(h, i, i)));
                    if l < ihi {
                        s = s + cabs1(at(h, l + 1, l));
                    }
                }
                if sub <= ulp * s {
                    // after a long stall the classical test alone suffices
                    if its >= STALL_SWEEPS {
                        break;
                    }
                    // Ahues & Tisseur refinement of the deflation test
                    let ab = cabs1(at(h, l, l - 1)).max(cabs1(at(h, l - 1, l)));
                    let ba = cabs1(at(h, l, l - 1)).min(cabs1(at(h, l - 1, l)));
                    let diff = at(h, l - 1, l - 1) - at(h, l, l);
                    let aa = cabs1(at(h, l, l)).max(cabs1(diff));
                    let bb = cabs1(at(h, l, l)).min(cabs1(diff));
                    let s2 = aa + ab;
                    if ba * (ab / s2) <= safe_min.max(ulp * (bb * (aa / s2))) {
                        break;
                    }
                }
                l -= 1;
            }
            if l > 0 {
                h[l * n + l - 1] = czero();
            }
            if l == ihi {
                eig[ihi] = at(h, ihi, ihi);
                break;
            }
            if l + 1 == ihi {
                // an isolated 2x2 block is solved in closed form; shifted
                // sweeps can cycle on exactly degenerate diagonals
                let (a, b, c, d) = (at(h, l, l), at(h, l, ihi), at(h, ihi, l), at(h, ihi, ihi));
                let near = wilkinson(a, b, c, d);
                eig[ihi] = near;
                eig[l] = a + d - near;
                pair = true;
                break;
            }
            if total >= max_iter {
                return Err(Error::NoConvergence {
                    iterations: total,
                    unconverged: ihi + 1,
                });
            }
            let shift = if its == 10 {
                C::new(T::of(0.75) * at(h, l + 1, l).re.abs(), T::zero()) + at(h, l, l)
            } else if its == 20 {
                C::new(T::of(0.75) * at(h, ihi, ihi - 1).re.abs(), T::zero()) + at(h, ihi, ihi)
            } else {
                wilkinson(
                    at(h, ihi - 1, ihi - 1),
                    at(h, ihi - 1, ihi),
                    at(h, ihi, ihi - 1),
                    at(h, ihi, ihi),
                )
            };
            sweep(h, n, l, ihi, shift);
            its += 1;
            total += 1;
        }
        let step = if pair { 2 } else { 1 };
        if ihi < step {
            break;
        }
        ihi -= step;
    }
    Ok(QrOutcome { eigenvalues: eig, iterations: total })
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> C<T> {
    let half = T::of(0.5);
    let p = (a - d) * half;
    let bc = b * c;
    if bc == czero() {
        return d;
    }
    let mut disc = (p * p + bc).sqrt();
    if (p.conj() * disc).re < T::zero() {
        disc = -disc;
    }
    let den = p + disc;
    if cabs(den) == T::zero() {
        d
    } else {
        d - bc / den
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
fn givens<T: Real>(x: C<T>, y: C<T>) -> (T, C<T>) {
    let ax = cabs(x);
    let ay = cabs(y);
    if ay == T::zero() {
        return (T::one(), czero());
    }
    if ax == T::zero() {
        return (T::zero(), C::new(T::one(), T::zero()) * (y.conj() / ay));
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

/// One implicit single-shift QR sweep over the active block `l..=ihi`.
fn sweep<T: Real>(h: &mut [C<T>], n: usize, l: usize, ihi: usize, shift: C<T>) {
    for k in l..ihi {
        let (x, y) = if k == l {
            (h[l * n + l] - shift, h[(l + 1) * n + l])
        } else {
            (h[k * n + k - 1], h[(k + 1) * n + k - 1])
        };
        let (c, s) = givens(x, y);
        let cc = C::new(c, T::zero());
        let start = if k == l { l } else { k - 1 };
        for j in start..=ihi {
            let a = h[k * n + j];
            let b = h[(k + 1) * n + j];
            h[k * n + j] = cc * a + s * b;
            h[(k + 1) * n + j] = cc * b - s.conj() * a;
        }
        let stop = (k + 2).min(ihi);
        for i in l..=stop {
            let a = h[i * n + k];
            let b = h[i * n + k + 1];
            h[i * n + k] = cc * a + s.conj() * b;
            h[i * n + k + 1] = cc * b - s * a;
        }
        if k > l {
            h[(k + 1) * n + k - 1] = czero();
        }
    }
}
