//! Eigenvectors of a Hessenberg matrix by shifted inverse iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lu::HessenbergLu;
use crate::scalar::{cabs, czero, Real, C};

pub(crate) fn vector_norm<T: Real>(x: &[C<T>]) -> T {
    if x.iter().any(|z| z.re.is_nan() || z.im.is_nan()) {
        return T::nan();
    }
    let scale = x.iter().fold(T::zero(), |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let s: T = x.iter().map(|z| (*z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

pub(crate) fn normalize<T: Real>(x: &mut [C<T>]) -> T {
    let nrm = vector_norm(x);
    if nrm > T::zero() && nrm.is_finite() {
        for z in x.iter_mut() {
            *z = *z / nrm;
        }
    }
    nrm
}

fn dot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

/// `||(H - lambda) x||` for row-major Hessenberg `h`.
pub(crate) fn hessenberg_residual<T: Real>(h: &[C<T>], n: usize, lambda: C<T>, x: &[C<T>]) -> T {
    let r: Vec<C<T>> = (0..n)
        .map(|i| {
            let start = i.saturating_sub(1);
            let mut s: C<T> = czero();
            for j in start..n {
                s = s + h[i * n + j] * x[j];
            }
            s - lambda * x[i]
        })
        .collect();
    vector_norm(&r)
}

pub(crate) fn start_vector<T: Real>(n: usize, seed: u64) -> Vec<C<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ seed);
    let mut x: Vec<C<T>> = (0..n)
        .map(|_| C::new(T::of(rng.gen_range(0.5..1.5)), T::of(rng.gen_range(-0.5..0.5))))
        .collect();
    normalize(&mut x);
    x
}

pub(crate) struct InverseIteration<'a, T> {
    pub(crate) h: &'a [C<T>],
    pub(crate) n: usize,
    /// residual target in the norm of `h`
    pub(crate) threshold: T,
    /// replacement for exactly singular pivots
    pub(crate) floor: T,
    pub(crate) max_steps: usize,
}

pub(crate) struct IterationResult<T> {
    pub(crate) vector: Vec<C<T>>,
    pub(crate) residual: T,
}

impl<'a, T: Real> InverseIteration<'a, T> {
    /// Eigenvector for `lambda`. `position` is the rank of this eigenvalue
    /// inside its cluster of near-equal eigenvalues and `earlier` holds the
    /// vectors already found for that cluster.
    pub(crate) fn run(
        &self,
        lambda: C<T>,
        position: usize,
        earlier: &[Vec<C<T>>],
        seed: u64,
    ) -> IterationResult<T> {
        let shift = lambda + C::new(self.floor * T::of_usize(position), T::zero());
        let lu = HessenbergLu::new(self.h, self.n, shift, self.floor);
        let mut b = start_vector::<T>(self.n, seed);
        let mut best: Option<IterationResult<T>> = None;
        for _ in 0..self.max_steps {
            let mut x = lu.solve(&b);
            let nrm = normalize(&mut x);
            if !(nrm > T::zero() && nrm.is_finite()) {
                break;
            }
            let raw_res = hessenberg_residual(self.h, self.n, lambda, &x);
            let mut next = x.clone();
            let mut chosen = IterationResult { vector: x.clone(), residual: raw_res };
            if !earlier.is_empty() {
                let mut y = x.clone();
                for _pass in 0..2 {
                    for q in earlier {
                        let c = dot(q, &y);
                        for (yi, qi) in y.iter_mut().zip(q) {
                            *yi = *yi - c * *qi;
                        }
                    }
                }
                let kept = normalize(&mut y);
                if kept > T::of(1e-3) {
                    let res = hessenberg_residual(self.h, self.n, lambda, &y);
                    // prefer a fresh direction whenever it is itself an eigenvector
                    if res <= self.threshold || res <= raw_res {
                        chosen = IterationResult { vector: y.clone(), residual: res };
                    }
                    next = y;
                }
            }
            let better = best.as_ref().is_none_or(|b| chosen.residual < b.residual);
            let done = chosen.residual <= self.threshold;
            if better {
                best = Some(chosen);
            }
            if done {
                break;
            }
            b = next;
        }
        best.unwrap_or_else(|| {
            let mut e = vec![czero(); self.n];
            e[0] = C::new(T::one(), T::zero());
            let residual = hessenberg_residual(self.h, self.n, lambda, &e);
            IterationResult { vector: e, residual }
        })
    }
}

/// Group indices of eigenvalues closer than `radius` (transitively).
pub(crate) fn clusters<T: Real>(values: &[C<T>], radius: T) -> Vec<usize> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if cabs(values[i] - values[j]) <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}
