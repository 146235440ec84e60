//! Dense non-Hermitian eigensolver.
//!
//! Pipeline: diagonal balancing, splitting of tridiagonal matrices at
//! vanishing bonds, Householder reduction to Hessenberg form, single-shift
//! complex QR with Wilkinson shifts for the eigenvalues, and shifted inverse
//! iteration on the Hessenberg form for the right eigenvectors.

mod balance;
mod hessenberg;
mod inverse;
mod lu;
mod qr;
mod tridiag;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DenseMatrix, MatrixKind};
use crate::scalar::{cabs, czero, creal, Real, C};

pub use lu::determinant;

use balance::{balance, unbalance_vector};
use inverse::{clusters, normalize, vector_norm, InverseIteration};
use lu::{DenseLu, HessenbergLu};

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions<T> {
    /// Relative tolerance; residuals must satisfy `||M x - E x|| <= tol * ||M||_F`.
    pub tol: T,
    /// QR sweep budget per matrix dimension.
    pub iterations_per_dim: usize,
    /// Eigenvalues closer than `cluster_tol * ||M||_F` share a cluster.
    pub cluster_tol: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            tol: T::of(T::SOLVER_TOL),
            iterations_per_dim: 60,
            cluster_tol: T::of(1e-8),
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }
}

/// Eigenvalues with optional unit-norm right eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<C<T>>,
    /// `eigenvectors[n]` is the right eigenvector of `eigenvalues[n]`.
    pub eigenvectors: Option<Vec<Vec<C<T>>>>,
    /// `||M psi_n - E_n psi_n||_2`, empty without eigenvectors.
    pub residuals: Vec<T>,
    pub iterations: usize,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn residual_max(&self) -> Option<T> {
        self.residuals.iter().copied().reduce(T::max)
    }

    pub fn max_abs_re(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |m, z| m.max(z.re.abs()))
    }

    pub fn max_abs_im(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |m, z| m.max(z.im.abs()))
    }

    pub fn to_json(&self) -> SpectrumJson {
        SpectrumJson {
            eigenvalues: self
                .eigenvalues
                .iter()
                .map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
                .collect(),
            residual_max: self.residual_max().map(|r| r.to_f64_lossy()),
        }
    }
}

/// Wire form of a spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumJson {
    pub eigenvalues: Vec<[f64; 2]>,
    pub residual_max: Option<f64>,
}

fn check_input<T: Real>(m: &DenseMatrix<T>) -> Result<()> {
    if m.dim() == 0 {
        return Err(Error::Dimension { expected: 1, got: 0 });
    }
    if !m.is_finite() {
        return Err(Error::InvalidModel("matrix has non-finite entries".into()));
    }
    Ok(())
}

fn sort_values<T: Real>(values: &mut [C<T>]) {
    values.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Index ranges of the irreducible diagonal blocks of a tridiagonal matrix.
fn tridiagonal_blocks<T: Real>(b: &DenseMatrix<T>) -> Vec<(usize, usize)> {
    let n = b.dim();
    let mut blocks = Vec::new();
    let mut start = 0;
    for j in 0..n.saturating_sub(1) {
        if b[(j, j + 1)] == czero() || b[(j + 1, j)] == czero() {
            blocks.push((start, j + 1));
            start = j + 1;
        }
    }
    blocks.push((start, n));
    blocks
}

fn block_data<T: Real>(b: &DenseMatrix<T>, lo: usize, hi: usize) -> Vec<C<T>> {
    let k = hi - lo;
    let mut out = Vec::with_capacity(k * k);
    for i in lo..hi {
        out.extend_from_slice(&b.row(i)[lo..hi]);
    }
    out
}

struct Reduced<T> {
    log_scale: Vec<T>,
    /// Hessenberg form of the balanced matrix, row-major.
    hess: Vec<C<T>>,
    /// Unitary factor of the Hessenberg reduction; `None` means identity.
    q: Option<Vec<C<T>>>,
    eigenvalues: Vec<C<T>>,
    iterations: usize,
}

fn reduce_and_solve<T: Real>(m: &DenseMatrix<T>, opts: &SolverOptions<T>, want_q: bool) -> Result<Reduced<T>> {
    check_input(m)?;
    let n = m.dim();
    let bal = balance(m);
    let budget = opts.iterations_per_dim * n.max(1);
    let mut values = Vec::with_capacity(n);
    let mut iterations = 0;
    let (hess, q) = if m.kind == MatrixKind::Tridiagonal {
        for (lo, hi) in tridiagonal_blocks(&bal.matrix) {
            let mut h = block_data(&bal.matrix, lo, hi);
            let out = qr::hessenberg_eigenvalues(&mut h, hi - lo, budget.saturating_sub(iterations))?;
            iterations += out.iterations;
            values.extend(out.eigenvalues);
        }
        (bal.matrix.as_slice().to_vec(), None)
    } else {
        let mut h = bal.matrix.as_slice().to_vec();
        let mut q = Vec::new();
        hessenberg::reduce(&mut h, n, if want_q { Some(&mut q) } else { None });
        let mut work = h.clone();
        let out = qr::hessenberg_eigenvalues(&mut work, n, budget)?;
        iterations = out.iterations;
        values = out.eigenvalues;
        (h, if want_q { Some(q) } else { None })
    };
    sort_values(&mut values);
    Ok(Reduced {
        log_scale: bal.log_scale,
        hess,
        q,
        eigenvalues: values,
        iterations,
    })
}

/// All eigenvalues of `m` with default options.
pub fn eigenvalues<T: Real>(m: &DenseMatrix<T>) -> Result<Spectrum<T>> {
    eigenvalues_with(m, &SolverOptions::default())
}

pub fn eigenvalues_with<T: Real>(m: &DenseMatrix<T>, opts: &SolverOptions<T>) -> Result<Spectrum<T>> {
    let r = reduce_and_solve(m, opts, false)?;
    Ok(Spectrum {
        eigenvalues: r.eigenvalues,
        eigenvectors: None,
        residuals: Vec::new(),
        iterations: r.iterations,
    })
}

/// Eigenvalues and unit-norm right eigenvectors with default options.
pub fn eigenpairs<T: Real>(m: &DenseMatrix<T>) -> Result<Spectrum<T>> {
    eigenpairs_with(m, &SolverOptions::default())
}

pub fn eigenpairs_with<T: Real>(m: &DenseMatrix<T>, opts: &SolverOptions<T>) -> Result<Spectrum<T>> {
    let r = reduce_and_solve(m, opts, true)?;
    let n = m.dim();
    let mnorm = m.frobenius_norm();
    let scale = if mnorm > T::zero() { mnorm } else { T::one() };
    let hnorm = {
        let h = DenseMatrix::from_fn(n, |i, j| r.hess[i * n + j]);
        let f = h.frobenius_norm();
        if f > T::zero() {
            f
        } else {
            T::one()
        }
    };
    let threshold = opts.tol * scale;
    let solver = InverseIteration {
        h: &r.hess,
        n,
        threshold: opts.tol * hnorm,
        floor: T::epsilon() * hnorm,
        max_steps: 6,
    };
    let groups = clusters(&r.eigenvalues, opts.cluster_tol * scale);
    let mut by_group: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    let mut vectors: Vec<Vec<C<T>>> = Vec::with_capacity(n);
    // vectors in the Hessenberg basis, kept for orthogonalization inside clusters
    let mut hess_vectors: Vec<Vec<C<T>>> = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut polisher: Option<Polisher<T>> = None;

    for (idx, &lambda) in r.eigenvalues.iter().enumerate() {
        let members = by_group.entry(groups[idx]).or_default();
        let earlier: Vec<Vec<C<T>>> = members.iter().map(|&k| hess_vectors[k].clone()).collect();
        let found = solver.run(lambda, members.len(), &earlier, idx as u64);
        members.push(idx);

        let basis = match &r.q {
            Some(q) => (0..n)
                .map(|i| {
                    (0..n).fold(czero(), |acc, j| acc + q[i * n + j] * found.vector[j])
                })
                .collect(),
            None => found.vector.clone(),
        };
        hess_vectors.push(found.vector);
        let mut psi = unbalance_vector(&r.log_scale, &basis);
        normalize(&mut psi);
        let mut res = residual(m, lambda, &psi);
        if !(res <= threshold) {
            let p = polisher.get_or_insert_with(|| Polisher::new(m));
            let (v, pres) = p.polish(m, lambda, &psi, T::epsilon() * scale);
            if pres < res || !res.is_finite() {
                psi = v;
                res = pres;
            }
        }
        if !(res <= threshold) {
            return Err(Error::Stagnation {
                re: lambda.re.to_f64_lossy(),
                im: lambda.im.to_f64_lossy(),
                residual: res.to_f64_lossy(),
            });
        }
        fix_phase(&mut psi);
        residuals.push(res);
        vectors.push(psi);
    }
    Ok(Spectrum {
        eigenvalues: r.eigenvalues,
        eigenvectors: Some(vectors),
        residuals,
        iterations: r.iterations,
    })
}

/// Inverse iteration directly on the unbalanced matrix, used when mapping a
/// vector back through the balancing leaves too large a residual.
struct Polisher<T> {
    hessenberg: bool,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real> Polisher<T> {
    fn new(m: &DenseMatrix<T>) -> Self {
        Polisher {
            hessenberg: m.kind == MatrixKind::Tridiagonal,
            _marker: std::marker::PhantomData,
        }
    }

    fn polish(&self, m: &DenseMatrix<T>, lambda: C<T>, start: &[C<T>], floor: T) -> (Vec<C<T>>, T) {
        let n = m.dim();
        let solve: Box<dyn Fn(&[C<T>]) -> Vec<C<T>>> = if self.hessenberg {
            let lu = HessenbergLu::new(m.as_slice(), n, lambda, floor);
            Box::new(move |b| lu.solve(b))
        } else {
            let lu = DenseLu::new(m, lambda, floor);
            Box::new(move |b| lu.solve(b))
        };
        let mut best = (start.to_vec(), residual(m, lambda, start));
        let mut b = start.to_vec();
        for _ in 0..3 {
            let mut x = solve(&b);
            if normalize(&mut x) == T::zero() || x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                break;
            }
            let res = residual(m, lambda, &x);
            if res < best.1 || !best.1.is_finite() {
                best = (x.clone(), res);
            }
            b = x;
        }
        best
    }
}

fn residual<T: Real>(m: &DenseMatrix<T>, lambda: C<T>, x: &[C<T>]) -> T {
    let mx = m.mul_vec(x);
    let r: Vec<C<T>> = mx.iter().zip(x).map(|(&a, &b)| a - lambda * b).collect();
    vector_norm(&r)
}

/// Rotate so the largest-magnitude component is real and positive.
fn fix_phase<T: Real>(x: &mut [C<T>]) {
    let mut best = 0;
    let mut best_mag = T::neg_infinity();
    for (i, z) in x.iter().enumerate() {
        let mag = cabs(*z);
        if mag > best_mag {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag > T::zero() {
        let phase = x[best].conj() / best_mag;
        for z in x.iter_mut() {
            *z = *z * phase;
        }
        x[best] = creal(cabs(x[best]));
    }
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
pub fn symmetric_tridiagonal_eigen<T: Real>(diag: &[T], offdiag: &[T]) -> Result<Spectrum<T>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::Dimension { expected: 1, got: 0 });
    }
    if offdiag.len() + 1 != n {
        return Err(Error::Dimension {
            expected: n - 1,
            got: offdiag.len(),
        });
    }
    if diag.iter().chain(offdiag).any(|x| !x.is_finite()) {
        return Err(Error::InvalidModel("tridiagonal entries must be finite".into()));
    }
    let (values, vecs) = tridiag::tql2(diag, offdiag)?;
    let eigenvectors: Vec<Vec<C<T>>> = vecs
        .into_iter()
        .map(|v| {
            let mut z: Vec<C<T>> = v.into_iter().map(creal).collect();
            fix_phase(&mut z);
            z
        })
        .collect();
    let residuals = values
        .iter()
        .zip(&eigenvectors)
        .map(|(&e, v)| {
            let r: Vec<C<T>> = (0..n)
                .map(|i| {
                    let mut s = creal(diag[i] - e) * v[i];
                    if i > 0 {
                        s = s + creal(offdiag[i - 1]) * v[i - 1];
                    }
                    if i + 1 < n {
                        s = s + creal(offdiag[i]) * v[i + 1];
                    }
                    s
                })
                .collect();
            vector_norm(&r)
        })
        .collect();
    Ok(Spectrum {
        eigenvalues: values.into_iter().map(creal).collect(),
        eigenvectors: Some(eigenvectors),
        residuals,
        iterations: 0,
    })
}

#[cfg(test)]
mod tests;
