//! Model families and Hamiltonian construction.
//!
//! Sites and bonds are numbered from 1. Bond `j` joins site `j` to site
//! `j + 1`; under periodic boundaries bond `L` joins site `L` back to site 1.
//! The backward amplitude of bond `j` sits at matrix entry `(j, j+1)` and the
//! forward amplitude at `(j+1, j)`. A mosaic bond (`j` a multiple of the
//! mosaic period) carries `base + gamma` backward and `base - gamma` forward,
//! so `gamma > 0` with a positive base hopping pushes bulk states to the left
//! end of an open chain. Getting the 1-based bond numbering wrong shifts the
//! nonreciprocity onto the other sublattice and silently flips phase
//! diagrams, so every index in this module is 1-based unless it is a raw
//! vector offset.

use std::ops::{Index, IndexMut};

use num_integer::{gcd, lcm};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cabs, czero, creal, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Obc,
    Pbc,
}

/// Rational modulation frequency `p/q` of the off-diagonal AAH model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub p: u32,
    pub q: u32,
}

impl Ratio {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        let r = Ratio { p, q };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 || self.q == 0 {
            return Err(Error::InvalidModel(format!(
                "alpha = {}/{} must have positive numerator and denominator",
                self.p, self.q
            )));
        }
        if gcd(self.p, self.q) != 1 {
            return Err(Error::NotCoprime { p: self.p, q: self.q });
        }
        Ok(())
    }
}

fn default_kappa() -> usize {
    1
}

/// The four lattice families together with their parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", bound = "T: Real")]
pub enum Family<T> {
    /// Uniform hopping `t`; with `kappa > 1` this is the mosaic HN chain.
    Hn {
        t: T,
        gamma: T,
        #[serde(default = "default_kappa")]
        kappa: usize,
        sites: usize,
    },
    /// Intracell `u` on odd bonds, intercell `v` on even bonds.
    MosaicDimer {
        u: T,
        v: T,
        gamma: T,
        #[serde(default = "default_kappa")]
        kappa: usize,
        cells: usize,
    },
    /// `u`, `v`, `w` repeating over bonds 1, 2, 3.
    MosaicTrimer {
        u: T,
        v: T,
        w: T,
        gamma: T,
        #[serde(default = "default_kappa")]
        kappa: usize,
        cells: usize,
    },
    /// Bond `j` carries `t + lambda * cos(2 pi alpha j)`.
    MosaicAah {
        t: T,
        lambda: T,
        gamma: T,
        alpha: Ratio,
        #[serde(default = "default_kappa")]
        kappa: usize,
        sites: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Hn,
    MosaicDimer,
    MosaicTrimer,
    MosaicAah,
}

/// A model family plus boundary condition; serializes as one flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ModelSpec<T> {
    #[serde(flatten)]
    pub family: Family<T>,
    pub boundary: Boundary,
}

impl<T: Real> ModelSpec<T> {
    pub fn hn(t: T, gamma: T, sites: usize, boundary: Boundary) -> Self {
        ModelSpec {
            family: Family::Hn { t, gamma, kappa: 1, sites },
            boundary,
        }
    }

    pub fn dimer(u: T, v: T, gamma: T, kappa: usize, cells: usize, boundary: Boundary) -> Self {
        ModelSpec {
            family: Family::MosaicDimer { u, v, gamma, kappa, cells },
            boundary,
        }
    }

    pub fn trimer(
        u: T,
        v: T,
        w: T,
        gamma: T,
        kappa: usize,
        cells: usize,
        boundary: Boundary,
    ) -> Self {
        ModelSpec {
            family: Family::MosaicTrimer { u, v, w, gamma, kappa, cells },
            boundary,
        }
    }

    pub fn aah(
        t: T,
        lambda: T,
        gamma: T,
        alpha: Ratio,
        kappa: usize,
        sites: usize,
        boundary: Boundary,
    ) -> Self {
        ModelSpec {
            family: Family::MosaicAah { t, lambda, gamma, alpha, kappa, sites },
            boundary,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::Hn { .. } => FamilyKind::Hn,
            Family::MosaicDimer { .. } => FamilyKind::MosaicDimer,
            Family::MosaicTrimer { .. } => FamilyKind::MosaicTrimer,
            Family::MosaicAah { .. } => FamilyKind::MosaicAah,
        }
    }

    pub fn kappa(&self) -> usize {
        match self.family {
            Family::Hn { kappa, .. }
            | Family::MosaicDimer { kappa, .. }
            | Family::MosaicTrimer { kappa, .. }
            | Family::MosaicAah { kappa, .. } => kappa,
        }
    }

    pub fn gamma(&self) -> T {
        match self.family {
            Family::Hn { gamma, .. }
            | Family::MosaicDimer { gamma, .. }
            | Family::MosaicTrimer { gamma, .. }
            | Family::MosaicAah { gamma, .. } => gamma,
        }
    }

    /// Number of lattice sites `L`.
    pub fn sites(&self) -> usize {
        match self.family {
            Family::Hn { sites, .. } | Family::MosaicAah { sites, .. } => sites,
            Family::MosaicDimer { cells, .. } => 2 * cells,
            Family::MosaicTrimer { cells, .. } => 3 * cells,
        }
    }

    /// Period of the reciprocal hopping pattern alone.
    pub fn family_cell(&self) -> usize {
        match self.family {
            Family::Hn { .. } => 1,
            Family::MosaicDimer { .. } => 2,
            Family::MosaicTrimer { .. } => 3,
            Family::MosaicAah { alpha, .. } => alpha.q as usize,
        }
    }

    /// Unit cell of the full nonreciprocal lattice: `lcm(kappa, family_cell)`.
    pub fn unit_cell(&self) -> usize {
        lcm(self.kappa().max(1), self.family_cell())
    }

    pub fn is_commensurate(&self) -> bool {
        self.sites().is_multiple_of(self.unit_cell())
    }

    /// Reciprocal hopping on bond `bond` (1-based), before nonreciprocity.
    pub fn base_hopping(&self, bond: usize) -> T {
        match self.family {
            Family::Hn { t, .. } => t,
            Family::MosaicDimer { u, v, .. } => {
                if bond % 2 == 1 {
                    u
                } else {
                    v
                }
            }
            Family::MosaicTrimer { u, v, w, .. } => match bond % 3 {
                1 => u,
                2 => v,
                _ => w,
            },
            Family::MosaicAah { t, lambda, alpha, .. } => {
                // reduce p*j mod q in integers so the modulation is exactly periodic
                let q = alpha.q as u64;
                let phase = (alpha.p as u64 * bond as u64) % q;
                let angle = T::TAU() * T::of(phase as f64) / T::of(q as f64);
                t + lambda * angle.cos()
            }
        }
    }

    pub fn is_mosaic_bond(&self, bond: usize) -> bool {
        bond.is_multiple_of(self.kappa())
    }

    /// `(backward, forward)` amplitudes of bond `bond` (1-based).
    pub fn bond_hopping(&self, bond: usize) -> (T, T) {
        let base = self.base_hopping(bond);
        if self.is_mosaic_bond(bond) {
            let g = self.gamma();
            (base + g, base - g)
        } else {
            (base, base)
        }
    }

    /// Backward and forward hoppings over bonds `1..=q` of one unit cell.
    pub fn cell_hoppings(&self) -> (Vec<T>, Vec<T>) {
        (1..=self.unit_cell()).map(|j| self.bond_hopping(j)).unzip()
    }

    pub fn validate(&self) -> Result<()> {
        let kappa = self.kappa();
        if kappa == 0 {
            return Err(Error::InvalidModel("mosaic period kappa must be >= 1".into()));
        }
        match &self.family {
            Family::MosaicDimer { cells, .. } | Family::MosaicTrimer { cells, .. } => {
                if *cells == 0 {
                    return Err(Error::InvalidModel("need at least one unit cell".into()));
                }
            }
            Family::MosaicAah { alpha, sites, .. } => {
                alpha.validate()?;
                if sites % alpha.q as usize != 0 {
                    return Err(Error::InvalidModel(format!(
                        "AAH chain of {} sites is not a multiple of q = {}",
                        sites, alpha.q
                    )));
                }
            }
            Family::Hn { .. } => {}
        }
        if self.sites() < 2 {
            return Err(Error::InvalidModel("a lattice needs at least 2 sites".into()));
        }
        let params = self.param_names();
        for name in params {
            let x = self.param(name).expect("listed parameter");
            if !x.is_finite() {
                return Err(Error::InvalidModel(format!("parameter {name} is not finite")));
            }
        }
        if self.boundary == Boundary::Pbc && !self.is_commensurate() {
            return Err(Error::Incommensurate {
                sites: self.sites(),
                cell: self.unit_cell(),
            });
        }
        if self.boundary == Boundary::Obc && !self.is_commensurate() {
            log::warn!(
                "open chain of {} sites truncates the {}-site mosaic pattern",
                self.sites(),
                self.unit_cell()
            );
        }
        Ok(())
    }

    /// Names of the real parameters this family accepts.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self.family {
            Family::Hn { .. } => &["t", "gamma"],
            Family::MosaicDimer { .. } => &["u", "v", "gamma"],
            Family::MosaicTrimer { .. } => &["u", "v", "w", "gamma"],
            Family::MosaicAah { .. } => &["t", "lambda", "gamma"],
        }
    }

    pub fn param(&self, name: &str) -> Result<T> {
        let unknown = || Error::UnknownParam(name.to_string());
        Ok(match (&self.family, name) {
            (_, "gamma") => self.gamma(),
            (Family::Hn { t, .. }, "t") | (Family::MosaicAah { t, .. }, "t") => *t,
            (Family::MosaicDimer { u, .. }, "u") | (Family::MosaicTrimer { u, .. }, "u") => *u,
            (Family::MosaicDimer { v, .. }, "v") | (Family::MosaicTrimer { v, .. }, "v") => *v,
            (Family::MosaicTrimer { w, .. }, "w") => *w,
            (Family::MosaicAah { lambda, .. }, "lambda") => *lambda,
            _ => return Err(unknown()),
        })
    }

    pub fn set_param(&mut self, name: &str, value: T) -> Result<()> {
        let slot: &mut T = match (&mut self.family, name) {
            (Family::Hn { gamma, .. }, "gamma")
            | (Family::MosaicDimer { gamma, .. }, "gamma")
            | (Family::MosaicTrimer { gamma, .. }, "gamma")
            | (Family::MosaicAah { gamma, .. }, "gamma") => gamma,
            (Family::Hn { t, .. }, "t") | (Family::MosaicAah { t, .. }, "t") => t,
            (Family::MosaicDimer { u, .. }, "u") | (Family::MosaicTrimer { u, .. }, "u") => u,
            (Family::MosaicDimer { v, .. }, "v") | (Family::MosaicTrimer { v, .. }, "v") => v,
            (Family::MosaicTrimer { w, .. }, "w") => w,
            (Family::MosaicAah { lambda, .. }, "lambda") => lambda,
            _ => return Err(Error::UnknownParam(name.to_string())),
        };
        *slot = value;
        Ok(())
    }

    pub fn with_param(mut self, name: &str, value: T) -> Result<Self> {
        self.set_param(name, value)?;
        Ok(self)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Resize to `sites` sites; dimer and trimer sizes must divide evenly into cells.
    pub fn with_sites(mut self, sites: usize) -> Result<Self> {
        match &mut self.family {
            Family::Hn { sites: s, .. } | Family::MosaicAah { sites: s, .. } => *s = sites,
            Family::MosaicDimer { cells, .. } => {
                if !sites.is_multiple_of(2) {
                    return Err(Error::InvalidModel(format!("dimer chain needs an even size, got {sites}")));
                }
                *cells = sites / 2;
            }
            Family::MosaicTrimer { cells, .. } => {
                if !sites.is_multiple_of(3) {
                    return Err(Error::InvalidModel(format!(
                        "trimer chain size must be a multiple of 3, got {sites}"
                    )));
                }
                *cells = sites / 3;
            }
        }
        Ok(self)
    }
}

/// Explicit onsite and hopping sequences of a nearest-neighbour chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HoppingChain<T> {
    pub onsite: Vec<T>,
    /// Onsite terms enter the matrix as `i * V_j` when set.
    #[serde(default)]
    pub onsite_imaginary: bool,
    /// `t_j`, entry `(j, j+1)`.
    pub backward: Vec<T>,
    /// `t'_j`, entry `(j+1, j)`.
    pub forward: Vec<T>,
    pub boundary: Boundary,
}

impl<T: Real> HoppingChain<T> {
    pub fn new(onsite: Vec<T>, backward: Vec<T>, forward: Vec<T>, boundary: Boundary) -> Result<Self> {
        let chain = HoppingChain {
            onsite,
            onsite_imaginary: false,
            backward,
            forward,
            boundary,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn with_imaginary_onsite(mut self) -> Self {
        self.onsite_imaginary = true;
        self
    }

    pub fn sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn bonds(&self) -> usize {
        self.backward.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.onsite.len();
        if l < 1 {
            return Err(Error::InvalidModel("empty chain".into()));
        }
        let expected = match self.boundary {
            Boundary::Obc => l - 1,
            Boundary::Pbc => l,
        };
        if self.backward.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: self.backward.len(),
            });
        }
        if self.forward.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: self.forward.len(),
            });
        }
        let all = self.onsite.iter().chain(&self.backward).chain(&self.forward);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("chain entries must be finite".into()));
        }
        Ok(())
    }

    /// `t_j * t'_j` for every bond.
    pub fn products(&self) -> Vec<T> {
        self.backward
            .iter()
            .zip(&self.forward)
            .map(|(&t, &tp)| t * tp)
            .collect()
    }

    pub fn is_reciprocal(&self) -> bool {
        self.backward == self.forward
    }
}

/// Expand a model specification into its onsite and hopping sequences.
pub fn build_chain<T: Real>(spec: &ModelSpec<T>) -> Result<HoppingChain<T>> {
    spec.validate()?;
    let l = spec.sites();
    let nbonds = match spec.boundary {
        Boundary::Obc => l - 1,
        Boundary::Pbc => l,
    };
    let (backward, forward) = (1..=nbonds).map(|j| spec.bond_hopping(j)).unzip();
    HoppingChain::new(vec![T::zero(); l], backward, forward, spec.boundary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    Tridiagonal,
    TridiagonalPlusCorners,
    Dense,
}

/// Square complex matrix in row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<C<T>>,
    pub kind: MatrixKind,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![czero(); n * n],
            kind: MatrixKind::Dense,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = creal(T::one());
        }
        m
    }

    /// Build from row-major complex entries.
    pub fn from_rows(rows: &[Vec<C<T>>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            for (j, &z) in row.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        let rows: Vec<Vec<C<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| creal(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn frobenius_norm(&self) -> T {
        // scaled sum of squares
        let scale = self.data.iter().fold(T::zero(), |m, z| m.max(z.re.abs()).max(z.im.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        let s: T = self
            .data
            .iter()
            .map(|z| {
                let (a, b) = (z.re / scale, z.im / scale);
                a * a + b * b
            })
            .sum();
        scale * s.sqrt()
    }

    pub fn trace(&self) -> C<T> {
        (0..self.n).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn mul_vec(&self, x: &[C<T>]) -> Vec<C<T>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(czero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn conj_transpose(&self) -> Self {
        let mut m = Self::from_fn(self.n, |i, j| self[(j, i)].conj());
        m.kind = self.kind;
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max(cabs(a - b)))
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.n + j]
    }
}

/// Matrix of the chain: tridiagonal for open boundaries, plus the wrap-around
/// corners `(L, 1) = t_L` and `(1, L) = t'_L` for periodic ones.
pub fn assemble<T: Real>(chain: &HoppingChain<T>) -> DenseMatrix<T> {
    let l = chain.sites();
    let mut m = DenseMatrix::zeros(l);
    for (j, &v) in chain.onsite.iter().enumerate() {
        m[(j, j)] = if chain.onsite_imaginary {
            C::new(T::zero(), v)
        } else {
            creal(v)
        };
    }
    for j in 0..l.saturating_sub(1) {
        m[(j, j + 1)] = creal(chain.backward[j]);
        m[(j + 1, j)] = creal(chain.forward[j]);
    }
    m.kind = MatrixKind::Tridiagonal;
    if chain.boundary == Boundary::Pbc {
        // accumulate: for L = 2 the wrap bond lands on the tridiagonal entries
        m[(l - 1, 0)] = m[(l - 1, 0)] + creal(chain.backward[l - 1]);
        m[(0, l - 1)] = m[(0, l - 1)] + creal(chain.forward[l - 1]);
        m.kind = MatrixKind::TridiagonalPlusCorners;
    }
    m
}

/// Generalized Bloch matrix over one unit cell of `q` sites, with
/// `t'_q / beta` in the top-right corner and `t_q * beta` in the bottom-left.
pub fn bloch_matrix<T: Real>(spec: &ModelSpec<T>, beta: C<T>) -> Result<DenseMatrix<T>> {
    if beta.re == T::zero() && beta.im == T::zero() {
        return Err(Error::ZeroBeta);
    }
    let (backward, forward) = spec.cell_hoppings();
    Ok(bloch_from_cell(&backward, &forward, beta))
}

pub(crate) fn bloch_from_cell<T: Real>(backward: &[T], forward: &[T], beta: C<T>) -> DenseMatrix<T> {
    let q = backward.len();
    let mut m = DenseMatrix::zeros(q);
    for j in 0..q - 1 {
        m[(j, j + 1)] = creal(backward[j]);
        m[(j + 1, j)] = creal(forward[j]);
    }
    let inv = beta.inv();
    m[(0, q - 1)] = m[(0, q - 1)] + inv * forward[q - 1];
    m[(q - 1, 0)] = m[(q - 1, 0)] + beta * backward[q - 1];
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(m: &DenseMatrix<f64>) -> Vec<Vec<f64>> {
        (0..m.dim()).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect()
    }

    #[test]
    fn hn_chain_amplitudes() {
        let spec = ModelSpec::hn(1.0, 0.5, 4, Boundary::Obc);
        let c = build_chain(&spec).unwrap();
        assert_eq!(c.backward, vec![1.5; 3]);
        assert_eq!(c.forward, vec![0.5; 3]);
        assert!(c.onsite.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimer_chain_amplitudes() {
        let spec = ModelSpec::dimer(-0.5, 1.0, 0.3, 1, 2, Boundary::Obc);
        let c = build_chain(&spec).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(&c.backward, &[-0.2, 1.3, -0.2]));
        assert!(close(&c.forward, &[-0.8, 0.7, -0.8]));
    }

    #[test]
    fn reciprocal_limit() {
        let specs = [
            ModelSpec::hn(0.7, 0.0, 9, Boundary::Obc),
            ModelSpec::dimer(0.3, -1.1, 0.0, 3, 6, Boundary::Pbc),
            ModelSpec::trimer(1.0, 2.0, -0.4, 0.0, 2, 4, Boundary::Obc),
            ModelSpec::aah(1.0, 0.6, 0.0, Ratio::new(1, 4).unwrap(), 3, 24, Boundary::Obc),
        ];
        for s in &specs {
            let c = build_chain(s).unwrap();
            assert!(c.is_reciprocal(), "{s:?}");
            let m = assemble(&c);
            assert_eq!(m, m.conj_transpose());
        }
    }

    #[test]
    fn dimer_even_kappa_touches_only_v_bonds() {
        let spec = ModelSpec::dimer(0.37, 1.0, 0.2, 2, 10, Boundary::Obc);
        let c = build_chain(&spec).unwrap();
        for j in 1..=c.bonds() {
            let (t, tp) = (c.backward[j - 1], c.forward[j - 1]);
            if j % 2 == 0 {
                assert_eq!((t, tp), (1.2, 0.8));
            } else {
                assert_eq!((t, tp), (0.37, 0.37));
            }
        }
    }

    #[test]
    fn mosaic_placement() {
        for kappa in 1..=5 {
            let spec = ModelSpec::trimer(1.0, 2.0, 3.0, 0.25, kappa, 7, Boundary::Obc);
            let c = build_chain(&spec).unwrap();
            let nonrec: Vec<usize> = (1..=c.bonds())
                .filter(|&j| c.backward[j - 1] != c.forward[j - 1])
                .collect();
            let expected: Vec<usize> = (1..=c.bonds()).filter(|j| j % kappa == 0).collect();
            assert_eq!(nonrec, expected);
        }
    }

    #[test]
    fn assemble_obc_and_pbc() {
        let obc = build_chain(&ModelSpec::hn(1.0, 0.5, 3, Boundary::Obc)).unwrap();
        let m = assemble(&obc);
        assert_eq!(m.kind, MatrixKind::Tridiagonal);
        assert_eq!(
            re(&m),
            vec![vec![0.0, 1.5, 0.0], vec![0.5, 0.0, 1.5], vec![0.0, 0.5, 0.0]]
        );
        let pbc = build_chain(&ModelSpec::hn(1.0, 0.5, 3, Boundary::Pbc)).unwrap();
        let m = assemble(&pbc);
        assert_eq!(m.kind, MatrixKind::TridiagonalPlusCorners);
        assert_eq!(
            re(&m),
            vec![vec![0.0, 1.5, 0.5], vec![0.5, 0.0, 1.5], vec![1.5, 0.5, 0.0]]
        );
    }

    #[test]
    fn assemble_diagonal_chain() {
        let c = HoppingChain::new(vec![1.0, 2.0, 3.0], vec![0.0; 2], vec![0.0; 2], Boundary::Obc).unwrap();
        let m = assemble(&c);
        assert_eq!(
            re(&m),
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]
        );
        assert_eq!(m.trace(), creal(6.0));
    }

    #[test]
    fn bloch_dimer_at_unit_beta() {
        let spec = ModelSpec::dimer(-0.5, 1.0, 0.7, 1, 10, Boundary::Pbc);
        let m = bloch_matrix(&spec, creal(1.0)).unwrap();
        assert_eq!(m.dim(), 2);
        assert!(cabs(m[(0, 1)] - creal(0.5)) < 1e-15);
        assert!(cabs(m[(1, 0)] - creal(0.5)) < 1e-15);
        assert_eq!(m[(0, 0)], czero());
    }

    #[test]
    fn bloch_rejects_zero_beta() {
        let spec = ModelSpec::hn(1.0, 0.2, 4, Boundary::Pbc);
        assert!(matches!(bloch_matrix(&spec, czero()), Err(Error::ZeroBeta)));
    }

    #[test]
    fn bloch_hermitian_when_reciprocal() {
        let spec = ModelSpec::trimer(1.0, -2.0, 0.5, 0.0, 2, 4, Boundary::Pbc);
        for m in 0..16 {
            let k = std::f64::consts::TAU * m as f64 / 16.0;
            let h = bloch_matrix(&spec, C::from_polar(1.0, k)).unwrap();
            assert!(h.max_abs_diff(&h.conj_transpose()) < 1e-14);
        }
    }

    #[test]
    fn validation_errors() {
        let s = ModelSpec::dimer(1.0, 1.0, 0.1, 3, 5, Boundary::Pbc);
        assert!(matches!(build_chain(&s), Err(Error::Incommensurate { sites: 10, cell: 6 })));
        // open chains truncate the pattern instead
        assert!(build_chain(&s.clone().with_boundary(Boundary::Obc)).is_ok());
        assert!(matches!(Ratio::new(2, 4), Err(Error::NotCoprime { p: 2, q: 4 })));
        let s = ModelSpec::aah(1.0, 0.5, 0.1, Ratio { p: 1, q: 4 }, 1, 10, Boundary::Obc);
        assert!(build_chain(&s).is_err());
        let s = ModelSpec::hn(1.0, 0.5, 4, Boundary::Obc);
        let mut zero_kappa = s.clone();
        if let Family::Hn { kappa, .. } = &mut zero_kappa.family {
            *kappa = 0;
        }
        assert!(build_chain(&zero_kappa).is_err());
    }

    #[test]
    fn aah_quarter_modulation() {
        let spec = ModelSpec::aah(1.0, 0.5, 0.0, Ratio::new(1, 4).unwrap(), 1, 8, Boundary::Obc);
        let bases: Vec<f64> = (1..=4).map(|j| spec.base_hopping(j)).collect();
        let expect = [1.0, 0.5, 1.0, 1.5];
        for (a, b) in bases.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(spec.unit_cell(), 4);
    }

    #[test]
    fn json_schema() {
        let text = r#"{"family": "mosaic_dimer", "u": -0.5, "v": 1.0, "gamma": 0.3, "kappa": 1, "cells": 50, "boundary": "obc"}"#;
        let spec: ModelSpec<f64> = serde_json::from_str(text).unwrap();
        assert_eq!(spec, ModelSpec::dimer(-0.5, 1.0, 0.3, 1, 50, Boundary::Obc));
        let back: serde_json::Value = serde_json::to_value(&spec).unwrap();
        let orig: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(back, orig);

        let aah = r#"{"family":"mosaic_aah","t":1.0,"lambda":0.5,"gamma":0.2,"alpha":{"p":1,"q":4},"kappa":2,"sites":40,"boundary":"pbc"}"#;
        let spec: ModelSpec<f64> = serde_json::from_str(aah).unwrap();
        assert_eq!(spec.unit_cell(), 4);
    }

    #[test]
    fn params_roundtrip() {
        let mut s = ModelSpec::trimer(1.0, 2.0, 3.0, 0.1, 1, 3, Boundary::Obc);
        for name in s.param_names() {
            s.set_param(name, 0.75).unwrap();
            assert_eq!(s.param(name).unwrap(), 0.75);
        }
        assert!(matches!(s.param("lambda"), Err(Error::UnknownParam(_))));
        let s = s.with_sites(30).unwrap();
        assert_eq!(s.sites(), 30);
        assert!(s.with_sites(31).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let c = build_chain(&ModelSpec::<f32>::hn(1.0, 0.5, 4, Boundary::Obc)).unwrap();
        assert_eq!(c.backward, vec![1.5f32; 3]);
    }
}
