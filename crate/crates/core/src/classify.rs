//! Diagonal-gauge analysis of open tridiagonal chains.
//!
//! With `D = diag(d_j)`, `d_1 = 1`, `d_{j+1} = d_j sqrt|t'_j / t_j|`, the
//! similarity `D^-1 H D` is real symmetric when every hopping product
//! `t_j t'_j` is positive, so the open-chain spectrum is real and `H` is
//! pseudo-Hermitian with metric `eta = D^2`. When every product is negative
//! and the onsite terms are purely imaginary (or zero) the same `D` makes the
//! chain `i` times a Hermitian matrix. Mixed signs leave no such gauge.

use serde::{Deserialize, Serialize};

use crate::eig::{symmetric_tridiagonal_eigen, Spectrum};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, DenseMatrix, HoppingChain};
use crate::scalar::{cabs, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Real,
    Imaginary,
    Complex,
}

impl SpectrumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumKind::Real => "real",
            SpectrumKind::Imaginary => "imaginary",
            SpectrumKind::Complex => "complex",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductSign {
    Positive,
    Negative,
    Zero,
}

/// Predicted spectrum class with the sign pattern of `t_j t'_j` behind it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumClass {
    pub class: SpectrumKind,
    /// Some product vanishes: the chain sits on a critical point and splits.
    pub degenerate: bool,
    /// First bond (1-based) breaking a uniform sign pattern.
    pub first_mixed_bond: Option<usize>,
    #[serde(skip)]
    pub signs: Vec<ProductSign>,
}

fn sign_of<T: Real>(x: T) -> ProductSign {
    if x > T::zero() {
        ProductSign::Positive
    } else if x < T::zero() {
        ProductSign::Negative
    } else {
        ProductSign::Zero
    }
}

/// The bond that spoils a uniform sign: with any positive product present it
/// is the first non-positive one, otherwise the first vanishing one.
fn first_mixed(signs: &[ProductSign]) -> Option<usize> {
    let any_pos = signs.contains(&ProductSign::Positive);
    let any_neg = signs.contains(&ProductSign::Negative);
    let bad = |s: &ProductSign| {
        if any_pos {
            *s != ProductSign::Positive
        } else {
            any_neg && *s == ProductSign::Zero
        }
    };
    signs.iter().position(bad).map(|i| i + 1)
}

fn open_bonds<T: Real>(chain: &HoppingChain<T>, what: &'static str) -> Result<usize> {
    if chain.boundary != Boundary::Obc {
        return Err(Error::RequiresObc(what));
    }
    Ok(chain.bonds())
}

fn onsite_is_zero<T: Real>(chain: &HoppingChain<T>) -> bool {
    chain.onsite.iter().all(|v| *v == T::zero())
}

/// Spectrum class from the sign pattern of the hopping products.
///
/// Vanishing products split the chain into independent blocks; the class is
/// decided by the remaining products and `degenerate` is raised.
pub fn predict_class<T: Real>(chain: &HoppingChain<T>) -> Result<SpectrumClass> {
    open_bonds(chain, "spectrum classification")?;
    let signs: Vec<ProductSign> = chain.products().into_iter().map(sign_of).collect();
    let degenerate = signs.contains(&ProductSign::Zero);
    let any_pos = signs.contains(&ProductSign::Positive);
    let any_neg = signs.contains(&ProductSign::Negative);
    let zero_onsite = onsite_is_zero(chain);
    let real_onsite = zero_onsite || !chain.onsite_imaginary;
    let imaginary_onsite = zero_onsite || chain.onsite_imaginary;
    let class = if !any_neg && real_onsite {
        SpectrumKind::Real
    } else if any_neg && !any_pos && imaginary_onsite {
        SpectrumKind::Imaginary
    } else {
        SpectrumKind::Complex
    };
    Ok(SpectrumClass {
        class,
        degenerate,
        first_mixed_bond: first_mixed(&signs),
        signs,
    })
}

/// Threshold below which a real or imaginary part counts as zero:
/// `1e-8 * max(1, ||H||_F)`.
pub fn realness_threshold<T: Real>(matrix_norm: T) -> T {
    T::of(1e-8) * matrix_norm.max(T::one())
}

/// Class of computed eigenvalues. All-zero spectra count as real.
pub fn numerical_class<T: Real>(spectrum: &Spectrum<T>, matrix_norm: T) -> SpectrumKind {
    let thr = realness_threshold(matrix_norm);
    if spectrum.max_abs_im() <= thr {
        SpectrumKind::Real
    } else if spectrum.max_abs_re() <= thr {
        SpectrumKind::Imaginary
    } else {
        SpectrumKind::Complex
    }
}

/// Diagonal similarity `D`, held as `ln d_j` since `d_j` spans hundreds of
/// decades on long, strongly nonreciprocal chains.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform<T> {
    pub log_entries: Vec<T>,
    /// Sign shared by every hopping product.
    pub sign: ProductSign,
}

impl<T: Real> GaugeTransform<T> {
    pub fn identity(n: usize) -> Self {
        GaugeTransform {
            log_entries: vec![T::zero(); n],
            sign: ProductSign::Positive,
        }
    }

    pub fn len(&self) -> usize {
        self.log_entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_entries.is_empty()
    }

    /// `d_j`; underflows to zero or overflows to infinity far along strongly
    /// nonreciprocal chains.
    pub fn entries(&self) -> Vec<T> {
        self.log_entries.iter().map(|l| l.exp()).collect()
    }

    /// `d_j` rescaled so the largest entry is one.
    pub fn normalized_entries(&self) -> Vec<T> {
        let top = self.log_entries.iter().copied().fold(T::neg_infinity(), T::max);
        self.log_entries.iter().map(|l| (*l - top).exp()).collect()
    }

    /// `ln eta_j = 2 ln d_j` of the metric `eta = D^2`.
    pub fn log_metric(&self) -> Vec<T> {
        self.log_entries.iter().map(|l| *l + *l).collect()
    }
}

/// Build the gauge of an open chain whose hopping products share one sign.
pub fn gauge<T: Real>(chain: &HoppingChain<T>) -> Result<GaugeTransform<T>> {
    let bonds = open_bonds(chain, "the diagonal gauge")?;
    let signs: Vec<ProductSign> = chain.products().into_iter().map(sign_of).collect();
    if let Some(bond) = first_mixed(&signs) {
        return Err(Error::NoGauge { bond });
    }
    if let Some(i) = signs.iter().position(|s| *s == ProductSign::Zero) {
        return Err(Error::NoGauge { bond: i + 1 });
    }
    let half = T::of(0.5);
    let mut log_entries = Vec::with_capacity(chain.sites());
    let mut acc = T::zero();
    log_entries.push(acc);
    for j in 0..bonds {
        acc = acc + half * (chain.forward[j].abs().ln() - chain.backward[j].abs().ln());
        log_entries.push(acc);
    }
    let sign = signs.first().copied().unwrap_or(ProductSign::Positive);
    Ok(GaugeTransform { log_entries, sign })
}

/// `||eta M^* eta^-1 - M||_F / ||M||_F` with `eta = D^2`.
pub fn pseudo_hermiticity_residual<T: Real>(m: &DenseMatrix<T>, g: &GaugeTransform<T>) -> Result<T> {
    let n = m.dim();
    if g.len() != n {
        return Err(Error::Dimension { expected: n, got: g.len() });
    }
    let le = g.log_metric();
    let norm = m.frobenius_norm();
    let mut acc = T::zero();
    let mut scale = T::zero();
    let mut diffs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let dag = m[(j, i)].conj();
            let conj_entry = if dag.re == T::zero() && dag.im == T::zero() {
                dag
            } else {
                dag * (le[i] - le[j]).exp()
            };
            let d = cabs(conj_entry - m[(i, j)]);
            scale = scale.max(d);
            diffs.push(d);
        }
    }
    if scale == T::zero() {
        return Ok(T::zero());
    }
    if !scale.is_finite() {
        return Ok(T::infinity());
    }
    for d in diffs {
        let r = d / scale;
        acc = acc + r * r;
    }
    let abs = scale * acc.sqrt();
    Ok(if norm > T::zero() { abs / norm } else { abs })
}

/// Real symmetric tridiagonal matrix similar to the chain (or to `-i` times it).
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitianized<T> {
    pub diag: Vec<T>,
    pub offdiag: Vec<T>,
    /// The chain's spectrum is `i` times the spectrum of `(diag, offdiag)`.
    pub imaginary: bool,
}

/// Gauge-reduce the chain. Positive products give offdiagonals
/// `sgn(t_j) sqrt(t_j t'_j)`; negative products with imaginary or vanishing
/// onsite terms give `sqrt|t_j t'_j|` and an imaginary spectrum.
pub fn hermitianize<T: Real>(chain: &HoppingChain<T>) -> Result<Hermitianized<T>> {
    let g = gauge(chain)?;
    let zero_onsite = onsite_is_zero(chain);
    let products = chain.products();
    match g.sign {
        ProductSign::Negative => {
            if !(zero_onsite || chain.onsite_imaginary) {
                return Err(Error::InvalidModel(
                    "negative hopping products with real onsite terms have no Hermitian form".into(),
                ));
            }
            Ok(Hermitianized {
                diag: chain.onsite.clone(),
                offdiag: products.iter().map(|p| p.abs().sqrt()).collect(),
                imaginary: true,
            })
        }
        _ => {
            if chain.onsite_imaginary && !zero_onsite {
                return Err(Error::InvalidModel(
                    "positive hopping products with imaginary onsite terms have no Hermitian form".into(),
                ));
            }
            Ok(Hermitianized {
                diag: chain.onsite.clone(),
                offdiag: chain
                    .backward
                    .iter()
                    .zip(&products)
                    .map(|(t, p)| t.signum() * p.sqrt())
                    .collect(),
                imaginary: false,
            })
        }
    }
}

/// Spectrum of the chain through its Hermitian form (eigenvectors dropped).
pub fn gauge_spectrum<T: Real>(chain: &HoppingChain<T>) -> Result<Vec<C<T>>> {
    let h = hermitianize(chain)?;
    let s = symmetric_tridiagonal_eigen(&h.diag, &h.offdiag)?;
    Ok(s.eigenvalues
        .into_iter()
        .map(|e| if h.imaginary { C::new(T::zero(), e.re) } else { e })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::{eigenpairs, eigenvalues};
    use crate::lattice::{assemble, build_chain, ModelSpec};
    use crate::oracle;

    fn dimer(gamma: f64, kappa: usize) -> HoppingChain<f64> {
        build_chain(&ModelSpec::dimer(-0.5, 1.0, gamma, kappa, 50, Boundary::Obc)).unwrap()
    }

    #[test]
    fn closed_form_classes() {
        let hn = build_chain(&ModelSpec::hn(1.0, 0.5, 30, Boundary::Obc)).unwrap();
        assert_eq!(predict_class(&hn).unwrap().class, SpectrumKind::Real);
        let hn = build_chain(&ModelSpec::hn(1.0, 1.5, 30, Boundary::Obc)).unwrap();
        assert_eq!(predict_class(&hn).unwrap().class, SpectrumKind::Imaginary);
        assert_eq!(predict_class(&dimer(0.3, 1)).unwrap().class, SpectrumKind::Real);
        assert_eq!(predict_class(&dimer(0.7, 1)).unwrap().class, SpectrumKind::Complex);
        assert_eq!(predict_class(&dimer(1.2, 1)).unwrap().class, SpectrumKind::Imaginary);
        for g in [0.7, 1.2, 3.0, 10.0] {
            assert_ne!(predict_class(&dimer(g, 2)).unwrap().class, SpectrumKind::Imaginary);
        }
    }

    #[test]
    fn dimer_thresholds() {
        // real iff |gamma| < min(|u|,|v|), imaginary iff |gamma| > max
        for i in 0..60 {
            let g = -1.5 + 0.05 * i as f64 + 0.0123;
            let c = predict_class(&dimer(g, 1)).unwrap().class;
            let want = if g.abs() < 0.5 {
                SpectrumKind::Real
            } else if g.abs() > 1.0 {
                SpectrumKind::Imaginary
            } else {
                SpectrumKind::Complex
            };
            assert_eq!(c, want, "gamma {g}");
        }
    }

    #[test]
    fn critical_products_flagged() {
        let hn = build_chain(&ModelSpec::hn(1.0, 1.0, 10, Boundary::Obc)).unwrap();
        let c = predict_class(&hn).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.class, SpectrumKind::Real);
        let pbc = build_chain(&ModelSpec::hn(1.0, 0.2, 10, Boundary::Pbc)).unwrap();
        assert!(matches!(predict_class(&pbc), Err(Error::RequiresObc(_))));
    }

    #[test]
    fn classification_json() {
        let c = predict_class(&dimer(0.7, 1)).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v, serde_json::json!({"class": "complex", "degenerate": false, "first_mixed_bond": 1}));
    }

    #[test]
    fn hn_gauge_entries() {
        let c = build_chain(&ModelSpec::hn(1.0, 0.5, 4, Boundary::Obc)).unwrap();
        let g = gauge(&c).unwrap();
        let want = [1.0, (1.0f64 / 3.0).sqrt(), 1.0 / 3.0, (1.0f64 / 3.0).powf(1.5)];
        for (d, w) in g.entries().iter().zip(want) {
            assert!((d - w).abs() < 1e-15);
        }
        let recip = build_chain(&ModelSpec::hn(0.4, 0.0, 6, Boundary::Obc)).unwrap();
        assert!(gauge(&recip).unwrap().entries().iter().all(|&d| d == 1.0));
    }

    #[test]
    fn gauge_recurrence() {
        let c = dimer(0.3, 3);
        let g = gauge(&c).unwrap();
        let d = g.entries();
        assert_eq!(d[0], 1.0);
        for j in 0..c.bonds() {
            let want = (c.forward[j] / c.backward[j]).sqrt();
            assert!((d[j + 1] / d[j] - want).abs() < 1e-13);
        }
    }

    #[test]
    fn mixed_signs_have_no_gauge() {
        assert!(matches!(gauge(&dimer(0.7, 1)), Err(Error::NoGauge { bond: 1 })));
    }

    #[test]
    fn pseudo_hermiticity() {
        let c = build_chain(&ModelSpec::hn(1.0, 0.5, 12, Boundary::Obc)).unwrap();
        let m = assemble(&c);
        let g = gauge(&c).unwrap();
        assert!(pseudo_hermiticity_residual(&m, &g).unwrap() <= 1e-12);
        let mut bumped = m.clone();
        bumped[(3, 4)] += C::new(0.1, 0.0);
        assert!(pseudo_hermiticity_residual(&bumped, &g).unwrap() > 1e-3);

        let h = assemble(&build_chain(&ModelSpec::hn(1.0, 0.0, 5, Boundary::Obc)).unwrap());
        assert_eq!(pseudo_hermiticity_residual(&h, &GaugeTransform::identity(5)).unwrap(), 0.0);
    }

    #[test]
    fn hermitianized_offdiagonals() {
        let c = build_chain(&ModelSpec::hn(1.0, 0.5, 6, Boundary::Obc)).unwrap();
        let h = hermitianize(&c).unwrap();
        assert!(!h.imaginary);
        assert!(h.offdiag.iter().all(|x| (x - 0.75f64.sqrt()).abs() < 1e-15));

        let c = build_chain(&ModelSpec::hn(1.0, 1.5, 6, Boundary::Obc)).unwrap();
        let h = hermitianize(&c).unwrap();
        assert!(h.imaginary);
        assert!(h.offdiag.iter().all(|x| (x - 1.25f64.sqrt()).abs() < 1e-15));
        let direct = eigenvalues(&assemble(&c)).unwrap().eigenvalues;
        let via = gauge_spectrum(&c).unwrap();
        assert!(oracle::greedy_distance(&direct, &via) < 1e-12);

        let h = hermitianize(&dimer(0.3, 1)).unwrap();
        assert!((h.offdiag[0] + 0.4).abs() < 1e-15);
        assert!((h.offdiag[1] - 0.91f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn imaginary_onsite_variant() {
        // negative products with imaginary onsite: spectrum i * spec(H_R)
        let c = HoppingChain::new(vec![0.3, -0.2, 0.5, 0.1], vec![1.0, -2.0, 0.5], vec![-0.5, 1.0, -3.0], Boundary::Obc)
            .unwrap()
            .with_imaginary_onsite();
        assert_eq!(predict_class(&c).unwrap().class, SpectrumKind::Imaginary);
        let direct = eigenvalues(&assemble(&c)).unwrap();
        assert!(direct.max_abs_re() < 1e-12);
        let via = gauge_spectrum(&c).unwrap();
        assert!(oracle::greedy_distance(&direct.eigenvalues, &via) < 1e-12);
    }

    #[test]
    fn skin_profile_is_gauge_times_hermitian_mode() {
        let c = build_chain(&ModelSpec::dimer(0.8, 1.0, 0.35, 1, 8, Boundary::Obc)).unwrap();
        let g = gauge(&c).unwrap().entries();
        let h = hermitianize(&c).unwrap();
        let herm: Spectrum<f64> = symmetric_tridiagonal_eigen(&h.diag, &h.offdiag).unwrap();
        let full = eigenpairs(&assemble(&c)).unwrap();
        for (e, v) in full.eigenvalues.iter().zip(full.eigenvectors.as_ref().unwrap()) {
            let k = herm
                .eigenvalues
                .iter()
                .position(|x| (x.re - e.re).abs() < 1e-9)
                .expect("matching Hermitian eigenvalue");
            let phi = &herm.eigenvectors.as_ref().unwrap()[k];
            let prof: Vec<f64> = g.iter().zip(phi).map(|(d, p)| d * p.norm()).collect();
            let nrm = prof.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (p, z) in prof.iter().zip(v) {
                assert!((p / nrm - z.norm()).abs() < 1e-10);
            }
        }
    }
}
