//! Directional inverse participation ratio.
//!
//! `dIPR(psi) = P(psi) * sum |psi_j|^4 / <psi|psi>^2` with
//! `P(psi) = sgn sum_j (j - L/2 - delta) |psi_j|`, sites numbered `1..=L`.
//! Negative values mark left-localized states, positive values right-localized
//! ones. `dMIPR` is the mean over every eigenstate of a spectrum.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eig::Spectrum;
use crate::error::{Error, Result};
use crate::scalar::{cabs, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SkinConfig<T> {
    pub delta: T,
}

impl<T: Real> Default for SkinConfig<T> {
    fn default() -> Self {
        SkinConfig { delta: T::of(0.25) }
    }
}

impl<T: Real> SkinConfig<T> {
    pub fn new(delta: T) -> Result<Self> {
        let cfg = SkinConfig { delta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta > T::zero() && self.delta < T::of(0.5) {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("delta must lie in (0, 0.5), got {}", self.delta)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Extended,
    Mixed,
}

/// Signed IPR of one state; the input need not be normalized.
pub fn dipr<T: Real>(psi: &[C<T>], cfg: &SkinConfig<T>) -> Result<T> {
    let n = psi.len();
    let mags: Vec<T> = psi.iter().map(|z| cabs(*z)).collect();
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::InvalidModel("state has non-finite components".into()));
    }
    let top = mags.iter().copied().fold(T::zero(), T::max);
    if top == T::zero() {
        return Err(Error::ZeroVector);
    }
    // rescaling by the largest entry keeps |psi|^4 clear of under/overflow
    let mut norm2 = T::zero();
    let mut quartic = T::zero();
    let mut moment = T::zero();
    let centre = T::of_usize(n) * T::of(0.5) + cfg.delta;
    for (j, m) in mags.iter().enumerate() {
        let a = *m / top;
        let a2 = a * a;
        norm2 = norm2 + a2;
        quartic = quartic + a2 * a2;
        moment = moment + (T::of_usize(j + 1) - centre) * a;
    }
    let ipr = quartic / (norm2 * norm2);
    let sign = if moment > T::zero() {
        T::one()
    } else if moment < T::zero() {
        -T::one()
    } else {
        T::zero()
    };
    Ok(sign * ipr)
}

/// Per-state dIPR values and their mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SkinProfile<T> {
    pub dipr: Vec<T>,
    pub dmipr: T,
    pub delta: T,
}

impl<T: Real> SkinProfile<T> {
    pub fn from_states(states: &[Vec<C<T>>], cfg: &SkinConfig<T>) -> Result<Self> {
        cfg.validate()?;
        if states.is_empty() {
            return Err(Error::MissingEigenvectors);
        }
        let dipr = states.iter().map(|s| dipr(s, cfg)).collect::<Result<Vec<T>>>()?;
        let dmipr = dipr.iter().copied().sum::<T>() / T::of_usize(dipr.len());
        Ok(SkinProfile { dipr, dmipr, delta: cfg.delta })
    }

    pub fn sites(&self) -> usize {
        self.dipr.len()
    }

    /// Side of a single state: beyond `threshold` in magnitude it is localized.
    pub fn state_side(&self, index: usize, threshold: T) -> Side {
        side_of(self.dipr[index], threshold)
    }

    /// `2/L`, twice the IPR of a uniform state.
    pub fn default_threshold(&self) -> T {
        T::of(2.0) / T::of_usize(self.sites().max(1))
    }
}

fn side_of<T: Real>(x: T, threshold: T) -> Side {
    if x < -threshold {
        Side::Left
    } else if x > threshold {
        Side::Right
    } else {
        Side::Extended
    }
}

/// Skin profile of a spectrum computed with eigenvectors.
pub fn skin_profile<T: Real>(spectrum: &Spectrum<T>, cfg: &SkinConfig<T>) -> Result<SkinProfile<T>> {
    let states = spectrum.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    SkinProfile::from_states(states, cfg)
}

pub fn dmipr<T: Real>(spectrum: &Spectrum<T>, cfg: &SkinConfig<T>) -> Result<T> {
    Ok(skin_profile(spectrum, cfg)?.dmipr)
}

/// Common side of all states, or `Mixed`.
pub fn localization_side<T: Real>(profile: &SkinProfile<T>, threshold: Option<T>) -> Result<Side> {
    let thr = threshold.unwrap_or_else(|| profile.default_threshold());
    if !(thr > T::zero()) {
        return Err(Error::InvalidModel("localization threshold must be positive".into()));
    }
    let mut sides = profile.dipr.iter().map(|x| side_of(*x, thr));
    let first = match sides.next() {
        Some(s) => s,
        None => return Err(Error::MissingEigenvectors),
    };
    Ok(if sides.all(|s| s == first) { first } else { Side::Mixed })
}

/// Writes `n,re,im,dipr`, one row per state, `n` counting from 1.
pub fn write_state_csv<T: Real, W: Write>(
    out: &mut W,
    eigenvalues: &[C<T>],
    profile: &SkinProfile<T>,
) -> std::io::Result<()> {
    writeln!(out, "n,re,im,dipr")?;
    for (i, (e, d)) in eigenvalues.iter().zip(&profile.dipr).enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            e.re.to_f64_lossy(),
            e.im.to_f64_lossy(),
            d.to_f64_lossy()
        )?;
    }
    Ok(())
}
