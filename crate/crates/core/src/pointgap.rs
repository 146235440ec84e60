//! Point gaps of periodic spectra.
//!
//! The winding of `det(H(e^{ik}) - E0)` as `k` runs over `[0, 2 pi)` counts
//! how many times the periodic spectral curve encircles `E0`; a nonzero value
//! means `E0` sits in a point gap. The Bloch matrix is the `q x q` unit-cell
//! matrix, so the cost is independent of the chain length.

use serde::{Deserialize, Serialize};

use crate::eig::{determinant, eigenvalues};
use crate::error::{Error, Result};
use crate::lattice::{assemble, bloch_from_cell, build_chain, Boundary, ModelSpec};
use crate::nonbloch::{solve_beta_unity, RootOptions};
use crate::scalar::{cabs, Real, C};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingOptions<T> {
    /// Initial number of `k` samples (at least 64).
    pub nk: usize,
    /// Largest `k` grid tried while waiting for the winding to settle.
    pub max_nk: usize,
    /// `E0` closer than this to a sampled band counts as on the spectrum.
    pub on_spectrum_tol: T,
}

impl<T: Real> Default for WindingOptions<T> {
    fn default() -> Self {
        WindingOptions { nk: 256, max_nk: 16384, on_spectrum_tol: T::of(1e-8) }
    }
}

impl<T: Real> WindingOptions<T> {
    pub fn with_nk(nk: usize) -> Self {
        WindingOptions { nk, max_nk: (nk * 64).max(16384), ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WindingResult<T> {
    pub reference: C<T>,
    pub winding: i64,
    /// `k` samples of the grid on which the result settled.
    pub k_samples: usize,
    /// Unwrapped `arg det(H(k) - E0)` at `k = 2 pi m / k_samples`, `m = 0..=k_samples`.
    pub phase_track: Vec<T>,
    /// `|total phase / 2 pi - winding|`.
    pub residual: T,
    /// Smallest sampled distance from `E0` to a band.
    pub min_distance: T,
}

/// Closed `k` loop of a unit cell.
struct BlochLoop<T> {
    backward: Vec<T>,
    forward: Vec<T>,
}

impl<T: Real> BlochLoop<T> {
    fn new(spec: &ModelSpec<T>) -> Self {
        let (backward, forward) = spec.cell_hoppings();
        BlochLoop { backward, forward }
    }

    fn det(&self, k: T, e0: C<T>) -> C<T> {
        determinant(&bloch_from_cell(&self.backward, &self.forward, C::from_polar(T::one(), k)), e0)
    }

    fn bands(&self, k: T) -> Result<Vec<C<T>>> {
        let m = bloch_from_cell(&self.backward, &self.forward, C::from_polar(T::one(), k));
        Ok(eigenvalues(&m)?.eigenvalues)
    }

    /// Bands sampled at `nk` evenly spaced momenta.
    fn cloud(&self, nk: usize) -> Result<Vec<C<T>>> {
        let mut out = Vec::with_capacity(nk * self.backward.len());
        for m in 0..nk {
            out.extend(self.bands(k_at::<T>(m, nk))?);
        }
        Ok(out)
    }

    /// Phase change of the determinant between `k0` and `k1`, bisecting the
    /// interval while a single step turns by more than `pi / 3`.
    fn phase_step(&self, e0: C<T>, k0: T, k1: T, d0: C<T>, d1: C<T>, depth: u32) -> Result<T> {
        let step = (d1 / d0).arg();
        let limit = T::PI() / T::of(3.0);
        if step.abs() < limit {
            return Ok(step);
        }
        if depth == 0 {
            return if step.abs() < T::of(0.9) * T::PI() {
                Ok(step)
            } else {
                Err(Error::UnstableWinding { nk: 0 })
            };
        }
        let km = (k0 + k1) * T::of(0.5);
        let dm = self.det(km, e0);
        if dm.norm_sqr() == T::zero() {
            return Err(on_spectrum(e0, T::zero()));
        }
        Ok(self.phase_step(e0, k0, km, d0, dm, depth - 1)? + self.phase_step(e0, km, k1, dm, d1, depth - 1)?)
    }

    /// Total unwrapped phase over one period and the running track.
    fn total_phase(&self, e0: C<T>, nk: usize) -> Result<(T, Vec<T>)> {
        let mut track = Vec::with_capacity(nk + 1);
        let mut acc = T::zero();
        track.push(acc);
        let mut k0 = T::zero();
        let mut d0 = self.det(k0, e0);
        if d0.norm_sqr() == T::zero() {
            return Err(on_spectrum(e0, T::zero()));
        }
        for m in 1..=nk {
            let k1 = k_at::<T>(m, nk);
            let d1 = self.det(k1, e0);
            if d1.norm_sqr() == T::zero() {
                return Err(on_spectrum(e0, T::zero()));
            }
            acc = acc + self.phase_step(e0, k0, k1, d0, d1, 24).map_err(|e| match e {
                Error::UnstableWinding { .. } => Error::UnstableWinding { nk },
                other => other,
            })?;
            track.push(acc);
            k0 = k1;
            d0 = d1;
        }
        Ok((acc, track))
    }
}

fn k_at<T: Real>(m: usize, nk: usize) -> T {
    T::TAU() * T::of_usize(m) / T::of_usize(nk)
}

fn on_spectrum<T: Real>(e0: C<T>, distance: T) -> Error {
    Error::OnSpectrum {
        re: e0.re.to_f64_lossy(),
        im: e0.im.to_f64_lossy(),
        distance: distance.to_f64_lossy(),
    }
}

fn nearest<T: Real>(cloud: &[C<T>], z: C<T>) -> T {
    cloud.iter().map(|e| cabs(*e - z)).fold(T::infinity(), T::min)
}

pub fn winding_number<T: Real>(spec: &ModelSpec<T>, e0: C<T>, nk: usize) -> Result<WindingResult<T>> {
    winding_number_with(spec, e0, &WindingOptions::with_nk(nk))
}

/// Winding of the periodic spectrum around `e0`; the `k` grid is doubled
/// until two successive grids agree.
pub fn winding_number_with<T: Real>(spec: &ModelSpec<T>, e0: C<T>, opts: &WindingOptions<T>) -> Result<WindingResult<T>> {
    if opts.nk < 64 {
        return Err(Error::InvalidModel(format!("need at least 64 k samples, got {}", opts.nk)));
    }
    if !(e0.re.is_finite() && e0.im.is_finite()) {
        return Err(Error::InvalidModel("reference energy is not finite".into()));
    }
    let bl = BlochLoop::new(spec);
    let min_distance = nearest(&bl.cloud(opts.nk)?, e0);
    if min_distance < opts.on_spectrum_tol {
        return Err(on_spectrum(e0, min_distance));
    }
    let mut nk = opts.nk;
    let (mut phase, mut track) = bl.total_phase(e0, nk)?;
    loop {
        let w = (phase / T::TAU()).round();
        let (next_phase, next_track) = bl.total_phase(e0, 2 * nk)?;
        let w_next = (next_phase / T::TAU()).round();
        let residual = (next_phase / T::TAU() - w_next).abs();
        if w == w_next && residual < T::of(0.1) {
            return Ok(WindingResult {
                reference: e0,
                winding: w.to_i64().expect("finite winding"),
                k_samples: nk,
                phase_track: track,
                residual: (phase / T::TAU() - w).abs(),
                min_distance,
            });
        }
        nk *= 2;
        if nk > opts.max_nk {
            return Err(Error::UnstableWinding { nk });
        }
        phase = next_phase;
        track = next_track;
    }
}

/// Symmetric Hausdorff distance between two finite point sets; infinite if
/// exactly one of them is empty.
pub fn hausdorff<T: Real>(a: &[C<T>], b: &[C<T>]) -> T {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return T::zero(),
        (true, false) | (false, true) => return T::infinity(),
        _ => {}
    }
    let directed = |x: &[C<T>], y: &[C<T>]| x.iter().map(|p| nearest(y, *p)).fold(T::zero(), T::max);
    directed(a, b).max(directed(b, a))
}

/// Hausdorff distance between the periodic and open spectra of `spec`,
/// ignoring open-chain eigenvalues with `|E| < zero_mode_cutoff`.
pub fn pbc_obc_distance<T: Real>(spec: &ModelSpec<T>, zero_mode_cutoff: T) -> Result<T> {
    let open = spec.clone().with_boundary(Boundary::Obc);
    let closed = spec.clone().with_boundary(Boundary::Pbc);
    let obc: Vec<C<T>> = eigenvalues(&assemble(&build_chain(&open)?))?
        .eigenvalues
        .into_iter()
        .filter(|e| cabs(*e) >= zero_mode_cutoff)
        .collect();
    let pbc = eigenvalues(&assemble(&build_chain(&closed)?))?.eigenvalues;
    Ok(hausdorff(&pbc, &obc))
}

pub const DEFAULT_ZERO_MODE_CUTOFF: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ReferenceChoice<T> {
    pub e0: C<T>,
    pub winding: i64,
    /// Distance from `e0` to the sampled bands.
    pub clearance: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceOptions {
    /// `k` samples of the band cloud and of each trial winding.
    pub nk: usize,
    /// Trial points per side of the bounding-box grid.
    pub grid: usize,
    /// Offset of near-band trial points, relative to the cloud diameter.
    pub offset: f64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions { nk: 256, grid: 32, offset: 2e-3 }
    }
}

/// An energy inside a point gap of the periodic spectrum, if one is found.
///
/// Trial points are the centroid of the band cloud, a grid over its bounding
/// box, and points just off the sampled bands (which catch thin loops). Among
/// those with nonzero winding the one farthest from the bands wins; its
/// winding is then confirmed on refined grids.
pub fn interior_reference<T: Real>(spec: &ModelSpec<T>, opts: &ReferenceOptions) -> Result<Option<ReferenceChoice<T>>> {
    let bl = BlochLoop::new(spec);
    let nk = opts.nk.max(64);
    let cloud = bl.cloud(nk)?;
    let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
    for e in &cloud {
        lo_re = lo_re.min(e.re);
        hi_re = hi_re.max(e.re);
        lo_im = lo_im.min(e.im);
        hi_im = hi_im.max(e.im);
    }
    let scale = (hi_re - lo_re).hypot(hi_im - lo_im);
    if !(scale > T::of(1e-12)) {
        return Ok(None);
    }
    let mut trials = Vec::new();
    let count = T::of_usize(cloud.len());
    trials.push(cloud.iter().fold(C::new(T::zero(), T::zero()), |a, e| a + e) / count);
    let g = opts.grid.max(2);
    for i in 0..g {
        for j in 0..g {
            let fx = (T::of_usize(i) + T::of(0.5)) / T::of_usize(g);
            let fy = (T::of_usize(j) + T::of(0.5)) / T::of_usize(g);
            trials.push(C::new(lo_re + (hi_re - lo_re) * fx, lo_im + (hi_im - lo_im) * fy));
        }
    }
    let eps = T::of(opts.offset) * scale;
    let stride = (cloud.len() / 256).max(1);
    for e in cloud.iter().step_by(stride) {
        for (dx, dy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            trials.push(*e + C::new(T::of(dx), T::of(dy)) * eps);
        }
    }
    let floor = T::of(1e-6) * scale;
    let mut scored: Vec<(T, C<T>)> = trials
        .into_iter()
        .map(|z| (nearest(&cloud, z), z))
        .filter(|(d, _)| *d > floor)
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    for (clearance, z) in scored {
        let w = match bl.total_phase(z, nk) {
            Ok((phase, _)) => (phase / T::TAU()).round(),
            Err(_) => continue,
        };
        if w == T::zero() {
            continue;
        }
        match winding_number_with(spec, z, &WindingOptions::with_nk(nk)) {
            Ok(res) if res.winding != 0 => {
                return Ok(Some(ReferenceChoice { e0: z, winding: res.winding, clearance }));
            }
            Ok(_) => {}
            Err(e) if e.is_numerical() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosingEvidence {
    /// Winding changes sign between neighbouring grid points.
    WindingFlip,
    /// A stretch of the grid without any point gap.
    GapVanishes,
    /// Periodic and open spectra nearly coincide.
    SpectraCoincide,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScanSample<T> {
    pub value: T,
    pub winding: i64,
    pub reference: Option<C<T>>,
    pub distance: Option<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GapClosing<T> {
    pub value: T,
    /// Half-width of the grid stretch the closing was located in.
    pub uncertainty: T,
    pub evidence: ClosingEvidence,
    /// Nearest root of `|beta| = 1` on the scanned interval.
    pub nearest_root: Option<T>,
    /// `nearest_root` lies within `uncertainty` plus one grid step.
    pub confirmed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GapScan<T> {
    pub param: String,
    pub samples: Vec<ScanSample<T>>,
    pub closings: Vec<GapClosing<T>>,
    pub beta_roots: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions<T> {
    pub reference: ReferenceOptions,
    /// Also flag local minima of the periodic/open distance below this value.
    pub distance_threshold: Option<T>,
    pub zero_mode_cutoff: T,
}

impl<T: Real> Default for ScanOptions<T> {
    fn default() -> Self {
        ScanOptions {
            reference: ReferenceOptions::default(),
            distance_threshold: None,
            zero_mode_cutoff: T::of(DEFAULT_ZERO_MODE_CUTOFF),
        }
    }
}

/// Locate point-gap closings as `param` runs over the increasing `grid`.
///
/// A closing is reported between neighbours whose windings have opposite
/// signs, and at the middle of every maximal stretch of zero winding (unless
/// the whole grid is gapless). Each is compared with the `|beta| = 1` roots.
pub fn gap_transition_scan<T: Real>(
    template: &ModelSpec<T>,
    param: &str,
    grid: &[T],
    opts: &ScanOptions<T>,
) -> Result<GapScan<T>> {
    template.param(param)?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidModel("scan grid must be strictly increasing with at least 2 points".into()));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for &x in grid {
        let spec = template.clone().with_param(param, x)?;
        let choice = interior_reference(&spec, &opts.reference)?;
        let distance = match opts.distance_threshold {
            Some(_) => Some(pbc_obc_distance(&spec, opts.zero_mode_cutoff)?),
            None => None,
        };
        samples.push(ScanSample {
            value: x,
            winding: choice.map_or(0, |c| c.winding),
            reference: choice.map(|c| c.e0),
            distance,
        });
    }

    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(T::zero(), T::max);
    let half = T::of(0.5);
    let mut raw: Vec<(T, T, ClosingEvidence)> = Vec::new();
    let n = samples.len();
    let all_zero = samples.iter().all(|s| s.winding == 0);
    let mut i = 0;
    while i < n {
        if samples[i].winding == 0 {
            let start = i;
            while i + 1 < n && samples[i + 1].winding == 0 {
                i += 1;
            }
            if !all_zero {
                let (a, b) = (grid[start], grid[i]);
                raw.push(((a + b) * half, (b - a) * half, ClosingEvidence::GapVanishes));
            }
        } else if i + 1 < n && samples[i].winding * samples[i + 1].winding < 0 {
            let (a, b) = (grid[i], grid[i + 1]);
            raw.push(((a + b) * half, (b - a) * half, ClosingEvidence::WindingFlip));
        }
        i += 1;
    }
    if let Some(thr) = opts.distance_threshold {
        let d: Vec<T> = samples.iter().map(|s| s.distance.unwrap_or(T::infinity())).collect();
        for j in 0..n {
            let left = j == 0 || d[j] <= d[j - 1];
            let right = j + 1 == n || d[j] <= d[j + 1];
            if d[j] < thr && left && right {
                raw.push((grid[j], T::zero(), ClosingEvidence::SpectraCoincide));
            }
        }
    }
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    let beta_roots: Vec<T> = solve_beta_unity(template, param, grid[0], grid[n - 1], &RootOptions::default())?
        .into_iter()
        .map(|r| r.value)
        .collect();
    let closings = raw
        .into_iter()
        .map(|(value, uncertainty, evidence)| {
            let nearest_root = beta_roots
                .iter()
                .copied()
                .min_by(|a, b| (*a - value).abs().partial_cmp(&(*b - value).abs()).unwrap_or(std::cmp::Ordering::Equal));
            let confirmed = nearest_root.is_some_and(|r| (r - value).abs() <= uncertainty + step);
            GapClosing { value, uncertainty, evidence, nearest_root, confirmed }
        })
        .collect();
    Ok(GapScan { param: param.to_string(), samples, closings, beta_roots })
}
