//! End-to-end checks of the numerical claims the library is built around.
//!
//! Each check returns a [`CriterionReport`]; failures are reported, never
//! panicked on, so a driver can print every outcome.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{gauge, gauge_spectrum, numerical_class, predict_class, pseudo_hermiticity_residual, SpectrumKind};
use crate::eig::{determinant, eigenpairs, eigenvalues};
use crate::error::Result;
use crate::lattice::{assemble, build_chain, Boundary, DenseMatrix, HoppingChain, ModelSpec, Ratio};
use crate::nonbloch::{beta_magnitude, closed_form_beta, critical_manifold, solve_beta_unity, RootOptions};
use crate::oracle;
use crate::pointgap::{interior_reference, pbc_obc_distance, winding_number, ReferenceOptions};
use crate::skin::{dmipr, SkinConfig};
use crate::sweep::{run_sweep, Axis, PhaseDiagram, SweepConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}. {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Seed of every randomized sample.
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 20240611 }
    }
}

fn finish(id: u8, name: &str, start: Instant, outcome: Result<(bool, String)>) -> CriterionReport {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport { id, name: name.to_string(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn obc_values(spec: &ModelSpec<f64>) -> Result<crate::Spectrum> {
    eigenvalues(&assemble(&build_chain(spec)?))
}

fn dimer(u: f64, gamma: f64, kappa: usize, sites: usize) -> ModelSpec<f64> {
    ModelSpec::dimer(u, 1.0, gamma, kappa, sites / 2, Boundary::Obc)
}

pub fn hn_transition() -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for g in [0.2, 0.5, 0.9] {
            let im = obc_values(&ModelSpec::hn(1.0, g, 100, Boundary::Obc))?.max_abs_im();
            ok &= im <= 1e-8;
            parts.push(format!("g={g}: max|Im|={im:.1e}"));
        }
        for g in [1.1, 1.5] {
            let re = obc_values(&ModelSpec::hn(1.0, g, 100, Boundary::Obc))?.max_abs_re();
            ok &= re <= 1e-8;
            parts.push(format!("g={g}: max|Re|={re:.1e}"));
        }
        let secs = start.elapsed().as_secs_f64();
        ok &= secs < 5.0;
        Ok((ok, parts.join(", ")))
    };
    finish(1, "HN real-imaginary transition", start, run())
}

pub fn dimer_three_phases() -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for (g, want) in [(0.3, SpectrumKind::Real), (0.7, SpectrumKind::Complex), (1.2, SpectrumKind::Imaginary)] {
            let spec = dimer(-0.5, g, 1, 100);
            let chain = build_chain(&spec)?;
            let m = assemble(&chain);
            let s = eigenvalues(&m)?;
            let (re, im) = (s.max_abs_re(), s.max_abs_im());
            let shape = match want {
                SpectrumKind::Real => im <= 1e-8,
                SpectrumKind::Imaginary => re <= 1e-8,
                SpectrumKind::Complex => re > 1e-3 && im > 1e-3,
            };
            let predicted = predict_class(&chain)?.class;
            let numeric = numerical_class(&s, m.frobenius_norm());
            ok &= shape && predicted == want && numeric == want;
            parts.push(format!(
                "g={g}: {} (max|Re|={re:.2e}, max|Im|={im:.2e}, predicted {})",
                numeric.as_str(),
                predicted.as_str()
            ));
        }
        Ok((ok, parts.join(", ")))
    };
    finish(2, "Dimer three-phase spectrum", start, run())
}

/// Open chain with random signs and magnitudes whose products `t_j t'_j` are
/// all positive, plus real onsite terms.
pub fn random_positive_chain(rng: &mut ChaCha8Rng, sites: usize) -> HoppingChain<f64> {
    let onsite = (0..sites).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut backward = Vec::with_capacity(sites - 1);
    let mut forward = Vec::with_capacity(sites - 1);
    for _ in 1..sites {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        backward.push(sign * rng.gen_range(0.2..2.0));
        forward.push(sign * rng.gen_range(0.2..2.0));
    }
    HoppingChain::new(onsite, backward, forward, Boundary::Obc).expect("consistent lengths")
}

/// Largest distance under index-wise pairing after sorting by real part;
/// exact bottleneck matching for spectra on the real line.
fn sorted_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let key = |v: &[Complex64]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap_or(std::cmp::Ordering::Equal));
        v
    };
    key(a).iter().zip(key(b).iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn gauge_equivalence(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x3);
        let (mut worst_eig, mut worst_res) = (0.0f64, 0.0f64);
        for _ in 0..100 {
            let chain = random_positive_chain(&mut rng, 40);
            let m = assemble(&chain);
            let general = eigenvalues(&m)?.eigenvalues;
            let via = gauge_spectrum(&chain)?;
            worst_eig = worst_eig.max(sorted_distance(&general, &via));
            worst_res = worst_res.max(pseudo_hermiticity_residual(&m, &gauge(&chain)?)?);
        }
        Ok((
            worst_eig <= 1e-9 && worst_res <= 1e-12,
            format!("100 chains, L=40: max eigenvalue mismatch {worst_eig:.2e}, max pseudo-Hermiticity residual {worst_res:.2e}"),
        ))
    };
    finish(3, "Gauge equivalence oracle", start, run())
}

fn unity_roots_match(template: &ModelSpec<f64>) -> Result<(bool, String)> {
    let roots = solve_beta_unity(template, "gamma", -1.5, 1.5, &RootOptions::default())?;
    let c = 0.5f64.sqrt();
    let want = [-c, 0.0, c];
    let ok = roots.len() == 3 && roots.iter().zip(want).all(|(r, w)| (r.value - w).abs() <= 1e-8);
    let shown: Vec<String> = roots.iter().map(|r| format!("{:.10}", r.value)).collect();
    Ok((ok, format!("roots [{}]", shown.join(", "))))
}

pub fn skin_transition() -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let cfg = SkinConfig::default();
        let mut ok = true;
        let mut parts = Vec::new();
        for (kappa, sites) in [(1usize, 100usize), (3, 120)] {
            let a = dmipr(&eigenpairs(&assemble(&build_chain(&dimer(-0.5, -0.70, kappa, sites))?))?, &cfg)?;
            let b = dmipr(&eigenpairs(&assemble(&build_chain(&dimer(-0.5, -0.71, kappa, sites))?))?, &cfg)?;
            let (roots_ok, roots) = unity_roots_match(&dimer(-0.5, 0.0, kappa, sites))?;
            ok &= a * b < 0.0 && roots_ok;
            parts.push(format!("kappa={kappa}, L={sites}: dMIPR(-0.70)={a:.4}, dMIPR(-0.71)={b:.4}, {roots}"));
        }
        Ok((ok, parts.join("; ")))
    };
    finish(4, "Skin-transition location", start, run())
}

// -0.7071 is a sample point just past the transition, not an approximation of 1/sqrt(2)
#[allow(clippy::approx_constant)]
pub fn point_gap_closing() -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let near = dimer(-0.5, -0.70, 1, 120);
        let at = dimer(-0.5, -0.7071, 1, 120);
        let choice = match interior_reference(&near, &ReferenceOptions::default())? {
            Some(c) => c,
            None => return Ok((false, "no point gap found at gamma=-0.70".into())),
        };
        let closed = winding_number(&at, choice.e0, 256)?.winding;
        let still_open = interior_reference(&at, &ReferenceOptions::default())?;
        let d_crit = pbc_obc_distance(&at, 0.05)?;
        let d_away = pbc_obc_distance(&dimer(-0.5, -0.5, 1, 120), 0.05)?;
        let ok = choice.winding != 0 && closed == 0 && still_open.is_none() && d_crit <= 0.08 && d_away > 0.2;
        Ok((
            ok,
            format!(
                "E0={:.4}{:+.4}i: winding {} at -0.70, {} at -0.7071 (gap search at -0.7071: {}); Hausdorff {:.4} at -0.7071, {:.4} at -0.5",
                choice.e0.re,
                choice.e0.im,
                choice.winding,
                closed,
                if still_open.is_some() { "found a gap" } else { "none" },
                d_crit,
                d_away
            ),
        ))
    };
    finish(5, "Point-gap closing", start, run())
}

/// Figure-style sweep of the dimer over `(u, gamma)` at `v = 1`.
pub fn dimer_diagram_config(kappa: usize, sites: usize) -> SweepConfig<f64> {
    SweepConfig::new(
        ModelSpec::dimer(-0.5, 1.0, 0.0, kappa, sites / 2, Boundary::Obc),
        Axis::new("u", -2.0, 2.0, 41),
        Axis::new("gamma", -1.5, 1.5, 31),
        sites,
    )
}

/// Cells farther than one grid cell from every critical curve whose dMIPR
/// sign disagrees with `sign(ln |beta|)`; cells with a vanishing hopping are
/// skipped. Returns `(checked, mismatched, both signs present)`.
pub fn diagram_mismatches(pd: &PhaseDiagram<f64>) -> Result<(usize, usize, bool)> {
    let template = &pd.meta.template;
    let (du, dg) = (pd.axis1.step(), pd.axis2.step());
    let curves = critical_manifold(template)?;
    let mut points: Vec<[f64; 2]> = Vec::new();
    for c in &curves {
        let range_u = (pd.axis1.min - 2.0 * du, pd.axis1.max + 2.0 * du);
        let range_g = (pd.axis2.min - 2.0 * dg, pd.axis2.max + 2.0 * dg);
        for seg in c.sample(range_u, range_g, 6001) {
            points.extend(seg);
        }
    }
    let (mut checked, mut bad, mut pos, mut neg) = (0, 0, false, false);
    for (u, g, cell) in pd.iter() {
        let near = points.iter().any(|[x, y]| ((u - x) / du).hypot((g - y) / dg) <= 1.0);
        let (Some(r), Some(d)) = (cell.r, cell.dmipr) else { continue };
        if near {
            continue;
        }
        checked += 1;
        pos |= d > 0.0;
        neg |= d < 0.0;
        if (d > 0.0) != (r > 1.0) || d == 0.0 {
            bad += 1;
        }
    }
    Ok((checked, bad, pos && neg))
}

pub fn phase_diagrams() -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for kappa in 1..=4 {
            let pd = run_sweep(&dimer_diagram_config(kappa, 60))?;
            let (checked, bad, both) = diagram_mismatches(&pd)?;
            ok &= bad == 0 && both && checked > 0;
            parts.push(format!("kappa={kappa}: {bad}/{checked} off-curve cells disagree"));
        }
        let secs = start.elapsed().as_secs_f64();
        ok &= secs < 180.0;
        Ok((ok, parts.join(", ")))
    };
    finish(6, "Phase-diagram structure", start, run())
}

fn random_trimer(rng: &mut ChaCha8Rng) -> ModelSpec<f64> {
    let mut p = || {
        let x: f64 = rng.gen_range(0.1..2.5);
        if rng.gen_bool(0.5) { x } else { -x }
    };
    let (u, v, w) = (p(), p(), p());
    let gamma = rng.gen_range(-2.0..2.0);
    let kappa = rng.gen_range(1..=6);
    ModelSpec::trimer(u, v, w, gamma, kappa, 2 * kappa, Boundary::Obc)
}

fn random_aah(rng: &mut ChaCha8Rng) -> ModelSpec<f64> {
    let t = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let lambda = rng.gen_range(-3.0..3.0);
    let gamma = rng.gen_range(-2.0..2.0);
    let kappa = rng.gen_range(1..=8);
    ModelSpec::aah(t, lambda, gamma, Ratio::new(1, 4).expect("coprime"), kappa, 8 * kappa, Boundary::Obc)
}

pub fn closed_form_manifolds(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7);
        let mut worst_rel = 0.0f64;
        let mut samples = Vec::with_capacity(2000);
        for i in 0..2000 {
            let spec = if i % 2 == 0 { random_trimer(&mut rng) } else { random_aah(&mut rng) };
            let Ok(b) = beta_magnitude(&spec) else { continue };
            let c = closed_form_beta(&spec).expect("closed form exists");
            worst_rel = worst_rel.max((b.r - c).abs() / b.r.max(1.0));
            samples.push(spec);
        }
        let (mut roots, mut worst_root) = (0usize, 0.0f64);
        let mut missing = 0usize;
        for spec in samples.iter().step_by(20) {
            let sweeps: [(&str, f64, f64); 2] = match spec.kind() {
                crate::lattice::FamilyKind::MosaicTrimer => [("gamma", -3.0, 3.0), ("w", -4.0, 4.0)],
                _ => [("gamma", -3.0, 3.0), ("lambda", -5.0, 5.0)],
            };
            for (param, lo, hi) in sweeps {
                for r in solve_beta_unity(spec, param, lo, hi, &RootOptions::default())? {
                    roots += 1;
                    match r.manifold_distance {
                        Some(d) => worst_root = worst_root.max(d),
                        None => missing += 1,
                    }
                }
            }
        }
        let ok = worst_rel <= 1e-12 && worst_root <= 1e-8 && missing == 0 && samples.len() >= 1000;
        Ok((
            ok,
            format!(
                "{} samples: max relative |beta| deviation {worst_rel:.2e}; {roots} roots, max distance to closed form {worst_root:.2e}, {missing} unmatched",
                samples.len()
            ),
        ))
    };
    finish(7, "Trimer and AAH critical formulas", start, run())
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn eigensolver_correctness(opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x8);
        let (mut worst_root, mut worst_trace, mut worst_det) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..500 {
            let n = rng.gen_range(1..=8);
            let m = random_matrix(&mut rng, n);
            let values = eigenvalues(&m)?.eigenvalues;
            let reference = oracle::eigenvalues_by_polynomial(m.as_slice(), n);
            worst_root = worst_root.max(oracle::multiset_distance(&values, &reference));
            let sum: Complex64 = values.iter().sum();
            worst_trace = worst_trace.max((sum - m.trace()).norm());
            let prod: Complex64 = values.iter().product();
            let det = determinant(&m, Complex64::new(0.0, 0.0));
            worst_det = worst_det.max((prod - det).norm() / det.norm().max(1.0));
        }
        let mut worst_res = 0.0f64;
        for n in [50, 200, 600] {
            let m = random_matrix(&mut rng, n);
            let s = eigenpairs(&m)?;
            let rel = s.residual_max().unwrap_or(f64::INFINITY) / m.frobenius_norm();
            worst_res = worst_res.max(rel);
        }
        let ok = worst_root <= 1e-8 && worst_trace <= 1e-10 && worst_det <= 1e-10 && worst_res <= 1e-12;
        Ok((
            ok,
            format!(
                "500 matrices n<=8: oracle distance {worst_root:.2e}, trace {worst_trace:.2e}, det {worst_det:.2e}; n in {{50,200,600}}: max relative residual {worst_res:.2e}"
            ),
        ))
    };
    finish(8, "Eigensolver correctness", start, run())
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    vec![
        hn_transition(),
        dimer_three_phases(),
        gauge_equivalence(opts),
        skin_transition(),
        point_gap_closing(),
        phase_diagrams(),
        closed_form_manifolds(opts),
        eigensolver_correctness(opts),
    ]
}
