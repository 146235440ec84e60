//! Non-Bloch deformation `|beta|` of periodic chains and the parameter
//! surfaces on which it equals one.
//!
//! Over one unit cell of `q` bonds, `|beta| = sqrt|prod t'_j / prod t_j|`.
//! Bulk states of the open chain pile up at the left end when `|beta| < 1`
//! and at the right end when `|beta| > 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Family, FamilyKind, ModelSpec};
use crate::scalar::{Real, C};

/// `|r - 1|` below which a chain counts as critical.
pub const CRITICAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkinSide {
    Left,
    Right,
    Critical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BetaResult<T> {
    pub r: T,
    pub log_r: T,
    pub side: SkinSide,
    pub cell_backward: Vec<T>,
    pub cell_forward: Vec<T>,
}

/// `ln |beta|`, or `+-inf`/`NaN` when a hopping of the unit cell vanishes.
pub fn log_beta<T: Real>(spec: &ModelSpec<T>) -> T {
    let (b, f) = spec.cell_hoppings();
    log_beta_of_cell(&b, &f)
}

fn log_beta_of_cell<T: Real>(backward: &[T], forward: &[T]) -> T {
    let half = T::of(0.5);
    backward
        .iter()
        .zip(forward)
        .map(|(t, tp)| half * (tp.abs().ln() - t.abs().ln()))
        .sum()
}

pub fn beta_magnitude<T: Real>(spec: &ModelSpec<T>) -> Result<BetaResult<T>> {
    let (b, f) = spec.cell_hoppings();
    for (j, (t, tp)) in b.iter().zip(&f).enumerate() {
        if *t == T::zero() || *tp == T::zero() {
            return Err(Error::Disconnected { bond: j + 1 });
        }
    }
    let log_r = log_beta_of_cell(&b, &f);
    let r = log_r.exp();
    let side = side_of(r);
    Ok(BetaResult { r, log_r, side, cell_backward: b, cell_forward: f })
}

fn side_of<T: Real>(r: T) -> SkinSide {
    if (r - T::one()).abs() <= T::of(CRITICAL_TOL) {
        SkinSide::Critical
    } else if r < T::one() {
        SkinSide::Left
    } else {
        SkinSide::Right
    }
}

fn is_quarter<T>(spec: &ModelSpec<T>) -> bool {
    matches!(&spec.family, Family::MosaicAah { alpha, .. } if alpha.p == 1 && alpha.q == 4)
}

/// `|beta|` from the per-family closed forms, independent of the cell walk.
/// `None` where no closed form is known (AAH with `alpha != 1/4`).
pub fn closed_form_beta<T: Real>(spec: &ModelSpec<T>) -> Option<T> {
    let g = spec.gamma();
    let ratio = |x: T| (x - g) / (x + g);
    let k = spec.kappa();
    let r2 = match spec.family {
        Family::Hn { t, .. } => ratio(t),
        Family::MosaicDimer { u, v, .. } => {
            if k % 2 == 1 {
                ratio(u) * ratio(v)
            } else {
                ratio(v)
            }
        }
        Family::MosaicTrimer { u, v, w, .. } => {
            if k.is_multiple_of(3) {
                ratio(w)
            } else {
                ratio(u) * ratio(v) * ratio(w)
            }
        }
        Family::MosaicAah { t, lambda, .. } => {
            if !is_quarter(spec) {
                return None;
            }
            match k % 4 {
                0 => ratio(t + lambda),
                2 => ratio(t - lambda) * ratio(t + lambda),
                _ => ratio(t) * ratio(t) * ratio(t - lambda) * ratio(t + lambda),
            }
        }
    };
    Some(r2.abs().sqrt())
}

/// One closed-form critical surface, written as `axis = f(gamma)` where possible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "snake_case", bound = "T: Real")]
pub enum CurveKind<T> {
    GammaZero,
    /// `u = -v`
    DimerOpposite { v: T },
    /// `u = -gamma^2 / v`
    DimerHyperbola { v: T },
    /// `w = -(uv + gamma^2) / (u + v)`
    TrimerFirst { u: T, v: T },
    /// `w = -(u + v) gamma^2 / (uv + gamma^2)`
    TrimerSecond { u: T, v: T },
    /// `w = 0`
    TrimerZero,
    /// `lambda = s sqrt(2 (t^2 + gamma^2))`
    AahOuter { t: T, sign: i8 },
    /// `lambda = s sqrt(((t+gamma)^4 + (t-gamma)^4) / (2 (t^2 + gamma^2)))`
    AahInner { t: T, sign: i8 },
    /// `lambda = s sqrt(t^2 + gamma^2)`
    AahHalf { t: T, sign: i8 },
    /// `t = 0`
    HnZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CriticalCurve<T> {
    #[serde(flatten)]
    pub kind: CurveKind<T>,
    /// The non-`gamma` parameter the curve is drawn against.
    pub axis: String,
}

fn sgn<T: Real>(s: i8) -> T {
    if s < 0 {
        -T::one()
    } else {
        T::one()
    }
}

impl<T: Real> CriticalCurve<T> {
    pub fn label(&self) -> String {
        let s = |x: i8| if x < 0 { "-" } else { "+" };
        match &self.kind {
            CurveKind::GammaZero => "gamma=0".into(),
            CurveKind::DimerOpposite { .. } => "u=-v".into(),
            CurveKind::DimerHyperbola { .. } => "u=-gamma^2/v".into(),
            CurveKind::TrimerFirst { .. } => "w=-(uv+gamma^2)/(u+v)".into(),
            CurveKind::TrimerSecond { .. } => "w=-(u+v)gamma^2/(uv+gamma^2)".into(),
            CurveKind::TrimerZero => "w=0".into(),
            CurveKind::AahOuter { sign, .. } => format!("lambda={}sqrt(2(t^2+gamma^2))", s(*sign)),
            CurveKind::AahInner { sign, .. } => {
                format!("lambda={}sqrt(((t+gamma)^4+(t-gamma)^4)/(2(t^2+gamma^2)))", s(*sign))
            }
            CurveKind::AahHalf { sign, .. } => format!("lambda={}sqrt(t^2+gamma^2)", s(*sign)),
            CurveKind::HnZero => "t=0".into(),
        }
    }

    /// Axis value on the curve at `gamma`; `None` for `gamma = 0` (a line of
    /// constant `gamma`) and where the formula is singular.
    pub fn axis_value(&self, gamma: T) -> Option<T> {
        let g2 = gamma * gamma;
        let two = T::of(2.0);
        let x = match self.kind {
            CurveKind::GammaZero => return None,
            CurveKind::DimerOpposite { v } => -v,
            CurveKind::DimerHyperbola { v } => -g2 / v,
            CurveKind::TrimerFirst { u, v } => -(u * v + g2) / (u + v),
            CurveKind::TrimerSecond { u, v } => -(u + v) * g2 / (u * v + g2),
            CurveKind::TrimerZero | CurveKind::HnZero => T::zero(),
            CurveKind::AahOuter { t, sign } => sgn::<T>(sign) * (two * (t * t + g2)).sqrt(),
            CurveKind::AahInner { t, sign } => {
                let a = (t + gamma).powi(4) + (t - gamma).powi(4);
                sgn::<T>(sign) * (a / (two * (t * t + g2))).sqrt()
            }
            CurveKind::AahHalf { t, sign } => sgn::<T>(sign) * (t * t + g2).sqrt(),
        };
        x.is_finite().then_some(x)
    }

    /// Polynomial form `F(spec) = 0` of the curve; the sign branches of the
    /// AAH curves share one equation.
    pub fn implicit(&self, spec: &ModelSpec<T>) -> T {
        let p = |n: &str| spec.param(n).unwrap_or_else(|_| T::nan());
        let g = spec.gamma();
        let g2 = g * g;
        let two = T::of(2.0);
        match self.kind {
            CurveKind::GammaZero => g,
            CurveKind::DimerOpposite { .. } => p("u") + p("v"),
            CurveKind::DimerHyperbola { .. } => p("u") * p("v") + g2,
            CurveKind::TrimerFirst { .. } => p("w") * (p("u") + p("v")) + p("u") * p("v") + g2,
            CurveKind::TrimerSecond { .. } => p("w") * (p("u") * p("v") + g2) + (p("u") + p("v")) * g2,
            CurveKind::TrimerZero => p("w"),
            CurveKind::HnZero => p("t"),
            CurveKind::AahOuter { .. } => {
                let t = p("t");
                p("lambda").powi(2) - two * (t * t + g2)
            }
            CurveKind::AahInner { .. } => {
                let t = p("t");
                two * p("lambda").powi(2) * (t * t + g2) - (t + g).powi(4) - (t - g).powi(4)
            }
            CurveKind::AahHalf { .. } => {
                let t = p("t");
                p("lambda").powi(2) - t * t - g2
            }
        }
    }

    /// Polylines `(axis, gamma)` inside the box, split where the curve leaves
    /// it or becomes singular.
    pub fn sample(&self, axis_range: (T, T), gamma_range: (T, T), n: usize) -> Vec<Vec<[T; 2]>> {
        let n = n.max(2);
        let lerp = |(a, b): (T, T), i: usize| a + (b - a) * T::of_usize(i) / T::of_usize(n - 1);
        let inside = |x: T, (a, b): (T, T)| x >= a.min(b) && x <= a.max(b);
        if let CurveKind::GammaZero = self.kind {
            if !inside(T::zero(), gamma_range) {
                return Vec::new();
            }
            return vec![(0..n).map(|i| [lerp(axis_range, i), T::zero()]).collect()];
        }
        let mut out = Vec::new();
        let mut cur: Vec<[T; 2]> = Vec::new();
        for i in 0..n {
            let g = lerp(gamma_range, i);
            match self.axis_value(g) {
                Some(x) if inside(x, axis_range) => cur.push([x, g]),
                _ => {
                    if cur.len() > 1 {
                        out.push(std::mem::take(&mut cur));
                    } else {
                        cur.clear();
                    }
                }
            }
        }
        if cur.len() > 1 {
            out.push(cur);
        }
        out
    }

    /// Distance along `param` from `spec` to the curve, by Newton's method on
    /// the implicit form. `None` if the curve does not cross that direction.
    pub fn distance_along(&self, spec: &ModelSpec<T>, param: &str) -> Option<T> {
        let x0 = spec.param(param).ok()?;
        let eval = |x: T| -> T {
            spec.clone()
                .with_param(param, x)
                .map(|s| self.implicit(&s))
                .unwrap_or_else(|_| T::nan())
        };
        let f0 = eval(x0);
        if f0 == T::zero() {
            return Some(T::zero());
        }
        let mut x = x0;
        for _ in 0..60 {
            let fx = eval(x);
            if fx == T::zero() {
                break;
            }
            let h = T::of(1e-6) * x.abs().max(T::one());
            let d = (eval(x + h) - eval(x - h)) / (h + h);
            if d == T::zero() || !d.is_finite() {
                return None;
            }
            let step = fx / d;
            x = x - step;
            if !x.is_finite() || (x - x0).abs() > T::one() {
                return None;
            }
            if step.abs() <= T::epsilon() * x.abs().max(T::one()) {
                break;
            }
        }
        let f = eval(x);
        let scale = T::of(1e-9) * f0.abs().max(T::one());
        (f.abs() <= scale).then(|| (x - x0).abs())
    }
}

/// The axis parameter drawn against `gamma` in each family's phase diagram.
pub fn manifold_axis<T: Real>(spec: &ModelSpec<T>) -> &'static str {
    match spec.kind() {
        FamilyKind::Hn => "t",
        FamilyKind::MosaicDimer => "u",
        FamilyKind::MosaicTrimer => "w",
        FamilyKind::MosaicAah => "lambda",
    }
}

/// Closed-form critical set of the family and mosaic class of `spec`. The
/// value of the axis parameter and of `gamma` in `spec` are ignored.
pub fn critical_manifold<T: Real>(spec: &ModelSpec<T>) -> Result<Vec<CriticalCurve<T>>> {
    let k = spec.kappa();
    let mut kinds = vec![CurveKind::GammaZero];
    match spec.family {
        Family::Hn { .. } => kinds.push(CurveKind::HnZero),
        Family::MosaicDimer { v, .. } => {
            if k % 2 == 1 {
                kinds.push(CurveKind::DimerOpposite { v });
                kinds.push(CurveKind::DimerHyperbola { v });
            }
        }
        Family::MosaicTrimer { u, v, .. } => {
            if k.is_multiple_of(3) {
                kinds.push(CurveKind::TrimerZero);
            } else {
                kinds.push(CurveKind::TrimerFirst { u, v });
                kinds.push(CurveKind::TrimerSecond { u, v });
            }
        }
        Family::MosaicAah { t, alpha, .. } => {
            if !is_quarter(spec) {
                return Err(Error::UnsupportedFamily(format!(
                    "closed-form critical curves need alpha = 1/4, got {}/{}",
                    alpha.p, alpha.q
                )));
            }
            match k % 4 {
                0 => {}
                2 => {
                    for sign in [1, -1] {
                        kinds.push(CurveKind::AahHalf { t, sign });
                    }
                }
                _ => {
                    for sign in [1, -1] {
                        kinds.push(CurveKind::AahOuter { t, sign });
                    }
                    for sign in [1, -1] {
                        kinds.push(CurveKind::AahInner { t, sign });
                    }
                }
            }
        }
    }
    let axis = manifold_axis(spec).to_string();
    Ok(kinds.into_iter().map(|kind| CriticalCurve { kind, axis: axis.clone() }).collect())
}

/// Smallest distance along `param` from `spec` to a closed-form critical
/// curve, or `None` when the family has none.
pub fn manifold_distance<T: Real>(spec: &ModelSpec<T>, param: &str) -> Option<T> {
    let curves = critical_manifold(spec).ok()?;
    curves
        .iter()
        .filter_map(|c| c.distance_along(spec, param))
        .fold(None, |acc: Option<T>, d| Some(acc.map_or(d, |a| a.min(d))))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions<T> {
    pub samples: usize,
    pub xtol: T,
    /// `|ln r|` at a converged bracket above which it is a pole, not a root.
    pub pole_reject: T,
}

impl<T: Real> Default for RootOptions<T> {
    fn default() -> Self {
        RootOptions {
            samples: 2000,
            xtol: T::of(1e-13),
            pole_reject: T::of(1e-6),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BetaRoot<T> {
    pub value: T,
    /// Distance along the swept parameter to the nearest closed-form curve.
    pub manifold_distance: Option<T>,
}

/// Every `x` in `[lo, hi]` where `|beta| = 1` as `param` varies.
///
/// Brackets sign changes of `ln |beta|` on a uniform grid and bisects them.
/// Brackets that close onto a hopping zero (where `ln |beta|` diverges) are
/// discarded, as are stretches on which `|beta| = 1` identically.
pub fn solve_beta_unity<T: Real>(
    template: &ModelSpec<T>,
    param: &str,
    lo: T,
    hi: T,
    opts: &RootOptions<T>,
) -> Result<Vec<BetaRoot<T>>> {
    template.param(param)?;
    if !(lo < hi) {
        return Err(Error::InvalidModel(format!("empty interval [{lo}, {hi}]")));
    }
    let f = |x: T| -> T {
        template
            .clone()
            .with_param(param, x)
            .map(|s| log_beta(&s))
            .unwrap_or_else(|_| T::nan())
    };
    let n = opts.samples.max(2);
    let xs: Vec<T> = (0..=n).map(|i| lo + (hi - lo) * T::of_usize(i) / T::of_usize(n)).collect();
    let fs: Vec<T> = xs.iter().map(|&x| f(x)).collect();
    let mut roots: Vec<T> = Vec::new();
    for i in 0..=n {
        if fs[i] == T::zero() {
            let flat_left = i > 0 && fs[i - 1] == T::zero();
            let flat_right = i < n && fs[i + 1] == T::zero();
            if !flat_left && !flat_right {
                roots.push(xs[i]);
            }
            continue;
        }
        if i == n {
            break;
        }
        let (a, b) = (fs[i], fs[i + 1]);
        if !(a.is_finite() && b.is_finite()) || b == T::zero() || a.signum() == b.signum() {
            continue;
        }
        let (mut x0, mut x1, mut f0) = (xs[i], xs[i + 1], a);
        for _ in 0..300 {
            let mid = x0 + (x1 - x0) * T::of(0.5);
            if mid <= x0 || mid >= x1 || (x1 - x0) <= opts.xtol * mid.abs().max(T::one()) {
                break;
            }
            let fm = f(mid);
            if fm == T::zero() {
                x0 = mid;
                x1 = mid;
                break;
            }
            if fm.is_nan() {
                break;
            }
            if fm.signum() == f0.signum() {
                x0 = mid;
                f0 = fm;
            } else {
                x1 = mid;
            }
        }
        let root = x0 + (x1 - x0) * T::of(0.5);
        let fr = f(root);
        if fr.is_finite() && fr.abs() <= opts.pole_reject {
            roots.push(root);
        } else {
            log::debug!("discarding pole of ln|beta| near {param} = {root}");
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::of(10.0) * opts.xtol * a.abs().max(T::one()));
    Ok(roots
        .into_iter()
        .map(|value| {
            let spec = template.clone().with_param(param, value).expect("checked parameter");
            BetaRoot { value, manifold_distance: manifold_distance(&spec, param) }
        })
        .collect())
}

/// Both bands `E = +-sqrt(u^2 + v^2 - 2 gamma^2 + 2 (uv + gamma^2) cos k
/// + 2 i gamma (u + v) sin k)` of the nonreciprocal dimer with `kappa = 1`.
pub fn dimer_dispersion<T: Real>(u: T, v: T, gamma: T, k: T) -> (C<T>, C<T>) {
    let two = T::of(2.0);
    let radicand = C::new(
        u * u + v * v - two * gamma * gamma + two * (u * v + gamma * gamma) * k.cos(),
        two * gamma * (u + v) * k.sin(),
    );
    let e = radicand.sqrt();
    (e, -e)
}
