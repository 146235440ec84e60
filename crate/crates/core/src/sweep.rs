//! Two-parameter phase diagrams.
//!
//! Every cell is an independent open chain of the same length; cells are
//! evaluated in parallel and assembled in index order, so the output does
//! not depend on the thread count.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{predict_class, SpectrumKind};
use crate::eig::{eigenpairs_with, SolverOptions};
use crate::error::{Error, Result};
use crate::io::{self, SCHEMA};
use crate::lattice::{assemble, build_chain, Boundary, ModelSpec};
use crate::nonbloch::{beta_magnitude, critical_manifold, manifold_axis, CRITICAL_TOL};
use crate::pointgap::{interior_reference, ReferenceOptions};
use crate::skin::{skin_profile, SkinConfig};
use crate::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Axis<T> {
    pub param: String,
    pub min: T,
    pub max: T,
    pub n: usize,
}

impl<T: Real> Axis<T> {
    pub fn new(param: &str, min: T, max: T, n: usize) -> Self {
        Axis { param: param.to_string(), min, max, n }
    }

    /// `n` evenly spaced values from `min` to `max` inclusive.
    pub fn values(&self) -> Vec<T> {
        let last = T::of_usize(self.n.saturating_sub(1).max(1));
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * T::of_usize(i) / last
                }
            })
            .collect()
    }

    pub fn step(&self) -> T {
        (self.max - self.min) / T::of_usize(self.n.saturating_sub(1).max(1))
    }

    fn validate<U: Real>(&self, template: &ModelSpec<U>) -> Result<()> {
        template.param(&self.param)?;
        if self.n < 2 {
            return Err(Error::InvalidModel(format!("axis `{}` needs at least 2 samples", self.param)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidModel(format!("axis `{}` needs finite min < max", self.param)));
        }
        Ok(())
    }
}

fn default_schema() -> u32 {
    SCHEMA
}

fn default_delta<T: Real>() -> T {
    T::of(0.25)
}

fn default_sites() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepConfig<T> {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub template: ModelSpec<T>,
    pub axis1: Axis<T>,
    pub axis2: Axis<T>,
    #[serde(default)]
    pub compute_winding: bool,
    #[serde(default = "default_delta")]
    pub delta: T,
    /// Chain length of every cell.
    #[serde(rename = "L", default = "default_sites")]
    pub sites: usize,
}

impl<T: Real> SweepConfig<T> {
    pub fn new(template: ModelSpec<T>, axis1: Axis<T>, axis2: Axis<T>, sites: usize) -> Self {
        SweepConfig {
            schema: SCHEMA,
            template,
            axis1,
            axis2,
            compute_winding: false,
            delta: default_delta(),
            sites,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidModel(format!("unsupported sweep schema {}", self.schema)));
        }
        self.axis1.validate(&self.template)?;
        self.axis2.validate(&self.template)?;
        if self.axis1.param == self.axis2.param {
            return Err(Error::InvalidModel("sweep axes must name different parameters".into()));
        }
        SkinConfig::new(self.delta)?;
        self.base()?.validate()
    }

    /// The template resized to `L` sites with open ends.
    pub fn base(&self) -> Result<ModelSpec<T>> {
        Ok(self.template.clone().with_sites(self.sites)?.with_boundary(Boundary::Obc))
    }

    pub fn cell_spec(&self, x: T, y: T) -> Result<ModelSpec<T>> {
        self.base()?.with_param(&self.axis1.param, x)?.with_param(&self.axis2.param, y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Cell<T> {
    pub dmipr: Option<T>,
    pub class: Option<SpectrumKind>,
    pub degenerate: bool,
    /// `|beta|`, absent when a hopping of the unit cell vanishes.
    pub r: Option<T>,
    pub winding: Option<i64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Overlay<T> {
    pub label: String,
    /// Polylines in `(axis1, axis2)` coordinates.
    pub segments: Vec<Vec<[T; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Meta<T> {
    pub template: ModelSpec<T>,
    #[serde(rename = "L")]
    pub sites: usize,
    pub delta: T,
    pub solver_tol: f64,
    pub critical_tol: f64,
    pub compute_winding: bool,
    pub engine: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PhaseDiagram<T> {
    pub schema: u32,
    pub axis1: Axis<T>,
    pub axis2: Axis<T>,
    /// `cells[i][j]` sits at `(axis1.values()[i], axis2.values()[j])`.
    pub cells: Vec<Vec<Cell<T>>>,
    pub overlays: Vec<Overlay<T>>,
    pub meta: Meta<T>,
}

pub fn engine_version() -> String {
    format!("nhse-core {}", env!("CARGO_PKG_VERSION"))
}

fn compute_cell<T: Real>(cfg: &SweepConfig<T>, x: T, y: T, skin: &SkinConfig<T>) -> Cell<T> {
    let mut cell = Cell { dmipr: None, class: None, degenerate: false, r: None, winding: None, error: None };
    let record = |cell: &mut Cell<T>, e: Error| {
        let msg = e.to_string();
        cell.error = Some(match cell.error.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    };
    let spec = match cfg.cell_spec(x, y) {
        Ok(s) => s,
        Err(e) => {
            record(&mut cell, e);
            return cell;
        }
    };
    cell.r = beta_magnitude(&spec).ok().map(|b| b.r);
    let chain = match build_chain(&spec) {
        Ok(c) => c,
        Err(e) => {
            record(&mut cell, e);
            return cell;
        }
    };
    match predict_class(&chain) {
        Ok(c) => {
            cell.class = Some(c.class);
            cell.degenerate = c.degenerate;
        }
        Err(e) => record(&mut cell, e),
    }
    match eigenpairs_with(&assemble(&chain), &SolverOptions::default()).and_then(|s| skin_profile(&s, skin)) {
        Ok(p) => cell.dmipr = Some(p.dmipr),
        Err(e) => record(&mut cell, e),
    }
    if cfg.compute_winding {
        match interior_reference(&spec, &ReferenceOptions::default()) {
            Ok(choice) => cell.winding = Some(choice.map_or(0, |c| c.winding)),
            Err(e) => record(&mut cell, e),
        }
    }
    cell
}

/// Critical curves of the template drawn in the sweep plane, when one axis is
/// `gamma` and the other is the family's manifold axis.
fn overlays<T: Real>(cfg: &SweepConfig<T>) -> Vec<Overlay<T>> {
    let axis = manifold_axis(&cfg.template);
    let (a1, a2) = (cfg.axis1.param.as_str(), cfg.axis2.param.as_str());
    let swapped = match (a1, a2) {
        (x, "gamma") if x == axis => false,
        ("gamma", x) if x == axis => true,
        _ => return Vec::new(),
    };
    let (ax, gx) = if swapped { (&cfg.axis2, &cfg.axis1) } else { (&cfg.axis1, &cfg.axis2) };
    let curves = match critical_manifold(&cfg.template) {
        Ok(c) => c,
        Err(_) => return Vec::new(),
    };
    curves
        .iter()
        .map(|c| {
            let segments = c
                .sample((ax.min, ax.max), (gx.min, gx.max), 401)
                .into_iter()
                .map(|seg| seg.into_iter().map(|[x, g]| if swapped { [g, x] } else { [x, g] }).collect())
                .collect();
            Overlay { label: c.label(), segments }
        })
        .filter(|o: &Overlay<T>| !o.segments.is_empty())
        .collect()
}

pub fn run_sweep<T: Real>(cfg: &SweepConfig<T>) -> Result<PhaseDiagram<T>> {
    cfg.validate()?;
    let skin = SkinConfig::new(cfg.delta)?;
    let xs = cfg.axis1.values();
    let ys = cfg.axis2.values();
    let n2 = ys.len();
    let flat: Vec<Cell<T>> = (0..xs.len() * n2)
        .into_par_iter()
        .map(|idx| compute_cell(cfg, xs[idx / n2], ys[idx % n2], &skin))
        .collect();
    let mut rows = Vec::with_capacity(xs.len());
    let mut it = flat.into_iter();
    for _ in 0..xs.len() {
        rows.push(it.by_ref().take(n2).collect());
    }
    Ok(PhaseDiagram {
        schema: SCHEMA,
        axis1: cfg.axis1.clone(),
        axis2: cfg.axis2.clone(),
        cells: rows,
        overlays: overlays(cfg),
        meta: Meta {
            template: cfg.template.clone(),
            sites: cfg.sites,
            delta: cfg.delta,
            solver_tol: T::SOLVER_TOL,
            critical_tol: CRITICAL_TOL,
            compute_winding: cfg.compute_winding,
            engine: engine_version(),
        },
    })
}

fn opt<T: Real>(x: Option<T>) -> String {
    x.map(|v| v.to_f64_lossy().to_string()).unwrap_or_default()
}

impl<T: Real> PhaseDiagram<T> {
    pub fn config(&self) -> SweepConfig<T> {
        SweepConfig {
            schema: self.schema,
            template: self.meta.template.clone(),
            axis1: self.axis1.clone(),
            axis2: self.axis2.clone(),
            compute_winding: self.meta.compute_winding,
            delta: self.meta.delta,
            sites: self.meta.sites,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    /// `(axis1, axis2, cell)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (T, T, &Cell<T>)> + '_ {
        let xs = self.axis1.values();
        let ys = self.axis2.values();
        self.cells
            .iter()
            .enumerate()
            .flat_map(move |(i, row)| {
                let x = xs[i];
                let ys = ys.clone();
                row.iter().enumerate().map(move |(j, c)| (x, ys[j], c))
            })
    }

    /// `axis1_value,axis2_value,dmipr,class,r,winding`; missing values are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis1_value,axis2_value,dmipr,class,r,winding\n");
        for (x, y, c) in self.iter() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                x.to_f64_lossy(),
                y.to_f64_lossy(),
                opt(c.dmipr),
                c.class.map(|k| k.as_str()).unwrap_or(""),
                opt(c.r),
                c.winding.map(|w| w.to_string()).unwrap_or_default()
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_bytes(path, self.to_csv().as_bytes())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        io::write_json(path, self)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let pd: Self = io::read_json(path)?;
        if pd.schema != SCHEMA {
            return Err(Error::InvalidModel(format!("unsupported diagram schema {}", pd.schema)));
        }
        if pd.cells.len() != pd.axis1.n || pd.cells.iter().any(|r| r.len() != pd.axis2.n) {
            return Err(Error::InvalidModel("cell grid does not match the axes".into()));
        }
        Ok(pd)
    }

    /// Writes CSV for a `.csv` path and JSON otherwise.
    pub fn export(&self, path: &Path) -> Result<()> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => self.write_csv(path),
            _ => self.write_json(path),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kappa: usize) -> SweepConfig<f64> {
        SweepConfig::new(
            ModelSpec::dimer(0.0, 1.0, 0.0, kappa, 10, Boundary::Obc),
            Axis::new("u", -2.0, 2.0, 5),
            Axis::new("gamma", -1.5, 1.5, 4),
            20,
        )
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let a: Axis<f64> = Axis::new("u", -2.0, 2.0, 41);
        let v = a.values();
        assert_eq!(v[0], -2.0);
        assert_eq!(v[40], 2.0);
        assert!((v[20]).abs() < 1e-15);
        assert!((a.step() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_csv() {
        let mut cfg = small(1);
        cfg.axis1.n = 2;
        cfg.axis2.n = 2;
        let pd = run_sweep(&cfg).unwrap();
        let csv = pd.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(csv.lines().next().unwrap(), "axis1_value,axis2_value,dmipr,class,r,winding");
        assert!(csv.lines().nth(1).unwrap().starts_with("-2,-1.5,"));
    }

    #[test]
    fn config_json_schema() {
        let text = r#"{"schema":1,"template":{"family":"mosaic_dimer","u":-0.5,"v":1,"gamma":0,"kappa":1,"cells":50,"boundary":"obc"},
            "axis1":{"param":"u","min":-2,"max":2,"n":41},"axis2":{"param":"gamma","min":-1.5,"max":1.5,"n":31},
            "compute_winding":false,"delta":0.25,"L":100}"#;
        let cfg: SweepConfig<f64> = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.sites, 100);
        assert_eq!(cfg.axis2.n, 31);
        let mut bad = cfg.clone();
        bad.axis2.param = "u".into();
        assert!(bad.validate().is_err());
        bad = cfg.clone();
        bad.axis1.param = "w".into();
        assert!(matches!(bad.validate(), Err(Error::UnknownParam(_))));
        bad = cfg;
        bad.sites = 101;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cells_and_overlays() {
        let pd = run_sweep(&small(1)).unwrap();
        assert_eq!(pd.cell_count(), 20);
        assert_eq!(pd.overlays.len(), 3);
        for (_, g, c) in pd.iter() {
            let r = c.r.expect("connected cell");
            if g > 0.0 {
                assert!(r < 1.0 || c.class.is_some());
            }
        }
        let even = run_sweep(&small(2)).unwrap();
        assert_eq!(even.overlays.len(), 1);
        assert_eq!(even.overlays[0].label, "gamma=0");
    }

    #[test]
    fn failures_stay_in_cell() {
        // u = gamma = 0 leaves isolated sites; dMIPR is still defined, |beta| is not
        let mut cfg = small(1);
        cfg.axis1 = Axis::new("u", -1.0, 1.0, 3);
        cfg.axis2 = Axis::new("gamma", -1.0, 1.0, 3);
        let pd = run_sweep(&cfg).unwrap();
        let centre = &pd.cells[1][1];
        assert!(centre.r.is_none());
        assert!(centre.dmipr.is_some());
        assert!(centre.degenerate);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let pd = run_sweep(&small(3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pd.json");
        pd.export(&path).unwrap();
        assert_eq!(PhaseDiagram::<f64>::read_json(&path).unwrap(), pd);
        let csv = dir.path().join("pd.csv");
        pd.export(&csv).unwrap();
        assert_eq!(std::fs::read_to_string(&csv).unwrap(), pd.to_csv());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = small(1);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_sweep(&cfg)).unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run_sweep(&cfg)).unwrap();
        assert_eq!(one, many);
    }
}
