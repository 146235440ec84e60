//! `nhse`: spectra, classification, skin-effect and phase-diagram tools for
//! nonreciprocal chains.
//!
//! Exit status: 0 on success, 1 for bad input or usage, 2 for a numerical
//! failure or a failing verification criterion.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use nhse::classify::predict_class;
use nhse::eig::{eigenpairs_with, eigenvalues_with, SolverOptions};
use nhse::io::{self, load_model};
use nhse::lattice::{assemble, build_chain};
use nhse::nonbloch::{beta_magnitude, closed_form_beta, critical_manifold, manifold_axis, SkinSide};
use nhse::pointgap::{interior_reference, winding_number_with, ReferenceOptions, WindingOptions};
use nhse::sweep::{run_sweep, SweepConfig};
use nhse::verify::{self, CriterionReport, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "nhse", version, about = "Nonreciprocal tight-binding chains: spectra, skin effect, phase diagrams")]
struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative residual tolerance of the eigensolver.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed of randomized verification samples.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues and right eigenvectors of one model.
    Spectrum {
        #[arg(long)]
        model: PathBuf,
        /// Skip eigenvectors.
        #[arg(long)]
        values_only: bool,
        /// Also store eigenvectors in the checksummed binary container.
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
    /// Real, imaginary or complex spectrum, predicted from hopping signs.
    Classify {
        #[arg(long)]
        model: PathBuf,
    },
    /// Magnitude of the non-Bloch deformation and the skin side.
    Beta {
        #[arg(long)]
        model: PathBuf,
    },
    /// Closed-form critical curves sampled as CSV polylines.
    Critical {
        #[arg(long)]
        model: PathBuf,
        /// Range of the family's manifold parameter, `min,max`.
        #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
        axis_range: String,
        /// Range of gamma, `min,max`.
        #[arg(long, default_value = "-1.5,1.5", allow_hyphen_values = true)]
        gamma_range: String,
        #[arg(long, default_value_t = 401)]
        samples: usize,
    },
    /// Spectral winding number of the periodic chain around a reference energy.
    Winding {
        #[arg(long)]
        model: PathBuf,
        /// Reference energy `re,im`; chosen inside a point gap when omitted.
        #[arg(long, allow_hyphen_values = true)]
        e0: Option<String>,
        #[arg(long, default_value_t = 256)]
        nk: usize,
    },
    /// Two-parameter phase diagram; `.csv` output paths get CSV, others JSON.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Run only these criteria (1-8); repeatable.
        #[arg(long = "criterion", value_parser = clap::value_parser!(u8).range(1..=8))]
        criteria: Vec<u8>,
    },
}

/// A failure that maps to exit status 2.
#[derive(Debug)]
struct NumericalFailure(String);

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn exit_status(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<NumericalFailure>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<nhse::Error>() {
            return if e.is_numerical() { 2 } else { 1 };
        }
    }
    1
}

fn parse_pair(s: &str, what: &str) -> anyhow::Result<(f64, f64)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("{what} must be two comma-separated numbers, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<f64>().with_context(|| format!("{what}: `{x}` is not a number"));
    let (a, b) = (parse(a)?, parse(b)?);
    if !(a.is_finite() && b.is_finite()) {
        bail!("{what} must be finite");
    }
    Ok((a, b))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => io::write_bytes(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<S: Serialize>(out: Option<&Path>, value: &S) -> anyhow::Result<()> {
    emit(out, &io::to_json_string(value)?)
}

#[derive(Serialize)]
struct SpectrumOut {
    sites: usize,
    eigenvalues: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvectors: Option<Vec<Vec<Complex64>>>,
    residual_max: Option<f64>,
    iterations: usize,
}

#[derive(Serialize)]
struct BetaOut {
    r: f64,
    side: SkinSide,
    log_r: f64,
    closed_form: Option<f64>,
}

fn solver_options(tol: Option<f64>) -> anyhow::Result<SolverOptions<f64>> {
    let opts = SolverOptions::default();
    match tol {
        None => Ok(opts),
        Some(t) if t.is_finite() && t > 0.0 => Ok(opts.with_tol(t)),
        Some(t) => bail!("--tol must be positive, got {t}"),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Spectrum { model, values_only, vectors } => {
            let spec = load_model(&model)?;
            let m = assemble(&build_chain(&spec)?);
            let opts = solver_options(cli.tol)?;
            let s = if values_only && vectors.is_none() { eigenvalues_with(&m, &opts)? } else { eigenpairs_with(&m, &opts)? };
            if let (Some(path), Some(v)) = (vectors.as_deref(), s.eigenvectors.as_ref()) {
                io::write_eigenvectors(path, v)?;
            }
            let residual_max = s.residual_max();
            emit_json(
                out,
                &SpectrumOut {
                    sites: spec.sites(),
                    eigenvalues: s.eigenvalues,
                    eigenvectors: if values_only { None } else { s.eigenvectors },
                    residual_max,
                    iterations: s.iterations,
                },
            )
        }
        Command::Classify { model } => {
            let spec = load_model(&model)?;
            emit_json(out, &predict_class(&build_chain(&spec)?)?)
        }
        Command::Beta { model } => {
            let spec = load_model(&model)?;
            let b = beta_magnitude(&spec)?;
            emit_json(out, &BetaOut { r: b.r, side: b.side, log_r: b.log_r, closed_form: closed_form_beta(&spec) })
        }
        Command::Critical { model, axis_range, gamma_range, samples } => {
            let spec = load_model(&model)?;
            let ar = parse_pair(&axis_range, "--axis-range")?;
            let gr = parse_pair(&gamma_range, "--gamma-range")?;
            let mut csv = String::from("curve,segment,param1,param2\n");
            for curve in critical_manifold(&spec)? {
                for (i, seg) in curve.sample(ar, gr, samples).iter().enumerate() {
                    for [x, g] in seg {
                        writeln!(csv, "\"{}\",{i},{x},{g}", curve.label())?;
                    }
                }
            }
            if out.is_none() {
                eprintln!("param1 = {}, param2 = gamma", manifold_axis(&spec));
            }
            emit(out, &csv)
        }
        Command::Winding { model, e0, nk } => {
            let spec = load_model(&model)?;
            let e0 = match e0 {
                Some(s) => {
                    let (re, im) = parse_pair(&s, "--e0")?;
                    Complex64::new(re, im)
                }
                None => match interior_reference(&spec, &ReferenceOptions { nk, ..Default::default() })? {
                    Some(c) => c.e0,
                    None => bail!("no point gap found; pass --e0 explicitly"),
                },
            };
            let result = winding_number_with(&spec, e0, &WindingOptions::with_nk(nk))?;
            emit_json(out, &result)
        }
        Command::Sweep { config } => {
            let cfg: SweepConfig<f64> = io::read_json(&config)?;
            let start = Instant::now();
            let pd = run_sweep(&cfg)?;
            let failed = pd.iter().filter(|(_, _, c)| c.error.is_some()).count();
            eprintln!("{} cells in {:.2} s, {failed} with errors", pd.cell_count(), start.elapsed().as_secs_f64());
            match out {
                Some(p) => pd.export(p)?,
                None => emit_json(None, &pd)?,
            }
            Ok(())
        }
        Command::Verify { criteria } => {
            let opts = VerifyOptions { seed: cli.seed.unwrap_or(VerifyOptions::default().seed) };
            let wanted = |id: u8| criteria.is_empty() || criteria.contains(&id);
            let mut reports: Vec<CriterionReport> = Vec::new();
            let all: [(u8, &dyn Fn() -> CriterionReport); 8] = [
                (1, &verify::hn_transition),
                (2, &verify::dimer_three_phases),
                (3, &|| verify::gauge_equivalence(&opts)),
                (4, &verify::skin_transition),
                (5, &verify::point_gap_closing),
                (6, &verify::phase_diagrams),
                (7, &|| verify::closed_form_manifolds(&opts)),
                (8, &|| verify::eigensolver_correctness(&opts)),
            ];
            for (id, f) in all {
                if wanted(id) {
                    let r = f();
                    println!("{}", r.line());
                    reports.push(r);
                }
            }
            if let Some(p) = out {
                io::write_json(p, &reports)?;
            }
            let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
            if !failed.is_empty() {
                return Err(NumericalFailure(format!("criteria failed: {}", failed.join(", "))).into());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
