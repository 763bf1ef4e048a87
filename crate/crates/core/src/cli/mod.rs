//! Command dispatch for the `gmcap` binary.
//!
//! Key-value reports are written as TOML so they can be parsed back;
//! `sweep` and `simulate` emit CSV. Floats carry 12 significant digits.
//!
//! Exit codes: 0 success, 2 invalid input, 3 infeasible energy,
//! 4 threshold violated (with `--strict`), 5 optimizer non-convergence.

pub mod config;

use std::fmt::Write as _;
use std::io::Write;

use clap::ValueEnum;

use crate::capacity::{self, CapacityResult, CapacityStatus, LogBase};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::montecarlo::{self, Ensemble, GaussianCoherentEnsemble, PluginEstimator};
use crate::symplectic::{self, CovarianceMatrix};

pub use config::{EnergySweep, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_THRESHOLD: i32 = 4;
pub const EXIT_NONCONVERGENCE: i32 = 5;

pub const SWEEP_HEADER: &str =
    "energy,e_min,threshold_ok,capacity_nats,capacity_bits,logdet_out,logdet_min,status";
pub const SIMULATE_HEADER: &str = "n,seed,mi_estimate_nats,mi_stderr_nats,capacity_nats,abs_gap_nats";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Structure,
    Capacity,
    Sweep,
    Simulate,
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: RunConfig,
    pub strict: bool,
    pub seed: Option<u64>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::Uncertainty { .. } | Error::Config(_) | Error::Io(_) => EXIT_INVALID,
        Error::InfeasibleEnergy { .. } => EXIT_INFEASIBLE,
        Error::Threshold(_) => EXIT_THRESHOLD,
        Error::NonConvergence(_) | Error::Numerical(_) => EXIT_NONCONVERGENCE,
    }
}

/// Formats with 12 significant digits; plain decimal for moderate
/// magnitudes, scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(1) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

fn fmt_vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_sig(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_matrix(m: &Matrix) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| fmt_vector(&m.row(i).iter().copied().collect::<Vec<_>>()))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn fmt_vectors(vs: &[Vector]) -> String {
    let rows: Vec<String> = vs.iter().map(|v| fmt_vector(v.as_slice())).collect();
    format!("[{}]", rows.join(", "))
}

fn unit(base: LogBase) -> &'static str {
    match base {
        LogBase::Two => "bits",
        LogBase::E => "nats",
    }
}

/// Runs one command, writing results to `out` and diagnostics to `diag`.
/// Returns the process exit code.
pub fn run_command(inv: &Invocation, out: &mut dyn Write, diag: &mut dyn Write) -> i32 {
    let mut report = String::new();
    let result = match inv.command {
        Command::Validate => validate(inv, &mut report),
        Command::Structure => structure(inv, &mut report),
        Command::Capacity => capacity_cmd(inv, &mut report, diag),
        Command::Sweep => sweep(inv, &mut report, diag),
        Command::Simulate => simulate(inv, &mut report),
    };
    if let Err(e) = out.write_all(report.as_bytes()).and_then(|_| out.flush()) {
        let _ = writeln!(diag, "error: writing output: {e}");
        return EXIT_INVALID;
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(diag, "error: {e}");
            exit_code(&e)
        }
    }
}

fn validate(inv: &Invocation, out: &mut String) -> Result<i32> {
    let cfg = &inv.config;
    let space = cfg.space()?;
    let beta = cfg.beta_covariance()?;
    let spec = symplectic::symplectic_spectrum(&beta, &space)?;
    writeln!(out, "modes = {}", cfg.modes).unwrap();
    writeln!(out, "beta_symplectic_eigenvalues = {}", fmt_vector(&spec.values)).unwrap();
    writeln!(out, "beta_valid = {}", spec.valid).unwrap();
    writeln!(out, "beta_pure = {}", spec.pure).unwrap();

    let ground = capacity::min_energy(&cfg.epsilon_matrix()?, &space)?;
    let gspec = symplectic::symplectic_spectrum(&ground.ground_covariance, &space)?;
    writeln!(out, "e_min = {}", fmt_sig(ground.e_min)).unwrap();
    writeln!(
        out,
        "ground_covariance = {}",
        fmt_matrix(ground.ground_covariance.matrix())
    )
    .unwrap();
    writeln!(out, "ground_valid = {}", gspec.valid).unwrap();
    writeln!(out, "ground_pure = {}", gspec.pure).unwrap();

    if !spec.valid {
        return Err(Error::Uncertainty {
            min_value: spec.min(),
        });
    }
    Ok(EXIT_OK)
}

fn structure(inv: &Invocation, out: &mut String) -> Result<i32> {
    let cfg = &inv.config;
    let space = cfg.space()?;
    let beta = cfg.beta_covariance()?;
    let (j, vac) = capacity::noise_vacuum(&beta, &space)?;
    let basis = symplectic::symplectic_basis(&beta, &space)?;
    writeln!(out, "j_beta = {}", fmt_matrix(j.matrix())).unwrap();
    writeln!(out, "noise_vacuum = {}", fmt_matrix(vac.matrix())).unwrap();
    writeln!(out, "symplectic_values = {}", fmt_vector(&basis.values)).unwrap();
    writeln!(out, "basis_e = {}", fmt_vectors(&basis.e_vectors)).unwrap();
    writeln!(out, "basis_h = {}", fmt_vectors(&basis.h_vectors)).unwrap();
    Ok(EXIT_OK)
}

fn compute(inv: &Invocation, energy: f64) -> Result<CapacityResult> {
    let cfg = &inv.config;
    let space = cfg.space()?;
    let m = cfg.measurement(&space)?;
    let constraint = capacity::EnergyConstraint::new(cfg.epsilon_matrix()?, energy)?;
    let optimizer = capacity::build_optimizer(&cfg.optimizer)?;
    capacity::capacity_with(optimizer.as_ref(), &constraint, &m, &space)
}

fn threshold_diagnostic(inv: &Invocation, energy: f64) -> Result<String> {
    let cfg = &inv.config;
    let space = cfg.space()?;
    let bound = capacity::threshold_energy(&cfg.epsilon_matrix()?, &cfg.beta_covariance()?, &space)?;
    Ok(format!(
        "E = {} is below the threshold bound {}",
        fmt_sig(energy),
        fmt_sig(bound)
    ))
}

fn capacity_cmd(inv: &Invocation, out: &mut String, diag: &mut dyn Write) -> Result<i32> {
    let cfg = &inv.config;
    let energy = cfg
        .energy
        .ok_or_else(|| Error::Config("capacity needs `energy`".into()))?;
    let base = cfg.log_base()?;
    let r = compute(inv, energy)?;
    writeln!(out, "energy = {}", fmt_sig(energy)).unwrap();
    writeln!(out, "e_min = {}", fmt_sig(r.e_min)).unwrap();
    writeln!(out, "alpha_opt = {}", fmt_matrix(r.alpha_opt.matrix())).unwrap();
    writeln!(out, "threshold_ok = {}", r.threshold_ok).unwrap();
    writeln!(out, "status = \"{}\"", r.status.as_str()).unwrap();
    writeln!(out, "capacity = {}", fmt_sig(r.capacity_in(base))).unwrap();
    writeln!(out, "unit = \"{}\"", unit(base)).unwrap();
    writeln!(out, "capacity_nats = {}", fmt_sig(r.capacity_nats)).unwrap();
    if let Some(e) = &r.ensemble {
        writeln!(
            out,
            "ensemble_coherent_covariance = {}",
            fmt_matrix(e.coherent_covariance.matrix())
        )
        .unwrap();
        writeln!(
            out,
            "ensemble_mean_covariance = {}",
            fmt_matrix(&e.mean_covariance)
        )
        .unwrap();
    }
    if r.status == CapacityStatus::UpperBoundOnly {
        let msg = threshold_diagnostic(inv, energy)?;
        if inv.strict {
            return Err(Error::Threshold(msg));
        }
        let _ = writeln!(
            diag,
            "warning: threshold condition violated: {msg}; value is an upper bound only"
        );
    }
    Ok(EXIT_OK)
}

fn sweep(inv: &Invocation, out: &mut String, diag: &mut dyn Write) -> Result<i32> {
    let cfg = &inv.config;
    let grid = cfg
        .energy_sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs an [energy_sweep] table".into()))?
        .grid();
    let rows = grid
        .iter()
        .map(|&e| compute(inv, e).map(|r| (e, r)))
        .collect::<Result<Vec<_>>>()?;
    writeln!(out, "{SWEEP_HEADER}").unwrap();
    let mut violated = None;
    for (e, r) in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_sig(*e),
            fmt_sig(r.e_min),
            r.threshold_ok,
            fmt_sig(r.capacity_nats),
            fmt_sig(r.capacity_bits),
            fmt_sig(r.logdet_out),
            fmt_sig(r.logdet_min),
            r.status.as_str()
        )
        .unwrap();
        if r.status == CapacityStatus::UpperBoundOnly && violated.is_none() {
            violated = Some(*e);
        }
    }
    if let Some(e) = violated {
        let msg = threshold_diagnostic(inv, e)?;
        if inv.strict {
            return Err(Error::Threshold(msg));
        }
        let _ = writeln!(
            diag,
            "warning: threshold condition violated: {msg}; affected rows are upper bounds only"
        );
    }
    Ok(EXIT_OK)
}

fn simulate(inv: &Invocation, out: &mut String) -> Result<i32> {
    let cfg = &inv.config;
    let energy = cfg
        .energy
        .ok_or_else(|| Error::Config("simulate needs `energy`".into()))?;
    let seed = inv.seed.unwrap_or(cfg.seed);
    let space = cfg.space()?;
    let m = cfg.measurement(&space)?;
    let r = compute(inv, energy)?;
    let ensemble = match &r.ensemble {
        Some(e) => GaussianCoherentEnsemble::from_optimal(e, &space)?,
        None => return Err(Error::Threshold(threshold_diagnostic(inv, energy)?)),
    };
    let samples = montecarlo::simulate_ensemble(Ensemble::Gaussian(&ensemble), &m, cfg.samples, seed)?;
    let est = montecarlo::estimate_with_stderr(&PluginEstimator, &samples)?;
    writeln!(out, "{SIMULATE_HEADER}").unwrap();
    writeln!(
        out,
        "{},{},{},{},{},{}",
        cfg.samples,
        seed,
        fmt_sig(est.value),
        fmt_sig(est.stderr),
        fmt_sig(r.capacity_nats),
        fmt_sig((est.value - r.capacity_nats).abs())
    )
    .unwrap();
    Ok(EXIT_OK)
}

/// Parses a matrix printed by `structure` or `capacity`.
pub fn parse_matrix(value: &toml::Value) -> Option<Matrix> {
    let rows = value.as_array()?;
    let data: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .map(|xs| xs.iter().filter_map(toml::Value::as_float).collect())
        })
        .collect::<Option<_>>()?;
    let ncols = data.first()?.len();
    if data.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(Matrix::from_fn(data.len(), ncols, |i, j| data[i][j]))
}

pub fn parse_covariance(value: &toml::Value) -> Option<CovarianceMatrix> {
    CovarianceMatrix::new(parse_matrix(value)?).ok()
}
