//! Command-line front end.
//!
//! Every command writes a CSV table (to `--out` or stdout) and a JSON
//! metadata sidecar (to `<out>.json`, or stderr without `--out`). The
//! `boundary` command writes JSON only. Angles are always in units of pi.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::geometry::{gamma_tangent, theta_critical};
use crate::hardware_map::{check_resonance, effective_couplings_with_tol, CircuitParams, DEFAULT_RESONANCE_TOL};
use crate::metrology::{cfi_photon_number, qfi, qfi_finite_difference, qfi_spectral};
use crate::model::{cell_curve, ModelParams};
use crate::scaling::{
    gamma_sweep, log_grid, scan_c1_c2, tradeoff_frontier, FrontierEntry, FrontierStatus, ScalingFit,
    DEFAULT_NMAX, DEFAULT_NMIN, DEFAULT_POINTS, FRONTIER_THETA_MAX,
};
use crate::spectrum::{gap_report, spectrum};
use crate::topology::{continuum_curve, phase_raster, winding_integral, CellCurve, Winding};
use crate::verify::{self, VerifyConfig};
use crate::zero_mode::{probabilities, solve_zero_mode_dtheta};

pub const CONFIG_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

const DEFAULT_N: usize = 100;
const DEFAULT_THETA: f64 = 0.2;
const DEFAULT_FD_STEP: f64 = 1e-5;
const DEFAULT_CONTINUUM_SAMPLES: usize = 400;
const DEFAULT_KSAMPLES: usize = 2048;
const DEFAULT_C1_TARGETS: [f64; 10] = [1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0];
const DEFAULT_C2_TARGETS: [f64; 11] = [0.0, -0.1, -0.2, -0.3, -0.4, -0.5, -0.6, -0.7, -0.8, -0.9, -1.0];

#[derive(Debug, Parser)]
#[command(name = "fslsense", version, about = "Fock-space-lattice critical sensor toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV output path; metadata goes to `<out>.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "FSLSENSE_JOBS")]
    pub jobs: Option<usize>,
    /// Excitation number N.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// theta in units of pi.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Linear coupling scale.
    #[arg(long, global = true)]
    pub g: Option<f64>,
    #[arg(long, global = true)]
    pub nmin: Option<usize>,
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Number of N grid points (or continuum samples for `curve --continuum`).
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma_max: Option<f64>,
    #[arg(long, global = true)]
    pub gamma_points: Option<usize>,
    /// Brillouin-zone samples for the integral winding number.
    #[arg(long, global = true)]
    pub ksamples: Option<usize>,
    /// Tolerance override: resonance tolerance for `circuit`, tolerance
    /// multiplier for `verify`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Recursion,
    FiniteDifference,
    Spectral,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantum (and optionally classical) Fisher information of the zero mode.
    Qfi {
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Also compute the photon-counting classical Fisher information.
        #[arg(long)]
        cfi: bool,
        /// Finite-difference step in radians.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Excitation gap.
    Gap {
        /// Emit all singular values instead of the gap summary.
        #[arg(long)]
        spectrum: bool,
    },
    /// Zero-mode amplitudes, probabilities and theta-derivative.
    Zeromode,
    /// Cell-resolved hopping ratios through the phase diagram.
    Curve {
        /// Sample the large-N continuum curve instead of the cells.
        #[arg(long)]
        continuum: bool,
    },
    /// Winding-number raster of the (w/v, t/v) plane.
    Phasediagram {
        #[arg(long, allow_negative_numbers = true)]
        x_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        x_max: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        y_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        y_max: Option<f64>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
    },
    /// Finite-size scaling exponents c1 and c2 at one (theta, gamma).
    Scaling,
    /// Sweep gamma and tabulate (c1, c2) with the trade-off frontier.
    Tradeoff,
    /// Critical angle and, with --theta, the boundary thresholds there.
    Boundary,
    /// Effective couplings from the "circuit" block of the config file.
    Circuit,
    /// Run the seeded invariant suite.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub n: Option<usize>,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub g: Option<f64>,
    pub nmin: Option<usize>,
    pub nmax: Option<usize>,
    pub points: Option<usize>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub gamma_points: Option<usize>,
    pub ksamples: Option<usize>,
    pub tol: Option<f64>,
    pub method: Option<MethodArg>,
    pub step: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub c1_targets: Option<Vec<f64>>,
    pub c2_targets: Option<Vec<f64>>,
    pub circuit: Option<CircuitParams>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Verify(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    if cfg.version != CONFIG_VERSION {
        return Err(CliError::Usage(format!(
            "config {}: unsupported version {} (expected {CONFIG_VERSION})",
            path.display(),
            cfg.version
        )));
    }
    Ok(cfg)
}

/// Flags merged over the config file.
struct Settings {
    cfg: RunConfig,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    n: usize,
    theta_over_pi: f64,
    gamma: f64,
    g: f64,
    nmin: usize,
    nmax: usize,
    points: Option<usize>,
    gamma_min: Option<f64>,
    gamma_max: Option<f64>,
    gamma_points: Option<usize>,
    ksamples: Option<usize>,
    theta_given: bool,
    tol: Option<f64>,
}

impl Settings {
    fn merge(cli: &Cli, cfg: RunConfig) -> Self {
        Self {
            out: cli.out.clone().or_else(|| cfg.out.clone()),
            jobs: cli.jobs.or(cfg.jobs),
            n: cli.n.or(cfg.n).unwrap_or(DEFAULT_N),
            theta_given: cli.theta.or(cfg.theta).is_some(),
            theta_over_pi: cli.theta.or(cfg.theta).unwrap_or(DEFAULT_THETA),
            gamma: cli.gamma.or(cfg.gamma).unwrap_or(0.0),
            g: cli.g.or(cfg.g).unwrap_or(1.0),
            nmin: cli.nmin.or(cfg.nmin).unwrap_or(DEFAULT_NMIN),
            nmax: cli.nmax.or(cfg.nmax).unwrap_or(DEFAULT_NMAX),
            points: cli.points.or(cfg.points),
            gamma_min: cli.gamma_min.or(cfg.gamma_min),
            gamma_max: cli.gamma_max.or(cfg.gamma_max),
            gamma_points: cli.gamma_points.or(cfg.gamma_points),
            ksamples: cli.ksamples.or(cfg.ksamples),
            tol: cli.tol.or(cfg.tol),
            cfg,
        }
    }

    fn params(&self) -> CliResult<ModelParams> {
        Ok(ModelParams::from_theta_over_pi(self.n, self.theta_over_pi, self.gamma)?.with_g(self.g)?)
    }

    fn theta(&self) -> f64 {
        self.theta_over_pi * std::f64::consts::PI
    }

    fn n_grid(&self) -> CliResult<Vec<usize>> {
        Ok(log_grid(self.nmin, self.nmax, self.points.unwrap_or(DEFAULT_POINTS))?)
    }

    fn gamma_grid(&self) -> CliResult<Vec<f64>> {
        let lo = self.gamma_min.unwrap_or(0.0);
        let hi = self.gamma_max.unwrap_or(1.2);
        let k = self.gamma_points.unwrap_or(13);
        if k < 2 || !(hi > lo) {
            return Err(CliError::Usage(format!(
                "invalid gamma grid: gamma-min={lo}, gamma-max={hi}, gamma-points={k}"
            )));
        }
        Ok((0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect())
    }

    fn model_json(&self) -> Value {
        json!({
            "n": self.n,
            "theta_over_pi": self.theta_over_pi,
            "gamma": self.gamma,
            "g": self.g,
        })
    }

    fn grid_json(&self) -> CliResult<Value> {
        Ok(json!({
            "nmin": self.nmin,
            "nmax": self.nmax,
            "points": self.points.unwrap_or(DEFAULT_POINTS),
            "n_grid": self.n_grid()?,
        }))
    }
}

/// Fixed formatting for every float in CSV output: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Output {
    command: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    meta: Value,
}

impl Output {
    fn new(command: &'static str, header: &[&'static str]) -> Self {
        Self {
            command,
            header: header.to_vec(),
            rows: Vec::new(),
            meta: json!({}),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn csv_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
    }

    fn sidecar(&self, settings: &Settings) -> String {
        let mut doc = json!({
            "tool": "fslsense",
            "version": env!("CARGO_PKG_VERSION"),
            "config_version": CONFIG_VERSION,
            "command": self.command,
            "columns": self.header,
        });
        if let (Value::Object(d), Value::Object(m)) = (&mut doc, &self.meta) {
            for (k, v) in m {
                d.insert(k.clone(), v.clone());
            }
        }
        if let Some(j) = settings.jobs {
            doc["jobs"] = json!(j);
        }
        serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
    }

    fn emit(&self, settings: &Settings) -> CliResult<()> {
        let csv = self.csv_bytes()?;
        let meta = self.sidecar(settings);
        match &settings.out {
            Some(path) => {
                fs::write(path, &csv).map_err(|e| io_err(path, e))?;
                let side = sidecar_path(path);
                fs::write(&side, meta).map_err(|e| io_err(&side, e))?;
            }
            None => {
                std::io::stdout()
                    .write_all(&csv)
                    .map_err(|e| CliError::Usage(format!("stdout: {e}")))?;
                eprint!("{meta}");
            }
        }
        Ok(())
    }
}

/// `<out>.json` next to the CSV file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn winding_str(w: Winding) -> String {
    w.to_string()
}

fn fit_json(f: &ScalingFit) -> Value {
    json!({
        "exponent": f.exponent,
        "intercept": f.intercept,
        "r_squared": f.r_squared,
        "regime": f.regime.name(),
        "power_rss": f.power_rss,
        "exponential_rss": f.exponential_rss,
        "residuals": f.residuals,
    })
}

fn entry_json(e: &FrontierEntry) -> Value {
    json!({
        "target": e.target,
        "gamma": e.gamma,
        "value": e.value,
        "status": match e.status {
            FrontierStatus::Ok => "ok",
            FrontierStatus::OutOfRange => "out-of-range",
        },
    })
}

fn cmd_qfi(s: &Settings, method: Option<MethodArg>, cfi: bool, step: Option<f64>) -> CliResult<Output> {
    let p = s.params()?;
    let method = method.or(s.cfg.method).unwrap_or(MethodArg::Recursion);
    let h = step.or(s.cfg.step).unwrap_or(DEFAULT_FD_STEP);
    let r = match method {
        MethodArg::Recursion => qfi(&p)?,
        MethodArg::FiniteDifference => qfi_finite_difference(&p, h)?,
        MethodArg::Spectral => qfi_spectral(&p)?,
    };
    let mut header = vec!["n", "theta_over_pi", "gamma", "g", "qfi", "method"];
    let mut row = vec![
        p.n_excitations().to_string(),
        fmt_f64(p.theta_over_pi()),
        fmt_f64(p.gamma()),
        fmt_f64(p.g()),
        fmt_f64(r.qfi),
        r.method.name().to_string(),
    ];
    if cfi {
        header.push("cfi");
        row.push(fmt_f64(cfi_photon_number(&p, h)?.cfi.expect("requested")));
    }
    let mut out = Output::new("qfi", &header);
    out.push(row);
    out.meta = json!({ "parameters": s.model_json(), "fd_step": h });
    Ok(out)
}

fn cmd_gap(s: &Settings, all: bool) -> CliResult<Output> {
    let p = s.params()?;
    if all {
        let sp = spectrum(&p)?;
        let mut out = Output::new("gap", &["index", "singular_value"]);
        for (k, v) in sp.singular_values.iter().enumerate() {
            out.push(vec![k.to_string(), fmt_f64(*v)]);
        }
        out.meta = json!({
            "parameters": s.model_json(),
            "gap": sp.gap,
            "ln_gap": sp.ln_gap,
            "below_floor": sp.below_floor,
            "order": "descending",
        });
        return Ok(out);
    }
    let r = gap_report(&p)?;
    let mut out = Output::new(
        "gap",
        &["n", "theta_over_pi", "gamma", "g", "gap", "ln_gap", "sigma_max", "below_floor"],
    );
    out.push(vec![
        p.n_excitations().to_string(),
        fmt_f64(p.theta_over_pi()),
        fmt_f64(p.gamma()),
        fmt_f64(p.g()),
        fmt_f64(r.gap),
        fmt_f64(r.ln_gap),
        fmt_f64(r.sigma_max),
        r.below_floor.to_string(),
    ]);
    out.meta = json!({ "parameters": s.model_json() });
    Ok(out)
}

fn cmd_zeromode(s: &Settings) -> CliResult<Output> {
    let p = s.params()?;
    let mode = solve_zero_mode_dtheta(&p)?;
    let prob = probabilities(&mode);
    let mut out = Output::new("zeromode", &["n", "amplitude", "probability", "dtheta"]);
    for (k, ((a, pr), d)) in mode.amplitudes.iter().zip(&prob).zip(&mode.dtheta).enumerate() {
        out.push(vec![k.to_string(), fmt_f64(*a), fmt_f64(*pr), fmt_f64(*d)]);
    }
    out.meta = json!({ "parameters": s.model_json(), "residual": mode.residual() });
    Ok(out)
}

fn curve_output(s: &Settings, curve: &CellCurve, index_name: &'static str, meta: Value) -> Output {
    let mut out = Output::new("curve", &[index_name, "x", "y", "winding", "boundary_distance"]);
    for (k, pt) in curve.points.iter().enumerate() {
        let idx = if index_name == "cell" { k + 1 } else { k };
        out.push(vec![
            idx.to_string(),
            fmt_f64(pt.x),
            fmt_f64(pt.y),
            winding_str(pt.winding),
            fmt_f64(pt.boundary_distance()),
        ]);
    }
    let crossings: Vec<Value> = curve
        .crossings
        .iter()
        .map(|c| json!({ "segment": c.segment, "from": c.from, "to": c.to, "boundary": c.boundary.label() }))
        .collect();
    out.meta = json!({
        "parameters": s.model_json(),
        "curve": meta,
        "crossings": crossings,
        "min_boundary_distance": curve.min_boundary_distance(),
    });
    out
}

fn cmd_curve(s: &Settings, continuum: bool) -> CliResult<Output> {
    if continuum {
        let k = s.points.unwrap_or(DEFAULT_CONTINUUM_SAMPLES);
        let curve = continuum_curve(s.theta(), s.gamma, k)?;
        return Ok(curve_output(s, &curve, "sample", json!({ "kind": "continuum", "s_samples": k })));
    }
    let curve = cell_curve(&s.params()?)?;
    Ok(curve_output(s, &curve, "cell", json!({ "kind": "cells" })))
}

#[allow(clippy::too_many_arguments)]
fn cmd_phasediagram(
    s: &Settings,
    x_min: Option<f64>,
    x_max: Option<f64>,
    y_min: Option<f64>,
    y_max: Option<f64>,
    nx: Option<usize>,
    ny: Option<usize>,
) -> CliResult<Output> {
    let xr = (x_min.unwrap_or(0.0), x_max.unwrap_or(4.0));
    let yr = (y_min.unwrap_or(0.0), y_max.unwrap_or(3.0));
    let (nx, ny) = (nx.unwrap_or(81), ny.unwrap_or(61));
    let raster = phase_raster(xr, yr, nx, ny)?;
    let mut header = vec!["x", "y", "winding"];
    if s.ksamples.is_some() {
        header.push("winding_integral");
    }
    let mut out = Output::new("phasediagram", &header);
    let mut disagreements = 0usize;
    for pt in &raster {
        let mut row = vec![fmt_f64(pt.x), fmt_f64(pt.y), winding_str(pt.winding)];
        if let Some(k) = s.ksamples {
            let cell = match winding_integral(1.0, pt.x, pt.y, k) {
                Ok(w) => {
                    if w != pt.winding {
                        disagreements += 1;
                    }
                    winding_str(w)
                }
                Err(_) => "unresolved".to_string(),
            };
            row.push(cell);
        }
        out.push(row);
    }
    out.meta = json!({
        "x_range": [xr.0, xr.1],
        "y_range": [yr.0, yr.1],
        "nx": nx,
        "ny": ny,
        "ksamples": s.ksamples,
        "integral_disagreements": s.ksamples.map(|_| disagreements),
    });
    Ok(out)
}

fn cmd_scaling(s: &Settings) -> CliResult<Output> {
    let p = s.params()?;
    let grid = s.n_grid()?;
    let tp = scan_c1_c2(p.theta(), p.gamma(), &grid)?;
    let mut out = Output::new("scaling", &["n", "qfi", "gap", "ln_gap", "gap_below_floor"]);
    for r in &tp.rows {
        out.push(vec![
            r.n.to_string(),
            fmt_f64(r.qfi),
            fmt_f64(r.gap),
            fmt_f64(r.ln_gap),
            r.gap_below_floor.to_string(),
        ]);
    }
    out.meta = json!({
        "parameters": { "theta_over_pi": s.theta_over_pi, "gamma": s.gamma },
        "grid": s.grid_json()?,
        "c1": tp.c1,
        "c2": tp.c2,
        "gap_regime": tp.gap_regime().name(),
        "benchmark_c2": -tp.c1 / 2.0,
        "qfi_fit": fit_json(&tp.qfi_fit),
        "gap_fit": fit_json(&tp.gap_fit),
    });
    Ok(out)
}

fn cmd_tradeoff(s: &Settings) -> CliResult<Output> {
    let theta = s.theta();
    let grid = s.n_grid()?;
    let gammas = s.gamma_grid()?;
    let sweep = gamma_sweep(theta, &gammas, &grid)?;
    let mut out = Output::new(
        "tradeoff",
        &[
            "gamma",
            "c1",
            "c2",
            "gap_regime",
            "c1_r_squared",
            "gap_r_squared",
            "benchmark_c2",
            "above_benchmark",
        ],
    );
    for p in &sweep.points {
        let bench = -p.c1 / 2.0;
        out.push(vec![
            fmt_f64(p.gamma),
            fmt_f64(p.c1),
            fmt_f64(p.c2),
            p.gap_regime().name().to_string(),
            fmt_f64(p.qfi_fit.r_squared),
            fmt_f64(p.gap_fit.r_squared),
            fmt_f64(bench),
            (p.is_power_law() && p.c2 >= bench).to_string(),
        ]);
    }
    let c1_targets = s.cfg.c1_targets.clone().unwrap_or(DEFAULT_C1_TARGETS.to_vec());
    let c2_targets = s.cfg.c2_targets.clone().unwrap_or(DEFAULT_C2_TARGETS.to_vec());
    let frontier = if theta.abs() <= FRONTIER_THETA_MAX + 1e-12 {
        match tradeoff_frontier(&sweep, &c1_targets, &c2_targets) {
            Ok(f) => json!({
                "c2_for_c1": f.c2_for_c1.iter().map(entry_json).collect::<Vec<_>>(),
                "c1_for_c2": f.c1_for_c2.iter().map(entry_json).collect::<Vec<_>>(),
                "benchmark": f.benchmark,
            }),
            Err(e) => json!({ "unavailable": e.to_string() }),
        }
    } else {
        json!({ "unavailable": "theta outside |theta| <= 0.44 pi" })
    };
    out.meta = json!({
        "parameters": { "theta_over_pi": s.theta_over_pi },
        "grid": s.grid_json()?,
        "gamma_grid": gammas,
        "exponential_onset": sweep.exponential_onset(),
        "c1_departure_0.15": sweep.c1_departure(0.15),
        "frontier": frontier,
    });
    Ok(out)
}

fn cmd_boundary(s: &Settings) -> CliResult<String> {
    let c = theta_critical();
    let mut doc = json!({
        "tool": "fslsense",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "boundary",
        "theta_c_over_pi": c.theta_over_pi,
        "x_t": c.x_t,
        "tan2_theta_c": c.tan2_theta,
        "gamma_c": c.gamma,
    });
    if s.theta_given {
        let b = gamma_tangent(s.theta())?;
        doc["at_theta"] = json!({
            "theta_over_pi": s.theta_over_pi,
            "gamma_j": b.gamma_j,
            "gamma_t": b.gamma_t,
            "x_t_roots": b.x_t_roots,
            "x_t_selected": b.x_t_selected,
            "regime": b.regime.name(),
        });
    }
    Ok(serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n")
}

fn cmd_circuit(s: &Settings) -> CliResult<Output> {
    let c = s
        .cfg
        .circuit
        .ok_or_else(|| CliError::Usage("circuit needs a \"circuit\" block in --config".into()))?;
    let tol = s.tol.unwrap_or(DEFAULT_RESONANCE_TOL);
    let res = check_resonance(&c, tol);
    let e = effective_couplings_with_tol(&c, s.n, tol)?;
    for w in &e.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = Output::new(
        "circuit",
        &["n", "alpha0", "beta0", "gamma_bar", "g", "theta_over_pi", "gamma"],
    );
    out.push(vec![
        s.n.to_string(),
        fmt_f64(e.alpha0),
        fmt_f64(e.beta0),
        fmt_f64(e.gamma_bar),
        fmt_f64(e.g),
        fmt_f64(e.theta / std::f64::consts::PI),
        fmt_f64(e.gamma_model),
    ]);
    out.meta = json!({
        "circuit": c,
        "eta_a": c.eta_a(),
        "eta_b": c.eta_b(),
        "x": c.drive_index(),
        "resonance": res,
        "warnings": e.warnings,
    });
    Ok(out)
}

fn cmd_verify(s: &Settings, seed: Option<u64>, samples: Option<usize>) -> CliResult<(Output, bool)> {
    let d = VerifyConfig::default();
    let cfg = VerifyConfig {
        seed: seed.or(s.cfg.seed).unwrap_or(d.seed),
        samples: samples.or(s.cfg.samples).unwrap_or(d.samples),
        tol_scale: s.tol.unwrap_or(d.tol_scale),
        k_samples: s.ksamples.unwrap_or(DEFAULT_KSAMPLES),
    };
    let report = verify::run(&cfg)?;
    let mut out = Output::new("verify", &["check", "pass", "max_error", "tol", "cases"]);
    for c in &report.checks {
        out.push(vec![
            c.name.to_string(),
            c.pass.to_string(),
            fmt_f64(c.max_error),
            fmt_f64(c.tol),
            c.cases.to_string(),
        ]);
    }
    out.meta = json!({
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tol_scale": cfg.tol_scale,
        "ksamples": cfg.k_samples,
        "all_passed": report.all_passed(),
    });
    Ok((out, report.all_passed()))
}

fn dispatch(cli: &Cli, s: &Settings) -> CliResult<()> {
    let out = match &cli.command {
        Command::Qfi { method, cfi, step } => cmd_qfi(s, *method, *cfi, *step)?,
        Command::Gap { spectrum } => cmd_gap(s, *spectrum)?,
        Command::Zeromode => cmd_zeromode(s)?,
        Command::Curve { continuum } => cmd_curve(s, *continuum)?,
        Command::Phasediagram {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        } => cmd_phasediagram(s, *x_min, *x_max, *y_min, *y_max, *nx, *ny)?,
        Command::Scaling => cmd_scaling(s)?,
        Command::Tradeoff => cmd_tradeoff(s)?,
        Command::Boundary => {
            let text = cmd_boundary(s)?;
            return match &s.out {
                Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
        }
        Command::Circuit => cmd_circuit(s)?,
        Command::Verify { seed, samples } => {
            let (out, ok) = cmd_verify(s, *seed, *samples)?;
            out.emit(s)?;
            return if ok {
                Ok(())
            } else {
                Err(CliError::Verify("one or more invariant checks failed".into()))
            };
        }
    };
    out.emit(s)
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("fslsense: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig {
            version: CONFIG_VERSION,
            ..RunConfig::default()
        },
    };
    let s = Settings::merge(cli, cfg);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = s.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli, &s))
}
