//! Finite-size scaling of the QFI and the gap.
//!
//! `F ~ N^c1` and `Delta E ~ N^c2` are fitted by least squares in log-log
//! coordinates; an exponentially closing gap is detected by comparing against
//! a fit of `ln Delta E` linear in `N`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrology::qfi;
use crate::model::ModelParams;
use crate::spectrum::gap_report;

/// The exponential model must beat the power law's residual by this factor.
pub const EXP_RSS_RATIO: f64 = 0.5;

/// ... and the gap must have shrunk by at least this factor over the grid.
pub const EXP_DECAY_RATIO: f64 = 0.1;

/// Angular half-width of the window where the frontier is meaningful.
pub const FRONTIER_THETA_MAX: f64 = 0.44 * PI;

pub const DEFAULT_NMIN: usize = 100;
pub const DEFAULT_NMAX: usize = 2000;
pub const DEFAULT_POINTS: usize = 8;

/// Rounded, logarithmically spaced excitation numbers, duplicates removed.
pub fn log_grid(nmin: usize, nmax: usize, points: usize) -> Result<Vec<usize>> {
    if nmin == 0 || nmax <= nmin || points < 2 {
        return Err(Error::domain(format!(
            "invalid grid: nmin={nmin}, nmax={nmax}, points={points}"
        )));
    }
    let (a, b) = ((nmin as f64).ln(), (nmax as f64).ln());
    let mut grid: Vec<usize> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as usize)
        .collect();
    grid.dedup();
    Ok(grid)
}

pub fn default_grid() -> Vec<usize> {
    log_grid(DEFAULT_NMIN, DEFAULT_NMAX, DEFAULT_POINTS).expect("default grid is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitModel {
    PowerLaw,
    Exponential,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    PowerLaw,
    Exponential,
    NumericFloor,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::PowerLaw => "power-law",
            Regime::Exponential => "exponential",
            Regime::NumericFloor => "numeric-floor",
        }
    }
}

/// One `(N, y)` observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub n: usize,
    /// `ln y`; fits work in logarithms so values past the `f64` range
    /// still count.
    pub ln_y: f64,
    /// The value is below the solver's trustworthy floor.
    pub below_floor: bool,
}

impl Sample {
    pub fn new(n: usize, y: f64) -> Self {
        Self::from_ln(n, y.ln())
    }

    pub fn from_ln(n: usize, ln_y: f64) -> Self {
        Self {
            n,
            ln_y,
            below_floor: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    /// Slope of the selected model: `d ln y / d ln N` for a power law,
    /// `d ln y / dN` for an exponential.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub regime: Regime,
    pub n_grid: Vec<usize>,
    /// Residuals of `ln y` under the selected model.
    pub residuals: Vec<f64>,
    pub power_rss: f64,
    pub exponential_rss: f64,
}

struct Line {
    slope: f64,
    intercept: f64,
    residuals: Vec<f64>,
    rss: f64,
    r_squared: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let tss: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if tss <= 1e-300 || rss <= 1e-28 * tss.max(1e-300) {
        1.0
    } else {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    };
    Line {
        slope,
        intercept,
        residuals,
        rss,
        r_squared,
    }
}

pub fn fit_exponent(samples: &[Sample], model: FitModel) -> Result<ScalingFit> {
    if samples.len() < 4 {
        return Err(Error::domain(format!("need at least 4 points, got {}", samples.len())));
    }
    if samples.windows(2).any(|w| w[1].n <= w[0].n) {
        return Err(Error::domain("N must be strictly increasing"));
    }
    if let Some(s) = samples.iter().find(|s| !s.ln_y.is_finite()) {
        return Err(Error::domain(format!(
            "value at N={} is not positive and finite: ln y = {}",
            s.n, s.ln_y
        )));
    }
    let ln_n: Vec<f64> = samples.iter().map(|s| (s.n as f64).ln()).collect();
    let lin_n: Vec<f64> = samples.iter().map(|s| s.n as f64).collect();
    let ln_y: Vec<f64> = samples.iter().map(|s| s.ln_y).collect();
    let power = least_squares(&ln_n, &ln_y);
    let expo = least_squares(&lin_n, &ln_y);

    let decayed = samples.last().unwrap().ln_y < EXP_DECAY_RATIO.ln() + samples[0].ln_y;
    let exponential_wins = expo.rss < EXP_RSS_RATIO * power.rss && decayed;
    let any_below_floor = samples.iter().any(|s| s.below_floor);

    let regime = match model {
        FitModel::Exponential => Regime::Exponential,
        FitModel::Auto if exponential_wins => Regime::Exponential,
        _ if any_below_floor => Regime::NumericFloor,
        _ => Regime::PowerLaw,
    };
    let (power_rss, exponential_rss) = (power.rss, expo.rss);
    let chosen = if regime == Regime::Exponential { expo } else { power };
    Ok(ScalingFit {
        exponent: chosen.slope,
        intercept: chosen.intercept,
        r_squared: chosen.r_squared,
        regime,
        n_grid: samples.iter().map(|s| s.n).collect(),
        residuals: chosen.residuals,
        power_rss,
        exponential_rss,
    })
}

/// Raw sweep data at one `(theta, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub qfi: f64,
    pub gap: f64,
    pub ln_gap: f64,
    pub gap_below_floor: bool,
}

pub fn sweep_n(theta: f64, gamma: f64, n_grid: &[usize]) -> Result<Vec<SweepRow>> {
    n_grid
        .par_iter()
        .map(|&n| {
            let params = ModelParams::new(n, theta, gamma)?;
            let f = qfi(&params)?.qfi;
            let g = gap_report(&params)?;
            Ok(SweepRow {
                n,
                qfi: f,
                gap: g.gap,
                ln_gap: g.ln_gap,
                gap_below_floor: g.below_floor,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub theta: f64,
    pub gamma: f64,
    pub c1: f64,
    /// Log-log slope of the gap. Meaningful as an exponent only when
    /// `gap_fit.regime` is [`Regime::PowerLaw`].
    pub c2: f64,
    pub qfi_fit: ScalingFit,
    pub gap_fit: ScalingFit,
    pub rows: Vec<SweepRow>,
}

impl TradeoffPoint {
    pub fn gap_regime(&self) -> Regime {
        self.gap_fit.regime
    }

    pub fn is_power_law(&self) -> bool {
        self.gap_fit.regime == Regime::PowerLaw
    }
}

/// Fits `c1` and `c2` over `n_grid` at fixed `(theta, gamma)` (radians).
pub fn scan_c1_c2(theta: f64, gamma: f64, n_grid: &[usize]) -> Result<TradeoffPoint> {
    let rows = sweep_n(theta, gamma, n_grid)?;
    let qfi_samples: Vec<Sample> = rows.iter().map(|r| Sample::new(r.n, r.qfi)).collect();
    let gap_samples: Vec<Sample> = rows
        .iter()
        .map(|r| Sample {
            n: r.n,
            ln_y: r.ln_gap,
            below_floor: r.gap_below_floor,
        })
        .collect();
    let qfi_fit = fit_exponent(&qfi_samples, FitModel::PowerLaw)?;
    let gap_fit = fit_exponent(&gap_samples, FitModel::Auto)?;
    let c2 = if gap_fit.regime == Regime::Exponential {
        fit_exponent(&gap_samples, FitModel::PowerLaw)?.exponent
    } else {
        gap_fit.exponent
    };
    Ok(TradeoffPoint {
        theta,
        gamma,
        c1: qfi_fit.exponent,
        c2,
        qfi_fit,
        gap_fit,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSweep {
    pub theta: f64,
    pub points: Vec<TradeoffPoint>,
}

impl GammaSweep {
    /// First `gamma` whose gap is fitted as exponentially closing.
    pub fn exponential_onset(&self) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.gap_regime() == Regime::Exponential)
            .map(|p| p.gamma)
    }

    /// First `gamma` with `c1 > 1 + margin`.
    pub fn c1_departure(&self, margin: f64) -> Option<f64> {
        self.points.iter().find(|p| p.c1 > 1.0 + margin).map(|p| p.gamma)
    }
}

pub fn gamma_sweep(theta: f64, gamma_grid: &[f64], n_grid: &[usize]) -> Result<GammaSweep> {
    if gamma_grid.is_empty() {
        return Err(Error::domain("gamma grid is empty"));
    }
    if gamma_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("gamma grid must be strictly increasing"));
    }
    let points = gamma_grid
        .par_iter()
        .map(|&g| scan_c1_c2(theta, g, n_grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaSweep { theta, points })
}

/// Pool-adjacent-violators fit of a non-decreasing sequence.
pub fn isotonic_increasing(y: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a <= b {
                break;
            }
            blocks.pop();
            let merged = (a * na as f64 + b * nb as f64) / (na + nb) as f64;
            *blocks.last_mut().unwrap() = (merged, na + nb);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, n)| std::iter::repeat_n(v, n))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrontierStatus {
    Ok,
    OutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierEntry {
    pub target: f64,
    pub gamma: Option<f64>,
    pub value: Option<f64>,
    pub status: FrontierStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub theta: f64,
    /// Required `c2` for each target `c1`.
    pub c2_for_c1: Vec<FrontierEntry>,
    /// Achievable `c1` for each prescribed `c2`.
    pub c1_for_c2: Vec<FrontierEntry>,
    /// Homogeneous local-encoding reference line `(c1, -c1/2)` at the `c1` targets.
    pub benchmark: Vec<(f64, f64)>,
}

/// Tolerance for treating a target equal to an end of the monotone range.
const RANGE_SLACK: f64 = 1e-6;

/// Locates `target` on the monotone sequence `key` (increasing) and returns
/// the interpolated `(gamma, other)`.
fn invert(gammas: &[f64], key: &[f64], other: &[f64], target: f64) -> FrontierEntry {
    let out = FrontierEntry {
        target,
        gamma: None,
        value: None,
        status: FrontierStatus::OutOfRange,
    };
    let (lo, hi) = (key[0], key[key.len() - 1]);
    if !(target >= lo - RANGE_SLACK && target <= hi + RANGE_SLACK) {
        return out;
    }
    let t = target.clamp(lo, hi);
    if key.len() == 1 || t <= key[0] {
        return FrontierEntry {
            gamma: Some(gammas[0]),
            value: Some(other[0]),
            status: FrontierStatus::Ok,
            ..out
        };
    }
    for i in 0..key.len() - 1 {
        if t >= key[i] && t <= key[i + 1] {
            let span = key[i + 1] - key[i];
            let f = if span > 0.0 { (t - key[i]) / span } else { 0.0 };
            return FrontierEntry {
                gamma: Some(gammas[i] + f * (gammas[i + 1] - gammas[i])),
                value: Some(other[i] + f * (other[i + 1] - other[i])),
                status: FrontierStatus::Ok,
                ..out
            };
        }
    }
    out
}

/// Builds the trade-off tables from the power-law part of a `gamma` sweep.
pub fn tradeoff_frontier(sweep: &GammaSweep, c1_targets: &[f64], c2_targets: &[f64]) -> Result<Frontier> {
    if sweep.theta.abs() > FRONTIER_THETA_MAX + 1e-12 {
        return Err(Error::domain(format!(
            "theta/pi = {} lies outside the window |theta| <= 0.44 pi",
            sweep.theta / PI
        )));
    }
    let usable: Vec<&TradeoffPoint> = sweep.points.iter().filter(|p| p.is_power_law()).collect();
    if usable.is_empty() {
        return Err(Error::domain("sweep has no power-law points"));
    }
    let gammas: Vec<f64> = usable.iter().map(|p| p.gamma).collect();
    let c1 = isotonic_increasing(&usable.iter().map(|p| p.c1).collect::<Vec<_>>());
    let neg_c2 = isotonic_increasing(&usable.iter().map(|p| -p.c2).collect::<Vec<_>>());
    let c2: Vec<f64> = neg_c2.iter().map(|x| -x).collect();

    let c2_for_c1 = c1_targets.iter().map(|&t| invert(&gammas, &c1, &c2, t)).collect();
    let c1_for_c2 = c2_targets
        .iter()
        .map(|&t| {
            let mut e = invert(&gammas, &neg_c2, &c1, -t);
            e.target = t;
            e
        })
        .collect();
    Ok(Frontier {
        theta: sweep.theta,
        c2_for_c1,
        c1_for_c2,
        benchmark: c1_targets.iter().map(|&c| (c, -c / 2.0)).collect(),
    })
}
