//! Quantum and classical Fisher information of the zero mode.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{coupling_matrix_dtheta, ModelParams};
use crate::spectrum::{bidiagonal_of, full_spectrum_oracle, gap};
use crate::zero_mode::{probabilities, solve_zero_mode, solve_zero_mode_dtheta, ZeroMode};

/// Photon-number cells with probability below this use the analytic limit
/// `4 (du_n)^2` instead of `(dP_n)^2 / P_n`.
pub const EPS_P: f64 = 1e-30;

pub const MIN_FD_STEP: f64 = 1e-7;
pub const MAX_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QfiMethod {
    DerivativeRecursion,
    FiniteDifference,
    Spectral,
}

impl QfiMethod {
    pub fn name(self) -> &'static str {
        match self {
            QfiMethod::DerivativeRecursion => "derivative-recursion",
            QfiMethod::FiniteDifference => "finite-difference",
            QfiMethod::Spectral => "spectral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub qfi: f64,
    pub method: QfiMethod,
    /// Classical Fisher information of photon counting, when requested.
    pub cfi: Option<f64>,
    pub params: ModelParams,
}

fn qfi_of_mode(mode: &ZeroMode) -> f64 {
    4.0 * mode.dtheta.iter().map(|d| d * d).sum::<f64>()
}

/// `F = 4 sum (du_n)^2` from the differentiated recursion.
pub fn qfi(params: &ModelParams) -> Result<FisherResult> {
    let mode = solve_zero_mode_dtheta(params)?;
    Ok(FisherResult {
        qfi: qfi_of_mode(&mode),
        method: QfiMethod::DerivativeRecursion,
        cfi: None,
        params: *params,
    })
}

fn check_step(h: f64) -> Result<()> {
    if !(MIN_FD_STEP..=MAX_FD_STEP).contains(&h) {
        return Err(Error::domain(format!(
            "finite-difference step {h:e} outside [{MIN_FD_STEP:e}, {MAX_FD_STEP:e}]"
        )));
    }
    Ok(())
}

fn shifted(params: &ModelParams, h: f64) -> Result<(ZeroMode, ZeroMode)> {
    let plus = solve_zero_mode(&params.with_theta(params.theta() + h)?)?;
    let minus = solve_zero_mode(&params.with_theta(params.theta() - h)?)?;
    Ok((plus, minus))
}

fn aligned(mode: &ZeroMode, reference: &[f64]) -> Vec<f64> {
    let dot: f64 = mode.amplitudes.iter().zip(reference).map(|(a, b)| a * b).sum();
    let s = if dot < 0.0 { -1.0 } else { 1.0 };
    mode.amplitudes.iter().map(|a| s * a).collect()
}

/// `4 (<du|du> - <u|du>^2)` with `du` from central differences of the states.
pub fn qfi_finite_difference(params: &ModelParams, h: f64) -> Result<FisherResult> {
    check_step(h)?;
    let center = solve_zero_mode(params)?;
    let (plus, minus) = shifted(params, h)?;
    let up = aligned(&plus, &center.amplitudes);
    let dn = aligned(&minus, &center.amplitudes);
    let du: Vec<f64> = up.iter().zip(&dn).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let norm2: f64 = du.iter().map(|x| x * x).sum();
    let overlap: f64 = du.iter().zip(&center.amplitudes).map(|(a, b)| a * b).sum();
    Ok(FisherResult {
        qfi: 4.0 * (norm2 - overlap * overlap),
        method: QfiMethod::FiniteDifference,
        cfi: None,
        params: *params,
    })
}

/// `4 sum_{mu != 0} |<E_mu| dH |E_0>|^2 / E_mu^2` from a dense
/// diagonalization. Limited to the oracle size.
pub fn qfi_spectral(params: &ModelParams) -> Result<FisherResult> {
    let oracle = full_spectrum_oracle(params)?;
    let dh: DMatrix<f64> = coupling_matrix_dtheta(params).hamiltonian_dense();
    let psi0 = oracle.eigenvector(oracle.zero_index);
    let dpsi = &dh * &psi0;
    let mut f = 0.0;
    for (k, &e) in oracle.eigenvalues.iter().enumerate() {
        if k == oracle.zero_index {
            continue;
        }
        let amp = oracle.eigenvectors.column(k).dot(&dpsi);
        f += amp * amp / (e * e);
    }
    if !f.is_finite() {
        return Err(Error::numeric("spectral QFI sum is not finite"));
    }
    Ok(FisherResult {
        qfi: 4.0 * f,
        method: QfiMethod::Spectral,
        cfi: None,
        params: *params,
    })
}

/// Classical Fisher information of photon counting on the zero mode, with
/// `dP_n` from central differences of step `h`. The returned record carries
/// the derivative-recursion QFI alongside.
pub fn cfi_photon_number(params: &ModelParams, h: f64) -> Result<FisherResult> {
    check_step(h)?;
    let center = solve_zero_mode_dtheta(params)?;
    let (plus, minus) = shifted(params, h)?;
    let p0 = probabilities(&center);
    let pp = probabilities(&plus);
    let pm = probabilities(&minus);
    let mut cfi = 0.0;
    for n in 0..p0.len() {
        cfi += if p0[n] < EPS_P {
            4.0 * center.dtheta[n].powi(2)
        } else {
            let dp = (pp[n] - pm[n]) / (2.0 * h);
            dp * dp / p0[n]
        };
    }
    Ok(FisherResult {
        qfi: qfi_of_mode(&center),
        method: QfiMethod::DerivativeRecursion,
        cfi: Some(cfi),
        params: *params,
    })
}

/// Exact values at `gamma = 0`: the zero mode is binomial in photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearLimit {
    pub qfi: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn linear_limit_closed_forms(params: &ModelParams) -> Result<LinearLimit> {
    if params.gamma() != 0.0 {
        return Err(Error::domain("closed forms hold only at gamma = 0"));
    }
    let n = params.n_excitations() as f64;
    let (s, c) = params.theta().sin_cos();
    Ok(LinearLimit {
        qfi: 4.0 * n,
        mean: n * s * s,
        variance: n * s * s * c * c,
    })
}

/// Spectral-gap bound `F <= 4 ||dH||^2 / Delta E^2` on the fixed-N sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkBound {
    pub dh_norm: f64,
    pub gap: f64,
    pub bound: f64,
}

pub fn benchmark_bound(params: &ModelParams) -> Result<BenchmarkBound> {
    let dh_norm = bidiagonal_of(&coupling_matrix_dtheta(params))?.largest()?;
    let gap = gap(params)?;
    Ok(BenchmarkBound {
        dh_norm,
        gap,
        bound: 4.0 * dh_norm * dh_norm / (gap * gap),
    })
}
