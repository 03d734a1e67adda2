//! The exact zero-energy mode and its theta-derivative.
//!
//! The mode lives on the down sublattice and is the null vector of the
//! coupling block, obtained from the three-term recursion
//! `v_n u_n + w_n u_{n-1} + t_n u_{n-2} = 0` seeded with `u_0 = 1`.

use crate::error::{Error, Result};
use crate::model::{coupling_matrix, coupling_matrix_dtheta, ModelParams};

/// Running amplitudes are rescaled once they exceed this magnitude.
const RESCALE_AT: f64 = 1.340_780_792_994_259_7e154; // 2^512

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroMode {
    /// `u_0 ..= u_N`, normalized, largest-magnitude entry positive.
    pub amplitudes: Vec<f64>,
    /// Derivative of the normalized amplitudes with respect to theta.
    /// Empty unless produced by [`solve_zero_mode_dtheta`].
    pub dtheta: Vec<f64>,
    pub params: ModelParams,
}

impl ZeroMode {
    pub fn has_derivative(&self) -> bool {
        !self.dtheta.is_empty()
    }

    /// Largest `|v_n u_n + w_n u_{n-1} + t_n u_{n-2}|` over all cells.
    pub fn residual(&self) -> f64 {
        coupling_matrix(&self.params)
            .apply(&self.amplitudes)
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

struct Raw {
    u: Vec<f64>,
    du: Option<Vec<f64>>,
}

fn recurse(params: &ModelParams, with_derivative: bool) -> Result<Raw> {
    if params.is_degenerate() {
        return Err(Error::PivotVanishes);
    }
    let a = coupling_matrix(params);
    let (v, w, t) = (a.v_band(), a.w_band(), a.t_band());
    let da = with_derivative.then(|| coupling_matrix_dtheta(params));

    let n = params.n_excitations();
    let mut u = vec![0.0; n + 1];
    let mut du = vec![0.0; if with_derivative { n + 1 } else { 0 }];
    u[0] = 1.0;
    let mut running_max: f64 = 1.0;

    for m in 1..=n {
        let i = m - 1;
        let mut acc = w[i] * u[m - 1];
        if m >= 2 {
            acc += t[i] * u[m - 2];
        }
        u[m] = -acc / v[i];

        if let Some(da) = &da {
            let mut dacc = da.v_band()[i] * u[m] + w[i] * du[m - 1] + da.w_band()[i] * u[m - 1];
            if m >= 2 {
                dacc += t[i] * du[m - 2];
            }
            du[m] = -dacc / v[i];
            running_max = running_max.max(du[m].abs());
        }
        running_max = running_max.max(u[m].abs());

        if !(u[m].is_finite() && (du.is_empty() || du[m].is_finite())) {
            return Err(Error::numeric(format!("zero-mode recursion overflowed at cell {m}")));
        }
        if running_max > RESCALE_AT {
            let inv = 1.0 / running_max;
            u[..=m].iter_mut().for_each(|x| *x *= inv);
            if with_derivative {
                du[..=m].iter_mut().for_each(|x| *x *= inv);
            }
            running_max = 1.0;
        }
    }
    Ok(Raw {
        u,
        du: with_derivative.then_some(du),
    })
}

fn finish(params: &ModelParams, raw: Raw) -> Result<ZeroMode> {
    let Raw { mut u, du } = raw;
    // Scale by the largest entry before summing squares to stay in range.
    let peak = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::numeric("zero-mode amplitudes are not normalizable"));
    }
    let norm = u.iter().map(|x| (x / peak).powi(2)).sum::<f64>().sqrt() * peak;
    let argmax = u
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let sign = if u[argmax] < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / norm;
    u.iter_mut().for_each(|x| *x *= scale);

    let dtheta = match du {
        None => Vec::new(),
        Some(mut d) => {
            // The raw derivative belongs to the unnormalized vector; dividing
            // by the norm and removing the component along u gives the
            // derivative of the normalized state.
            d.iter_mut().for_each(|x| *x *= scale);
            let overlap: f64 = u.iter().zip(&d).map(|(a, b)| a * b).sum();
            d.iter_mut().zip(&u).for_each(|(x, a)| *x -= overlap * a);
            d
        }
    };
    if u.iter().chain(&dtheta).any(|x| !x.is_finite()) {
        return Err(Error::numeric("non-finite zero-mode entry after normalization"));
    }
    Ok(ZeroMode {
        amplitudes: u,
        dtheta,
        params: *params,
    })
}

pub fn solve_zero_mode(params: &ModelParams) -> Result<ZeroMode> {
    let raw = recurse(params, false)?;
    finish(params, raw)
}

/// Like [`solve_zero_mode`], also filling [`ZeroMode::dtheta`].
pub fn solve_zero_mode_dtheta(params: &ModelParams) -> Result<ZeroMode> {
    let raw = recurse(params, true)?;
    finish(params, raw)
}

/// Photon-number distribution `P_n = u_n^2`.
pub fn probabilities(mode: &ZeroMode) -> Vec<f64> {
    mode.amplitudes.iter().map(|u| u * u).collect()
}
