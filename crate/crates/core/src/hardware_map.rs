//! Circuit-QED drive and coupling parameters to the effective `(g, theta, gamma)`.
//!
//! A qubit longitudinally coupled to two cavities and driven at `omega_tilde`
//! produces Bessel-weighted sidebands. At the chosen resonances the leading
//! processes are a single-photon `a` sideband, a single-photon `b` sideband
//! and the three-body `a^2 b^dagger` transition.

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Above this `eta` the lowest-order expansion is reported as questionable.
pub const ETA_WARN: f64 = 0.3;

pub const DEFAULT_RESONANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    pub g_a: f64,
    pub g_b: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_z: f64,
    pub omega_x: f64,
    /// Drive amplitude `Omega`.
    pub drive_amp: f64,
    /// Drive frequency `omega_tilde`.
    pub drive_freq: f64,
    #[serde(default)]
    pub phase: f64,
}

impl CircuitParams {
    pub fn eta_a(&self) -> f64 {
        2.0 * self.g_a / self.omega_a
    }

    pub fn eta_b(&self) -> f64 {
        2.0 * self.g_b / self.omega_b
    }

    /// Bessel argument `x = 2 Omega / omega_tilde`.
    pub fn drive_index(&self) -> f64 {
        2.0 * self.drive_amp / self.drive_freq
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("omega_z", self.omega_z),
            ("omega_x", self.omega_x),
            ("drive_amp", self.drive_amp),
            ("drive_freq", self.drive_freq),
            ("phase", self.phase),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::domain(format!("{name} must be finite, got {v}")));
        }
        for (name, v) in [
            ("eta_a", self.eta_a()),
            ("eta_b", self.eta_b()),
            ("x", self.drive_index()),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} is not finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceCheck {
    pub pass: bool,
    /// `omega_a + omega_tilde - omega_z`, `omega_b + 2 omega_tilde - omega_z`,
    /// `2 omega_a - omega_b - omega_z`.
    pub residuals: [f64; 3],
    pub tol: f64,
}

pub fn check_resonance(c: &CircuitParams, tol: f64) -> ResonanceCheck {
    let residuals = [
        c.omega_a + c.drive_freq - c.omega_z,
        c.omega_b + 2.0 * c.drive_freq - c.omega_z,
        2.0 * c.omega_a - c.omega_b - c.omega_z,
    ];
    let limit = tol * c.omega_z.abs();
    ResonanceCheck {
        pass: residuals.iter().all(|r| r.abs() <= limit),
        residuals,
        tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    pub alpha0: f64,
    pub beta0: f64,
    pub gamma_bar: f64,
    pub g: f64,
    /// `atan2(alpha0, beta0)` in radians.
    pub theta: f64,
    pub n_excitations: usize,
    /// `N * gamma_bar`.
    pub gamma_model: f64,
    pub warnings: Vec<String>,
}

impl EffectiveCouplings {
    /// The sensing model in this sector. Fails when both linear amplitudes
    /// vanish, since `g = 0` is not a valid energy scale.
    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n_excitations, self.theta, self.gamma_model)?.with_g(self.g)
    }
}

pub fn effective_couplings(c: &CircuitParams, n_excitations: usize) -> Result<EffectiveCouplings> {
    effective_couplings_with_tol(c, n_excitations, DEFAULT_RESONANCE_TOL)
}

/// As [`effective_couplings`] with a custom relative resonance tolerance.
pub fn effective_couplings_with_tol(
    c: &CircuitParams,
    n_excitations: usize,
    tol: f64,
) -> Result<EffectiveCouplings> {
    c.validate()?;
    if c.phase != 0.0 {
        return Err(Error::Unsupported(format!(
            "drive phase {} is not supported; only phi = 0 is implemented",
            c.phase
        )));
    }
    let res = check_resonance(c, tol);
    if !res.pass {
        return Err(Error::domain(format!(
            "resonance conditions violated, residuals {:?}",
            res.residuals
        )));
    }
    let (ea, eb) = (c.eta_a(), c.eta_b());
    let x = c.drive_index();
    let e = (-(ea * ea + eb * eb) / 2.0).exp();
    let alpha0 = -(c.omega_x / 2.0) * e * bessel_j(-1, x) * ea;
    let beta0 = -(c.omega_x / 2.0) * e * bessel_j(-2, x) * eb;
    let gamma_bar = (c.omega_x / 4.0) * e * bessel_j(0, x) * ea * ea * eb;

    let mut warnings = Vec::new();
    if ea.abs().max(eb.abs()) > ETA_WARN {
        warnings.push(format!(
            "max(|eta_a|, |eta_b|) = {:.3} exceeds {ETA_WARN}; lowest-order couplings may be inaccurate",
            ea.abs().max(eb.abs())
        ));
    }
    Ok(EffectiveCouplings {
        alpha0,
        beta0,
        gamma_bar,
        g: alpha0.hypot(beta0),
        theta: alpha0.atan2(beta0),
        n_excitations,
        gamma_model: n_excitations as f64 * gamma_bar,
        warnings,
    })
}
