//! Large-N boundary geometry of the continuum cell curve.
//!
//! In the continuum limit the cell curve is `x = tan(theta) sqrt((1-s)/s)`,
//! `y = gamma (1-s) / cos(theta)` for `s = n/N`. Two thresholds in `gamma`
//! matter: the junction threshold where the curve passes through the
//! multicritical point `(2, 1)`, and the tangency threshold where it first
//! touches the `W = -1 / W = -2` boundary `y = x - 1` for `x > 2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::topology::continuum_point;

/// Smallest `tan^2(theta)` for which `x^3 / (x - 2) = tan^2(theta)` has a root.
pub const TANGENCY_MIN_TAN2: f64 = 27.0;

/// Real roots of the monic cubic `x^3 + b x^2 + c x + d`, ascending, each
/// polished by Newton's method.
pub fn real_cubic_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let scale = 1.0 + p.abs().max(q.abs());
    let disc = -(4.0 * p * p * p + 27.0 * q * q);

    let mut roots: Vec<f64> = if p.abs() <= 1e-15 * scale && q.abs() <= 1e-15 * scale {
        vec![0.0; 3]
    } else if disc >= -1e-12 * scale * scale * scale && p < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3).map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos()).collect()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    };
    for y in roots.iter_mut() {
        *y -= shift;
        *y = polish(*y, b, c, d);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn polish(mut x: f64, b: f64, c: f64, d: f64) -> f64 {
    for _ in 0..8 {
        let f = ((x + b) * x + c) * x + d;
        let df = (3.0 * x + 2.0 * b) * x + c;
        // At a multiple root Newton loses its footing; the analytic value is
        // already as good as it gets there.
        if f == 0.0 || df.abs() < 1e-8 * (1.0 + x.abs()).powi(2) {
            break;
        }
        let step = f / df;
        x -= step;
        if step.abs() <= f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}

fn require_positive_cos(theta: f64) -> Result<f64> {
    let c = theta.cos();
    if !(c > 0.0) {
        return Err(Error::domain(format!(
            "cos(theta) must be positive, got theta/pi = {}; map through the symmetries first",
            theta / PI
        )));
    }
    Ok(c)
}

/// `gamma_J = (1 + 3 cos^2 theta) / (4 cos theta)`.
pub fn gamma_junction(theta: f64) -> Result<f64> {
    let c = require_positive_cos(theta)?;
    Ok((1.0 + 3.0 * c * c) / (4.0 * c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryRegime {
    /// The curve reaches the multicritical point before it can touch `y = x - 1`.
    Favorable,
    /// Tangency with `y = x - 1` happens first.
    Unfavorable,
}

impl GeometryRegime {
    pub fn name(self) -> &'static str {
        match self {
            GeometryRegime::Favorable => "favorable",
            GeometryRegime::Unfavorable => "unfavorable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGeometry {
    pub theta: f64,
    pub gamma_j: f64,
    /// `None` when `tan^2 theta < 27` and no tangency exists.
    pub gamma_t: Option<f64>,
    /// All roots `x > 2` of `x^3 - T x + 2T = 0`, ascending.
    pub x_t_roots: Vec<f64>,
    pub x_t_selected: Option<f64>,
    pub regime: GeometryRegime,
}

fn gamma_t_at(cos_theta: f64, x: f64) -> f64 {
    2.0 * cos_theta * (x - 1.0).powi(2) / (x - 2.0)
}

/// Tangency threshold and the full root record at `theta`.
pub fn gamma_tangent(theta: f64) -> Result<BoundaryGeometry> {
    let c = require_positive_cos(theta)?;
    let gamma_j = gamma_junction(theta)?;
    let t2 = theta.tan().powi(2);
    if t2 < TANGENCY_MIN_TAN2 {
        return Ok(BoundaryGeometry {
            theta,
            gamma_j,
            gamma_t: None,
            x_t_roots: Vec::new(),
            x_t_selected: None,
            regime: GeometryRegime::Favorable,
        });
    }
    let mut x_t_roots: Vec<f64> = real_cubic_roots(0.0, -t2, 2.0 * t2)
        .into_iter()
        .filter(|&x| x > 2.0)
        .collect();
    x_t_roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());

    let selected = x_t_roots
        .iter()
        .copied()
        .min_by(|&a, &b| gamma_t_at(c, a).total_cmp(&gamma_t_at(c, b)));
    let gamma_t = selected.map(|x| gamma_t_at(c, x));
    let regime = match gamma_t {
        Some(gt) if gt < gamma_j => GeometryRegime::Unfavorable,
        _ => GeometryRegime::Favorable,
    };
    Ok(BoundaryGeometry {
        theta,
        gamma_j,
        gamma_t,
        x_t_roots,
        x_t_selected: selected,
        regime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalAngle {
    pub theta: f64,
    pub theta_over_pi: f64,
    pub x_t: f64,
    pub tan2_theta: f64,
    /// Common value of both thresholds at the critical angle.
    pub gamma: f64,
}

/// The angle at which the junction and tangency thresholds coincide.
///
/// Equating them gives `8 (x-1)^2 = x^3 + 4x - 8`, i.e. `(x - 4)(x - 2)^2 = 0`;
/// the double root at 2 is the degenerate `x -> 2` limit, so `x_t = 4`.
pub fn theta_critical() -> CriticalAngle {
    let x_t = real_cubic_roots(-8.0, 20.0, -16.0)
        .into_iter()
        .filter(|&x| x > 2.0 + 1e-6)
        .fold(f64::NAN, f64::max);
    let tan2_theta = x_t.powi(3) / (x_t - 2.0);
    let theta = tan2_theta.sqrt().atan();
    CriticalAngle {
        theta,
        theta_over_pi: theta / PI,
        x_t,
        tan2_theta,
        gamma: gamma_t_at(theta.cos(), x_t),
    }
}

/// Number of sign changes of `y - (x - 1)` along the continuum curve
/// restricted to `x > 2`, sampled at `samples` points in `s`.
pub fn boundary_line_crossings(theta: f64, gamma: f64, samples: usize) -> Result<usize> {
    if samples < 3 {
        return Err(Error::domain("need at least 3 samples"));
    }
    let mut crossings = 0;
    let mut prev: Option<f64> = None;
    for j in 1..=samples {
        let s = j as f64 / (samples + 1) as f64;
        let (x, y) = continuum_point(theta, gamma, s)?;
        if x <= 2.0 {
            prev = None;
            continue;
        }
        let f = y - x + 1.0;
        if let Some(p) = prev {
            if (p < 0.0) != (f < 0.0) {
                crossings += 1;
            }
        }
        prev = Some(f);
    }
    Ok(crossings)
}
