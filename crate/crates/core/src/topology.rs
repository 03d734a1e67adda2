//! Winding numbers of the extended SSH chain locally associated with each
//! cell, and the geometry of its phase diagram in the `(w/v, t/v)` plane.
//!
//! The Bloch function is `h(k) = v + w e^{-ik} + t e^{-2ik}`. Writing
//! `z = e^{-ik}` turns it into the polynomial `v + w z + t z^2`, whose number
//! of roots inside the unit disk is minus the winding number.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance for detecting a root on the unit circle.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Largest tolerated deviation of the accumulated phase from an integer.
const INTEGRALITY_TOL: f64 = 0.1;

/// Largest phase step between consecutive k samples before the sampling is
/// considered too coarse to unwrap.
const MAX_PHASE_STEP: f64 = 0.75 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winding {
    Value(i32),
    /// A root sits on the unit circle; the chain is gapless.
    Critical,
}

impl Winding {
    pub fn value(self) -> Option<i32> {
        match self {
            Winding::Value(w) => Some(w),
            Winding::Critical => None,
        }
    }

    pub fn is_critical(self) -> bool {
        matches!(self, Winding::Critical)
    }
}

impl std::fmt::Display for Winding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Winding::Value(w) => write!(f, "{w}"),
            Winding::Critical => f.write_str("critical"),
        }
    }
}

/// A point of the phase diagram with its winding label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub winding: Winding,
}

impl PhasePoint {
    /// Labels `(x, y) = (w/v, t/v)` by the root count of `1 + x z + y z^2`.
    pub fn classify(x: f64, y: f64) -> Result<Self> {
        Ok(Self {
            x,
            y,
            winding: winding_roots(1.0, x, y)?,
        })
    }

    pub fn boundary_distance(&self) -> f64 {
        boundary_distance(self.x, self.y)
    }
}

/// Which pair of phases a boundary separates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryId {
    ZeroMinusOne,
    MinusOneMinusTwo,
    ZeroMinusTwo,
}

impl BoundaryId {
    pub fn between(a: i32, b: i32) -> Option<Self> {
        match (a.min(b), a.max(b)) {
            (-1, 0) => Some(Self::ZeroMinusOne),
            (-2, -1) => Some(Self::MinusOneMinusTwo),
            (-2, 0) => Some(Self::ZeroMinusTwo),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::ZeroMinusOne => "W0|W-1",
            Self::MinusOneMinusTwo => "W-1|W-2",
            Self::ZeroMinusTwo => "W0|W-2",
        }
    }
}

/// A change of winding label along a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// The label changes between `points[segment]` and `points[segment + 1]`
    /// (critical points in between are skipped).
    pub segment: usize,
    pub from: i32,
    pub to: i32,
    pub boundary: BoundaryId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellCurve {
    pub points: Vec<PhasePoint>,
    pub crossings: Vec<Crossing>,
}

impl CellCurve {
    pub fn from_points(points: Vec<PhasePoint>) -> Self {
        let mut crossings = Vec::new();
        let mut last: Option<i32> = None;
        for (i, p) in points.iter().enumerate() {
            let Some(w) = p.winding.value() else { continue };
            if let Some(prev) = last {
                if prev != w {
                    if let Some(boundary) = BoundaryId::between(prev, w) {
                        crossings.push(Crossing {
                            segment: i - 1,
                            from: prev,
                            to: w,
                            boundary,
                        });
                    }
                }
            }
            last = Some(w);
        }
        Self { points, crossings }
    }

    /// Smallest distance of any curve point to a phase boundary.
    pub fn min_boundary_distance(&self) -> f64 {
        self.points
            .iter()
            .map(PhasePoint::boundary_distance)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Winding number from the roots of `v + w z + t z^2`.
pub fn winding_roots(v: f64, w: f64, t: f64) -> Result<Winding> {
    if !(v.is_finite() && w.is_finite() && t.is_finite()) {
        return Err(Error::domain("hoppings must be finite"));
    }
    if v == 0.0 && w == 0.0 && t == 0.0 {
        return Err(Error::domain("all hoppings vanish"));
    }
    let moduli: Vec<f64> = if t == 0.0 {
        if w == 0.0 {
            Vec::new()
        } else {
            vec![(v / w).abs()]
        }
    } else {
        let disc = w * w - 4.0 * t * v;
        if disc >= 0.0 {
            let sign = if w < 0.0 { -1.0 } else { 1.0 };
            let q = -0.5 * (w + sign * disc.sqrt());
            if q == 0.0 {
                // w = 0 and t v = 0 with t != 0: double root at the origin.
                vec![0.0, 0.0]
            } else {
                vec![(q / t).abs(), (v / q).abs()]
            }
        } else {
            // Complex-conjugate pair with |z|^2 = v / t.
            let r = (v / t).sqrt();
            vec![r, r]
        }
    };
    if moduli.iter().any(|&r| (r - 1.0).abs() < BOUNDARY_EPS) {
        return Ok(Winding::Critical);
    }
    let inside = moduli.iter().filter(|&&r| r < 1.0).count() as i32;
    Ok(Winding::Value(-inside))
}

fn bloch(v: f64, w: f64, t: f64, k: f64) -> (f64, f64) {
    let (s1, c1) = k.sin_cos();
    let (s2, c2) = (2.0 * k).sin_cos();
    (v + w * c1 + t * c2, -(w * s1 + t * s2))
}

fn bloch_abs2(v: f64, w: f64, t: f64, k: f64) -> f64 {
    let (re, im) = bloch(v, w, t, k);
    re * re + im * im
}

/// Golden-section refinement of `min |h(k)|^2` on `[a, b]`.
fn refine_min_abs2(v: f64, w: f64, t: f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = bloch_abs2(v, w, t, c);
    let mut fd = bloch_abs2(v, w, t, d);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = bloch_abs2(v, w, t, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = bloch_abs2(v, w, t, d);
        }
    }
    fc.min(fd)
}

/// Winding number from the discretised phase integral of `h(k)` over the
/// Brillouin zone.
pub fn winding_integral(v: f64, w: f64, t: f64, k_samples: usize) -> Result<Winding> {
    if k_samples < 64 {
        return Err(Error::domain(format!("k_samples must be >= 64, got {k_samples}")));
    }
    if !(v.is_finite() && w.is_finite() && t.is_finite()) {
        return Err(Error::domain("hoppings must be finite"));
    }
    if v == 0.0 && w == 0.0 && t == 0.0 {
        return Err(Error::domain("all hoppings vanish"));
    }
    let dk = 2.0 * PI / k_samples as f64;
    let scale = v.abs() + w.abs() + t.abs();

    let mut min_abs2 = f64::INFINITY;
    let mut min_idx = 0;
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    let (re0, im0) = bloch(v, w, t, -PI);
    let mut prev = im0.atan2(re0);
    for j in 0..=k_samples {
        let k = -PI + j as f64 * dk;
        let (re, im) = bloch(v, w, t, k);
        let a2 = re * re + im * im;
        if a2 < min_abs2 {
            min_abs2 = a2;
            min_idx = j;
        }
        if j > 0 {
            let phase = im.atan2(re);
            let mut step = phase - prev;
            if step > PI {
                step -= 2.0 * PI;
            } else if step <= -PI {
                step += 2.0 * PI;
            }
            max_step = max_step.max(step.abs());
            total += step;
            prev = phase;
        }
    }
    let k_min = -PI + min_idx as f64 * dk;
    let refined = refine_min_abs2(v, w, t, k_min - dk, k_min + dk).min(min_abs2);
    if refined.sqrt() < BOUNDARY_EPS * scale {
        return Ok(Winding::Critical);
    }
    let raw = total / (2.0 * PI);
    let snapped = raw.round();
    if (raw - snapped).abs() > INTEGRALITY_TOL || max_step > MAX_PHASE_STEP {
        return Err(Error::numeric(format!(
            "phase integral under-sampled with {k_samples} samples (raw winding {raw:.4}, max step {max_step:.3})"
        )));
    }
    Ok(Winding::Value(snapped as i32))
}

/// Which root reaches the unit circle on a boundary component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// `z = -1`: the line `y = x - 1`.
    RootAtMinusOne,
    /// `z = +1`: the line `y = -x - 1`.
    RootAtPlusOne,
    /// A complex pair on the circle: `y = 1` with `|x| < 2`.
    ComplexPairOnCircle,
}

/// One straight piece of the phase boundary in the `(x, y)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment {
    pub kind: BoundaryKind,
    /// Line `y = slope * x + intercept` restricted to `x_min < x < x_max`.
    pub slope: f64,
    pub intercept: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub separates: BoundaryId,
}

impl BoundarySegment {
    pub fn y_at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    pub fn contains(&self, x: f64, y: f64, tol: f64) -> bool {
        x > self.x_min - tol && x < self.x_max + tol && (y - self.y_at(x)).abs() <= tol
    }
}

/// Analytic phase boundaries of the extended SSH chain with `v = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBoundaries {
    pub segments: Vec<BoundarySegment>,
    /// Points where three phases meet.
    pub multicritical: Vec<(f64, f64)>,
}

pub fn phase_boundaries() -> PhaseBoundaries {
    use BoundaryId::*;
    use BoundaryKind::*;
    let inf = f64::INFINITY;
    let seg = |kind, slope, intercept, x_min, x_max, separates| BoundarySegment {
        kind,
        slope,
        intercept,
        x_min,
        x_max,
        separates,
    };
    // On y = x - 1 the partner root is -1/y; it is inside the disk iff |y| > 1.
    // On y = -x - 1 the partner root is 1/y, with the same criterion.
    PhaseBoundaries {
        segments: vec![
            seg(RootAtMinusOne, 1.0, -1.0, 0.0, 2.0, ZeroMinusOne),
            seg(RootAtMinusOne, 1.0, -1.0, 2.0, inf, MinusOneMinusTwo),
            seg(RootAtMinusOne, 1.0, -1.0, -inf, 0.0, MinusOneMinusTwo),
            seg(RootAtPlusOne, -1.0, -1.0, -2.0, 0.0, ZeroMinusOne),
            seg(RootAtPlusOne, -1.0, -1.0, -inf, -2.0, MinusOneMinusTwo),
            seg(RootAtPlusOne, -1.0, -1.0, 0.0, inf, MinusOneMinusTwo),
            seg(ComplexPairOnCircle, 0.0, 1.0, -2.0, 2.0, ZeroMinusTwo),
        ],
        multicritical: vec![(2.0, 1.0), (-2.0, 1.0), (0.0, -1.0)],
    }
}

/// Euclidean distance from `(x, y)` to the nearest phase boundary.
pub fn boundary_distance(x: f64, y: f64) -> f64 {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let d_minus = (y - x + 1.0).abs() * inv_sqrt2;
    let d_plus = (y + x + 1.0).abs() * inv_sqrt2;
    let d_flat = if x.abs() <= 2.0 {
        (y - 1.0).abs()
    } else {
        let ex = x.abs() - 2.0;
        (ex * ex + (y - 1.0) * (y - 1.0)).sqrt()
    };
    d_minus.min(d_plus).min(d_flat)
}

/// Large-N limit of the cell curve at `s = n / N`.
pub fn continuum_point(theta: f64, gamma: f64, s: f64) -> Result<(f64, f64)> {
    let c = theta.cos();
    if c.abs() < crate::model::DEGENERATE_COS {
        return Err(Error::DegenerateRatios);
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain(format!("s must lie in (0, 1), got {s}")));
    }
    Ok((theta.tan() * ((1.0 - s) / s).sqrt(), gamma / c * (1.0 - s)))
}

/// The continuum curve with `s` eliminated: `y(x)`.
pub fn continuum_y_of_x(theta: f64, gamma: f64, x: f64) -> Result<f64> {
    let c = theta.cos();
    if c.abs() < crate::model::DEGENERATE_COS {
        return Err(Error::DegenerateRatios);
    }
    let tan2 = theta.tan().powi(2);
    Ok(gamma / c * x * x / (x * x + tan2))
}

/// Continuum curve sampled on the open grid `s_j = j / (samples + 1)`.
pub fn continuum_curve(theta: f64, gamma: f64, s_samples: usize) -> Result<CellCurve> {
    if s_samples == 0 {
        return Err(Error::domain("s_samples must be positive"));
    }
    let points = (1..=s_samples)
        .map(|j| {
            let s = j as f64 / (s_samples + 1) as f64;
            let (x, y) = continuum_point(theta, gamma, s)?;
            PhasePoint::classify(x, y)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CellCurve::from_points(points))
}

/// Winding labels on a regular `nx x ny` raster, row-major in `y` then `x`.
pub fn phase_raster(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Vec<PhasePoint>> {
    if nx < 2 || ny < 2 {
        return Err(Error::domain("raster needs at least 2 points per axis"));
    }
    let lerp = |(a, b): (f64, f64), i: usize, n: usize| a + (b - a) * i as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = lerp(y_range, j, ny);
        for i in 0..nx {
            out.push(PhasePoint::classify(lerp(x_range, i, nx), y)?);
        }
    }
    Ok(out)
}
