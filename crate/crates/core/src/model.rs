//! Sensor parameters, cell-dependent hoppings and the fixed-excitation
//! Hamiltonian of the two-cavity Jaynes-Cummings-type model.
//!
//! Basis ordering used everywhere in the crate: the `N + 1` down-sublattice
//! sites `|down, N-n, n>` for `n = 0..=N` come first, followed by the `N`
//! up-sublattice sites `|up, N-m, m-1>` for `m = 1..=N`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::topology::{self, CellCurve, PhasePoint};

/// Below this `|cos(theta)|` the intracell hoppings are treated as zero.
pub const DEGENERATE_COS: f64 = 1e-12;

/// Physical parameters of one fixed-excitation sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n_excitations: usize,
    theta: f64,
    gamma: f64,
    g: f64,
}

/// Maps an angle onto `(-pi, pi]`.
pub fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

impl ModelParams {
    /// Builds parameters with `g = 1`. `theta` is in radians.
    pub fn new(n_excitations: usize, theta: f64, gamma: f64) -> Result<Self> {
        if n_excitations == 0 {
            return Err(Error::domain("n_excitations must be at least 1"));
        }
        if !theta.is_finite() {
            return Err(Error::domain("theta must be finite"));
        }
        if !gamma.is_finite() {
            return Err(Error::domain("gamma must be finite"));
        }
        Ok(Self {
            n_excitations,
            theta: canonical_angle(theta),
            gamma,
            g: 1.0,
        })
    }

    /// Same as [`ModelParams::new`] with `theta` given in units of pi.
    pub fn from_theta_over_pi(n_excitations: usize, theta_over_pi: f64, gamma: f64) -> Result<Self> {
        Self::new(n_excitations, theta_over_pi * PI, gamma)
    }

    pub fn with_g(mut self, g: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::domain(format!("g must be positive and finite, got {g}")));
        }
        self.g = g;
        Ok(self)
    }

    pub fn with_theta(self, theta: f64) -> Result<Self> {
        Self::new(self.n_excitations, theta, self.gamma)?.with_g(self.g)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.n_excitations, self.theta, gamma)?.with_g(self.g)
    }

    pub fn with_n(self, n_excitations: usize) -> Result<Self> {
        Self::new(n_excitations, self.theta, self.gamma)?.with_g(self.g)
    }

    pub fn n_excitations(&self) -> usize {
        self.n_excitations
    }

    /// Sensing angle in radians, canonical in `(-pi, pi]`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_over_pi(&self) -> f64 {
        self.theta / PI
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// True when `cos(theta)` vanishes and every `v_n` is zero.
    pub fn is_degenerate(&self) -> bool {
        self.theta.cos().abs() < DEGENERATE_COS
    }
}

/// Cell-resolved hopping amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoppingTriple {
    pub cell: usize,
    /// Intracell hopping.
    pub v: f64,
    /// Nearest-neighbour intercell hopping.
    pub w: f64,
    /// Second-neighbour intercell hopping from the three-body term.
    pub t: f64,
}

fn triple_unchecked(params: &ModelParams, cell: usize) -> HoppingTriple {
    let n = params.n_excitations as f64;
    let c = cell as f64;
    let (s, co) = params.theta.sin_cos();
    HoppingTriple {
        cell,
        v: params.g * co * c.sqrt(),
        w: params.g * s * (n - c + 1.0).sqrt(),
        t: params.gamma / n * ((c - 1.0) * (n - c + 1.0) * (n - c + 2.0)).sqrt(),
    }
}

/// Hopping amplitudes `(v_n, w_n, t_n)` of cell `cell` (1-based).
pub fn hoppings(params: &ModelParams, cell: usize) -> Result<HoppingTriple> {
    if cell == 0 || cell > params.n_excitations {
        return Err(Error::domain(format!(
            "cell {cell} outside 1..={}",
            params.n_excitations
        )));
    }
    Ok(triple_unchecked(params, cell))
}

/// The `N x (N+1)` block coupling the up sublattice (rows) to the down
/// sublattice (columns). Row `m` holds `v_m` at column `m`, `w_m` at `m - 1`
/// and `t_m` at `m - 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    v: Vec<f64>,
    w: Vec<f64>,
    t: Vec<f64>,
}

impl CouplingMatrix {
    pub fn from_bands(v: Vec<f64>, w: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.len() != w.len() || v.len() != t.len() {
            return Err(Error::domain("band vectors must be non-empty and of equal length"));
        }
        Ok(Self { v, w, t })
    }

    /// Number of up-sublattice rows, equal to the excitation number.
    pub fn rows(&self) -> usize {
        self.v.len()
    }

    pub fn cols(&self) -> usize {
        self.v.len() + 1
    }

    /// Band of `v_m`, indexed by `m - 1`.
    pub fn v_band(&self) -> &[f64] {
        &self.v
    }

    pub fn w_band(&self) -> &[f64] {
        &self.w
    }

    pub fn t_band(&self) -> &[f64] {
        &self.t
    }

    /// Row `m` (1-based) as a hopping triple.
    pub fn row(&self, m: usize) -> HoppingTriple {
        HoppingTriple {
            cell: m,
            v: self.v[m - 1],
            w: self.w[m - 1],
            t: self.t[m - 1],
        }
    }

    /// Entry at up-site `m` (1-based) and down-site `n` (0-based).
    pub fn get(&self, m: usize, n: usize) -> f64 {
        assert!((1..=self.rows()).contains(&m) && n < self.cols());
        let i = m - 1;
        if n == m {
            self.v[i]
        } else if n + 1 == m {
            self.w[i]
        } else if n + 2 == m {
            self.t[i]
        } else {
            0.0
        }
    }

    /// `A u` for a vector on the down sublattice.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.cols());
        (1..=self.rows())
            .map(|m| {
                let i = m - 1;
                let mut acc = self.v[i] * u[m] + self.w[i] * u[m - 1];
                if m >= 2 {
                    acc += self.t[i] * u[m - 2];
                }
                acc
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let (r, c) = (self.rows(), self.cols());
        DMatrix::from_fn(r, c, |i, j| self.get(i + 1, j))
    }

    /// Full `(2N+1)`-dimensional Hamiltonian in the crate's basis ordering.
    pub fn hamiltonian_dense(&self) -> DMatrix<f64> {
        let n = self.rows();
        let dim = 2 * n + 1;
        let mut h = DMatrix::zeros(dim, dim);
        for m in 1..=n {
            let up = n + m;
            for site in m.saturating_sub(2)..=m {
                let a = self.get(m, site);
                h[(up, site)] = a;
                h[(site, up)] = a;
            }
        }
        h
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.v
            .iter()
            .chain(&self.w)
            .chain(&self.t)
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Chiral operator: `+1` on down sites, `-1` on up sites.
pub fn chiral_operator(n_excitations: usize) -> DMatrix<f64> {
    let dim = 2 * n_excitations + 1;
    DMatrix::from_fn(dim, dim, |i, j| match (i == j, i <= n_excitations) {
        (true, true) => 1.0,
        (true, false) => -1.0,
        _ => 0.0,
    })
}

pub fn coupling_matrix(params: &ModelParams) -> CouplingMatrix {
    let n = params.n_excitations;
    let mut v = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    for cell in 1..=n {
        let h = triple_unchecked(params, cell);
        v.push(h.v);
        w.push(h.w);
        t.push(h.t);
    }
    CouplingMatrix { v, w, t }
}

/// Derivative of the coupling block with respect to theta. The `t` band does
/// not depend on theta and is identically zero.
pub fn coupling_matrix_dtheta(params: &ModelParams) -> CouplingMatrix {
    let n = params.n_excitations;
    let nf = n as f64;
    let (s, c) = params.theta.sin_cos();
    let v = (1..=n).map(|m| -params.g * s * (m as f64).sqrt()).collect();
    let w = (1..=n)
        .map(|m| params.g * c * (nf - m as f64 + 1.0).sqrt())
        .collect();
    CouplingMatrix {
        v,
        w,
        t: vec![0.0; n],
    }
}

/// The trajectory `(w_n / v_n, t_n / v_n)` through the winding-number phase
/// diagram, one point per cell.
pub fn cell_curve(params: &ModelParams) -> Result<CellCurve> {
    if params.is_degenerate() {
        return Err(Error::DegenerateRatios);
    }
    let points = (1..=params.n_excitations)
        .map(|cell| {
            let h = triple_unchecked(params, cell);
            PhasePoint::classify(h.w / h.v, h.t / h.v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(topology::CellCurve::from_points(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_excitation_triple() {
        let p = ModelParams::new(1, PI / 4.0, 0.0).unwrap();
        let h = hoppings(&p, 1).unwrap();
        assert_relative_eq!(h.v, 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(h.w, 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(h.t, 0.0);
    }

    #[test]
    fn first_cell_has_no_second_neighbour_hop() {
        for &(n, th, ga) in &[(1, 0.3, 2.0), (7, -1.1, 0.6), (100, 2.5, -3.0)] {
            let p = ModelParams::new(n, th, ga).unwrap();
            assert_eq!(hoppings(&p, 1).unwrap().t, 0.0);
        }
    }

    #[test]
    fn last_cell_intercell_is_g_sin_theta() {
        let p = ModelParams::new(13, 0.7, 0.4).unwrap().with_g(2.5).unwrap();
        let h = hoppings(&p, 13).unwrap();
        assert_relative_eq!(h.w, 2.5 * 0.7f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn cell_out_of_range() {
        let p = ModelParams::new(5, 0.1, 0.0).unwrap();
        assert!(matches!(hoppings(&p, 0), Err(Error::Domain(_))));
        assert!(matches!(hoppings(&p, 6), Err(Error::Domain(_))));
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::new(0, 0.1, 0.0).is_err());
        assert!(ModelParams::new(3, f64::NAN, 0.0).is_err());
        assert!(ModelParams::new(3, 0.1, f64::INFINITY).is_err());
        assert!(ModelParams::new(3, 0.1, 0.0).unwrap().with_g(0.0).is_err());
        assert!(ModelParams::new(3, 0.1, 0.0).unwrap().with_g(-1.0).is_err());
    }

    #[test]
    fn theta_is_canonicalised() {
        let p = ModelParams::new(2, 3.0 * PI, 0.0).unwrap();
        assert_relative_eq!(p.theta(), PI, epsilon = 1e-12);
        let p = ModelParams::new(2, -PI, 0.0).unwrap();
        assert_relative_eq!(p.theta(), PI, epsilon = 1e-12);
        let p = ModelParams::from_theta_over_pi(2, 1.5, 0.0).unwrap();
        assert_relative_eq!(p.theta_over_pi(), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn one_by_two_block() {
        let p = ModelParams::new(1, 0.0, 0.0).unwrap().with_g(1.7).unwrap();
        let a = coupling_matrix(&p).to_dense();
        assert_eq!(a.shape(), (1, 2));
        assert_eq!(a[(0, 0)], 0.0);
        assert_relative_eq!(a[(0, 1)], 1.7);
    }

    #[test]
    fn linear_block_is_bidiagonal() {
        let p = ModelParams::new(2, 0.4, 0.0).unwrap();
        let a = coupling_matrix(&p);
        assert!(a.t_band().iter().all(|&t| t == 0.0));
        let d = a.to_dense();
        assert_eq!(d.shape(), (2, 3));
        assert_eq!(d[(1, 0)], 0.0);
    }

    #[test]
    fn dtheta_special_angles() {
        let p = ModelParams::new(6, 0.0, 0.8).unwrap();
        let d = coupling_matrix_dtheta(&p);
        assert!(d.v_band().iter().all(|&x| x == 0.0));
        for (i, &w) in d.w_band().iter().enumerate() {
            assert_relative_eq!(w, (6.0 - i as f64).sqrt(), epsilon = 1e-15);
        }
        let p = ModelParams::new(6, PI / 2.0, 0.8).unwrap();
        let d = coupling_matrix_dtheta(&p);
        assert!(d.w_band().iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn dtheta_matches_central_difference() {
        let h = 1e-6;
        for &(n, th, ga) in &[(9, 0.3, 0.5), (40, -1.2, 1.1), (25, 2.9, -0.7)] {
            let p = ModelParams::new(n, th, ga).unwrap();
            let plus = coupling_matrix(&p.with_theta(th + h).unwrap()).to_dense();
            let minus = coupling_matrix(&p.with_theta(th - h).unwrap()).to_dense();
            let fd = (plus - minus) / (2.0 * h);
            let exact = coupling_matrix_dtheta(&p).to_dense();
            assert!((fd - exact).amax() < 1e-8);
        }
    }

    #[test]
    fn chiral_anticommutation_is_exact() {
        let p = ModelParams::from_theta_over_pi(12, 0.2, 0.92).unwrap();
        let h = coupling_matrix(&p).hamiltonian_dense();
        let gamma = chiral_operator(12);
        let ac = &h * &gamma + &gamma * &h;
        assert_eq!(ac.amax(), 0.0);
    }

    #[test]
    fn apply_matches_dense_product() {
        let p = ModelParams::new(8, 0.9, 1.3).unwrap();
        let a = coupling_matrix(&p);
        let u: Vec<f64> = (0..9).map(|k| (k as f64 * 0.37).sin()).collect();
        let dense = a.to_dense() * nalgebra::DVector::from_column_slice(&u);
        for (x, y) in a.apply(&u).iter().zip(dense.iter()) {
            assert_relative_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn cell_curve_degenerate_angle() {
        let p = ModelParams::from_theta_over_pi(10, 0.5, 0.3).unwrap();
        assert_eq!(cell_curve(&p).unwrap_err(), Error::DegenerateRatios);
        let p = ModelParams::from_theta_over_pi(10, -0.5, 0.3).unwrap();
        assert_eq!(cell_curve(&p).unwrap_err(), Error::DegenerateRatios);
    }

    #[test]
    fn cell_curve_linear_limit_lies_on_axis() {
        let p = ModelParams::from_theta_over_pi(50, 0.2, 0.0).unwrap();
        let c = cell_curve(&p).unwrap();
        assert!(c.points.iter().all(|pt| pt.y == 0.0));
    }

    #[test]
    fn cell_curve_first_point_on_axis() {
        for &ga in &[0.0, 0.6, 0.92, 1.2] {
            let p = ModelParams::from_theta_over_pi(100, 0.2, ga).unwrap();
            let c = cell_curve(&p).unwrap();
            assert_eq!(c.points.len(), 100);
            assert_eq!(c.points[0].y, 0.0);
        }
    }
}
