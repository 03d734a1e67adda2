use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fslsense::geometry::{gamma_junction, gamma_tangent, theta_critical};
use fslsense::hardware_map::{effective_couplings, CircuitParams};
use fslsense::model::{cell_curve, coupling_matrix, hoppings};
use fslsense::scaling::{default_grid, gamma_sweep, scan_c1_c2};
use fslsense::spectrum::singular_values_of;
use fslsense::topology::{continuum_curve, continuum_point, BoundaryId, Winding};
use fslsense::ModelParams;

#[test]
fn banded_singular_values_match_dense_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..25 {
        let n = rng.gen_range(1..80);
        let p = ModelParams::new(n, rng.gen_range(-3.0..3.0), rng.gen_range(-2.0..2.0)).unwrap();
        let a = coupling_matrix(&p);
        let dense = DMatrix::from_fn(n, n + 1, |i, j| a.get(i + 1, j));
        let mut want: Vec<f64> = dense.singular_values().iter().copied().collect();
        want.sort_by(|x, y| y.total_cmp(x));
        let got = singular_values_of(&a).unwrap();
        assert_eq!(got.len(), n);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12 * want[0], "n={n}: {g} vs {w}");
        }
    }
}

fn max_deviation(theta: f64, gamma: f64, n: usize) -> f64 {
    let curve = cell_curve(&ModelParams::new(n, theta, gamma).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for s in [0.25, 0.5, 0.75] {
        let cell = (s * n as f64).ceil() as usize;
        let pt = curve.points[cell - 1];
        let (x, y) = continuum_point(theta, gamma, s).unwrap();
        worst = worst.max((pt.x - x).hypot(pt.y - y));
    }
    worst
}

#[test]
fn cells_converge_to_continuum_at_rate_one_over_n() {
    for (th, ga) in [(0.2, 0.92), (0.3, 0.5), (0.47, 2.1)] {
        let d400 = max_deviation(th * PI, ga, 400);
        let d800 = max_deviation(th * PI, ga, 800);
        let ratio = d400 / d800;
        assert!((ratio - 2.0).abs() <= 0.4, "theta={th} gamma={ga}: ratio {ratio}");
    }
}

#[test]
fn linear_curves_cross_once() {
    for th in [0.02, 0.05, 0.2, 0.3, 0.45, 0.49] {
        // The crossing sits at 1 - s = cos^2(theta), so sampling must resolve it.
        let c = continuum_curve(th * PI, 0.0, 4000).unwrap();
        assert_eq!(c.crossings.len(), 1, "continuum theta={th}");
        let x = c.crossings[0];
        assert_eq!((x.from, x.to, x.boundary), (-1, 0, BoundaryId::ZeroMinusOne));
    }
    for th in [0.05, 0.2, 0.3, 0.45] {
        for n in [10, 100, 1000] {
            let c = cell_curve(&ModelParams::from_theta_over_pi(n, th, 0.0).unwrap()).unwrap();
            // x_n = tan(theta) sqrt((N - n + 1) / n) falls monotonically from
            // tan(theta) sqrt(N) to tan(theta) / sqrt(N).
            let tan = (th * PI).tan();
            let spans = tan * (n as f64).sqrt() > 1.0 && tan / (n as f64).sqrt() < 1.0;
            assert_eq!(c.crossings.len(), usize::from(spans), "theta={th} n={n}");
            if let Some(x) = c.crossings.first() {
                assert_eq!((x.from, x.to, x.boundary), (-1, 0, BoundaryId::ZeroMinusOne));
            }
        }
    }
}

#[test]
fn exponents_stable_under_grid_halving() {
    let full = default_grid();
    let half: Vec<usize> = full.iter().step_by(2).copied().collect();
    assert!(half.len() >= 4);
    for ga in [0.3, 0.7, 0.92] {
        let a = scan_c1_c2(0.2 * PI, ga, &full).unwrap();
        let b = scan_c1_c2(0.2 * PI, ga, &half).unwrap();
        assert!(a.is_power_law() && b.is_power_law());
        assert!((a.c1 - b.c1).abs() <= 0.1, "gamma={ga}: {} vs {}", a.c1, b.c1);
        assert!((a.c2 - b.c2).abs() <= 0.1, "gamma={ga}: {} vs {}", a.c2, b.c2);
    }
}

#[test]
fn scan_is_symmetric_under_unitary_map() {
    let grid = default_grid();
    for (th, ga) in [(0.2, 0.92), (0.47, 2.1)] {
        let a = scan_c1_c2(th * PI, ga, &grid).unwrap();
        let b = scan_c1_c2(th * PI + PI, -ga, &grid).unwrap();
        assert!((a.c1 - b.c1).abs() <= 1e-9 && (a.c2 - b.c2).abs() <= 1e-9);
        assert_eq!(a.gap_regime(), b.gap_regime());
    }
}

/// Smallest gamma on a fine grid where the continuum curve enters W = -2.
fn first_w2_gamma(theta: f64) -> Option<f64> {
    (1..=600).map(|k| k as f64 * 0.005).find(|&g| {
        continuum_curve(theta, g, 4000)
            .unwrap()
            .points
            .iter()
            .any(|p| p.winding == Winding::Value(-2))
    })
}

#[test]
fn onset_tracks_geometry_below_critical_angle() {
    let theta = 0.2 * PI;
    assert!(theta < theta_critical().theta - 0.02 * PI);
    let target = gamma_junction(theta).unwrap().min(first_w2_gamma(theta).unwrap_or(f64::INFINITY));
    let gammas: Vec<f64> = (0..=20).map(|k| 0.6 + 0.04 * k as f64).collect();
    let sweep = gamma_sweep(theta, &gammas, &default_grid()).unwrap();
    let onset = sweep.exponential_onset().expect("gap turns exponential");
    assert!((onset - target).abs() <= 0.15 * target, "onset {onset} vs {target}");
}

#[test]
fn onset_precedes_c1_departure_above_critical_angle() {
    let theta = 0.47 * PI;
    assert!(theta > theta_critical().theta + 0.02 * PI);
    let gt = gamma_tangent(theta).unwrap().gamma_t.unwrap();
    let gammas: Vec<f64> = (0..=16).map(|k| 1.4 + 0.1 * k as f64).collect();
    let sweep = gamma_sweep(theta, &gammas, &default_grid()).unwrap();
    let onset = sweep.exponential_onset().expect("gap turns exponential");
    let departure = sweep.c1_departure(0.15).expect("c1 eventually departs");
    assert!((onset - gt).abs() <= 0.15 * gt, "onset {onset} vs gamma_t {gt}");
    assert!(onset < departure, "onset {onset}, departure {departure}");
}

// Reference Bessel values at x = 7.5 from 30-digit arithmetic.
const J0: f64 = 0.266_339_657_880_378_4;
const J1: f64 = 0.135_248_427_579_705_5;
const J2: f64 = -0.230_273_410_525_790_26;

/// `(alpha0, beta0, gamma_bar)` written out directly for `x = 7.5`.
fn forward(eta_a: f64, eta_b: f64, omega_x: f64) -> [f64; 3] {
    let e = (-(eta_a * eta_a + eta_b * eta_b) / 2.0).exp();
    [
        (omega_x / 2.0) * e * J1 * eta_a,
        -(omega_x / 2.0) * e * J2 * eta_b,
        (omega_x / 4.0) * e * J0 * eta_a * eta_a * eta_b,
    ]
}

/// Newton iteration on the logarithms of the three unknowns.
fn invert(target: [f64; 3]) -> (f64, f64, f64) {
    let mut z = [(0.1f64).ln(), (0.1f64).ln(), (1.0f64).ln()];
    for _ in 0..100 {
        let f = |z: &[f64; 3]| {
            let y = forward(z[0].exp(), z[1].exp(), z[2].exp());
            [
                y[0].ln() - target[0].ln(),
                y[1].ln() - target[1].ln(),
                y[2].ln() - target[2].ln(),
            ]
        };
        let r = f(&z);
        if r.iter().all(|x| x.abs() < 1e-15) {
            break;
        }
        let mut jac = DMatrix::zeros(3, 3);
        for j in 0..3 {
            let mut zp = z;
            zp[j] += 1e-7;
            let rp = f(&zp);
            for i in 0..3 {
                jac[(i, j)] = (rp[i] - r[i]) / 1e-7;
            }
        }
        let step = jac
            .lu()
            .solve(&nalgebra::DVector::from_row_slice(&r))
            .expect("nonsingular Jacobian");
        for j in 0..3 {
            z[j] -= step[j];
        }
    }
    (z[0].exp(), z[1].exp(), z[2].exp())
}

#[test]
fn circuit_round_trip_hits_target_model() {
    let (n, th, ga) = (100usize, 0.2 * PI, 0.6);
    let (eta_a, eta_b, omega_x) = invert([th.sin(), th.cos(), ga / n as f64]);
    let circuit = CircuitParams {
        g_a: eta_a * 5.0 / 2.0,
        g_b: eta_b * 4.0 / 2.0,
        omega_a: 5.0,
        omega_b: 4.0,
        omega_z: 6.0,
        omega_x,
        drive_amp: 3.75,
        drive_freq: 1.0,
        phase: 0.0,
    };
    let e = effective_couplings(&circuit, n).unwrap();
    let p = e.model_params().unwrap();
    assert!((p.g() - 1.0).abs() < 1e-8, "{}", p.g());
    assert!((p.theta_over_pi() - 0.2).abs() < 1e-8);
    assert!((p.gamma() - 0.6).abs() < 1e-8);

    let direct = ModelParams::new(n, th, ga).unwrap();
    for cell in [1, 2, 50, 100] {
        let a = hoppings(&p, cell).unwrap();
        let b = hoppings(&direct, cell).unwrap();
        assert!((a.v - b.v).abs() < 1e-7 && (a.w - b.w).abs() < 1e-7 && (a.t - b.t).abs() < 1e-7);
    }

    let doubled = effective_couplings(&circuit, 2 * n).unwrap();
    assert!((doubled.gamma_model - 2.0 * e.gamma_model).abs() < 1e-14);
    assert!(e.theta > -PI && e.theta <= PI);
}

#[test]
fn circuit_sign_is_absorbed_into_theta() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let c = CircuitParams {
            g_a: rng.gen_range(-0.5..0.5),
            g_b: rng.gen_range(-0.5..0.5),
            omega_a: 5.0,
            omega_b: 4.0,
            omega_z: 6.0,
            omega_x: rng.gen_range(-2.0..2.0),
            drive_amp: rng.gen_range(0.1..6.0),
            drive_freq: 1.0,
            phase: 0.0,
        };
        let e = effective_couplings(&c, 30).unwrap();
        let p = e.model_params().unwrap();
        let h = hoppings(&p, 30).unwrap();
        // Last cell: w_N = g sin(theta), v_N = g cos(theta) sqrt(N).
        assert!((h.w - e.alpha0).abs() < 1e-12);
        assert!((h.v / 30f64.sqrt() - e.beta0).abs() < 1e-12);
    }
}
