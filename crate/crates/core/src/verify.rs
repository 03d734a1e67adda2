//! Seeded invariant suite behind `fslsense verify`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{gamma_junction, gamma_tangent, theta_critical};
use crate::metrology::{cfi_photon_number, qfi};
use crate::model::{chiral_operator, coupling_matrix, ModelParams};
use crate::spectrum::{full_spectrum_oracle, gap, gap_report};
use crate::topology::{boundary_distance, winding_integral, winding_roots};
use crate::zero_mode::solve_zero_mode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random draws per sampled check.
    pub samples: usize,
    /// Multiplies every check's tolerance.
    pub tol_scale: f64,
    pub k_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            samples: 20,
            tol_scale: 1.0,
            k_samples: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    /// Worst error seen, in the units the tolerance is stated in.
    pub max_error: f64,
    pub tol: f64,
    pub cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

struct Tally {
    name: &'static str,
    tol: f64,
    max_error: f64,
    cases: usize,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            max_error: 0.0,
            cases: 0,
        }
    }

    fn record(&mut self, err: f64) {
        self.cases += 1;
        let err = if err.is_nan() { f64::INFINITY } else { err };
        self.max_error = self.max_error.max(err);
    }

    fn finish(self) -> Check {
        Check {
            name: self.name,
            pass: self.max_error <= self.tol,
            max_error: self.max_error,
            tol: self.tol,
            cases: self.cases,
        }
    }
}

fn random_params(rng: &mut ChaCha8Rng, n_max: usize, theta_max: f64, gamma: (f64, f64)) -> Result<ModelParams> {
    let n = rng.gen_range(1..=n_max);
    let th = rng.gen_range(-theta_max..=theta_max);
    let ga = rng.gen_range(gamma.0..=gamma.1);
    ModelParams::new(n, th, ga)
}

pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let s = config.tol_scale;
    let mut checks = Vec::new();

    let mut chiral = Tally::new("chiral_symmetry", 1e-14 * s);
    let mut pairing = Tally::new("spectrum_pairing", 1e-9 * s);
    for _ in 0..config.samples {
        let p = random_params(&mut rng, 40, PI, (-2.0, 2.0))?;
        let a = coupling_matrix(&p);
        let h = a.hamiltonian_dense();
        let gam = chiral_operator(p.n_excitations());
        let anti = &gam * &h + &h * &gam;
        chiral.record(anti.amax() / a.max_abs());

        let o = full_spectrum_oracle(&p)?;
        let e = &o.eigenvalues;
        let scale = e[e.len() - 1].abs();
        let worst = (0..e.len())
            .map(|k| (e[k] + e[e.len() - 1 - k]).abs())
            .fold(0.0, f64::max);
        pairing.record((worst / scale).max(o.zero_energy().abs() / scale));
    }
    checks.push(chiral.finish());
    checks.push(pairing.finish());

    let mut null = Tally::new("null_vector_residual", 1e-12 * s);
    for _ in 0..config.samples {
        let p = random_params(&mut rng, 2000, 0.49 * PI, (-3.0, 3.0))?;
        let mode = solve_zero_mode(&p)?;
        null.record(mode.residual() / coupling_matrix(&p).max_abs());
    }
    checks.push(null.finish());

    let mut lin_f = Tally::new("linear_qfi_4n", 1e-8 * s);
    let mut lin_gap = Tally::new("linear_gap_one", 1e-10 * s);
    for n in [1, 10, 100, 1000] {
        for k in 0..8 {
            let p = ModelParams::new(n, -PI + 2.0 * PI * (k as f64 + 0.3) / 8.0, 0.0)?;
            lin_f.record(rel(qfi(&p)?.qfi, 4.0 * n as f64));
            lin_gap.record((gap(&p)? - 1.0).abs());
        }
    }
    checks.push(lin_f.finish());
    checks.push(lin_gap.finish());

    let mut cfi = Tally::new("cfi_equals_qfi", 1e-5 * s);
    for _ in 0..config.samples {
        let p = ModelParams::new(100, rng.gen_range(-0.44 * PI..=0.44 * PI), rng.gen_range(0.0..=1.2))?;
        let r = cfi_photon_number(&p, 1e-5)?;
        cfi.record(rel(r.cfi.unwrap_or(f64::NAN), r.qfi));
    }
    checks.push(cfi.finish());

    let mut wind = Tally::new("winding_cross_method", 0.0);
    let mut tried = 0;
    while wind.cases < config.samples * 10 && tried < config.samples * 100 {
        tried += 1;
        let (v, w, t) = (
            rng.gen_range(0.1..=2.0),
            rng.gen_range(-5.0..=5.0),
            rng.gen_range(-4.0..=4.0),
        );
        if boundary_distance(w / v, t / v) < 1e-3 {
            continue;
        }
        let a = winding_roots(v, w, t)?;
        let b = winding_integral(v, w, t, config.k_samples)?;
        wind.record(if a == b { 0.0 } else { 1.0 });
    }
    checks.push(wind.finish());

    let mut shift = Tally::new("unitary_equivalence", 1e-8 * s);
    let mut mirror = Tally::new("mirror_symmetry", 1e-8 * s);
    for _ in 0..config.samples {
        let p = random_params(&mut rng, 300, 0.45 * PI, (0.0, 1.5))?;
        let f0 = qfi(&p)?.qfi;
        let g0 = gap_report(&p)?.ln_gap;
        let shifted = ModelParams::new(p.n_excitations(), p.theta() + PI, -p.gamma())?;
        let mirrored = ModelParams::new(p.n_excitations(), -p.theta(), p.gamma())?;
        for (q, tally) in [(shifted, &mut shift), (mirrored, &mut mirror)] {
            tally.record(rel(qfi(&q)?.qfi, f0));
            // A difference of logarithms is the relative error of the gap.
            tally.record((gap_report(&q)?.ln_gap - g0).abs());
        }
    }
    checks.push(shift.finish());
    checks.push(mirror.finish());

    let mut geo = Tally::new("geometry_closed_forms", 1e-10 * s);
    let c = theta_critical();
    geo.record((c.x_t - 4.0).abs());
    geo.record((c.tan2_theta - 32.0).abs() / 32.0);
    geo.record((c.theta.tan().powi(2) - 32.0).abs() / 32.0);
    let gj = gamma_junction(c.theta)?;
    let gt = gamma_tangent(c.theta)?.gamma_t.unwrap_or(f64::NAN);
    geo.record(rel(gj, 9.0 / 33f64.sqrt()));
    geo.record(rel(gt, 9.0 / 33f64.sqrt()));
    for _ in 0..config.samples {
        let th = rng.gen_range(28f64.sqrt().atan()..0.495 * PI);
        let b = gamma_tangent(th)?;
        let t2 = th.tan().powi(2);
        for x in &b.x_t_roots {
            geo.record((x.powi(3) - t2 * x + 2.0 * t2).abs() / (t2 * x));
        }
    }
    checks.push(geo.finish());

    Ok(VerifyReport {
        seed: config.seed,
        checks,
    })
}
