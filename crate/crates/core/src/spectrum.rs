//! Excitation gap and spectra.
//!
//! Chiral symmetry makes the nonzero energies `±sigma_i`, the singular values
//! of the coupling block, plus one exact zero. The gap is therefore
//! `sigma_min(A)` and never needs the full Hamiltonian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::extended::smallest_singular_value;
use crate::linalg::{bidiagonalize, BandMatrix, Bidiagonal};
use crate::model::{coupling_matrix, CouplingMatrix, ModelParams};

/// Gaps below this fraction of `sigma_max` are flagged as unreliable.
pub const NUMERIC_FLOOR_REL: f64 = 1e-12;

/// Gaps below this fraction of `sigma_max` are recomputed in extended
/// precision; the double-precision bidiagonal only has absolute accuracy.
pub const REFINE_BELOW_REL: f64 = 1e-6;

/// Largest sector handled by the banded singular-value path.
pub const MAX_BANDED_N: usize = 20_000;

/// Largest sector for the dense eigensolver oracle.
pub const MAX_ORACLE_N: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Zero when the gap underflows; `ln_gap` stays exact.
    pub gap: f64,
    pub ln_gap: f64,
    /// Descending singular values of the coupling block, length `N`.
    pub singular_values: Vec<f64>,
    pub n_excitations: usize,
    pub params: ModelParams,
    /// True when `gap < NUMERIC_FLOOR_REL * sigma_max`.
    pub below_floor: bool,
}

/// The gap together with the scale it is judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub gap: f64,
    pub ln_gap: f64,
    pub sigma_max: f64,
    pub below_floor: bool,
}

pub fn bidiagonal_of(a: &CouplingMatrix) -> Result<Bidiagonal> {
    let m = a.rows();
    let mut band = BandMatrix::zeros(m, m + 1, 1, 3);
    for row in 1..=m {
        let h = a.row(row);
        let i = row - 1;
        band.set(i, i + 1, h.v);
        band.set(i, i, h.w);
        if i >= 1 {
            band.set(i, i - 1, h.t);
        }
    }
    bidiagonalize(band)
}

fn check_size(params: &ModelParams) -> Result<()> {
    let n = params.n_excitations();
    if n > MAX_BANDED_N {
        return Err(Error::Size {
            what: "banded singular values",
            n,
            max: MAX_BANDED_N,
        });
    }
    Ok(())
}

/// Descending singular values of an arbitrary coupling block.
pub fn singular_values_of(a: &CouplingMatrix) -> Result<Vec<f64>> {
    bidiagonal_of(a)?.singular_values()
}

/// The gap and its logarithm.
fn refined(a: &CouplingMatrix, gap: f64, sigma_max: f64) -> Result<(f64, f64)> {
    if gap >= REFINE_BELOW_REL * sigma_max {
        return Ok((gap, gap.ln()));
    }
    let s = smallest_singular_value(a.v_band(), a.w_band(), a.t_band())?;
    Ok((s.value, s.ln))
}

pub fn gap_report(params: &ModelParams) -> Result<GapReport> {
    check_size(params)?;
    let a = coupling_matrix(params);
    let bd = bidiagonal_of(&a)?;
    let sigma_max = bd.largest()?;
    let (gap, ln_gap) = refined(&a, bd.smallest()?, sigma_max)?;
    Ok(GapReport {
        gap,
        ln_gap,
        sigma_max,
        below_floor: gap < NUMERIC_FLOOR_REL * sigma_max,
    })
}

/// `Delta E = min_{mu != 0} |E_mu|`.
pub fn gap(params: &ModelParams) -> Result<f64> {
    gap_report(params).map(|r| r.gap)
}

pub fn spectrum(params: &ModelParams) -> Result<SpectrumResult> {
    check_size(params)?;
    let a = coupling_matrix(params);
    let mut singular_values = singular_values_of(&a)?;
    let last = singular_values.len() - 1;
    let (gap, ln_gap) = refined(&a, singular_values[last], singular_values[0])?;
    singular_values[last] = gap;
    Ok(SpectrumResult {
        gap,
        ln_gap,
        below_floor: gap < NUMERIC_FLOOR_REL * singular_values[0],
        singular_values,
        n_excitations: params.n_excitations(),
        params: *params,
    })
}

/// Dense diagonalization of the full `(2N+1)`-dimensional Hamiltonian.
#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    /// Index of the chiral zero eigenvalue (the middle one).
    pub zero_index: usize,
    pub spectrum: SpectrumResult,
}

impl OracleSpectrum {
    pub fn zero_energy(&self) -> f64 {
        self.eigenvalues[self.zero_index]
    }

    pub fn eigenvector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }
}

pub fn full_spectrum_oracle(params: &ModelParams) -> Result<OracleSpectrum> {
    let n = params.n_excitations();
    if n > MAX_ORACLE_N {
        return Err(Error::Size {
            what: "dense spectrum oracle",
            n,
            max: MAX_ORACLE_N,
        });
    }
    let h = coupling_matrix(params).hamiltonian_dense();
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::numeric("dense eigensolver did not converge"))?;

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    // The spectrum is symmetric about zero with odd dimension, so the
    // zero mode sits in the middle of the sorted list.
    let zero_index = n;

    let mut singular_values: Vec<f64> = eigenvalues[zero_index + 1..].to_vec();
    singular_values.reverse();
    let gap = *singular_values.last().expect("N >= 1");
    let spectrum = SpectrumResult {
        gap,
        ln_gap: gap.ln(),
        below_floor: gap < NUMERIC_FLOOR_REL * singular_values[0],
        singular_values,
        n_excitations: n,
        params: *params,
    };
    Ok(OracleSpectrum {
        eigenvalues,
        eigenvectors,
        zero_index,
        spectrum,
    })
}
