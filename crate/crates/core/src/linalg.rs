//! Singular values of narrow banded matrices.
//!
//! The coupling block has one sub-diagonal and one super-diagonal relative to
//! its `N x (N+1)` shape, so it is reduced to upper bidiagonal form with
//! Givens rotations in `O(N)` work per sweep and `O(N)` memory. Singular
//! values of the bidiagonal are then located by bisection on the associated
//! Golub-Kahan tridiagonal, which resolves even exponentially small values to
//! high relative accuracy.

use crate::error::{Error, Result};

/// Row-major band storage: row `i` keeps columns `i - lo ..= i + hi`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    rows: usize,
    cols: usize,
    lo: usize,
    hi: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(rows: usize, cols: usize, lo: usize, hi: usize) -> Self {
        Self {
            rows,
            cols,
            lo,
            hi,
            data: vec![0.0; rows * (lo + hi + 1)],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.rows || j >= self.cols || j + self.lo < i || j > i + self.hi {
            None
        } else {
            Some(i * (self.lo + self.hi + 1) + j + self.lo - i)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Stores `x` at `(i, j)`. Panics if a nonzero value falls outside the band.
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        match self.slot(i, j) {
            Some(k) => self.data[k] = x,
            None => assert!(x == 0.0, "fill-in at ({i}, {j}) outside the band"),
        }
    }

    /// Applies `[c s; -s c]` to rows `r` and `r + 1`.
    fn rotate_rows(&mut self, r: usize, c: f64, s: f64) {
        let j0 = r.saturating_sub(self.lo);
        let j1 = (r + 1 + self.hi).min(self.cols - 1);
        for j in j0..=j1 {
            let a = self.get(r, j);
            let b = self.get(r + 1, j);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            self.set(r, j, c * a + s * b);
            self.set(r + 1, j, c * b - s * a);
        }
    }

    /// Applies the same rotation to columns `k` and `k + 1`.
    fn rotate_cols(&mut self, k: usize, c: f64, s: f64) {
        let i0 = k.saturating_sub(self.hi);
        let i1 = (k + 1 + self.lo).min(self.rows - 1);
        for i in i0..=i1 {
            let a = self.get(i, k);
            let b = self.get(i, k + 1);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            self.set(i, k, c * a + s * b);
            self.set(i, k + 1, c * b - s * a);
        }
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    let r = a.hypot(b);
    if r == 0.0 {
        (1.0, 0.0)
    } else {
        (a / r, b / r)
    }
}

/// Upper bidiagonal `m x (m + 1)` matrix with diagonal `d` and superdiagonal `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bidiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

/// Reduces an `m x (m + 1)` matrix with lower bandwidth 1 and upper bandwidth
/// 1 to upper bidiagonal form by orthogonal transformations.
///
/// The input must have been allocated with `hi >= 3`: the QR sweep widens the
/// upper band to 2 and the bulge chase briefly needs a third.
pub fn bidiagonalize(mut a: BandMatrix) -> Result<Bidiagonal> {
    let m = a.rows;
    let n = a.cols;
    if n != m + 1 || a.lo < 1 || a.hi < 3 {
        return Err(Error::domain("bidiagonalize expects an m x (m+1) band with lo >= 1, hi >= 3"));
    }

    for j in 0..m.saturating_sub(1) {
        let b = a.get(j + 1, j);
        if b != 0.0 {
            let (c, s) = givens(a.get(j, j), b);
            a.rotate_rows(j, c, s);
            a.set(j + 1, j, 0.0);
        }
    }

    for i in 0..m {
        if i + 2 >= n {
            break;
        }
        let b = a.get(i, i + 2);
        if b == 0.0 {
            continue;
        }
        let (c, s) = givens(a.get(i, i + 1), b);
        a.rotate_cols(i + 1, c, s);
        a.set(i, i + 2, 0.0);

        // The rotation leaves a bulge at (k + 1, k); chase it down the band.
        let mut k = i + 1;
        while k + 1 < m {
            let b = a.get(k + 1, k);
            if b == 0.0 {
                break;
            }
            let (c, s) = givens(a.get(k, k), b);
            a.rotate_rows(k, c, s);
            a.set(k + 1, k, 0.0);
            if k + 3 >= n {
                break;
            }
            let b = a.get(k, k + 3);
            if b == 0.0 {
                break;
            }
            let (c, s) = givens(a.get(k, k + 2), b);
            a.rotate_cols(k + 2, c, s);
            a.set(k, k + 3, 0.0);
            k += 2;
        }
    }

    let d: Vec<f64> = (0..m).map(|i| a.get(i, i)).collect();
    let e: Vec<f64> = (0..m).map(|i| a.get(i, i + 1)).collect();
    if d.iter().chain(&e).any(|x| !x.is_finite()) {
        return Err(Error::numeric("non-finite entry during bidiagonalization"));
    }
    Ok(Bidiagonal { d, e })
}

impl Bidiagonal {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Off-diagonal of the zero-diagonal Golub-Kahan tridiagonal, whose
    /// eigenvalues are `±sigma_i` and one extra zero.
    fn gk_offdiag(&self) -> impl Iterator<Item = f64> + '_ {
        self.d.iter().zip(&self.e).flat_map(|(&d, &e)| [d, e])
    }

    /// Number of singular values strictly below `x > 0`.
    pub fn count_below(&self, x: f64) -> usize {
        let m = self.len();
        let pivmin = f64::MIN_POSITIVE;
        let mut q = -x;
        let mut count = usize::from(q < 0.0);
        for b in self.gk_offdiag() {
            if q == 0.0 {
                q = -pivmin;
            }
            // b * (b / q) instead of b^2 / q keeps tiny entries from underflowing.
            q = -x - b * (b / q);
            if q < 0.0 {
                count += 1;
            }
        }
        count.saturating_sub(m + 1)
    }

    /// Gershgorin bound on the largest singular value.
    pub fn norm_bound(&self) -> f64 {
        let b: Vec<f64> = self.gk_offdiag().map(f64::abs).collect();
        let mut bound: f64 = 0.0;
        for i in 0..=b.len() {
            let left = if i > 0 { b[i - 1] } else { 0.0 };
            let right = b.get(i).copied().unwrap_or(0.0);
            bound = bound.max(left + right);
        }
        bound
    }

    /// The `k`-th smallest singular value (0-based).
    pub fn kth_smallest(&self, k: usize) -> Result<f64> {
        let m = self.len();
        if k >= m {
            return Err(Error::domain(format!("index {k} out of range for {m} singular values")));
        }
        let bound = self.norm_bound();
        if bound == 0.0 {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = bound * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
        for _ in 0..2000 {
            if lo == 0.0 && hi < 16.0 * f64::MIN_POSITIVE {
                return Ok(0.0);
            }
            if lo > 0.0 && hi - lo <= 2.0 * f64::EPSILON * hi {
                return Ok(0.5 * (lo + hi));
            }
            // Geometric steps while the bracket spans more than a factor of
            // two, so tiny values are reached in a few dozen iterations.
            let mid = if lo == 0.0 {
                (f64::MIN_POSITIVE.sqrt() * hi.sqrt()).max(f64::MIN_POSITIVE)
            } else if hi > 2.0 * lo {
                (lo.sqrt() * hi.sqrt()).clamp(lo, hi)
            } else {
                lo + 0.5 * (hi - lo)
            };
            if mid <= lo || mid >= hi {
                return Ok(0.5 * (lo + hi));
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::numeric("singular value bisection did not converge"))
    }

    pub fn smallest(&self) -> Result<f64> {
        self.kth_smallest(0)
    }

    pub fn largest(&self) -> Result<f64> {
        self.kth_smallest(self.len() - 1)
    }

    /// All singular values in descending order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        let mut s = (0..self.len())
            .into_par_iter()
            .map(|k| self.kth_smallest(k))
            .collect::<Result<Vec<_>>>()?;
        s.reverse();
        Ok(s)
    }
}
