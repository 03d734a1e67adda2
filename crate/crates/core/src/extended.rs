//! Smallest singular value of the coupling block in extended precision.
//!
//! The double-precision bidiagonalization only resolves singular values down
//! to about `eps * sigma_max`. Deep in the gapped-edge regime the gap is many
//! orders of magnitude smaller, but it is isolated: every other singular
//! value sits near the bulk. Inverse iteration on a QR factor built with
//! enough working bits recovers it, and the working precision is raised
//! until two consecutive levels agree.

use astro_float::{BigFloat, RoundingMode, Sign};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;
const START_BITS: usize = 256;
const MAX_BITS: usize = 16_384;
const AGREEMENT: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;

fn big(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

/// Natural logarithm of `|x|`, finite far outside the `f64` range.
pub(crate) fn ln_abs(x: &BigFloat) -> f64 {
    let Some((words, _, _, exp, _)) = x.as_raw_parts() else {
        return f64::NEG_INFINITY;
    };
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let top = *words.last().expect("non-zero mantissa");
    (top as f64 / 2f64.powi(64)).ln() + exp as f64 * std::f64::consts::LN_2
}

/// Nearest `f64`, flushing values below the normal range to zero.
pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *words.last().expect("non-zero mantissa");
    let e = exp as i64 - 64;
    let mut f = top as f64;
    // Two steps keep the scale factor itself representable.
    let half = (e / 2).clamp(-1000, 1000) as i32;
    f *= 2f64.powi(half);
    f *= 2f64.powi((e - half as i64).clamp(-1100, 1100) as i32);
    if sign == Sign::Neg {
        -f
    } else {
        f
    }
}

struct Rotation {
    c: BigFloat,
    s: BigFloat,
}

fn rotation(a: &BigFloat, b: &BigFloat, p: usize) -> (Rotation, BigFloat) {
    if b.is_zero() {
        return (Rotation { c: big(1.0, p), s: big(0.0, p) }, a.clone());
    }
    let r = a.mul(a, p, RM).add(&b.mul(b, p, RM), p, RM).sqrt(p, RM);
    let c = a.div(&r, p, RM);
    let s = b.div(&r, p, RM);
    (Rotation { c, s }, r)
}

/// Upper-triangular factor of `A^T` stored by diagonals `r0`, `r1`, `r2`.
struct Triangular {
    r0: Vec<BigFloat>,
    r1: Vec<BigFloat>,
    r2: Vec<BigFloat>,
}

/// `A` is `m x (m+1)` with row `i` holding `t[i]` at column `i-1`, `w[i]` at
/// `i` and `v[i]` at `i+1`. Column `i` of `A^T` is that row, so `A^T` is
/// tridiagonal and its QR factor has two superdiagonals.
fn factor(v: &[f64], w: &[f64], t: &[f64], p: usize) -> Triangular {
    let m = v.len();
    let zero = big(0.0, p);
    // Working row `i` of A^T across columns i, i+1, i+2.
    let mut cur = [
        big(w[0], p),
        if m > 1 { big(t[1], p) } else { zero.clone() },
        zero.clone(),
    ];
    let mut out = Triangular {
        r0: Vec::with_capacity(m),
        r1: Vec::with_capacity(m),
        r2: Vec::with_capacity(m),
    };
    for i in 0..m {
        // Row i+1 of A^T: v[i] at column i, w[i+1] at i+1, t[i+2] at i+2.
        let next = [
            big(v[i], p),
            if i + 1 < m { big(w[i + 1], p) } else { zero.clone() },
            if i + 2 < m { big(t[i + 2], p) } else { zero.clone() },
        ];
        let (rot, d) = rotation(&cur[0], &next[0], p);
        let mix = |a: &BigFloat, b: &BigFloat| {
            let top = rot.c.mul(a, p, RM).add(&rot.s.mul(b, p, RM), p, RM);
            let bot = rot.c.mul(b, p, RM).sub(&rot.s.mul(a, p, RM), p, RM);
            (top, bot)
        };
        let (e1, n1) = mix(&cur[1], &next[1]);
        let (e2, n2) = mix(&cur[2], &next[2]);
        out.r0.push(d);
        out.r1.push(e1);
        out.r2.push(e2);
        cur = [n1, n2, zero.clone()];
    }
    out
}

impl Triangular {
    fn len(&self) -> usize {
        self.r0.len()
    }

    /// Solves `R^T y = x`.
    fn solve_transposed(&self, x: &[BigFloat], p: usize) -> Vec<BigFloat> {
        let m = self.len();
        let mut y: Vec<BigFloat> = Vec::with_capacity(m);
        for i in 0..m {
            let mut s = x[i].clone();
            if i >= 1 {
                s = s.sub(&self.r1[i - 1].mul(&y[i - 1], p, RM), p, RM);
            }
            if i >= 2 {
                s = s.sub(&self.r2[i - 2].mul(&y[i - 2], p, RM), p, RM);
            }
            y.push(s.div(&self.r0[i], p, RM));
        }
        y
    }

    /// Solves `R z = y`.
    fn solve(&self, y: &[BigFloat], p: usize) -> Vec<BigFloat> {
        let m = self.len();
        let mut z = vec![big(0.0, p); m];
        for i in (0..m).rev() {
            let mut s = y[i].clone();
            if i + 1 < m {
                s = s.sub(&self.r1[i].mul(&z[i + 1], p, RM), p, RM);
            }
            if i + 2 < m {
                s = s.sub(&self.r2[i].mul(&z[i + 2], p, RM), p, RM);
            }
            z[i] = s.div(&self.r0[i], p, RM);
        }
        z
    }
}

fn norm(x: &[BigFloat], p: usize) -> BigFloat {
    x.iter()
        .fold(big(0.0, p), |acc, a| acc.add(&a.mul(a, p, RM), p, RM))
        .sqrt(p, RM)
}

fn smallest_at(v: &[f64], w: &[f64], t: &[f64], p: usize) -> Result<BigFloat> {
    let r = factor(v, w, t, p);
    if r.r0.iter().any(BigFloat::is_zero) {
        return Ok(big(0.0, p));
    }
    let m = r.len();
    let mut x: Vec<BigFloat> = (0..m).map(|i| big(1.0 + (i % 7) as f64 / 8.0, p)).collect();
    let nx = norm(&x, p);
    x = x.iter().map(|a| a.div(&nx, p, RM)).collect();

    let mut last = f64::NAN;
    for _ in 0..MAX_ITERATIONS {
        let y = r.solve_transposed(&x, p);
        let z = r.solve(&y, p);
        let ny = norm(&y, p);
        let nz = norm(&z, p);
        if nz.is_zero() || ny.is_zero() {
            return Err(Error::numeric("inverse iteration collapsed"));
        }
        let sigma = ny.div(&nz, p, RM);
        let s = to_f64(&sigma);
        x = z.iter().map(|a| a.div(&nz, p, RM)).collect();
        if (s - last).abs() <= 1e-15 * s {
            return Ok(sigma);
        }
        last = s;
    }
    Err(Error::numeric("inverse iteration for the smallest singular value did not converge"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TinySingular {
    /// The value as an `f64`; zero or subnormal when it underflows.
    pub value: f64,
    /// Its natural logarithm, which stays finite when `value` underflows.
    pub ln: f64,
}

/// Smallest singular value of the `m x (m+1)` band matrix with rows
/// `(t[i], w[i], v[i])` at columns `(i-1, i, i+1)`. `t[0]` is ignored.
pub fn smallest_singular_value(v: &[f64], w: &[f64], t: &[f64]) -> Result<TinySingular> {
    let m = v.len();
    if m == 0 || w.len() != m || t.len() != m {
        return Err(Error::domain("band lengths must be equal and non-zero"));
    }
    let mut p = START_BITS;
    let mut prev = ln_abs(&smallest_at(v, w, t, p)?);
    while p < MAX_BITS {
        p *= 2;
        let sigma = smallest_at(v, w, t, p)?;
        let cur = ln_abs(&sigma);
        if cur.is_finite() && (cur - prev).abs() <= AGREEMENT {
            return Ok(TinySingular {
                value: to_f64(&sigma),
                ln: cur,
            });
        }
        prev = cur;
    }
    Err(Error::numeric(format!(
        "smallest singular value unresolved at {MAX_BITS} bits"
    )))
}
