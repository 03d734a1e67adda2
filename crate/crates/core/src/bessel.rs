//! Bessel functions of the first kind and integer order.
//!
//! Miller's backward recurrence normalized by `J_0 + 2 sum J_2k = 1`. Every
//! term of that sum is bounded, so there is no cancellation and the result
//! is good to a few ulps of the largest order involved.

const RESCALE_ABOVE: f64 = 1e250;

/// `J_n(x)` for any integer `n` and finite `x`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let order = n.unsigned_abs() as usize;
    // J_{-n} = (-1)^n J_n and J_n(-x) = (-1)^n J_n(x).
    let flip = order % 2 == 1 && ((n < 0) != (x < 0.0));
    let j = bessel_j_nonneg(order, x.abs());
    if flip {
        -j
    } else {
        j
    }
}

fn bessel_j_nonneg(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let scale = (n as f64).max(x);
    let mut start = (scale + 20.0 + 10.0 * scale.sqrt()).ceil() as usize;
    start += start % 2;

    let mut above = 0.0;
    let mut here = 1e-300;
    let mut sum = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        // here = J_k, above = J_{k+1} (unnormalized)
        let below = 2.0 * k as f64 / x * here - above;
        above = here;
        here = below;
        let km1 = k - 1;
        if km1 == n {
            wanted = here;
        }
        if km1 % 2 == 0 && km1 > 0 {
            sum += 2.0 * here;
        }
        if here.abs() > RESCALE_ABOVE {
            here /= RESCALE_ABOVE;
            above /= RESCALE_ABOVE;
            sum /= RESCALE_ABOVE;
            wanted /= RESCALE_ABOVE;
        }
    }
    if n >= start {
        return 0.0;
    }
    wanted / (sum + here)
}
