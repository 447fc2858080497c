//! Small shared numeric helpers.

/// FNV-1a 64-bit hash, used for run fingerprints in curve metadata.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Wrap `delta` into the centered interval `[-window/2, window/2)`.
pub fn wrap_delta(delta: f64, window: f64) -> f64 {
    let mut d = delta % window;
    if d < -window / 2.0 {
        d += window;
    } else if d >= window / 2.0 {
        d -= window;
    }
    d
}

/// Wrap a coordinate into `[0, window)`.
pub fn wrap_coord(x: f64, window: f64) -> f64 {
    let mut v = x % window;
    if v < 0.0 {
        v += window;
    }
    v
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Exponentially scaled modified Bessel function `e^{-x} I_0(x)` for `x >= 0`.
///
/// Abramowitz & Stegun 9.8.1 / 9.8.2 rational approximations, absolute error
/// below 2e-7 on each branch.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 3.75 {
        let t = x / 3.75;
        let t2 = t * t;
        let i0 = 1.0
            + t2 * (3.5156229
                + t2 * (3.0899424
                    + t2 * (1.2067492 + t2 * (0.2659732 + t2 * (0.0360768 + t2 * 0.0045813)))));
        i0 * (-x).exp()
    } else {
        let t = 3.75 / x;
        let p = 0.39894228
            + t * (0.01328592
                + t * (0.00225319
                    + t * (-0.00157565
                        + t * (0.00916281
                            + t * (-0.02057706
                                + t * (0.02635537 + t * (-0.01647633 + t * 0.00392377)))))));
        p / x.sqrt()
    }
}

/// Mean and standard error of the mean; `se = None` when `n < 2`.
pub fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Some((var / n as f64).sqrt()))
}
