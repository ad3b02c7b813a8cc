//! Quadrature-based reference implementations of the distributions used by
//! `replicore`. Everything here is deliberately computed along a different
//! code path than the library (Taylor series, Stirling's series, adaptive
//! Simpson integration of defining representations) so the two can be checked
//! against each other. These routines are slow and are only meant to be
//! called from tests.

/// Standard normal CDF.
///
/// Taylor series of erf for |z| <= 4, composite Simpson integration of the
/// density for the tails. Absolute error below 1e-12.
pub fn phi(z: f64) -> f64 {
    if z < -8.75 {
        return 0.0;
    }
    if z > 8.75 {
        return 1.0;
    }
    if z.abs() <= 4.0 {
        0.5 + 0.5 * erf_taylor(z / std::f64::consts::SQRT_2)
    } else {
        let tail = simpson_fixed(normal_density, z.abs(), 8.75, 400);
        if z > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }
}

fn normal_density(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn erf_taylor(x: f64) -> f64 {
    // erf(x) = 2/sqrt(pi) * sum_k (-1)^k x^(2k+1) / (k! (2k+1))
    let mut term = x;
    let mut sum = x;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= -x * x / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1e-30) || k > 200 {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

/// log Gamma via Stirling's series with upward recursion for small arguments.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut x = x;
    let mut shift = 0.0;
    while x < 12.0 {
        shift -= x.ln();
        x += 1.0;
    }
    // Stirling coefficients B_{2n} / (2n (2n-1))
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
    ];
    let mut series = 0.0;
    let inv2 = 1.0 / (x * x);
    let mut pw = 1.0 / x;
    for c in C {
        series += c * pw;
        pw *= inv2;
    }
    shift
        + (x - 0.5) * x.ln()
        + -x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + series
}

/// Noncentral t CDF by integrating its defining representation:
/// T = (Z + ncp) / S with Z standard normal and S = sqrt(chi2_df / df),
/// so P(T <= t) = E[ Phi(t S - ncp) ] over the density of S.
pub fn noncentral_t_cdf(t: f64, df: f64, ncp: f64) -> f64 {
    assert!(df > 0.0);
    // density of S: 2 (df/2)^(df/2) / Gamma(df/2) * s^(df-1) exp(-df s^2 / 2)
    let half = 0.5 * df;
    let log_norm = std::f64::consts::LN_2 + half * half.ln() - ln_gamma(half);
    let integrand = |s: f64| -> f64 {
        if s <= 0.0 {
            if df > 1.0 {
                return 0.0;
            }
            // df == 1: s^(df-1) == 1 at s = 0
            return phi(-ncp) * log_norm.exp();
        }
        let log_dens = log_norm + (df - 1.0) * s.ln() - half * s * s;
        phi(t * s - ncp) * log_dens.exp()
    };
    let s_max = 1.0 + 12.0 / (2.0 * df).sqrt();
    // Pre-split so narrow features are never missed by the adaptive pass.
    let panels = 64;
    let mut v = 0.0;
    for i in 0..panels {
        let a = s_max * i as f64 / panels as f64;
        let b = s_max * (i + 1) as f64 / panels as f64;
        v += adaptive_simpson(&integrand, a, b, 1e-12, 40);
    }
    v.clamp(0.0, 1.0)
}

/// Central t CDF (noncentral with ncp = 0).
pub fn central_t_cdf(t: f64, df: f64) -> f64 {
    noncentral_t_cdf(t, df, 0.0)
}

/// Standard normal quantile located by plain bisection on [`phi`].
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let (mut lo, mut hi) = (-9.0f64, 9.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson with a fixed even panel count.
pub fn simpson_fixed(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        sum += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Recursive adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_recurse(f, a, b, fa, fb, fc, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let fd = f(d);
    let fe = f(e);
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_recurse(f, a, c, fa, fc, fd, left, tol * 0.5, depth - 1)
            + simpson_recurse(f, c, b, fc, fb, fe, right, tol * 0.5, depth - 1)
    }
}
