//! Normal, central t, and noncentral t distributions.
//!
//! Everything is evaluated through the regularized incomplete beta/gamma
//! functions; quantiles are located by bracketing bisection. The noncentral
//! t CDF uses the Poisson mixture of incomplete beta terms (Lenth's
//! algorithm), with the summation window centered on the Poisson mode so
//! that noncentrality parameters up to |ncp| = 50 stay well inside f64
//! range (the Poisson weights are assembled in log space).

use crate::error::{domain, Result};
use crate::special::{inc_beta, inc_gamma_q, ln_gamma};

/// Smallest probability reported; tails saturate here instead of
/// underflowing to 0.
pub const PROB_FLOOR: f64 = 1e-300;
/// Largest probability reported, the f64 predecessor of 1.
pub const PROB_CEIL: f64 = 1.0 - f64::EPSILON / 2.0;

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, PROB_CEIL)
}

/// Degrees of freedom of a t distribution (n1 + n2 - 2 in every use here).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreesOfFreedom(f64);

impl DegreesOfFreedom {
    pub fn new(df: f64) -> Result<Self> {
        if !df.is_finite() || df <= 0.0 {
            return Err(domain(format!("degrees of freedom must be positive, got {df}")));
        }
        Ok(Self(df))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Noncentrality parameter of a noncentral t distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noncentrality(f64);

impl Noncentrality {
    pub fn new(ncp: f64) -> Result<Self> {
        if !ncp.is_finite() {
            return Err(domain(format!("noncentrality must be finite, got {ncp}")));
        }
        Ok(Self(ncp))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    // Phi(z) = erfc(-z / sqrt(2)) / 2, erfc via the incomplete gamma.
    let x = -z / std::f64::consts::SQRT_2;
    let erfc = if x >= 0.0 {
        inc_gamma_q(0.5, x * x)
    } else {
        2.0 - inc_gamma_q(0.5, x * x)
    };
    clamp_prob(0.5 * erfc)
}

/// Standard normal quantile, found by bisection on [`normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_prob(p)?;
    Ok(bisect_quantile(normal_cdf, p, -40.0, 40.0))
}

/// CDF of the central t distribution.
pub fn central_t_cdf(t: f64, df: DegreesOfFreedom) -> f64 {
    let df = df.value();
    let t2 = t * t;
    // x and its complement computed separately so huge df stays accurate
    let x = df / (df + t2);
    let xc = t2 / (df + t2);
    let half_tail = 0.5 * inc_beta(0.5 * df, 0.5, x, xc);
    clamp_prob(if t >= 0.0 { 1.0 - half_tail } else { half_tail })
}

/// Quantile of the central t distribution, by bracketing bisection.
pub fn central_t_quantile(p: f64, df: DegreesOfFreedom) -> Result<f64> {
    check_prob(p)?;
    if p == 0.5 {
        return Ok(0.0);
    }
    // expand the bracket until it straddles p
    let mut hi = 1.0;
    while central_t_cdf(hi, df) < p && hi < 1e300 {
        hi *= 4.0;
    }
    let mut lo = -1.0;
    while central_t_cdf(lo, df) > p && lo > -1e300 {
        lo *= 4.0;
    }
    Ok(bisect_quantile(|t| central_t_cdf(t, df), p, lo, hi))
}

/// CDF of the noncentral t distribution.
pub fn noncentral_t_cdf(t: f64, df: DegreesOfFreedom, ncp: Noncentrality) -> f64 {
    let del = ncp.value();
    if del == 0.0 {
        return central_t_cdf(t, df);
    }
    let p = if t >= 0.0 {
        noncentral_body(t, df.value(), del)
    } else {
        1.0 - noncentral_body(-t, df.value(), -del)
    };
    clamp_prob(p)
}

/// P(T <= t) for t >= 0:
/// Phi(-del) + 1/2 sum_j [ p_j I_x(j + 1/2, df/2) + q_j I_x(j + 1, df/2) ]
/// with Poisson(lambda = del^2/2) weights p_j and companion weights q_j.
fn noncentral_body(t: f64, df: f64, del: f64) -> f64 {
    let base = normal_cdf(-del);
    if t == 0.0 {
        return base;
    }
    let t2 = t * t;
    let x = t2 / (t2 + df);
    let xc = df / (t2 + df);
    let lambda = 0.5 * del * del;
    let ln_lambda = lambda.ln();
    let half_df = 0.5 * df;
    let q_coeff = del / std::f64::consts::SQRT_2;

    // start below the Poisson mode; weights there are negligible
    let j_start = if lambda > 30.0 {
        (lambda - 10.0 * lambda.sqrt() - 20.0).floor().max(0.0) as u64
    } else {
        0
    };
    let mut sum = 0.0;
    let mut j = j_start;
    loop {
        let jf = j as f64;
        let ln_pois = -lambda + jf * ln_lambda - ln_gamma(jf + 1.0);
        let p_j = ln_pois.exp();
        let q_j = q_coeff * (-lambda + jf * ln_lambda - ln_gamma(jf + 1.5)).exp();
        let term = p_j * inc_beta(jf + 0.5, half_df, x, xc) + q_j * inc_beta(jf + 1.0, half_df, x, xc);
        sum += term;
        let weight = p_j + q_j.abs();
        if (jf > lambda && weight < 1e-17 * (sum.abs() + base).max(1e-280)) || j > j_start + 100_000 {
            break;
        }
        j += 1;
    }
    base + 0.5 * sum
}

fn check_prob(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("probability must lie in (0, 1), got {p}")));
    }
    Ok(())
}

fn bisect_quantile(cdf: impl Fn(f64) -> f64, p: f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn df(v: f64) -> DegreesOfFreedom {
        DegreesOfFreedom::new(v).unwrap()
    }

    fn ncp(v: f64) -> Noncentrality {
        Noncentrality::new(v).unwrap()
    }

    #[test]
    fn normal_cdf_examples() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(0.5) - 0.6915).abs() < 5e-5);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
        // frozen from the quadrature oracle
        assert!((normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 0.0013498980316300945).abs() < 1e-12);
    }

    #[test]
    fn normal_quantile_examples() {
        assert!(normal_quantile(0.5).unwrap().abs() < 1e-10);
        assert!((normal_quantile(0.975).unwrap() - 1.959964).abs() < 1e-6);
        assert!((normal_quantile(0.9975).unwrap() - 2.807034).abs() < 1e-6);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(-0.2).is_err());
    }

    #[test]
    fn normal_round_trip() {
        for i in 1..40 {
            let p = i as f64 / 40.0;
            let z = normal_quantile(p).unwrap();
            assert!((normal_cdf(z) - p).abs() < 1e-10);
        }
    }

    #[test]
    fn central_t_examples() {
        assert_eq!(central_t_cdf(0.0, df(20.0)), 0.5);
        assert!((central_t_cdf(2.086, df(20.0)) - 0.975).abs() < 5e-5);
        // frozen from the quadrature oracle
        assert!((central_t_cdf(1.0, df(5.0)) - 0.818391).abs() < 5e-7);
        assert!(DegreesOfFreedom::new(0.0).is_err());
        assert!(DegreesOfFreedom::new(-3.0).is_err());
    }

    #[test]
    fn central_t_symmetry() {
        for &d in &[1.0, 5.0, 20.0, 598.0] {
            for &t in &[0.1, 0.7, 1.5, 3.0, 10.0] {
                let s = central_t_cdf(-t, df(d)) + central_t_cdf(t, df(d));
                assert!((s - 1.0).abs() < 1e-13, "df={d} t={t}");
            }
        }
    }

    #[test]
    fn central_t_quantile_examples() {
        assert!((central_t_quantile(0.975, df(20.0)).unwrap() - 2.086).abs() < 5e-4);
        assert!(central_t_quantile(0.5, df(7.0)).unwrap().abs() < 1e-10);
        // frozen from bisection on the oracle CDF
        assert!((central_t_quantile(0.9975, df(598.0)).unwrap() - 2.817490).abs() < 5e-6);
        assert!(central_t_quantile(1.2, df(5.0)).is_err());
    }

    #[test]
    fn noncentral_t_examples() {
        assert_eq!(noncentral_t_cdf(0.0, df(10.0), ncp(0.0)), 0.5);
        // frozen from the quadrature oracle
        assert!((noncentral_t_cdf(1.3029, df(20.0), ncp(2.0716)) - 0.220939).abs() < 5e-7);
        assert!((noncentral_t_cdf(2.086, df(20.0), ncp(3.3166)) - 0.116303).abs() < 5e-7);
        // P(T <= 0) = Phi(-ncp)
        assert!((noncentral_t_cdf(0.0, df(7.0), ncp(1.5)) - normal_cdf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn noncentral_reduces_to_central() {
        for &d in &[1.0, 5.0, 20.0, 100.0] {
            for &t in &[-3.0, -0.5, 0.0, 0.5, 3.0] {
                let a = noncentral_t_cdf(t, df(d), ncp(0.0));
                let b = central_t_cdf(t, df(d));
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn noncentral_large_ncp_stays_finite() {
        // overflow safety for |ncp| up to 50
        for &del in &[-50.0, -35.0, 35.0, 50.0] {
            for &t in &[-60.0, 0.0, 40.0, 60.0] {
                let p = noncentral_t_cdf(t, df(10.0), ncp(del));
                assert!(p.is_finite() && (PROB_FLOOR..=PROB_CEIL).contains(&p), "t={t} del={del} p={p}");
            }
        }
        // sanity: huge positive ncp pushes mass right
        assert!(noncentral_t_cdf(10.0, df(10.0), ncp(50.0)) < 0.01);
        assert!(noncentral_t_cdf(80.0, df(10.0), ncp(50.0)) > 0.5);
    }

    #[test]
    fn large_df_normal_limit() {
        let d = df(1e6);
        let mut t = -6.0;
        while t <= 6.0 {
            assert!((central_t_cdf(t, d) - normal_cdf(t)).abs() <= 1e-4, "t={t}");
            t += 0.5;
        }
    }
}
