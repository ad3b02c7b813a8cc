//! Replicability power, wrong-direction and non-significance probabilities,
//! limiting power, initial and follow-up sample sizes, and relative
//! efficiency.

use crate::dist::{central_t_quantile, noncentral_t_cdf, normal_cdf, normal_quantile};
use crate::error::{domain, Result};
use crate::model::{noncentrality, DesignSpec, EffectContext};

/// Follow-up outcome probabilities; the three components partition 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBreakdown {
    pub p_rep: f64,
    pub p_wrong_direction: f64,
    pub p_nonsig: f64,
}

/// Result of a sample-size computation. The follow-up equation has no
/// solution when the limiting power falls below the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleSizeResult {
    Attainable { n_per_arm: u64, achieved_power: f64 },
    Unattainable { limiting_power: f64 },
}

impl SampleSizeResult {
    pub fn n_per_arm(&self) -> Option<u64> {
        match self {
            Self::Attainable { n_per_arm, .. } => Some(*n_per_arm),
            Self::Unattainable { .. } => None,
        }
    }
}

fn check_delta_nonnegative(ctx: &EffectContext) -> Result<()> {
    if ctx.delta() < 0.0 {
        return Err(domain(
            "effect size must be nonnegative (negate signs for mu1 < mu2)",
        ));
    }
    Ok(())
}

/// Exact follow-up outcome probabilities under the mixed model:
/// p_rep = 1 - G_delta(t_{a/2} / s), wrong direction = G_delta(-t_{a/2} / s)
/// with s = sqrt(1 + n_h omega^2).
pub fn replicability_power_exact(ctx: &EffectContext, design: &DesignSpec) -> Result<PowerBreakdown> {
    check_delta_nonnegative(ctx)?;
    let df = design.degrees_of_freedom();
    let t_crit = central_t_quantile(1.0 - design.alpha() / 2.0, df)?;
    let nh = design.harmonic_mean_n();
    let inflation = (1.0 + nh * ctx.omega() * ctx.omega()).sqrt();
    let ncp = noncentrality(ctx, design);
    let p_rep = 1.0 - noncentral_t_cdf(t_crit / inflation, df, ncp);
    let p_wrong = noncentral_t_cdf(-t_crit / inflation, df, ncp);
    Ok(PowerBreakdown {
        p_rep,
        p_wrong_direction: p_wrong,
        p_nonsig: (1.0 - p_rep - p_wrong).max(0.0),
    })
}

/// Large-sample normal approximation to the replicability power:
/// 1 - Phi((z_{a/2} - delta sqrt(n_h)) / sqrt(1 + n_h omega^2)).
pub fn replicability_power_normal_approx(ctx: &EffectContext, design: &DesignSpec) -> Result<f64> {
    check_delta_nonnegative(ctx)?;
    let z = normal_quantile(1.0 - design.alpha() / 2.0)?;
    let nh = design.harmonic_mean_n();
    let inflation = (1.0 + nh * ctx.omega() * ctx.omega()).sqrt();
    Ok(1.0 - normal_cdf((z - ctx.delta() * nh.sqrt()) / inflation))
}

/// Limiting replicability power as n -> infinity: Phi(delta / omega).
/// Continuously extended at omega = 0 (1 for delta > 0, 1/2 at delta = 0)
/// so profile sweeps can start at zero.
pub fn limiting_power(ctx: &EffectContext) -> f64 {
    if ctx.omega() == 0.0 {
        return match ctx.delta().partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => 1.0,
            Some(std::cmp::Ordering::Equal) => 0.5,
            _ => 0.0,
        };
    }
    normal_cdf(ctx.delta() / ctx.omega())
}

fn check_size_args(delta: f64, alpha: f64, power: f64) -> Result<()> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(domain(format!("effect size must be positive, got {delta}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(power > alpha / 2.0 && power < 1.0) {
        return Err(domain(format!(
            "target power must lie in (alpha/2, 1), got {power}"
        )));
    }
    Ok(())
}

/// Per-arm sample size of the initial experiment:
/// ceil((z_{a/2} + z_beta)^2 / delta^2), floored at 2.
pub fn initial_sample_size(delta: f64, alpha: f64, power: f64) -> Result<SampleSizeResult> {
    check_size_args(delta, alpha, power)?;
    let n_real = initial_sample_size_real(delta, alpha, power)?;
    let n = (n_real.ceil() as u64).max(2);
    let ctx = EffectContext::new(delta, 0.0)?;
    let design = DesignSpec::new(n, n, alpha)?;
    Ok(SampleSizeResult::Attainable {
        n_per_arm: n,
        achieved_power: replicability_power_normal_approx(&ctx, &design)?,
    })
}

fn initial_sample_size_real(delta: f64, alpha: f64, power: f64) -> Result<f64> {
    let z_a = normal_quantile(1.0 - alpha / 2.0)?;
    let z_b = normal_quantile(power)?;
    Ok((z_a + z_b) * (z_a + z_b) / (delta * delta))
}

/// Per-arm follow-up sample size solving
/// z_{a/2} + z_beta sqrt(1 + n omega^2) = delta sqrt(n).
pub fn followup_sample_size(ctx: &EffectContext, alpha: f64, power: f64) -> Result<SampleSizeResult> {
    check_size_args(ctx.delta(), alpha, power)?;
    match followup_sample_size_real(ctx, alpha, power)? {
        None => Ok(SampleSizeResult::Unattainable {
            limiting_power: limiting_power(ctx),
        }),
        Some(n_real) => {
            let n = (n_real.ceil() as u64).max(2);
            let z_a = normal_quantile(1.0 - alpha / 2.0)?;
            let nh = n as f64;
            let inflation = (1.0 + nh * ctx.omega() * ctx.omega()).sqrt();
            let achieved = 1.0 - normal_cdf((z_a - ctx.delta() * nh.sqrt()) / inflation);
            Ok(SampleSizeResult::Attainable {
                n_per_arm: n,
                achieved_power: achieved,
            })
        }
    }
}

/// Exact-power refinement: step the follow-up n until the exact breakdown
/// reaches the target. Starts from the normal-approximation solution.
pub fn followup_sample_size_exact(ctx: &EffectContext, alpha: f64, power: f64) -> Result<SampleSizeResult> {
    let approx = followup_sample_size(ctx, alpha, power)?;
    let mut n = match approx {
        SampleSizeResult::Unattainable { .. } => return Ok(approx),
        SampleSizeResult::Attainable { n_per_arm, .. } => n_per_arm.max(2),
    };
    let exact_at = |n: u64| -> Result<f64> {
        Ok(replicability_power_exact(ctx, &DesignSpec::new(n, n, alpha)?)?.p_rep)
    };
    // walk down while still above target, then up until reached
    while n > 2 && exact_at(n - 1)? >= power {
        n -= 1;
    }
    let mut steps = 0;
    while exact_at(n)? < power {
        n += 1;
        steps += 1;
        if steps > 1_000_000 {
            return Ok(SampleSizeResult::Unattainable {
                limiting_power: limiting_power(ctx),
            });
        }
    }
    Ok(SampleSizeResult::Attainable {
        n_per_arm: n,
        achieved_power: exact_at(n)?,
    })
}

/// Un-rounded follow-up solution, or None when unattainable. The squared
/// form is a quadratic in x = sqrt(n); both candidate roots are validated
/// against the original equation to reject the extraneous one.
fn followup_sample_size_real(ctx: &EffectContext, alpha: f64, power: f64) -> Result<Option<f64>> {
    let delta = ctx.delta();
    let omega = ctx.omega();
    if omega == 0.0 {
        return Ok(Some(initial_sample_size_real(delta, alpha, power)?));
    }
    // at the boundary the required n diverges; report unattainable
    if normal_cdf(delta / omega) < power + 1e-12 {
        return Ok(None);
    }
    let z_a = normal_quantile(1.0 - alpha / 2.0)?;
    let z_b = normal_quantile(power)?;
    let a = delta * delta - z_b * z_b * omega * omega;
    let b = -2.0 * delta * z_a;
    let c = z_a * z_a - z_b * z_b;
    let residual = |x: f64| z_a + z_b * (1.0 + x * x * omega * omega).sqrt() - delta * x;
    let mut best: Option<f64> = None;
    for x in quadratic_roots(a, b, c) {
        if x > 0.0 && residual(x).abs() <= 1e-9 * (1.0 + z_a.abs() + delta * x) {
            best = Some(match best {
                Some(prev) => prev.min(x),
                None => x,
            });
        }
    }
    Ok(best.map(|x| x * x))
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Relative efficiency n_I / n_F of the realizable (integer, rounded-up)
/// designs; 0 when the follow-up size is unattainable.
pub fn relative_efficiency(ctx: &EffectContext, alpha: f64, power: f64) -> Result<f64> {
    check_size_args(ctx.delta(), alpha, power)?;
    let n_i = initial_sample_size_real(ctx.delta(), alpha, power)?.ceil().max(2.0);
    match followup_sample_size_real(ctx, alpha, power)? {
        None => Ok(0.0),
        Some(n_f) => Ok(n_i / n_f.ceil().max(2.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(delta: f64, omega: f64) -> EffectContext {
        EffectContext::new(delta, omega).unwrap()
    }

    fn design(n: u64, alpha: f64) -> DesignSpec {
        DesignSpec::new(n, n, alpha).unwrap()
    }

    #[test]
    fn figure1_power_values() {
        let b = replicability_power_exact(&ctx(1.0, 0.0), &design(11, 0.05)).unwrap();
        assert!((b.p_rep - 0.88).abs() < 0.005);
        let b = replicability_power_exact(&ctx(1.0, 0.5), &design(11, 0.05)).unwrap();
        assert!((b.p_rep - 0.74).abs() < 0.005);
        assert!((b.p_nonsig - 0.26).abs() < 0.005);
    }

    #[test]
    fn table1_power_values() {
        let b = replicability_power_exact(&ctx(0.25, 0.5), &design(300, 0.005)).unwrap();
        assert!((b.p_rep - 0.57).abs() < 0.005);
        assert!((b.p_wrong_direction - 0.21).abs() < 0.005);
        assert!((b.p_nonsig - 0.22).abs() < 0.005);
        let b = replicability_power_exact(&ctx(1.0, 0.5), &design(300, 0.005)).unwrap();
        assert!((b.p_rep - 0.95).abs() < 0.005);
        assert!((b.p_wrong_direction - 0.01).abs() < 0.005);
        assert!((b.p_nonsig - 0.04).abs() < 0.005);
    }

    #[test]
    fn breakdown_partitions_unity() {
        for &(d, w, n, a) in &[
            (0.0, 0.0, 11, 0.05),
            (0.25, 0.5, 300, 0.005),
            (1.0, 2.0, 50, 0.05),
            (0.5, 0.2, 20, 0.01),
        ] {
            let b = replicability_power_exact(&ctx(d, w), &design(n, a)).unwrap();
            assert!((b.p_rep + b.p_wrong_direction + b.p_nonsig - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_delta_rejected() {
        assert!(replicability_power_exact(&ctx(-0.5, 0.2), &design(11, 0.05)).is_err());
    }

    #[test]
    fn normal_approx_examples() {
        let p = replicability_power_normal_approx(&ctx(0.0, 0.0), &design(40, 0.05)).unwrap();
        assert!((p - 0.025).abs() < 1e-10);
        let p = replicability_power_normal_approx(&ctx(0.25, 0.5), &design(300, 0.005)).unwrap();
        let exact = replicability_power_exact(&ctx(0.25, 0.5), &design(300, 0.005)).unwrap();
        assert!((p - exact.p_rep).abs() < 0.01);
        let p = replicability_power_normal_approx(&ctx(1.0, 1e4), &design(11, 0.05)).unwrap();
        assert!((p - 0.5).abs() < 1e-3);
    }

    #[test]
    fn limiting_power_examples() {
        assert!((limiting_power(&ctx(0.25, 0.5)) - 0.69).abs() < 0.005);
        assert!((limiting_power(&ctx(1.0, 0.5)) - 0.98).abs() < 0.005);
        assert_eq!(limiting_power(&ctx(0.0, 1.0)), 0.5);
        assert_eq!(limiting_power(&ctx(0.3, 0.0)), 1.0);
        assert_eq!(limiting_power(&ctx(0.0, 0.0)), 0.5);
    }

    #[test]
    fn initial_sample_size_examples() {
        assert_eq!(initial_sample_size(0.25, 0.05, 0.8).unwrap().n_per_arm(), Some(126));
        assert_eq!(initial_sample_size(0.5, 0.05, 0.8).unwrap().n_per_arm(), Some(32));
        assert_eq!(initial_sample_size(2.8016, 0.05, 0.8).unwrap().n_per_arm(), Some(2));
        assert!(initial_sample_size(0.0, 0.05, 0.8).is_err());
        assert!(initial_sample_size(0.5, 0.05, 0.02).is_err());
    }

    #[test]
    fn followup_sample_size_examples() {
        let r = followup_sample_size(&ctx(0.25, 0.2), 0.05, 0.8).unwrap();
        assert_eq!(r.n_per_arm(), Some(626));
        let r = followup_sample_size(&ctx(0.5, 0.2), 0.05, 0.8).unwrap();
        assert_eq!(r.n_per_arm(), Some(46));
        let r = followup_sample_size(&ctx(0.25, 0.5), 0.05, 0.8).unwrap();
        match r {
            SampleSizeResult::Unattainable { limiting_power } => {
                assert!((limiting_power - 0.69).abs() < 0.005)
            }
            _ => panic!("expected unattainable"),
        }
        let r = followup_sample_size(&ctx(0.25, 0.0), 0.05, 0.8).unwrap();
        assert_eq!(r.n_per_arm(), Some(126));
    }

    #[test]
    fn followup_root_satisfies_original_equation() {
        let z_a = normal_quantile(0.975).unwrap();
        let z_b = normal_quantile(0.8).unwrap();
        let n = followup_sample_size_real(&ctx(0.25, 0.2), 0.05, 0.8).unwrap().unwrap();
        let x = n.sqrt();
        let resid = z_a + z_b * (1.0 + n * 0.04).sqrt() - 0.25 * x;
        assert!(resid.abs() < 1e-9);
        // the extraneous root from squaring (n ~ 13.4) must be rejected
        assert!(n > 600.0);
    }

    #[test]
    fn relative_efficiency_examples() {
        let re = relative_efficiency(&ctx(0.25, 0.2), 0.05, 0.8).unwrap();
        assert!((re - 0.20).abs() < 0.005);
        assert!((re - 126.0 / 626.0).abs() < 1e-12);
        let re = relative_efficiency(&ctx(0.5, 0.2), 0.05, 0.8).unwrap();
        assert!((re - 0.70).abs() < 0.005);
        assert!((re - 32.0 / 46.0).abs() < 1e-12);
        let re = relative_efficiency(&ctx(0.7, 0.0), 0.05, 0.8).unwrap();
        assert!((re - 1.0).abs() < 1e-12);
        let re = relative_efficiency(&ctx(0.25, 0.5), 0.05, 0.8).unwrap();
        assert_eq!(re, 0.0);
    }

    #[test]
    fn exact_variant_meets_target() {
        let r = followup_sample_size_exact(&ctx(0.5, 0.2), 0.05, 0.8).unwrap();
        let n = r.n_per_arm().unwrap();
        let below = replicability_power_exact(&ctx(0.5, 0.2), &design(n - 1, 0.05)).unwrap();
        let at = replicability_power_exact(&ctx(0.5, 0.2), &design(n, 0.05)).unwrap();
        assert!(at.p_rep >= 0.8);
        assert!(below.p_rep < 0.8);
    }

    #[test]
    fn limits_in_omega() {
        // p_rep and p_wrong both -> 1/2 as omega grows
        let b = replicability_power_exact(&ctx(1.0, 1e4), &design(11, 0.05)).unwrap();
        assert!((b.p_rep - 0.5).abs() < 1e-3);
        assert!((b.p_wrong_direction - 0.5).abs() < 1e-3);
        // large n approaches the limiting power; the gap shrinks like
        // phi(delta/omega) z_{a/2} / (omega sqrt(n_h)), so 1.38e-3 at n = 1e6
        // for delta = .25 and 2.1e-4 for delta = 1
        let b = replicability_power_exact(&ctx(1.0, 0.5), &design(1_000_000, 0.05)).unwrap();
        assert!((b.p_rep - limiting_power(&ctx(1.0, 0.5))).abs() < 1e-3);
        let b = replicability_power_exact(&ctx(0.25, 0.5), &design(1_000_000, 0.05)).unwrap();
        assert!((b.p_rep - limiting_power(&ctx(0.25, 0.5))).abs() < 1.5e-3);
    }
}
