//! Broad-inference p-values, confidence levels, and confidence intervals:
//! the classical two-sample quantities re-derived under the follow-up mixed
//! model at an assumed EER. The EER is always an input here; sweeping it is
//! the profile module's job.

use crate::dist::{central_t_cdf, central_t_quantile, normal_cdf, normal_quantile};
use crate::error::{domain, Result};
use crate::model::{DesignSpec, TwoSampleSummary};

/// Broad-inference view of a single two-sample result at one assumed EER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadInferenceReport {
    pub bi_p_value: f64,
    pub bi_conf_level: f64,
    pub bi_interval_low: f64,
    pub bi_interval_high: f64,
    pub omega_assumed: f64,
}

fn check_omega(omega: f64) -> Result<()> {
    if !omega.is_finite() || omega < 0.0 {
        return Err(domain(format!("EER must be finite and nonnegative, got {omega}")));
    }
    Ok(())
}

/// Broad-inference two-sided p-value
/// 2 (1 - G_0(|d*| sqrt(n_h) / sqrt(1 + n_h omega^2))).
pub fn bi_p_value(delta_star: f64, design: &DesignSpec, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    if !delta_star.is_finite() {
        return Err(domain("observed effect size must be finite"));
    }
    let nh = design.harmonic_mean_n();
    let arg = delta_star.abs() * nh.sqrt() / (1.0 + nh * omega * omega).sqrt();
    let p = 2.0 * (1.0 - central_t_cdf(arg, design.degrees_of_freedom()));
    Ok(p.min(1.0))
}

/// Asymptotic (n -> infinity) broad-inference p-value 2 (1 - Phi(|d*|/omega)),
/// the infimum of [`bi_p_value`] over sample size.
pub fn bi_p_value_asymptotic(delta_star: f64, omega: f64) -> Result<f64> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(domain(format!("EER must be positive, got {omega}")));
    }
    if !delta_star.is_finite() {
        return Err(domain("observed effect size must be finite"));
    }
    Ok((2.0 * (1.0 - normal_cdf(delta_star.abs() / omega))).min(1.0))
}

/// Smallest observed effect size that can reach significance level alpha at
/// any sample size: z_{a/2} * omega.
pub fn min_detectable_effect(alpha: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(normal_quantile(1.0 - alpha / 2.0)? * omega)
}

/// Probability that the naive 1 - alpha interval covers mu1 - mu2 under the
/// mixed model: 2 G_0(t_{a/2} / sqrt(1 + n_h omega^2)) - 1.
pub fn bi_confidence_level(design: &DesignSpec, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let df = design.degrees_of_freedom();
    let t_crit = central_t_quantile(1.0 - design.alpha() / 2.0, df)?;
    let nh = design.harmonic_mean_n();
    let level = 2.0 * central_t_cdf(t_crit / (1.0 + nh * omega * omega).sqrt(), df) - 1.0;
    Ok(level.max(0.0))
}

/// Widened interval with true 1 - alpha broad-inference coverage:
/// (y1 - y2) +/- t_{a/2} s_e sqrt(2/n_h + 2 omega^2).
pub fn bi_confidence_interval(
    summary: &TwoSampleSummary,
    alpha: f64,
    omega: f64,
) -> Result<(f64, f64)> {
    check_omega(omega)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let df = crate::dist::DegreesOfFreedom::new((summary.n1() + summary.n2() - 2) as f64)?;
    let t_crit = central_t_quantile(1.0 - alpha / 2.0, df)?;
    let nh = summary.harmonic_mean_n();
    let center = summary.mean1() - summary.mean2();
    let half_width = t_crit * summary.pooled_sd() * (2.0 / nh + 2.0 * omega * omega).sqrt();
    Ok((center - half_width, center + half_width))
}

/// Full broad-inference report for one summary at one assumed EER.
pub fn report(summary: &TwoSampleSummary, alpha: f64, omega: f64) -> Result<BroadInferenceReport> {
    let design = DesignSpec::new(summary.n1(), summary.n2(), alpha)?;
    let (lo, hi) = bi_confidence_interval(summary, alpha, omega)?;
    Ok(BroadInferenceReport {
        bi_p_value: bi_p_value(summary.observed_effect_size(), &design, omega)?,
        bi_conf_level: bi_confidence_level(&design, omega)?,
        bi_interval_low: lo,
        bi_interval_high: hi,
        omega_assumed: omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(n: u64, alpha: f64) -> DesignSpec {
        DesignSpec::new(n, n, alpha).unwrap()
    }

    #[test]
    fn bi_p_value_examples() {
        let d = design(11, 0.05);
        assert!((bi_p_value(1.0, &d, 0.0).unwrap() - 0.003).abs() < 5e-4);
        assert!((bi_p_value(1.0, &d, 0.65).unwrap() - 0.178).abs() < 2e-3);
        let p = bi_p_value(1.0, &d, 0.38).unwrap();
        assert!((p - 0.05).abs() < 0.005);
        assert_eq!(bi_p_value(0.0, &d, 0.3).unwrap(), 1.0);
        // sign of the observed effect is irrelevant
        assert_eq!(bi_p_value(-1.0, &d, 0.65).unwrap(), bi_p_value(1.0, &d, 0.65).unwrap());
    }

    #[test]
    fn asymptotic_examples() {
        assert!((bi_p_value_asymptotic(1.0, 0.65).unwrap() - 0.124).abs() < 5e-4);
        let p = bi_p_value_asymptotic(0.7, 0.357).unwrap();
        assert!((p - 0.05).abs() < 0.002);
        assert_eq!(bi_p_value_asymptotic(0.0, 1.0).unwrap(), 1.0);
        assert!(bi_p_value_asymptotic(1.0, 0.0).is_err());
    }

    #[test]
    fn asymptotic_is_infimum() {
        let asym = bi_p_value_asymptotic(1.0, 0.65).unwrap();
        let finite = bi_p_value(1.0, &design(11, 0.05), 0.65).unwrap();
        assert!(finite > asym);
        let huge = bi_p_value(1.0, &design(1_000_000, 0.05), 0.65).unwrap();
        assert!(huge > asym);
        assert!((huge - asym).abs() < 1e-4);
    }

    #[test]
    fn min_detectable_effect_examples() {
        let v = min_detectable_effect(0.05, 0.36).unwrap();
        assert!((0.70..=0.71).contains(&v));
        assert_eq!(min_detectable_effect(0.05, 0.0).unwrap(), 0.0);
        assert!((min_detectable_effect(0.005, 0.5).unwrap() - 1.404).abs() < 5e-4);
    }

    #[test]
    fn confidence_level_examples() {
        let d = design(11, 0.05);
        assert!((bi_confidence_level(&d, 0.0).unwrap() - 0.95).abs() < 1e-9);
        assert!((bi_confidence_level(&d, 0.38).unwrap() - 0.80).abs() < 0.01);
        let v = bi_confidence_level(&design(1_000_000, 0.05), 0.5).unwrap();
        assert!(v < 0.01);
    }

    #[test]
    fn confidence_interval_examples() {
        let s = TwoSampleSummary::new(97.0, 56.0, 12.14, 11, 11).unwrap();
        let (lo, hi) = bi_confidence_interval(&s, 0.05, 0.0).unwrap();
        assert!((lo - 30.2).abs() < 0.05);
        assert!((hi - 51.8).abs() < 0.05);
        let (lo5, hi5) = bi_confidence_interval(&s, 0.05, 0.5).unwrap();
        assert!((lo5 - 20.09).abs() < 0.05);
        assert!((hi5 - 61.91).abs() < 0.05);
        // the widened interval strictly contains the classical one
        assert!(lo5 < lo && hi5 > hi);

        let z = TwoSampleSummary::new(4.0, 4.0, 1.0, 6, 6).unwrap();
        let (lo, hi) = bi_confidence_interval(&z, 0.05, 0.7).unwrap();
        assert!((lo + hi).abs() < 1e-12);
    }

    #[test]
    fn report_is_consistent_with_parts() {
        let s = TwoSampleSummary::new(97.0, 56.0, 12.14, 11, 11).unwrap();
        let r = report(&s, 0.05, 0.5).unwrap();
        let d = design(11, 0.05);
        assert_eq!(r.bi_p_value, bi_p_value(s.observed_effect_size(), &d, 0.5).unwrap());
        assert_eq!(r.bi_conf_level, bi_confidence_level(&d, 0.5).unwrap());
        assert!(r.bi_interval_low <= r.bi_interval_high);
        assert_eq!(r.omega_assumed, 0.5);
    }
}
