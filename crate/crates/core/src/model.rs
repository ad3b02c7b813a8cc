//! Core model quantities: design parameters, effect context, the
//! noncentrality parameter, the CDF of the t statistic under the follow-up
//! mixed model, and two-sample summaries.

use crate::dist::{noncentral_t_cdf, DegreesOfFreedom, Noncentrality};
use crate::error::{domain, Result};

/// Two-arm design: per-arm sample sizes and the two-sided significance level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    n1: u64,
    n2: u64,
    alpha: f64,
}

impl DesignSpec {
    pub fn new(n1: u64, n2: u64, alpha: f64) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(domain(format!(
                "each arm needs at least 2 units, got n1={n1}, n2={n2}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self { n1, n2, alpha })
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn n2(&self) -> u64 {
        self.n2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Harmonic mean of the two arm sizes, the effective per-arm n.
    pub fn harmonic_mean_n(&self) -> f64 {
        harmonic_mean_n(self.n1, self.n2).expect("counts validated on construction")
    }

    /// df = n1 + n2 - 2.
    pub fn degrees_of_freedom(&self) -> DegreesOfFreedom {
        DegreesOfFreedom::new((self.n1 + self.n2 - 2) as f64).expect("n1, n2 >= 2")
    }
}

/// Harmonic mean 2 / (1/n1 + 1/n2).
pub fn harmonic_mean_n(n1: u64, n2: u64) -> Result<f64> {
    if n1 == 0 || n2 == 0 {
        return Err(domain("sample sizes must be nonzero"));
    }
    let (a, b) = (n1 as f64, n2 as f64);
    Ok(2.0 / (1.0 / a + 1.0 / b))
}

/// The (delta, omega) pair: treatment effect size and environmental effect
/// ratio, the two dimensionless drivers of every formula downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectContext {
    delta: f64,
    omega: f64,
}

impl EffectContext {
    pub fn new(delta: f64, omega: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(domain(format!("effect size must be finite, got {delta}")));
        }
        if !omega.is_finite() || omega < 0.0 {
            return Err(domain(format!("EER must be finite and nonnegative, got {omega}")));
        }
        Ok(Self { delta, omega })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Noncentrality parameter delta * sqrt(n_h) / sqrt(1 + n_h * omega^2).
pub fn noncentrality(ctx: &EffectContext, design: &DesignSpec) -> Noncentrality {
    let nh = design.harmonic_mean_n();
    let v = ctx.delta * nh.sqrt() / (1.0 + nh * ctx.omega * ctx.omega).sqrt();
    Noncentrality::new(v).expect("finite by construction")
}

/// CDF of the t statistic under the follow-up mixed model:
/// P(T <= t) = G_delta(t / sqrt(1 + n_h omega^2)).
pub fn cdf_t_under_m2(t: f64, ctx: &EffectContext, design: &DesignSpec) -> f64 {
    let nh = design.harmonic_mean_n();
    let inflation = (1.0 + nh * ctx.omega * ctx.omega).sqrt();
    noncentral_t_cdf(t / inflation, design.degrees_of_freedom(), noncentrality(ctx, design))
}

/// Observed two-sample summary: means, pooled SD, arm sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSampleSummary {
    mean1: f64,
    mean2: f64,
    pooled_sd: f64,
    n1: u64,
    n2: u64,
}

impl TwoSampleSummary {
    pub fn new(mean1: f64, mean2: f64, pooled_sd: f64, n1: u64, n2: u64) -> Result<Self> {
        if !mean1.is_finite() || !mean2.is_finite() {
            return Err(domain("means must be finite"));
        }
        if !pooled_sd.is_finite() || pooled_sd <= 0.0 {
            return Err(domain(format!("pooled SD must be positive, got {pooled_sd}")));
        }
        if n1 < 2 || n2 < 2 {
            return Err(domain(format!(
                "each arm needs at least 2 units, got n1={n1}, n2={n2}"
            )));
        }
        Ok(Self { mean1, mean2, pooled_sd, n1, n2 })
    }

    /// Build a summary from raw per-arm responses, pooling the two sample
    /// variances with df = n1 + n2 - 2.
    pub fn from_groups(group1: &[f64], group2: &[f64]) -> Result<Self> {
        if group1.len() < 2 || group2.len() < 2 {
            return Err(domain("each group needs at least 2 observations"));
        }
        let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
        let ss = |g: &[f64], m: f64| g.iter().map(|y| (y - m) * (y - m)).sum::<f64>();
        let (m1, m2) = (mean(group1), mean(group2));
        let df = (group1.len() + group2.len() - 2) as f64;
        let pooled_var = (ss(group1, m1) + ss(group2, m2)) / df;
        if pooled_var <= 0.0 {
            return Err(domain("pooled SD is zero: groups are constant"));
        }
        Self::new(m1, m2, pooled_var.sqrt(), group1.len() as u64, group2.len() as u64)
    }

    pub fn mean1(&self) -> f64 {
        self.mean1
    }

    pub fn mean2(&self) -> f64 {
        self.mean2
    }

    pub fn pooled_sd(&self) -> f64 {
        self.pooled_sd
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn n2(&self) -> u64 {
        self.n2
    }

    pub fn harmonic_mean_n(&self) -> f64 {
        harmonic_mean_n(self.n1, self.n2).expect("counts validated on construction")
    }

    /// Observed effect size (mean1 - mean2) / (sqrt(2) * pooled SD), the
    /// canonical sample analog consumed by the broad-inference formulas.
    pub fn observed_effect_size(&self) -> f64 {
        (self.mean1 - self.mean2) / (std::f64::consts::SQRT_2 * self.pooled_sd)
    }

    /// Cohen's d, the variant without the sqrt(2) divisor.
    pub fn cohens_d(&self) -> f64 {
        (self.mean1 - self.mean2) / self.pooled_sd
    }

    /// Two-sample t statistic; equals observed_effect_size * sqrt(n_h).
    pub fn t_statistic(&self) -> f64 {
        let nh = self.harmonic_mean_n();
        (self.mean1 - self.mean2) / (self.pooled_sd * (2.0 / nh).sqrt())
    }
}

/// Parameters of the follow-up mixed model
/// Y_rj = mu_r + theta + delta_r + eps_rj.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedModelParams {
    mu1: f64,
    mu2: f64,
    sigma_e: f64,
    sigma_delta: f64,
    sigma_theta: f64,
}

impl MixedModelParams {
    pub fn new(mu1: f64, mu2: f64, sigma_e: f64, sigma_delta: f64, sigma_theta: f64) -> Result<Self> {
        if !mu1.is_finite() || !mu2.is_finite() {
            return Err(domain("treatment means must be finite"));
        }
        if !sigma_e.is_finite() || sigma_e <= 0.0 {
            return Err(domain(format!("sigma_e must be positive, got {sigma_e}")));
        }
        if sigma_delta < 0.0 || !sigma_delta.is_finite() {
            return Err(domain(format!("sigma_delta must be nonnegative, got {sigma_delta}")));
        }
        if sigma_theta < 0.0 || !sigma_theta.is_finite() {
            return Err(domain(format!("sigma_theta must be nonnegative, got {sigma_theta}")));
        }
        Ok(Self { mu1, mu2, sigma_e, sigma_delta, sigma_theta })
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn sigma_e(&self) -> f64 {
        self.sigma_e
    }

    pub fn sigma_delta(&self) -> f64 {
        self.sigma_delta
    }

    pub fn sigma_theta(&self) -> f64 {
        self.sigma_theta
    }

    /// Treatment effect size (mu1 - mu2) / (sigma_e sqrt(2)).
    pub fn delta(&self) -> f64 {
        (self.mu1 - self.mu2) / (self.sigma_e * std::f64::consts::SQRT_2)
    }

    /// EER omega = sigma_delta / sigma_e.
    pub fn omega(&self) -> f64 {
        self.sigma_delta / self.sigma_e
    }

    pub fn effect_context(&self) -> EffectContext {
        EffectContext::new(self.delta(), self.omega()).expect("finite by construction")
    }
}
