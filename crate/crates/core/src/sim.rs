//! Seeded Monte Carlo simulator of the initial (M1) and follow-up (M2)
//! models. Serves as the independent oracle for the analytic formulas and
//! for interval-coverage experiments.
//!
//! Reproducibility contract: each replicate owns a ChaCha8 stream keyed by
//! (seed, replicate index), so tallies are bit-identical for a fixed seed
//! and config regardless of thread count. Replicate outcomes are collected
//! in index order and reduced sequentially.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dist::central_t_quantile;
use crate::error::Result;
use crate::model::{DesignSpec, MixedModelParams, TwoSampleSummary};

/// Simulation configuration; identical (seed, config) pairs reproduce
/// identical tallies bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: MixedModelParams,
    pub design: DesignSpec,
    pub n_reps: u64,
    pub seed: u64,
}

/// Outcome counts over all replicates; the three significance counts
/// partition `n_reps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOutcomeTally {
    pub n_reps: u64,
    pub significant_correct: u64,
    pub significant_wrong: u64,
    pub non_significant: u64,
    /// Replicates whose naive 1 - alpha interval covered mu1 - mu2.
    pub naive_covered: u64,
    /// Replicates whose broad-inference interval (at the true EER) covered
    /// mu1 - mu2.
    pub bi_covered: u64,
    /// Mean and SD of the simulated t statistic, stored as bits so the
    /// tally stays Eq-comparable.
    mean_t_bits: u64,
    sd_t_bits: u64,
}

impl SimOutcomeTally {
    pub fn mean_t(&self) -> f64 {
        f64::from_bits(self.mean_t_bits)
    }

    pub fn sd_t(&self) -> f64 {
        f64::from_bits(self.sd_t_bits)
    }

    pub fn rate_correct(&self) -> f64 {
        self.significant_correct as f64 / self.n_reps as f64
    }

    pub fn rate_wrong(&self) -> f64 {
        self.significant_wrong as f64 / self.n_reps as f64
    }

    pub fn rate_nonsig(&self) -> f64 {
        self.non_significant as f64 / self.n_reps as f64
    }
}

/// RNG stream for one replicate, keyed by (seed, replicate index).
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Draw one experiment from the mixed model: theta once, one interaction
/// term per arm, one error per unit, all independent normals. With
/// sigma_delta = sigma_theta = 0 this is exactly the initial model M1.
pub fn simulate_experiment(
    params: &MixedModelParams,
    design: &DesignSpec,
    rng: &mut ChaCha8Rng,
) -> TwoSampleSummary {
    let theta = params.sigma_theta() * rng.sample::<f64, _>(StandardNormal);
    let delta1 = params.sigma_delta() * rng.sample::<f64, _>(StandardNormal);
    let delta2 = params.sigma_delta() * rng.sample::<f64, _>(StandardNormal);

    let mut draw_arm = |mu: f64, shift: f64, n: u64| -> (f64, f64) {
        let mut sum = 0.0;
        let mut values = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let y = mu + theta + shift + params.sigma_e() * rng.sample::<f64, _>(StandardNormal);
            sum += y;
            values.push(y);
        }
        let mean = sum / n as f64;
        let ss = values.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>();
        (mean, ss)
    };
    let (mean1, ss1) = draw_arm(params.mu1(), delta1, design.n1());
    let (mean2, ss2) = draw_arm(params.mu2(), delta2, design.n2());
    let df = (design.n1() + design.n2() - 2) as f64;
    let pooled_sd = ((ss1 + ss2) / df).sqrt().max(f64::MIN_POSITIVE);
    TwoSampleSummary::new(mean1, mean2, pooled_sd, design.n1(), design.n2())
        .expect("simulated summary is always valid")
}

struct RepOutcome {
    t: f64,
    sig_correct: bool,
    sig_wrong: bool,
    naive_covered: bool,
    bi_covered: bool,
}

/// Run the full tally for one configuration at significance level alpha.
pub fn run_tally(cfg: &SimConfig, alpha: f64) -> Result<SimOutcomeTally> {
    let design = DesignSpec::new(cfg.design.n1(), cfg.design.n2(), alpha)?;
    let t_crit = central_t_quantile(1.0 - alpha / 2.0, design.degrees_of_freedom())?;
    let true_diff = cfg.params.mu1() - cfg.params.mu2();
    let omega = cfg.params.omega();
    // interval half-widths are t_crit * pooled_sd * these factors
    let nh = design.harmonic_mean_n();
    let hw_naive = t_crit * (2.0 / nh).sqrt();
    let hw_bi = t_crit * (2.0 / nh + 2.0 * omega * omega).sqrt();

    let outcomes: Vec<RepOutcome> = (0..cfg.n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(cfg.seed, rep);
            let summary = simulate_experiment(&cfg.params, &design, &mut rng);
            let t = summary.t_statistic();
            let significant = t.abs() >= t_crit;
            // with a null true effect, "correct" direction is the upper tail
            let upper_is_correct = true_diff >= 0.0;
            let correct_direction = if upper_is_correct { t > 0.0 } else { t < 0.0 };
            let diff = summary.mean1() - summary.mean2();
            let (naive_lo, naive_hi) = (diff - hw_naive * summary.pooled_sd(), diff + hw_naive * summary.pooled_sd());
            let (bi_lo, bi_hi) = (diff - hw_bi * summary.pooled_sd(), diff + hw_bi * summary.pooled_sd());
            RepOutcome {
                t,
                sig_correct: significant && correct_direction,
                sig_wrong: significant && !correct_direction,
                naive_covered: naive_lo <= true_diff && true_diff <= naive_hi,
                bi_covered: bi_lo <= true_diff && true_diff <= bi_hi,
            }
        })
        .collect();

    // sequential reduction keeps float accumulation order fixed
    let mut tally = SimOutcomeTally {
        n_reps: cfg.n_reps,
        significant_correct: 0,
        significant_wrong: 0,
        non_significant: 0,
        naive_covered: 0,
        bi_covered: 0,
        mean_t_bits: 0,
        sd_t_bits: 0,
    };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for o in &outcomes {
        if o.sig_correct {
            tally.significant_correct += 1;
        } else if o.sig_wrong {
            tally.significant_wrong += 1;
        } else {
            tally.non_significant += 1;
        }
        if o.naive_covered {
            tally.naive_covered += 1;
        }
        if o.bi_covered {
            tally.bi_covered += 1;
        }
        sum += o.t;
        sum_sq += o.t * o.t;
    }
    let n = cfg.n_reps as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    tally.mean_t_bits = mean.to_bits();
    tally.sd_t_bits = var.sqrt().to_bits();
    Ok(tally)
}
