//! Plausible EER values from data: bounds via intraclass correlation,
//! EER from published variance proportions, and ANOVA method-of-moments
//! variance components for balanced randomized-complete-block designs with
//! replicated treatments per block.

use std::collections::BTreeMap;

use crate::error::{data, domain, Result};

/// Published multi-laboratory EER estimates (Kafkafi et al. behavioral
/// endpoints), bundled as a reference dataset for the `eer` tooling.
pub const MULTILAB_EER_REFERENCE: [(&str, f64); 17] = [
    ("lingering time", 0.63),
    ("distance traveled", 0.57),
    ("segment max speed", 0.40),
    ("excursions", 0.37),
    ("time for tum", 0.13),
    ("radius of tum", 0.34),
    ("segment length", 0.51),
    ("center time", 0.40),
    ("progression segments", 0.14),
    ("segment acceleration", 0.38),
    ("homebase occupancy", 0.0),
    ("lingering mean speed", 0.35),
    ("diversity", 0.0),
    ("stops per excursion", 0.18),
    ("lingering spatial spread", 0.19),
    ("relative activity decrease", 0.03),
    ("latency to half max speed", 0.0),
];

/// Published variance-component estimates for the wireworm RCB study
/// (block, block x treatment, residual, EER). The raw data behind these is
/// not bundled; the numbers are reference output of a mixed-model fit and
/// are not a regression target for [`rcb_variance_components`].
pub const WIREWORM_REFERENCE: (f64, f64, f64, f64) = (1.1052, 3.8559, 9.1056, 0.6507);

/// Upper bound on the EER implied by an intraclass correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IccBound {
    pub rho: f64,
    pub omega_upper: f64,
}

/// omega < sqrt(rho / (1 - rho)).
pub fn eer_bound_from_icc(rho: f64) -> Result<IccBound> {
    if !(0.0..1.0).contains(&rho) {
        return Err(domain(format!("intraclass correlation must lie in [0, 1), got {rho}")));
    }
    Ok(IccBound {
        rho,
        omega_upper: (rho / (1.0 - rho)).sqrt(),
    })
}

/// EER from published proportions of total variance for interaction and
/// error; the total-variance denominator cancels.
pub fn eer_from_variance_proportions(prop_interaction: f64, prop_error: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prop_interaction) || !(0.0..=1.0).contains(&prop_error) {
        return Err(domain("variance proportions must lie in [0, 1]"));
    }
    if prop_error == 0.0 {
        return Err(domain("error variance proportion must be positive"));
    }
    Ok((prop_interaction / prop_error).sqrt())
}

/// Balanced RCB layout: b blocks, t treatments, r replicates per cell.
/// r >= 2 is required so interaction and residual are separable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RcbLayout {
    pub blocks: u64,
    pub treatments: u64,
    pub reps: u64,
}

impl RcbLayout {
    pub fn new(blocks: u64, treatments: u64, reps: u64) -> Result<Self> {
        if blocks < 2 || treatments < 2 || reps < 2 {
            return Err(domain(format!(
                "RCB layout needs blocks, treatments, reps all >= 2, got ({blocks}, {treatments}, {reps})"
            )));
        }
        Ok(Self { blocks, treatments, reps })
    }
}

/// One response keyed by (block, treatment, replicate) labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RcbObservation {
    pub block: String,
    pub treatment: String,
    pub rep: String,
    pub value: f64,
}

/// Method-of-moments variance components under the unrestricted mixed model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceComponents {
    pub sigma2_block: f64,
    pub sigma2_interaction: f64,
    pub sigma2_error: f64,
    pub eer_hat: f64,
    /// Pre-truncation estimates, possibly negative.
    pub sigma2_block_raw: f64,
    pub sigma2_interaction_raw: f64,
    /// Set when a negative component estimate was truncated to 0.
    pub truncated: bool,
}

/// ANOVA estimation for a complete balanced RCB table with replicated
/// cells: MS_residual estimates sigma2_e, (MS_bt - MS_residual)/r estimates
/// the interaction component, (MS_block - MS_bt)/(r t) the block component.
pub fn rcb_variance_components(
    observations: &[RcbObservation],
    layout: &RcbLayout,
) -> Result<VarianceComponents> {
    let b = layout.blocks as usize;
    let t = layout.treatments as usize;
    let r = layout.reps as usize;
    let expected = b * t * r;
    if observations.len() != expected {
        return Err(data(format!(
            "expected {expected} observations for a {b}x{t}x{r} layout, got {}",
            observations.len()
        )));
    }

    // map labels to dense indices in first-appearance order
    let mut blocks: BTreeMap<&str, usize> = BTreeMap::new();
    let mut trts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cells: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for obs in observations {
        if !obs.value.is_finite() {
            return Err(data(format!("non-finite response in cell ({}, {})", obs.block, obs.treatment)));
        }
        let nb = blocks.len();
        let bi = *blocks.entry(&obs.block).or_insert(nb);
        let nt = trts.len();
        let ti = *trts.entry(&obs.treatment).or_insert(nt);
        cells.entry((bi, ti)).or_default().push(obs.value);
    }
    if blocks.len() != b || trts.len() != t {
        return Err(data(format!(
            "layout declares {b} blocks and {t} treatments, data has {} and {}",
            blocks.len(),
            trts.len()
        )));
    }
    if cells.len() != b * t || cells.values().any(|v| v.len() != r) {
        return Err(data("table is unbalanced: every (block, treatment) cell needs exactly `reps` values"));
    }

    let n = expected as f64;
    let grand = observations.iter().map(|o| o.value).sum::<f64>() / n;

    let mut cell_mean = vec![vec![0.0; t]; b];
    for ((bi, ti), vals) in &cells {
        cell_mean[*bi][*ti] = vals.iter().sum::<f64>() / r as f64;
    }
    let block_mean: Vec<f64> = (0..b)
        .map(|bi| cell_mean[bi].iter().sum::<f64>() / t as f64)
        .collect();
    let trt_mean: Vec<f64> = (0..t)
        .map(|ti| (0..b).map(|bi| cell_mean[bi][ti]).sum::<f64>() / b as f64)
        .collect();

    let (bf, tf, rf) = (b as f64, t as f64, r as f64);
    let ss_block = tf * rf * block_mean.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>();
    let ss_bt: f64 = rf
        * (0..b)
            .flat_map(|bi| (0..t).map(move |ti| (bi, ti)))
            .map(|(bi, ti)| {
                let dev = cell_mean[bi][ti] - block_mean[bi] - trt_mean[ti] + grand;
                dev * dev
            })
            .sum::<f64>();
    let ss_res: f64 = cells
        .iter()
        .map(|((bi, ti), vals)| {
            let m = cell_mean[*bi][*ti];
            vals.iter().map(|y| (y - m) * (y - m)).sum::<f64>()
        })
        .sum();

    let ms_block = ss_block / (bf - 1.0);
    let ms_bt = ss_bt / ((bf - 1.0) * (tf - 1.0));
    let ms_res = ss_res / (bf * tf * (rf - 1.0));

    if ms_res <= 0.0 {
        return Err(data("zero residual variance: responses are constant within every cell"));
    }

    let interaction_raw = (ms_bt - ms_res) / rf;
    let block_raw = (ms_block - ms_bt) / (rf * tf);
    let truncated = interaction_raw < 0.0 || block_raw < 0.0;
    let sigma2_interaction = interaction_raw.max(0.0);
    let sigma2_block = block_raw.max(0.0);

    Ok(VarianceComponents {
        sigma2_block,
        sigma2_interaction,
        sigma2_error: ms_res,
        eer_hat: (sigma2_interaction / ms_res).sqrt(),
        sigma2_block_raw: block_raw,
        sigma2_interaction_raw: interaction_raw,
        truncated,
    })
}
