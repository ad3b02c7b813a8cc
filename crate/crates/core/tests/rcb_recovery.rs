//! Recovery of known variance components by the RCB method-of-moments
//! estimator on seeded synthetic data.

use rand::Rng;
use rand_distr::StandardNormal;
use replicore::eer::{rcb_variance_components, RcbLayout, RcbObservation};
use replicore::sim::replicate_rng;

struct Truth {
    sigma2_block: f64,
    sigma2_interaction: f64,
    sigma2_error: f64,
}

fn draw_dataset(layout: &RcbLayout, truth: &Truth, seed: u64, rep: u64) -> Vec<RcbObservation> {
    let mut rng = replicate_rng(seed, rep);
    let b = layout.blocks as usize;
    let t = layout.treatments as usize;
    let r = layout.reps as usize;
    let mut normal = || rng.sample::<f64, _>(StandardNormal);

    let block_fx: Vec<f64> = (0..b).map(|_| truth.sigma2_block.sqrt() * normal()).collect();
    // fixed treatment effects: arbitrary, should not leak into the components
    let trt_fx: Vec<f64> = (0..t).map(|ti| 3.0 * ti as f64 - 1.0).collect();
    let mut inter = vec![vec![0.0; t]; b];
    for row in inter.iter_mut() {
        for cell in row.iter_mut() {
            *cell = truth.sigma2_interaction.sqrt() * normal();
        }
    }

    let mut rows = Vec::with_capacity(b * t * r);
    for bi in 0..b {
        for ti in 0..t {
            for ri in 0..r {
                rows.push(RcbObservation {
                    block: format!("blk{bi}"),
                    treatment: format!("trt{ti}"),
                    rep: format!("{ri}"),
                    value: 10.0
                        + block_fx[bi]
                        + trt_fx[ti]
                        + inter[bi][ti]
                        + truth.sigma2_error.sqrt() * normal(),
                });
            }
        }
    }
    rows
}

#[test]
fn mean_estimates_unbiased_over_2000_datasets() {
    let layout = RcbLayout::new(6, 3, 2).unwrap();
    let truth = Truth {
        sigma2_block: 1.5,
        sigma2_interaction: 0.8,
        sigma2_error: 2.0,
    };
    let n = 2_000u64;
    let mut block = Vec::with_capacity(n as usize);
    let mut inter = Vec::with_capacity(n as usize);
    let mut error = Vec::with_capacity(n as usize);
    for rep in 0..n {
        let rows = draw_dataset(&layout, &truth, 4242, rep);
        let vc = rcb_variance_components(&rows, &layout).unwrap();
        // pre-truncation estimates are the unbiased ones
        block.push(vc.sigma2_block_raw);
        inter.push(vc.sigma2_interaction_raw);
        error.push(vc.sigma2_error);
    }
    let check = |name: &str, est: &[f64], truth: f64| {
        let m = est.iter().sum::<f64>() / est.len() as f64;
        let var = est.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / (est.len() - 1) as f64;
        let se = (var / est.len() as f64).sqrt();
        println!("{name}: mean {m:.4} truth {truth:.4} mc-se {se:.4}");
        assert!((m - truth).abs() <= 3.0 * se, "{name}: mean {m} vs truth {truth}, se {se}");
    };
    check("sigma2_block", &block, truth.sigma2_block);
    check("sigma2_interaction", &inter, truth.sigma2_interaction);
    check("sigma2_error", &error, truth.sigma2_error);
}

#[test]
fn large_design_recovers_components_tightly() {
    let layout = RcbLayout::new(200, 3, 4).unwrap();
    let truth = Truth {
        sigma2_block: 1.1,
        sigma2_interaction: 3.9,
        sigma2_error: 9.1,
    };
    let rows = draw_dataset(&layout, &truth, 7, 0);
    let vc = rcb_variance_components(&rows, &layout).unwrap();
    assert!((vc.sigma2_interaction - truth.sigma2_interaction).abs() / truth.sigma2_interaction < 0.15);
    assert!((vc.sigma2_error - truth.sigma2_error).abs() / truth.sigma2_error < 0.15);
    assert!((vc.sigma2_block - truth.sigma2_block).abs() / truth.sigma2_block < 0.35);
    let omega_true = (truth.sigma2_interaction / truth.sigma2_error).sqrt();
    assert!((vc.eer_hat - omega_true).abs() < 0.08);
    assert!(!vc.truncated);
}

#[test]
fn eer_hat_scale_invariant() {
    let layout = RcbLayout::new(8, 4, 3).unwrap();
    let truth = Truth {
        sigma2_block: 0.5,
        sigma2_interaction: 1.3,
        sigma2_error: 2.7,
    };
    let rows = draw_dataset(&layout, &truth, 99, 0);
    let base = rcb_variance_components(&rows, &layout).unwrap();
    for scale in [1e-3, 0.1, 10.0, 1e4] {
        let scaled: Vec<RcbObservation> = rows
            .iter()
            .map(|o| RcbObservation { value: o.value * scale, ..o.clone() })
            .collect();
        let vc = rcb_variance_components(&scaled, &layout).unwrap();
        assert!((vc.eer_hat - base.eer_hat).abs() <= 1e-10, "scale {scale}");
    }
}
