//! Distribution kernel vs. the independent quadrature oracle, plus
//! quantile round trips and the degenerate/limit identities.

use replicore::dist::{
    central_t_cdf, central_t_quantile, noncentral_t_cdf, normal_cdf, normal_quantile,
    DegreesOfFreedom, Noncentrality,
};

const DF_LATTICE: [f64; 5] = [1.0, 5.0, 20.0, 100.0, 598.0];
const NCP_LATTICE: [f64; 11] = [-20.0, -10.0, -5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0, 10.0, 20.0];
const T_LATTICE: [f64; 17] = [
    -40.0, -20.0, -10.0, -5.0, -3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0,
    40.0,
];

#[test]
fn noncentral_t_matches_quadrature_oracle() {
    let mut worst = 0.0f64;
    let mut worst_at = (0.0, 0.0, 0.0);
    for &df in &DF_LATTICE {
        let dfv = DegreesOfFreedom::new(df).unwrap();
        for &ncp in &NCP_LATTICE {
            let ncpv = Noncentrality::new(ncp).unwrap();
            for &t in &T_LATTICE {
                let got = noncentral_t_cdf(t, dfv, ncpv);
                let want = replicore_oracle::noncentral_t_cdf(t, df, ncp);
                let err = (got - want).abs();
                if err > worst {
                    worst = err;
                    worst_at = (t, df, ncp);
                }
            }
        }
    }
    println!("worst |cdf - oracle| = {worst:.3e} at (t, df, ncp) = {worst_at:?}");
    assert!(worst <= 1e-8, "worst error {worst:.3e} at {worst_at:?}");
}

#[test]
fn central_t_matches_oracle_and_degeneracy() {
    for &df in &DF_LATTICE {
        let dfv = DegreesOfFreedom::new(df).unwrap();
        for &t in &T_LATTICE {
            let central = central_t_cdf(t, dfv);
            let oracle = replicore_oracle::central_t_cdf(t, df);
            assert!((central - oracle).abs() <= 1e-8, "t={t} df={df}");
            // ncp = 0 reduces to the central distribution
            let zero = noncentral_t_cdf(t, dfv, Noncentrality::new(0.0).unwrap());
            assert!((zero - central).abs() <= 1e-10, "t={t} df={df}");
        }
    }
}

#[test]
fn normal_cdf_matches_oracle() {
    let mut z = -8.0;
    while z <= 8.0 {
        assert!((normal_cdf(z) - replicore_oracle::phi(z)).abs() <= 1e-10, "z={z}");
        z += 0.25;
    }
    // large-df limit of the central t
    let big = DegreesOfFreedom::new(1e6).unwrap();
    let mut t = -6.0;
    while t <= 6.0 {
        assert!((central_t_cdf(t, big) - normal_cdf(t)).abs() <= 1e-4, "t={t}");
        t += 0.5;
    }
}

#[test]
fn quantile_round_trips() {
    let probs = [
        1e-6, 1e-4, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975, 0.995, 0.9999, 1.0 - 1e-6,
    ];
    for &p in &probs {
        let z = normal_quantile(p).unwrap();
        assert!((normal_cdf(z) - p).abs() <= 1e-9, "normal p={p}");
        for &df in &DF_LATTICE {
            let dfv = DegreesOfFreedom::new(df).unwrap();
            let t = central_t_quantile(p, dfv).unwrap();
            assert!((central_t_cdf(t, dfv) - p).abs() <= 1e-9, "t p={p} df={df}");
        }
    }
    // t-space round trip away from the tails
    for &df in &DF_LATTICE {
        let dfv = DegreesOfFreedom::new(df).unwrap();
        for &t in &[-3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0] {
            let back = central_t_quantile(central_t_cdf(t, dfv), dfv).unwrap();
            assert!((back - t).abs() <= 1e-9, "t={t} df={df}");
        }
    }
}
