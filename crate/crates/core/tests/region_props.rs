use proptest::prelude::*;
use qwiretap::channels::{erasure_wiretap, identity_dilation};
use qwiretap::random;
use qwiretap::{rate_pair_no_interception, rate_pair_nonsecure, rate_pair_secure, CodingConfig, PureState, Register};

fn random_config(x: usize, g1: usize, g2: usize, seed: u64) -> CodingConfig {
    let mut rng = random::rng(seed);
    let phi = PureState::new(
        vec![Register::new("G1", g1), Register::new("G2", g2)],
        random::pure_vector(g1 * g2, &mut rng),
    )
    .unwrap();
    let encoders = (0..x).map(|_| random::isometry(2, g1, &mut rng)).collect();
    CodingConfig::new(random::probability_vector(x, &mut rng), phi, encoders).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn secure_equals_nonsecure_without_eve(x in 1usize..5, g1 in 1usize..3, g2 in 1usize..3, erasure in any::<bool>(), seed: u64) {
        let ch = if erasure { erasure_wiretap(0.3).unwrap() } else { identity_dilation(2).unwrap() }.without_eve();
        let cfg = random_config(x, g1, g2, seed);
        let s = rate_pair_secure(&cfg, &ch).unwrap();
        let ns = rate_pair_nonsecure(&cfg, &ch).unwrap();
        prop_assert!((s.r - ns.r).abs() <= 1e-9 && (s.rp - ns.rp).abs() <= 1e-9, "{s:?} {ns:?}");
    }

    #[test]
    fn rate_orderings(x in 1usize..5, g1 in 1usize..3, g2 in 1usize..3, eps in 0.0f64..=1.0, seed: u64) {
        let ch = erasure_wiretap(eps).unwrap();
        let cfg = random_config(x, g1, g2, seed);
        let s = rate_pair_secure(&cfg, &ch).unwrap();
        let ns = rate_pair_nonsecure(&cfg, &ch).unwrap();
        let ni = rate_pair_no_interception(&cfg, &ch).unwrap();
        prop_assert!(s.r >= 0.0 && s.rp >= 0.0);
        prop_assert!(s.r <= ns.r + 1e-9 && s.rp <= ns.rp + 1e-9);
        prop_assert!(ni.r + 1e-9 >= s.r && ni.rp + 1e-9 >= s.rp);
    }
}

/// Dense coding over the erasure channel: Bob's marginal carries nothing
/// about x, while E G2 learns x on erasure, so (R, R') = (0, [2 − 4ε]_+).
/// Uniform classical bits give (R, R') = ([1 − 2ε]_+, 0).
#[test]
fn erasure_grid_closed_forms() {
    let dense = CodingConfig::dense_coding();
    let classical = CodingConfig::classical(vec![0.5, 0.5], 2).unwrap();
    for i in 0..=20 {
        let eps = i as f64 / 20.0;
        let ch = erasure_wiretap(eps).unwrap();
        let d = rate_pair_secure(&dense, &ch).unwrap();
        assert!(d.r.abs() <= 1e-9, "eps {eps}: {d:?}");
        assert!((d.rp - (2.0 - 4.0 * eps).max(0.0)).abs() <= 1e-9, "eps {eps}: {d:?}");
        let c = rate_pair_secure(&classical, &ch).unwrap();
        assert!((c.r - (1.0 - 2.0 * eps).max(0.0)).abs() <= 1e-9, "eps {eps}: {c:?}");
        assert!(c.rp.abs() <= 1e-9);
        let ns = rate_pair_nonsecure(&dense, &ch).unwrap();
        assert!((ns.rp - 2.0 * (1.0 - eps)).abs() <= 1e-9, "eps {eps}: {ns:?}");
    }
}

#[test]
fn config_json_survives_round_trip() {
    let cfg = random_config(3, 2, 2, 17);
    let back = CodingConfig::from_json(&cfg.to_json().to_string()).unwrap();
    let ch = erasure_wiretap(0.2).unwrap();
    let (a, b) = (rate_pair_secure(&cfg, &ch).unwrap(), rate_pair_secure(&back, &ch).unwrap());
    assert!((a.r - b.r).abs() < 1e-12 && (a.rp - b.rp).abs() < 1e-12);
}
