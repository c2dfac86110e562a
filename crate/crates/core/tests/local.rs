use distdp::audit::{party_ratio, DistributionAParams};
use distdp::distributed::{additive_share, reconstruct, ShareParams};
use distdp::domain::{gap_threshold, sum, GapOutcome, GapParams};
use distdp::local::*;
use distdp::mechanisms::flip_bias_for;
use distdp::rng::seeded;
use distdp::BitVector;
use proptest::prelude::*;

fn bits_strategy(max: usize) -> impl Strategy<Value = BitVector> {
    prop::collection::vec(0u8..=1, 1..=max).prop_map(|v| BitVector::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rr_estimator_is_exactly_unbiased(x in bits_strategy(6), eps in 0.05f64..2.0) {
        let flip = flip_bias_for(eps).unwrap();
        let n = x.len();
        let dist = output_distribution(&rr_sanitizers(n, flip), &x, |c| c.iter().filter(|&&s| s == 1).count()).unwrap();
        let mean: f64 = dist.iter().map(|(&k, p)| p * rr_estimate(k, n, flip)).sum();
        let var: f64 = dist.iter().map(|(&k, p)| p * (rr_estimate(k, n, flip) - mean).powi(2)).sum();
        prop_assert!((mean - sum(&x) as f64).abs() < 1e-9);
        prop_assert!((var.sqrt() - rr_estimate_std(n, flip)).abs() < 1e-9);
    }

    #[test]
    fn padded_gap_reduction_decides_the_promise(half in 2usize..12, kappa_frac in 0.0f64..1.0, tau in 1usize..6, seed in any::<u64>()) {
        let n = 2 * half;
        prop_assume!(tau <= n);
        let kappa = ((n - tau) as f64 * kappa_frac) as usize;
        let inner = sum_to_gap(ExactSum, GapParams::new(kappa, tau).unwrap());
        let outer = gapk_to_gap0(inner, n).unwrap();
        let mut rng = seeded(seed);
        for x in BitVector::all(half) {
            match gap_threshold(&x, outer.params()) {
                GapOutcome::Zero => prop_assert_eq!(outer.decide(&x, &mut rng).unwrap(), 0),
                GapOutcome::One => prop_assert_eq!(outer.decide(&x, &mut rng).unwrap(), 1),
                GapOutcome::Undefined => {}
            }
        }
    }

    #[test]
    fn party_ratios_stay_in_the_two_sided_band(eps in 0.01f64..0.6, p0 in 0.05f64..0.95, tilt in 0.0f64..1.0) {
        let p = DistributionAParams::new(10_000, eps, 4.0).unwrap();
        let a = p.a_density();
        // any ratio p1/p0 in [e^{-2ε}, e^{2ε}]
        let ratio = (-2.0 * eps + 4.0 * eps * tilt).exp();
        let r = party_ratio(ratio * p0, p0, a);
        prop_assert!(r >= 1.0 - 2.0 * a * eps - 1e-12);
        prop_assert!(r <= 1.0 + 4.0 * a * eps + 1e-12);
    }

    #[test]
    fn shares_reconstruct_the_value(v in -5_000.0f64..5_000.0, parts in 1usize..8, seed in any::<u64>()) {
        let params = ShareParams::for_parties(100);
        let sv = additive_share(v, parts, params, &mut seeded(seed)).unwrap();
        prop_assert_eq!(sv.shares.len(), parts);
        let back = reconstruct(&sv);
        prop_assert!((back - (v * 100.0).round() / 100.0).abs() < 1e-9);
    }
}

#[test]
fn multi_round_views_factorise_per_party() {
    let flip = flip_bias_for(0.8).unwrap();
    let parties: Vec<RepeatedFlipParty> = (0..3).map(|_| RepeatedFlipParty { flip, rounds: 2 }).collect();
    let curator = broadcast_curator(|v| v.messages.len());
    for x in BitVector::all(3) {
        let dist = interactive_view_distribution(&parties, &curator, &x, 2).unwrap();
        assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-12);
        for (view, prob) in &dist {
            let product: f64 = (0..3)
                .map(|i| party_transcript_probability(&parties[i], x.get(i), &view.party_transcript(i)).unwrap())
                .product();
            assert!((product - prob).abs() < 1e-12);
        }
    }
}

#[test]
fn interactive_rr_composes_to_twice_the_epsilon() {
    let eps = 0.5;
    let flip = flip_bias_for(eps).unwrap();
    let party = RepeatedFlipParty { flip, rounds: 2 };
    let curator = broadcast_curator(|_| ());
    let d0 = interactive_view_distribution(&[party], &curator, &BitVector::zeros(1), 2).unwrap();
    let d1 = interactive_view_distribution(&[party], &curator, &BitVector::ones(1), 2).unwrap();
    let worst = d0.iter().map(|(v, p)| (d1[v] / p).ln().abs()).fold(0.0, f64::max);
    assert!((worst - 2.0 * (1.0 + eps).ln()).abs() < 1e-12);
}

#[test]
fn laplace_submission_is_centred() {
    let x = BitVector::from_fn(500, |i| i % 4 == 0);
    let errs = distdp::montecarlo::run_trials(3, 2_000, |_, rng| laplace_submission_sum(&x, 1.0, rng).unwrap().0 - sum(&x) as f64);
    let m = distdp::stats::mean(&errs);
    // variance of the sum is 2n/ε²
    let se = (2.0 * 500.0 / 2_000.0f64).sqrt();
    assert!(m.abs() < 4.0 * se, "mean error {m}");
}
