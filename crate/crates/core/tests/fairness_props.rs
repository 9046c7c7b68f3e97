use fairdiff::data::PopBin;
use fairdiff::fairness::{pop_loss, rec_distribution_soft, target_distribution, TargetDistribution};
use proptest::prelude::*;

const Q: [f64; 3] = [0.2, 0.3, 0.5];

fn simplex() -> impl Strategy<Value = [f64; 3]> {
    (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_filter_map("nonzero", |(a, b, c)| {
        let s = a + b + c;
        (s > 1e-6).then(|| [a / s, b / s, c / s])
    })
}

fn entropy(p: &[f64; 3]) -> f64 {
    p.iter().filter(|v| **v > 0.0).map(|v| -v * v.ln()).sum()
}

/// Direct evaluation of the three hinges.
fn oracle(rs: &[[f64; 3]], t: &[f64; 3]) -> f64 {
    let b = rs.len() as f64;
    let over: f64 = rs.iter().map(|r| (r[0] - t[0]).max(0.0)).sum::<f64>() / b;
    let under: f64 = rs.iter().map(|r| (t[2] - r[2]).max(0.0)).sum::<f64>() / b;
    let mut mean = [0.0; 3];
    for r in rs {
        for c in 0..3 {
            mean[c] += r[c] / b;
        }
    }
    over + under + (entropy(t) - entropy(&mean)).max(0.0)
}

proptest! {
    #[test]
    fn target_is_a_distribution(hs in prop::collection::vec(simplex(), 1..20), q in simplex()) {
        let t = target_distribution(&hs, q).unwrap();
        prop_assert!((t.target.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(t.target.iter().all(|v| *v >= 0.0));
        prop_assert!((t.gamma - (1.0 - t.mean_history[0])).abs() < 1e-15);
    }

    #[test]
    fn loss_matches_termwise_oracle(rs in prop::collection::vec(simplex(), 1..16), h in simplex()) {
        let t = TargetDistribution::from_mean_history(h, Q).unwrap();
        let l = pop_loss::<f64>(&rs, &t).unwrap();
        prop_assert!(l.total >= 0.0);
        prop_assert!((l.total - oracle(&rs, &t.target)).abs() < 1e-12);
        prop_assert!((l.total - (l.over_high + l.under_low + l.balance)).abs() < 1e-15);
    }

    #[test]
    fn loss_vanishes_at_target(h in simplex(), b in 1usize..10) {
        let t = TargetDistribution::from_mean_history(h, Q).unwrap();
        let l = pop_loss::<f64>(&vec![t.target; b], &t).unwrap();
        prop_assert_eq!(l.total, 0.0);
    }

    #[test]
    fn soft_distribution_is_a_distribution(scores in prop::collection::vec(-5.0f64..5.0, 6..30), k in 1usize..6, tau in 0.05f64..2.0) {
        let bins: Vec<PopBin> = (0..scores.len()).map(|i| PopBin::ALL[i % 3]).collect();
        let soft = rec_distribution_soft(&scores, k, &bins, tau, None, None).unwrap();
        prop_assert!((soft.r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(soft.r.iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn all_head_recommendations_against_prior() {
    // H̄^h = 1 gives γ = 0 and T = Q
    let t = TargetDistribution::from_mean_history([1.0, 0.0, 0.0], Q).unwrap();
    assert_eq!(t.target, Q);
    let l = pop_loss::<f64>(&[[1.0, 0.0, 0.0]], &t).unwrap();
    let expect = 0.8 + 0.5 + entropy(&Q);
    assert!((l.total - expect).abs() < 1e-6);
    assert!((l.total - 2.3297).abs() < 1e-4);
}

#[test]
fn head_free_history_is_its_own_target() {
    let h = [0.0, 0.25, 0.75];
    let t = TargetDistribution::from_mean_history(h, Q).unwrap();
    assert_eq!(t.gamma, 1.0);
    assert_eq!(t.target, h);
}
