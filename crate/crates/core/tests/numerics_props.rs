use fairdiff::diffusion::{build_schedule, q_sample};
use fairdiff::numerics::{open_sigmoid, shannon_entropy, sigmoid, softmax_tau, SeededRng};
use proptest::prelude::*;

proptest! {
    #[test]
    fn softmax_is_a_distribution(z in prop::collection::vec(-500.0f64..500.0, 1..50), tau in 0.01f64..10.0) {
        let p = softmax_tau(&z, tau).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let h = shannon_entropy(&p).unwrap();
        prop_assert!(h >= 0.0 && h <= (z.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn softmax_ignores_shifts(z in prop::collection::vec(-5.0f64..5.0, 2..20), c in -100.0f64..100.0) {
        let a = softmax_tau(&z, 1.0).unwrap();
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        let b = softmax_tau(&shifted, 1.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_is_symmetric_and_open(x in -800.0f64..800.0) {
        prop_assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
        let s = open_sigmoid(x);
        prop_assert!(s > 0.0 && s < 1.0);
    }

    #[test]
    fn schedule_is_monotone(steps in 1usize..60, lo in 1e-5f64..1e-2, span in 0.0f64..0.2) {
        let s = build_schedule::<f64>(steps, 0, lo, lo + span).unwrap();
        for t in 1..=steps {
            let ab = s.alpha_bar(t);
            prop_assert!(ab > 0.0 && ab < 1.0);
            if t > 1 {
                prop_assert!(ab < s.alpha_bar(t - 1));
            }
        }
    }
}

#[test]
fn forward_noising_moments() {
    let s = build_schedule::<f64>(10, 0, 1e-3, 0.3).unwrap();
    let x0 = [1.0, 0.0];
    let t = 7;
    let n = 100_000;
    let mut rng = SeededRng::new(3);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let noise: Vec<f64> = rng.normal_vec(2);
        let x = q_sample(&x0, t, &noise, &s).unwrap();
        sum += x[0];
        sq += x[0] * x[0];
    }
    let mean = sum / n as f64;
    let var = sq / n as f64 - mean * mean;
    let ab = s.alpha_bar(t);
    let sd = (1.0 - ab).sqrt();
    assert!((mean - ab.sqrt()).abs() < 3.0 * sd / (n as f64).sqrt(), "mean {mean}");
    assert!((var - (1.0 - ab)).abs() < 3.0 * (1.0 - ab) * (2.0 / n as f64).sqrt(), "var {var}");
}
