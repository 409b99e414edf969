use holonomy_core::holonomy::{calibrate, sigma_area, ConnectionSource, Loop, Plane};
use holonomy_core::resilience::*;
use proptest::prelude::*;

fn calibration() -> holonomy_core::holonomy::CalibrationRecord {
    let probes: Vec<Loop> = [(0.5, 1.0), (1.0, 1.0), (1.0, 2.0)].iter().map(|&(x, r)| rectangle(x, r).unwrap()).collect();
    calibrate(Plane::CI, &probes, 200, ConnectionSource::Analytic).unwrap()
}

proptest! {
    #[test]
    fn delta_sigma_is_exact(x in 0.01f64..3.0, r in 0.0f64..3.0, e1 in -0.05f64..0.05, e2 in -0.05f64..0.05) {
        prop_assume!(r + e2 > 0.0 && x + e1 > 0.0);
        let a = sigma_area(&rectangle(x, r).unwrap()).unwrap();
        let b = sigma_area(&rectangle(x + e1, r + e2).unwrap()).unwrap();
        prop_assert!((b - a - delta_sigma(x, r, e1, e2)).abs() < 1e-12);
    }

    #[test]
    fn seeded_noise_is_reproducible(seed in any::<u64>(), trial in 0u64..1000) {
        let lp = rectangle(1.0, 2.0).unwrap();
        let m = ErrorModel::Gaussian { sigma1: 0.02, sigma2: 0.02, seed };
        prop_assert_eq!(perturbed_loop(&lp, &m, trial).unwrap(), perturbed_loop(&lp, &m, trial).unwrap());
    }
}

#[test]
fn ratio_grows_exponentially() {
    for r in [1.0, 2.0, 3.0] {
        assert!((d_eps1(r) / d_eps2(1.0, r) - derivative_ratio(1.0, r)).abs() < 1e-9 * derivative_ratio(1.0, r));
    }
    assert!((derivative_ratio(1.0, 2.0) - 26.799).abs() < 1e-3);
}

#[test]
fn surface_at_the_figure_dimensions() {
    let g = linspace(-0.05, 0.05, 11);
    let s = sensitivity_surface(1.0, 2.0, &g, &g).unwrap();
    let origin = s.points.iter().find(|p| p.eps1 == 0.0 && p.eps2 == 0.0).unwrap();
    assert_eq!(origin.delta_sigma, 0.0);
    assert!(s.influence_ratio() >= 10.0, "{}", s.influence_ratio());
    assert!(sensitivity_surface(1.0, 2.0, &[], &g).is_err());
}

#[test]
fn zero_noise_gives_zero_error() {
    let cal = calibration();
    let m = ErrorModel::Gaussian { sigma1: 0.0, sigma2: 0.0, seed: 3 };
    let s = monte_carlo_gate_error(&rectangle(1.0, 1.0).unwrap(), &m, 100, GatePath::Fast(&cal)).unwrap();
    assert_eq!(s.mean, 0.0);
    assert!(monte_carlo_gate_error(&rectangle(1.0, 1.0).unwrap(), &ErrorModel::Deterministic { eps1: 0.0, eps2: 0.0 }, 100, GatePath::Fast(&cal)).is_err());
}

#[test]
fn fast_and_slow_paths_agree() {
    let cal = calibration();
    let lp = rectangle(1.0, 1.0).unwrap();
    let m = ErrorModel::Gaussian { sigma1: 0.01, sigma2: 0.01, seed: 11 };
    for t in 0..10 {
        let (fast, _) = trial_distance(&lp, &m, t, GatePath::Fast(&cal)).unwrap();
        let (slow, _) = trial_distance(&lp, &m, t, GatePath::Slow { steps: 2000 }).unwrap();
        assert!((fast - slow).abs() < 1e-4, "{fast} {slow}");
    }
}

#[test]
fn squeezing_noise_decays_with_the_edge() {
    let cal = calibration();
    let edges = vec![0.5, 1.0, 1.5, 2.0];
    let m = ErrorModel::Gaussian { sigma1: 0.0, sigma2: 0.01, seed: 2024 };
    let stats = edges
        .iter()
        .map(|&e| monte_carlo_gate_error(&rectangle(1.0, e).unwrap(), &m, 500, GatePath::Fast(&cal)).unwrap())
        .collect();
    let fit = DecayFit::new(edges, stats).unwrap();
    assert!(fit.monotone);
    assert!((fit.slope + 2.0).abs() <= 0.3, "{}", fit.slope);
}
