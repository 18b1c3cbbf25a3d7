use csbp_lab::quadrature::{integrate, Tolerance};
use csbp_lab::rng::path_rng;
use csbp_lab::stablejump::StableMeasure;
use proptest::prelude::*;

#[test]
fn tail_mass_differences_match_density_quadrature() {
    for alpha in [1.1, 1.5, 1.9] {
        let m = StableMeasure::new(alpha).unwrap();
        for (e1, e2) in [(1e-4, 1e-2), (0.1, 3.0), (0.5, 40.0)] {
            let q = integrate(|z| m.density(z), e1, e2, Tolerance::rel(1e-12))
                .unwrap()
                .value;
            let d = m.tail_mass(e1).unwrap() - m.tail_mass(e2).unwrap();
            assert!((q - d).abs() <= 1e-9 * d, "alpha={alpha} [{e1},{e2}]: {q} vs {d}");
        }
    }
}

#[test]
fn tail_ratio_at_twice_the_cutoff() {
    // P(Z > 2ε | Z > ε) = 2^{-α} for a pure power tail.
    let alpha = 1.5;
    let m = StableMeasure::new(alpha).unwrap();
    let mut rng = path_rng(3, 0);
    let n = 200_000;
    let eps = 1e-3;
    let hits = (0..n)
        .filter(|_| m.sample_tail(eps, &mut rng) > 2.0 * eps)
        .count();
    let p = 2f64.powf(-alpha);
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    let phat = hits as f64 / n as f64;
    assert!((phat - p).abs() < 4.0 * sd, "{phat} vs {p}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tail_samples_exceed_the_cutoff(alpha in 1.05f64..1.95, le in -8.0f64..1.0, seed in any::<u64>()) {
        let m = StableMeasure::new(alpha).unwrap();
        let eps = 10f64.powf(le);
        let mut rng = path_rng(seed, 0);
        for _ in 0..200 {
            let z = m.sample_tail(eps, &mut rng);
            prop_assert!(z >= eps && z.is_finite(), "{z} < {eps}");
        }
    }

    #[test]
    fn rescaling_preserves_the_log_moment(alpha in 1.05f64..1.95, lx in -2.0f64..2.0) {
        let m = StableMeasure::new(alpha).unwrap();
        let g = |z: f64| z - z.ln_1p();
        let g2 = |z: f64| 1.0 / ((1.0 + z) * (1.0 + z));
        let v = m.integrate_rescaled(g, g2, 1.0, 10f64.powf(lx), 1e-10).unwrap();
        prop_assert!((v - 1.0).abs() <= 1e-6, "{v}");
    }
}

#[test]
fn huge_intensity_stays_bounded_and_centered() {
    use csbp_lab::stablejump::{CutoffScheme, MAX_EXACT_JUMPS};
    let m = StableMeasure::new(1.5).unwrap();
    let s = CutoffScheme::new(1e-3, true).unwrap();
    // Billions of expected jumps above the cutoff, far beyond the exact cap.
    let (lambda, dt) = (1e6, 1.0);
    assert!(lambda * dt * m.tail_mass(1e-3).unwrap() > 1e3 * MAX_EXACT_JUMPS);
    let mut rng = path_rng(6, 0);
    let t = std::time::Instant::now();
    let xs: Vec<f64> = (0..40)
        .map(|_| m.sample_compensated_increment(lambda, dt, s, &mut rng).unwrap())
        .collect();
    assert!(t.elapsed().as_secs_f64() < 20.0);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    assert!(xs.iter().all(|x| x.is_finite()));
    assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
    assert!(m
        .sample_compensated_increment(f64::INFINITY, dt, s, &mut rng)
        .is_err());
}
