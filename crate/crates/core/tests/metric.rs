use std::sync::Arc;

use proptest::prelude::*;
use stretch_core::flow::sample_liouville;
use stretch_core::metric::{curvature_thresholds, domain_grid, Bump};
use stretch_core::{ConformalFactor, ConformalMetric, PhiSpec, C64};

fn spec() -> impl Strategy<Value = PhiSpec> {
    let bump = (0.0f64..0.6, 0.0f64..6.3, -1.5f64..1.5, 0.3f64..0.8)
        .prop_map(|(r, a, amp, w)| Bump { center: [r * a.cos(), r * a.sin()], amplitude: amp, width: w });
    prop::collection::vec(bump, 1..3).prop_map(|bumps| PhiSpec { bumps, offset: 0.0, periodization_depth: 10 })
}

/// `K = -Delta log(lambda) / lambda^2` with a Richardson-extrapolated five-point Laplacian.
fn curvature_fd(m: &ConformalMetric, x: C64) -> f64 {
    let l = |z: C64| m.density(z).unwrap().ln();
    let lap = |h: f64| (l(x + h) + l(x - h) + l(x + C64::new(0.0, h)) + l(x - C64::new(0.0, h)) - 4.0 * l(x)) / (h * h);
    let h = 2e-3;
    -(4.0 * lap(h / 2.0) - lap(h)) / 3.0 / m.density(x).unwrap().powi(2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curvature_matches_finite_differences(s in spec(), t in 0.0f64..1.0) {
        let phi = Arc::new(ConformalFactor::new(&s).unwrap());
        let th = curvature_thresholds(&phi, &domain_grid(12));
        let eps = 0.5 * th.eps_plus.min(1.0) * t;
        let m = ConformalMetric::new(phi, eps).unwrap();
        for z in sample_liouville(6, 3) {
            let k = m.curvature(z.x).unwrap();
            prop_assert!((k - curvature_fd(&m, z.x)).abs() < 1e-7 * k.abs().max(1.0), "{} vs {}", k, curvature_fd(&m, z.x));
        }
    }

    #[test]
    fn thresholds_converge_under_refinement(s in spec()) {
        let phi = ConformalFactor::new(&s).unwrap();
        let coarse = curvature_thresholds(&phi, &domain_grid(12));
        let fine = curvature_thresholds(&phi, &domain_grid(48));
        for (c, f) in [(coarse.eps_plus, fine.eps_plus), (coarse.eps_minus, fine.eps_minus)] {
            if f.is_finite() {
                prop_assert!((c - f).abs() <= 1e-6 * f.abs(), "{} vs {}", c, f);
            }
        }
        let samples: Vec<f64> = domain_grid(96).iter().map(|&x| phi.jet_in_domain(x).laplacian_hyp(x)).collect();
        for &l in &samples {
            prop_assert!(-l <= (1.0 + 1e-9) / coarse.eps_plus && l <= (1.0 + 1e-9) / -coarse.eps_minus, "{}", l);
        }
        let phi = Arc::new(phi);
        if fine.eps_plus.is_finite() {
            let m = ConformalMetric::new(phi, 0.97 * fine.eps_plus);
            if let Ok(m) = m {
                for z in sample_liouville(2000, 6) {
                    prop_assert!(m.curvature(z.x).unwrap() < 0.0);
                }
            }
        }
    }
}
