use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use stretch_core::flow::{sample_liouville, variance, Coboundary, Flow, FlowOptions, Observable, PhasePoint, VarianceOptions};
use stretch_core::metric::{domain_ball_area, domain_grid};
use stretch_core::thermo::{pressure_metric_form, Centered};
use stretch_core::verify::{config_a, config_b};
use stretch_core::{ConformalFactor, ConformalMetric, Octagon};

fn chi2(counts: &[f64], expected: &[f64]) -> f64 {
    counts.iter().zip(expected).map(|(o, e)| (o - e) * (o - e) / e).sum()
}

#[test]
fn liouville_samples_pass_chi_square() {
    let n = 20_000;
    let pts = sample_liouville(n, 4);
    let oct = Octagon::get();
    // radial shells with equal area, 8 sectors, 8 direction bins
    let rho: Vec<f64> = pts.iter().map(|p| 2.0 * p.x.norm().atanh()).collect();
    let total = domain_ball_area(oct.r_f);
    let edges: Vec<f64> = (0..=10).map(|k| k as f64 * oct.r_f / 10.0).collect();
    let mut shells = vec![0.0; 10];
    for &r in &rho {
        shells[edges.iter().rposition(|&e| e <= r).unwrap().min(9)] += 1.0;
    }
    let exp_shells: Vec<f64> = (0..10).map(|k| n as f64 * (domain_ball_area(edges[k + 1]) - domain_ball_area(edges[k])) / total).collect();
    let mut sectors = vec![0.0; 8];
    let mut dirs = vec![0.0; 8];
    for p in &pts {
        sectors[((p.x.arg().rem_euclid(TAU) / (PI / 4.0)) as usize).min(7)] += 1.0;
        dirs[((p.v.arg().rem_euclid(TAU) / (PI / 4.0)) as usize).min(7)] += 1.0;
    }
    let flat = vec![n as f64 / 8.0; 8];
    // 0.999 quantiles: 27.9 for 9 degrees of freedom, 24.3 for 7
    assert!(chi2(&shells, &exp_shells) < 27.9, "shells {shells:?} vs {exp_shells:?}");
    assert!(chi2(&sectors, &flat) < 24.3, "sectors {sectors:?}");
    assert!(chi2(&dirs, &flat) < 24.3, "directions {dirs:?}");
}

#[test]
fn flow_is_reversible() {
    let metric = ConformalMetric::new(Arc::new(ConformalFactor::new(&config_b()).unwrap()), 0.05).unwrap();
    let flow = Flow::new(&metric, FlowOptions::default());
    for (k, z0) in sample_liouville(5, 9).into_iter().enumerate() {
        let z = PhasePoint::unit(&metric, z0.x, z0.v.arg()).unwrap();
        let there = flow.integrate(&z, 6.0 + k as f64).unwrap().end();
        let back = flow.integrate(&there.flip(), 6.0 + k as f64).unwrap().end().flip();
        assert!((back.x - z.x).norm() < 1e-7, "{:?} vs {:?}", back.x, z.x);
        assert!((back.v - z.v).norm() < 1e-7 * z.v.norm());
    }
}

/// Adding `Xw` moves each Birkhoff integral by `w(end) - w(start)`, so the
/// empirical standard deviations differ by at most `2 max|w| / sqrt(T)`.
#[test]
fn variance_ignores_coboundaries() {
    let a = ConformalFactor::new(&config_a()).unwrap();
    let w = ConformalFactor::new(&config_b()).unwrap();
    let max_w = domain_grid(32).iter().map(|&x| w.value_in_domain(x).abs()).fold(0.0, f64::max) * 1.05;
    let (u, xw) = (Centered::new(&a), Coboundary { w: &w });
    let sum = |z: &PhasePoint| u.eval(z) + xw.eval(z);
    for t in [50.0, 200.0] {
        let o = VarianceOptions { n: 200, t, seed: 2, h: 0.1 };
        let v0 = variance(a.group(), &u, &o).unwrap().value;
        let v1 = variance(a.group(), &sum, &o).unwrap().value;
        assert!((v1.sqrt() - v0.sqrt()).abs() <= 2.0 * max_w / t.sqrt() + 1e-6, "T = {t}: {v0} vs {v1}");
        if t == 200.0 {
            assert!((v1 - v0).abs() < 0.02 * v0, "{v0} vs {v1}");
        }
    }
}

/// With shared sample paths the estimates come from one empirical covariance.
#[test]
fn pressure_metric_obeys_cauchy_schwarz() {
    let a = ConformalFactor::new(&config_a()).unwrap();
    let b = ConformalFactor::new(&config_b()).unwrap();
    let o = VarianceOptions { n: 100, t: 30.0, seed: 8, h: 0.1 };
    let g = |x: &ConformalFactor, y: &ConformalFactor| pressure_metric_form(a.group(), x, y, &o).unwrap().value;
    let (aa, bb, ab, ba) = (g(&a, &a), g(&b, &b), g(&a, &b), g(&b, &a));
    assert!(aa > 0.0 && bb > 0.0);
    assert!((ab - ba).abs() < 1e-12);
    assert!(ab * ab <= aa * bb * (1.0 + 1e-12), "{ab}^2 > {aa} {bb}");
}
