use std::sync::Arc;

use stretch_core::geodesics::{build_double_spectrum, SpectrumOptions};
use stretch_core::verify::config_a;
use stretch_core::{ConformalFactor, ConformalMetric};

#[test]
fn cache_is_coherent_across_caps() {
    let metric = ConformalMetric::new(Arc::new(ConformalFactor::new(&config_a()).unwrap()), 0.02).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (wide, hit) = build_double_spectrum(&metric, &SpectrumOptions::new(10.0), Some(dir.path())).unwrap();
    assert!(!hit);
    let (narrow, _) = build_double_spectrum(&metric, &SpectrumOptions::new(8.0), Some(dir.path())).unwrap();
    let cut = wide.truncated(8.0);
    assert_eq!(cut.entries, narrow.entries);
    assert_eq!(cut.meta.cap, narrow.meta.cap);
    let (again, hit) = build_double_spectrum(&metric, &SpectrumOptions::new(10.0), Some(dir.path())).unwrap();
    assert!(hit);
    assert_eq!(again.to_csv(), wide.to_csv());
    assert_eq!(again.meta, wide.meta);
}
