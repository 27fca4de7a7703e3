//! Experiment configuration, schema version 1.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stretch_core::busemann::BusemannOptions;
use stretch_core::flow::VarianceOptions;
use stretch_core::geodesics::{NPolicy, SolverOptions, SpectrumOptions};
use stretch_core::metric::{Bump, PhiSpec};
use stretch_core::report::hash_of;
use stretch_core::thermo::{Estimator, ThermoOptions};
use stretch_core::verify::{config_a, config_b, VerifySettings};
use stretch_core::{Error, FuchsianGroup, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Root of the content-addressed spectrum cache.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
    #[serde(default)]
    pub group: GroupConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub thermo: ThermoConfig,
    #[serde(default)]
    pub variance: VarianceConfig,
    #[serde(default)]
    pub metric: MetricConfig,
    #[serde(default)]
    pub ladder: LadderConfig,
    /// Further metrics for distance matrices.
    #[serde(default)]
    pub compare: Vec<NamedMetric>,
    #[serde(default)]
    pub busemann: BusemannConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupConfig {
    pub name: String,
    /// Permutation of the generator indices used by every search.
    pub generator_order: [u8; 8],
}

impl Default for GroupConfig {
    fn default() -> Self {
        GroupConfig { name: "bolza".into(), generator_order: FuchsianGroup::bolza().order() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub cap: f64,
    pub n_min: usize,
    pub n_per_length: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub include_powers: bool,
    pub max_classes: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        let n = NPolicy::default();
        let s = SolverOptions::default();
        SpectrumConfig { cap: 10.0, n_min: n.min, n_per_length: n.per_length, max_iter: s.max_iter, tol: s.tol, include_powers: false, max_classes: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermoConfig {
    pub window: f64,
    pub width: f64,
    pub estimator: Estimator,
}

impl Default for ThermoConfig {
    fn default() -> Self {
        ThermoConfig { window: 9.0, width: 1.0, estimator: Estimator::Calibrated }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VarianceConfig {
    pub n: usize,
    pub t: f64,
    pub h: f64,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        let v = VarianceOptions::default();
        VarianceConfig { n: v.n, t: v.t, h: v.h }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub eps: f64,
    #[serde(default)]
    pub bumps: Vec<Bump>,
    #[serde(default)]
    pub offset: f64,
    #[serde(default = "default_depth")]
    pub periodization_depth: usize,
}

fn default_depth() -> usize {
    PhiSpec::constant(0.0).periodization_depth
}

impl MetricConfig {
    fn from_spec(eps: f64, s: PhiSpec) -> MetricConfig {
        MetricConfig { eps, bumps: s.bumps, offset: s.offset, periodization_depth: s.periodization_depth }
    }

    pub fn phi(&self) -> PhiSpec {
        PhiSpec { bumps: self.bumps.clone(), offset: self.offset, periodization_depth: self.periodization_depth }
    }
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig::from_spec(0.02, config_a())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedMetric {
    pub name: String,
    #[serde(flatten)]
    pub metric: MetricConfig,
}

/// Values of eps for configuration A in `verify`; empty keeps the profile's ladder.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderConfig {
    pub eps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BusemannConfig {
    pub classes: usize,
    pub nodes: usize,
    pub t_trunc: f64,
    pub panel_length: f64,
    pub degree: usize,
}

impl Default for BusemannConfig {
    fn default() -> Self {
        let b = BusemannOptions::default();
        BusemannConfig { classes: 10, nodes: 16, t_trunc: b.t_trunc, panel_length: b.panel_length, degree: b.degree }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Full,
    Quick,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub profile: Profile,
    /// Criteria to run; empty means all.
    pub criteria: Vec<u8>,
    /// Second bump configuration; the first is `[metric]`.
    pub second: Vec<Bump>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { profile: Profile::Full, criteria: Vec::new(), second: config_b().bumps }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        if self.group.name != "bolza" {
            return Err(bad(format!("unknown group {:?}", self.group.name)));
        }
        FuchsianGroup::bolza_with_order(self.group.generator_order)?;
        let s = &self.spectrum;
        if !(s.cap > 0.0 && s.cap <= 14.0) {
            return Err(bad("spectrum.cap must lie in (0, 14]"));
        }
        if s.n_min < 8 || !(s.n_per_length > 0.0) || s.max_iter == 0 || !(s.tol > 0.0) || s.max_classes == 0 {
            return Err(bad("spectrum discretization settings must be positive (n_min >= 8)"));
        }
        let t = &self.thermo;
        if !(t.width > 0.0) || !(t.window > 0.0) || t.window + t.width > s.cap + 1e-12 {
            return Err(bad("thermo window [window, window + width] must be positive and end by spectrum.cap"));
        }
        let v = &self.variance;
        if v.n < 2 || !(v.t > 0.0) || !(v.h > 0.0) || v.h > v.t {
            return Err(bad("variance needs n >= 2 and 0 < h <= t"));
        }
        let mut names = vec!["g0".to_string(), "g".to_string()];
        self.metric.phi().validate()?;
        check_eps(self.metric.eps)?;
        for m in &self.compare {
            m.metric.phi().validate()?;
            check_eps(m.metric.eps)?;
            if names.contains(&m.name) {
                return Err(bad(format!("metric name {:?} is used twice", m.name)));
            }
            names.push(m.name.clone());
        }
        for &e in &self.ladder.eps {
            check_eps(e)?;
        }
        let b = &self.busemann;
        if b.classes == 0 || b.nodes < 2 || !(b.t_trunc > 2.0) || !(b.panel_length > 0.0) || b.degree < 2 {
            return Err(bad("busemann settings out of range"));
        }
        if let Some(c) = self.verify.criteria.iter().find(|&&c| !(1..=11).contains(&c)) {
            return Err(bad(format!("no criterion {c}")));
        }
        PhiSpec { bumps: self.verify.second.clone(), ..self.metric.phi() }.validate()
    }

    /// Hash of everything that affects results; paths are excluded.
    pub fn hash(&self) -> String {
        hash_of(&ExperimentConfig { output: None, cache: None, ..self.clone() })
    }

    pub fn group(&self) -> Result<FuchsianGroup> {
        FuchsianGroup::bolza_with_order(self.group.generator_order)
    }

    pub fn spectrum_options(&self) -> SpectrumOptions {
        let s = &self.spectrum;
        let mut o = SpectrumOptions::new(s.cap);
        o.n_policy = NPolicy { min: s.n_min, per_length: s.n_per_length };
        o.solver = SolverOptions { max_iter: s.max_iter, tol: s.tol };
        o.enumerate.include_powers = s.include_powers;
        o.enumerate.max_classes = s.max_classes;
        o
    }

    pub fn thermo_options(&self) -> ThermoOptions {
        ThermoOptions { t: self.thermo.window, width: self.thermo.width, estimator: self.thermo.estimator, ..ThermoOptions::default() }
    }

    pub fn variance_options(&self) -> VarianceOptions {
        VarianceOptions { n: self.variance.n, t: self.variance.t, h: self.variance.h, seed: self.seed }
    }

    pub fn busemann_options(&self) -> BusemannOptions {
        let b = &self.busemann;
        BusemannOptions { t_trunc: b.t_trunc, panel_length: b.panel_length, degree: b.degree, ..BusemannOptions::default() }
    }

    pub fn verify_settings(&self) -> VerifySettings {
        let mut s = match self.verify.profile {
            Profile::Full => VerifySettings::full(),
            Profile::Quick => VerifySettings::quick(),
        };
        s.variance.seed = self.seed;
        if !self.ladder.eps.is_empty() {
            s.ladder = self.ladder.eps.clone();
        }
        s
    }

    pub fn second_phi(&self) -> PhiSpec {
        PhiSpec { bumps: self.verify.second.clone(), ..self.metric.phi() }
    }
}

fn check_eps(e: f64) -> Result<()> {
    if e.is_finite() && e.abs() < 1.0 {
        Ok(())
    } else {
        Err(bad(format!("eps = {e} must be finite with |eps| < 1")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ExperimentConfig::parse("schema_version = 1\n").unwrap();
        assert_eq!(c.seed, 1);
        assert_eq!(c.spectrum.cap, 10.0);
        assert_eq!(c.metric.phi(), config_a());
        assert_eq!(c.second_phi(), config_b());
    }

    #[test]
    fn example_config_parses() {
        let c = ExperimentConfig::parse(include_str!("../../../configs/example.toml")).unwrap();
        assert_eq!(c.compare[0].metric.bumps.len(), 2);
        assert_eq!(c.ladder.eps, VerifySettings::full().ladder);
        assert!((c.metric.bumps[0].center[0] - config_a().bumps[0].center[0]).abs() < 1e-4);
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig::parse("schema_version = 1\n[[compare]]\nname = \"b\"\neps = -0.03\n").unwrap();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "schema_version = 2\n",
            "schema_version = 1\nunknown = 3\n",
            "schema_version = 1\n[spectrum]\ncap = 8.0\n",
            "schema_version = 1\n[metric]\neps = 0.1\nbumps = [{ center = [1.2, 0.0], amplitude = 1.0, width = 0.5 }]\n",
            "schema_version = 1\n[group]\ngenerator_order = [0, 0, 1, 2, 3, 4, 5, 6]\n",
            "schema_version = 1\n[verify]\ncriteria = [12]\n",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn hash_ignores_paths() {
        let a = ExperimentConfig::parse("schema_version = 1\noutput = \"x\"\n").unwrap();
        let b = ExperimentConfig::parse("schema_version = 1\noutput = \"y\"\ncache = \"z\"\n").unwrap();
        let c = ExperimentConfig::parse("schema_version = 1\nseed = 2\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
