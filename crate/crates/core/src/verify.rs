//! The acceptance suite: one check per criterion, shared by the command line
//! `verify` subcommand and the acceptance test target.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::busemann::{axis_integral, busemann, hyperbolic_busemann, BoundaryPoint, BusemannOptions};
use crate::disk::C64;
use crate::distances::{d_length, d_thurston, finsler_norm};
use crate::error::Result;
use crate::flow::{birkhoff_integrals, variance, variance_from_integrals, Coboundary, VarianceOptions};
use crate::fuchsian::{ClassRecord, EnumerateOptions, FuchsianGroup};
use crate::geodesics::{build_double_spectrum, closed_length_from, xray_integral, DoubleSpectrum, NPolicy, SolverOptions, SpectrumOptions};
use crate::metric::{domain_grid, ConformalFactor, ConformalMetric, PhiSpec};
use crate::report::hash_json;
use crate::thermo::{hessian_check, normalize_pressure, Centered, Measure, PotentialCombo, Thermo, ThermoOptions, JU, V};

/// Sizes of the suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub cap: f64,
    pub window: f64,
    pub oracle_cap: f64,
    pub ladder: Vec<f64>,
    pub hessian_eps: f64,
    pub variance: VarianceOptions,
    pub coboundary_times: Vec<f64>,
    pub first_order_count: usize,
    pub first_order_eps: Vec<f64>,
    pub busemann_classes: usize,
    pub busemann_eps: f64,
    pub busemann_nodes: usize,
    pub finsler_eps: f64,
}

impl VerifySettings {
    /// Sizes at which the acceptance tolerances are stated.
    pub fn full() -> VerifySettings {
        VerifySettings {
            cap: 10.0,
            window: 9.0,
            oracle_cap: 8.0,
            ladder: vec![0.005, 0.01, 0.02, 0.04, -0.04],
            hessian_eps: 0.04,
            variance: VarianceOptions { t: 200.0, n: 2000, seed: 1, h: 0.1 },
            coboundary_times: vec![100.0, 200.0, 400.0],
            first_order_count: 20,
            first_order_eps: vec![0.01, 0.02],
            busemann_classes: 10,
            busemann_eps: 0.02,
            busemann_nodes: 16,
            finsler_eps: 0.01,
        }
    }

    /// A fast smoke profile.
    pub fn quick() -> VerifySettings {
        VerifySettings {
            cap: 8.0,
            window: 7.0,
            oracle_cap: 6.0,
            ladder: vec![0.01, 0.02, 0.04, -0.04],
            variance: VarianceOptions { t: 100.0, n: 400, seed: 1, h: 0.1 },
            coboundary_times: vec![25.0, 50.0, 100.0],
            first_order_count: 10,
            busemann_classes: 3,
            busemann_nodes: 8,
            ..VerifySettings::full()
        }
    }
}

/// Outcome of one criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub values: BTreeMap<String, f64>,
}

impl CriterionResult {
    fn new(id: u8, name: &str) -> CriterionResult {
        CriterionResult { id, name: name.to_string(), pass: true, summary: String::new(), values: BTreeMap::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.pass = false;
            if !self.summary.is_empty() {
                self.summary.push_str("; ");
            }
            self.summary.push_str(&format!("failed: {}", what.into()));
        }
    }

    fn set(&mut self, k: impl Into<String>, v: f64) {
        self.values.insert(k.into(), v);
    }

    /// One line for logs.
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let s = if self.summary.is_empty() { String::new() } else { format!(" ({})", self.summary) };
        format!("criterion {:>2} {status} {}{s}", self.id, self.name)
    }
}

pub const NAMES: [&str; 11] = [
    "exact spectrum oracle",
    "pressure normalizations",
    "first-order length perturbation",
    "hessian identity",
    "rigidity functional sign",
    "coboundary degeneracy",
    "intersection inequality",
    "entropy-stretch inequality",
    "distances",
    "busemann conjugacy",
    "determinism",
];

/// Shared state of a suite run: the two bump configurations and memoized spectra.
pub struct Lab {
    pub settings: VerifySettings,
    pub configs: [Arc<ConformalFactor>; 2],
    pub cache: Option<PathBuf>,
    spectra: Mutex<BTreeMap<(usize, u64), Arc<DoubleSpectrum>>>,
    classes: Mutex<Option<Vec<ClassRecord>>>,
}

/// Single bump used as the first configuration.
pub fn config_a() -> PhiSpec {
    PhiSpec::single(C64::from_polar(0.3, 0.4), 1.5, 0.5)
}

/// Two bumps of opposite signs used as the second configuration.
pub fn config_b() -> PhiSpec {
    let mut s = PhiSpec::single(C64::from_polar(0.5, 2.0), 1.0, 0.4);
    s.bumps.extend(PhiSpec::single(C64::from_polar(0.2, -1.2), -0.8, 0.6).bumps);
    s
}

impl Lab {
    pub fn new(settings: VerifySettings, group: &FuchsianGroup, a: &PhiSpec, b: &PhiSpec, cache: Option<PathBuf>) -> Result<Lab> {
        Ok(Lab {
            settings,
            configs: [Arc::new(ConformalFactor::with_group(a, group.clone())?), Arc::new(ConformalFactor::with_group(b, group.clone())?)],
            cache,
            spectra: Mutex::new(BTreeMap::new()),
            classes: Mutex::new(None),
        })
    }

    pub fn group(&self) -> &FuchsianGroup {
        self.configs[0].group()
    }

    fn classes(&self) -> Result<Vec<ClassRecord>> {
        let mut c = self.classes.lock().expect("class lock");
        if c.is_none() {
            *c = Some(self.group().enumerate_classes(self.settings.cap, &EnumerateOptions::default())?);
        }
        Ok(c.clone().expect("just filled"))
    }

    pub fn reference(&self) -> Result<DoubleSpectrum> {
        Ok(DoubleSpectrum::reference(&self.classes()?, self.settings.cap, self.group().order()))
    }

    /// Spectrum of configuration `k` at `eps`, computed once per run.
    pub fn spectrum(&self, k: usize, eps: f64) -> Result<Arc<DoubleSpectrum>> {
        if eps == 0.0 {
            return Ok(Arc::new(self.reference()?));
        }
        let key = (k, eps.to_bits());
        if let Some(ds) = self.spectra.lock().expect("spectrum lock").get(&key) {
            return Ok(ds.clone());
        }
        let metric = ConformalMetric::new(self.configs[k].clone(), eps)?;
        let (ds, _) = build_double_spectrum(&metric, &SpectrumOptions::new(self.settings.cap), self.cache.as_deref())?;
        let ds = Arc::new(ds);
        self.spectra.lock().expect("spectrum lock").insert(key, ds.clone());
        Ok(ds)
    }

    fn thermo_opts(&self) -> ThermoOptions {
        ThermoOptions::calibrated(self.settings.window)
    }

    /// Every metric of the ladder: configuration A at each `eps`, B at `+-hessian_eps`.
    fn ladder(&self) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = self.settings.ladder.iter().map(|&e| (0, e)).collect();
        v.push((1, self.settings.hessian_eps));
        v.push((1, -self.settings.hessian_eps));
        v
    }

    pub fn run(&self, id: u8) -> CriterionResult {
        let name = NAMES.get(id as usize - 1).copied().unwrap_or("unknown");
        let r = match id {
            1 => self.c1(),
            2 => self.c2(),
            3 => self.c3(),
            4 => self.c4(),
            5 => self.c5(),
            6 => self.c6(),
            7 => self.c7(),
            8 => self.c8(),
            9 => self.c9(),
            10 => self.c10(),
            11 => self.c11(),
            _ => Err(crate::error::Error::Invalid(format!("no criterion {id}"))),
        };
        match r {
            Ok(mut c) => {
                c.name = name.to_string();
                c
            }
            Err(e) => {
                let mut c = CriterionResult::new(id, name);
                c.check(false, format!("{} error: {e}", e.kind()));
                c
            }
        }
    }

    fn c1(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(1, "");
        let classes = self.group().enumerate_classes(self.settings.oracle_cap, &EnumerateOptions::default())?;
        let g0 = ConformalMetric::hyperbolic();
        let policy = NPolicy::default();
        let errs: Vec<f64> = classes
            .par_iter()
            .map(|cl| {
                let n = policy.nodes(cl.l0);
                let start: Vec<f64> = (0..n).map(|i| 0.05 * (TAU * i as f64 / n as f64 + 0.3).sin() + 0.02 * (2.0 * TAU * i as f64 / n as f64).cos()).collect();
                let geo = closed_length_from(&g0, &cl.word, n, &SolverOptions::default(), Some(&start))?;
                Ok((geo.lg - cl.l0).abs() / cl.l0)
            })
            .collect::<Result<_>>()?;
        let worst = errs.iter().copied().fold(0.0, f64::max);
        c.set("classes", classes.len() as f64);
        c.set("max_relative_error", worst);
        c.check(worst <= 1e-6, format!("relative error {worst:.2e} > 1e-6"));
        c.summary = format!("{} classes, max relative error {worst:.2e}", classes.len());
        Ok(c)
    }

    fn c2(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(2, "");
        let ds = self.reference()?;
        let th = Thermo::new(&ds, ThermoOptions::raw(self.settings.window));
        let p = th.pressure(&PotentialCombo::MINUS_JU)?;
        let h = th.entropy()?;
        c.set("pressure_minus_one", p.value);
        c.set("pressure_drift", p.truncation);
        c.set("entropy_minus_one", h.value - 1.0);
        c.set("entropy_drift", h.truncation);
        c.check(p.value.abs() <= 0.03, format!("|P(-1)| = {:.4} > 0.03", p.value.abs()));
        c.check((h.value - 1.0).abs() <= 0.03, format!("|h - 1| = {:.4} > 0.03", (h.value - 1.0).abs()));
        c.check(p.truncation < 0.03 && h.truncation < 0.03, "window drift exceeds the band");
        c.summary = format!(
            "P(-1) = {:+.4} (drift {:.4}), h - 1 = {:+.4} (drift {:.4}), band 0.03",
            p.value,
            p.truncation,
            h.value - 1.0,
            h.truncation
        );
        Ok(c)
    }

    fn c3(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(3, "");
        let phi = &self.configs[0];
        let max_phi = domain_grid(24).iter().map(|&x| phi.value_in_domain(x).abs()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for &eps in &self.settings.first_order_eps {
            let ds = self.spectrum(0, eps)?;
            for e in ds.entries.iter().take(self.settings.first_order_count) {
                let x = xray_integral(phi, &e.word, NPolicy::default().nodes(e.l0))?;
                let bound = 5.0 * eps * eps * e.l0 * max_phi * max_phi;
                let dev = (e.lg - e.l0 - eps * x).abs();
                worst = worst.max(dev / bound);
                c.check(dev <= bound, format!("class {} at eps {eps}: {dev:.2e} > {bound:.2e}", e.word));
            }
        }
        c.set("max_phi", max_phi);
        c.set("worst_fraction_of_bound", worst);
        if c.pass {
            c.summary = format!("worst deviation {:.1}% of the bound", 100.0 * worst);
        }
        Ok(c)
    }

    fn c4(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(4, "");
        let eps = self.settings.hessian_eps;
        let mut parts = Vec::new();
        for k in 0..2 {
            let plus = self.spectrum(k, eps)?;
            let minus = self.spectrum(k, -eps)?;
            let pp = Thermo::new(&plus, self.thermo_opts()).psi()?.psi;
            let pm = Thermo::new(&minus, self.thermo_opts()).psi()?.psi;
            let var = variance(self.group(), &Centered::new(&self.configs[k]), &self.settings.variance)?;
            let hc = hessian_check(&pp, &pm, eps, &var);
            let tag = ["a", "b"][k];
            c.set(format!("ratio_{tag}"), hc.value);
            c.set(format!("second_difference_{tag}"), hc.diagnostics["second_difference"]);
            c.set(format!("variance_2phi_{tag}"), var.value);
            c.set(format!("variance_stderr_{tag}"), var.stderr);
            c.check((hc.value - 1.0).abs() <= 0.15, format!("config {tag}: ratio {:.3} outside 1 +- 0.15", hc.value));
            parts.push(format!("{tag}: {:.4} / {:.4} = {:.3}", hc.diagnostics["second_difference"], hc.diagnostics["quarter_variance_2phi"], hc.value));
        }
        c.summary = format!("second difference over Var(2 phi)/4, {}", parts.join(", "));
        Ok(c)
    }

    fn c5(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(5, "");
        let r0 = self.reference()?;
        let p0 = Thermo::new(&r0, self.thermo_opts()).psi()?.psi;
        c.set("psi_reference", p0.value);
        c.set("psi_reference_raw", p0.diagnostics["raw"]);
        c.check(p0.value <= p0.band(), "Psi(g0) above its band");
        let mut strict = Vec::new();
        for (k, eps) in self.ladder() {
            let ds = self.spectrum(k, eps)?;
            let p = Thermo::new(&ds, self.thermo_opts()).psi()?.psi;
            let tag = format!("{}{:+}", ["a", "b"][k], eps);
            c.set(format!("psi_{tag}"), p.value);
            c.set(format!("band_{tag}"), p.band());
            c.check(p.value >= -p.band(), format!("Psi({tag}) = {:.2e} below -band", p.value));
            if eps == self.settings.hessian_eps {
                c.check(p.value > 3.0 * p.band(), format!("Psi({tag}) = {:.2e} not above 3 band {:.2e}", p.value, 3.0 * p.band()));
                strict.push(format!("Psi({tag}) = {:.2e} vs 3 band {:.2e}", p.value, 3.0 * p.band()));
            }
        }
        if c.pass {
            c.summary = strict.join(", ");
        }
        Ok(c)
    }

    fn c6(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(6, "");
        let times = &self.settings.coboundary_times;
        let vo = &self.settings.variance;
        let fit = |u: &dyn crate::flow::Observable| -> Vec<(f64, f64)> {
            let s = birkhoff_integrals(self.group(), u, vo.n, vo.seed, vo.h, times);
            times
                .iter()
                .enumerate()
                .map(|(j, &t)| {
                    let col: Vec<f64> = s.iter().map(|row| row[j]).collect();
                    variance_from_integrals(&col, t)
                })
                .collect()
        };
        let cob = fit(&Coboundary { w: &self.configs[1] });
        let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = cob.iter().map(|v| v.0.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / xs.len() as f64, ys.iter().sum::<f64>() / ys.len() as f64);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        c.set("coboundary_exponent", slope);
        c.check(slope <= -0.8, format!("coboundary exponent {slope:.3} > -0.8"));
        let phi = fit(&Centered::new(&self.configs[0]));
        let mean = phi.iter().map(|v| v.0).sum::<f64>() / phi.len() as f64;
        let spread = phi.iter().map(|v| (v.0 - mean).abs()).fold(0.0, f64::max) / mean;
        for (j, (t, v)) in times.iter().zip(&phi).enumerate() {
            c.set(format!("variance_2phi_t{j}"), v.0);
            c.set(format!("coboundary_variance_t{j}"), cob[j].0);
            c.check(v.0 - 3.0 * v.1 > 0.0, format!("Var(2 phi) at T = {t} not positive"));
        }
        c.set("variance_2phi_relative_spread", spread);
        c.check(spread <= 0.1, format!("Var(2 phi) spread {spread:.3} over T exceeds 10%"));
        c.summary = format!(
            "coboundary exponent {slope:.3}; Var(2 phi) = {} over T = {:?}",
            phi.iter().map(|v| format!("{:.3}", v.0)).collect::<Vec<_>>().join(", "),
            times
        );
        Ok(c)
    }

    fn c7(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(7, "");
        let r0 = self.reference()?;
        let j0 = Thermo::new(&r0, self.thermo_opts()).renormalized_intersection(&JU, &V)?;
        c.set("j_minus_one_reference", j0.value - 1.0);
        c.check((j0.value - 1.0).abs() <= j0.band(), "J != 1 at the reference metric");
        let mut min_excess = f64::INFINITY;
        let mut worst_linear: f64 = 0.0;
        for (k, eps) in self.ladder() {
            let ds = self.spectrum(k, eps)?;
            let th = Thermo::new(&ds, self.thermo_opts());
            let j = th.renormalized_intersection(&JU, &V)?;
            let tag = format!("{}{:+}", ["a", "b"][k], eps);
            c.set(format!("j_minus_one_{tag}"), j.value - 1.0);
            c.set(format!("band_{tag}"), j.band());
            c.check(j.value >= 1.0 - j.band(), format!("J({tag}) - 1 = {:.2e} below -band", j.value - 1.0));
            c.check(j.value - 1.0 > j.band(), format!("J({tag}) equals 1 within band {:.2e}", j.band()));
            min_excess = min_excess.min((j.value - 1.0) / j.band().max(f64::MIN_POSITIVE));
            let (_, n) = normalize_pressure(&ds, self.thermo_opts())?;
            let thn = Thermo::new(&n, self.thermo_opts());
            let jn = thn.renormalized_intersection(&JU, &V)?;
            let il = thn.stretch(Measure::Liouville)?;
            let dev = (jn.value - il.value).abs();
            worst_linear = worst_linear.max(dev);
            c.check(dev <= jn.band() + il.band(), format!("linear identity off by {dev:.2e} at {tag}"));
        }
        c.set("min_excess_over_band", min_excess);
        c.set("linear_identity_deviation", worst_linear);
        c.summary = format!("J - 1 exceeds its band by at least {min_excess:.1}x off the reference; linear identity deviation {worst_linear:.1e}");
        Ok(c)
    }

    fn c8(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(8, "");
        let mut min_margin = f64::INFINITY;
        for (k, eps) in std::iter::once((0, 0.0)).chain(self.ladder()) {
            let ds = self.spectrum(k, eps)?;
            let th = Thermo::new(&ds, self.thermo_opts());
            let h = th.entropy()?;
            let i = th.stretch(Measure::BowenMargulis)?;
            let band = h.band() + i.band() / (i.value * i.value);
            let margin = h.value - 1.0 / i.value;
            let tag = format!("{}{:+}", ["a", "b"][k], eps);
            c.set(format!("margin_{tag}"), margin);
            c.set(format!("band_{tag}"), band);
            c.check(margin >= -band, format!("h - 1/I = {margin:.2e} below -band at {tag}"));
            min_margin = min_margin.min(margin + band);
        }
        c.summary = format!("smallest h - 1/I_BM + band: {min_margin:.2e}");
        Ok(c)
    }

    fn c9(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(9, "");
        let eps = self.settings.hessian_eps;
        let triple = [self.spectrum(0, self.settings.finsler_eps)?, self.spectrum(0, eps)?, self.spectrum(1, eps)?];
        let w = 1.0;
        let mut d = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                d[i][j] = d_length(&triple[i], &triple[j], w)?.value;
            }
        }
        for i in 0..3 {
            c.check(d[i][i] == 0.0, "d_L(g, g) != 0");
            for j in 0..3 {
                c.check(d[i][j] == d[j][i], "d_L not symmetric");
                for k in 0..3 {
                    c.check(d[i][k] <= d[i][j] + d[j][k], "d_L triangle inequality violated");
                }
            }
        }
        let mut pool: Vec<Arc<DoubleSpectrum>> = vec![Arc::new(self.reference()?)];
        for (k, e) in self.ladder() {
            pool.push(self.spectrum(k, e)?);
        }
        let mut min_dt = f64::INFINITY;
        for a in &pool {
            for b in &pool {
                let r = d_thurston(a, b, self.thermo_opts(), w)?;
                c.check(r.value >= -r.band(), format!("d_T = {:.2e} below -band {:.2e}", r.value, r.band()));
                c.check(r.value + r.band() >= r.diagnostics["log_bm_stretch"], "d_T below log I_BM");
                min_dt = min_dt.min(r.value + r.band());
            }
        }
        let phi = &self.configs[0];
        let ds0 = &pool[0];
        let base = finsler_norm(phi, ds0, &NPolicy::default(), w)?;
        for a in [2.0, 0.5] {
            let scaled = ConformalFactor::with_group(&phi.spec().scaled(a), self.group().clone())?;
            let v = finsler_norm(&scaled, ds0, &NPolicy::default(), w)?.value;
            c.check(v == a * base.value, format!("Finsler norm not exactly homogeneous at a = {a}"));
        }
        let fe = self.settings.finsler_eps;
        let dt = d_thurston(ds0, &*self.spectrum(0, fe)?, self.thermo_opts(), w)?;
        let slope = dt.value / fe;
        let rel = (slope - base.value).abs() / base.value;
        c.set("d_length_01", d[0][1]);
        c.set("d_length_02", d[0][2]);
        c.set("d_length_12", d[1][2]);
        c.set("min_d_thurston_plus_band", min_dt);
        c.set("finsler_norm", base.value);
        c.set("d_thurston_slope", slope);
        c.set("slope_relative_error", rel);
        c.check(rel <= 0.2, format!("d_T slope {slope:.4} vs Finsler norm {:.4}", base.value));
        c.summary = format!("d_T slope {slope:.4} vs Finsler norm {:.4} ({:.1}%), min d_T + band {min_dt:.1e}", base.value, 100.0 * rel);
        Ok(c)
    }

    fn c10(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(10, "");
        let eps = self.settings.busemann_eps;
        let ds = self.spectrum(0, eps)?;
        let metric = ConformalMetric::new(self.configs[0].clone(), eps)?;
        let opts = BusemannOptions::default();
        let mut worst: f64 = 0.0;
        for e in ds.entries.iter().take(self.settings.busemann_classes) {
            let r = axis_integral(&metric, &e.word, self.settings.busemann_nodes, &opts)?;
            let tol = (1e-3f64).max(2.0 * eps * eps * e.l0);
            let dev = (r.value - e.lg).abs();
            worst = worst.max(dev / tol);
            c.check(dev <= tol, format!("class {}: {dev:.2e} > {tol:.2e}", e.word));
            c.check(r.diagnostics["min_a"] > 0.0, "a_g not positive");
        }
        let g0 = ConformalMetric::hyperbolic();
        let mut worst_oracle: f64 = 0.0;
        for k in 0..5 {
            let t = k as f64;
            let x0 = C64::from_polar(0.3 + 0.1 * t, 0.7 * t);
            let x = C64::from_polar(0.5 - 0.05 * t, 2.0 + 1.3 * t);
            let xi = BoundaryPoint::new(1.0 + 1.9 * t);
            let b = busemann(&g0, x0, x, &xi, &opts)?;
            worst_oracle = worst_oracle.max((b.value - hyperbolic_busemann(x0, x, &xi)).abs());
        }
        c.set("worst_fraction_of_tolerance", worst);
        c.set("hyperbolic_oracle_error", worst_oracle);
        c.check(worst_oracle <= 1e-5, format!("hyperbolic oracle error {worst_oracle:.2e}"));
        c.summary = format!("worst class at {:.1e} of tolerance, hyperbolic oracle error {worst_oracle:.1e}", worst);
        Ok(c)
    }

    fn c11(&self) -> Result<CriterionResult> {
        let mut c = CriterionResult::new(11, "");
        let cap = FuchsianGroup::systole() + 2.0;
        let metric = ConformalMetric::new(self.configs[1].clone(), self.settings.busemann_eps)?;
        let opts = SpectrumOptions::new(cap);
        let (a, _) = build_double_spectrum(&metric, &opts, None)?;
        let (b, _) = build_double_spectrum(&metric, &opts, None)?;
        let ha = hash_json(&serde_json::json!({ "csv": a.to_csv(), "meta": a.meta }));
        let hb = hash_json(&serde_json::json!({ "csv": b.to_csv(), "meta": b.meta }));
        c.check(ha == hb, "repeated spectrum differs");
        let va = variance(self.group(), &Centered::new(&self.configs[0]), &VarianceOptions { n: 64, t: 20.0, ..self.settings.variance })?;
        let vb = variance(self.group(), &Centered::new(&self.configs[0]), &VarianceOptions { n: 64, t: 20.0, ..self.settings.variance })?;
        c.check(serde_json::to_string(&va)? == serde_json::to_string(&vb)?, "repeated variance differs");
        c.summary = format!("spectrum hash {}", &ha[..16]);
        Ok(c)
    }
}
