//! Subcommand pipelines. Every artifact carries the config hash, seed and tool version.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use stretch_core::busemann::{axis_integral, busemann, hyperbolic_busemann, BoundaryPoint};
use stretch_core::distances::{d_length, d_thurston, distance_matrix, finsler_norm, matrix_csv, stability_report, tail_ratios};
use stretch_core::flow::{variance, Coboundary};
use stretch_core::geodesics::{build_double_spectrum, DoubleSpectrum};
use stretch_core::metric::{curvature_thresholds, domain_grid};
use stretch_core::report::TOOL_VERSION;
use stretch_core::thermo::{hessian_check, pressure_metric_form, Centered, Measure, PotentialCombo, Thermo, JU, V};
use stretch_core::verify::Lab;
use stretch_core::{ConformalFactor, ConformalMetric, Error, FuchsianGroup, PhiSpec, Result, C64};

use crate::config::{ExperimentConfig, MetricConfig};

pub struct Ctx {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub group: FuchsianGroup,
    hash: String,
    command: &'static str,
}

impl Ctx {
    pub fn new(cfg: ExperimentConfig, out: PathBuf, command: &'static str) -> Result<Ctx> {
        let group = cfg.group()?;
        let hash = cfg.hash();
        std::fs::create_dir_all(&out)?;
        Ok(Ctx { cfg, out, group, hash, command })
    }

    fn factor(&self, spec: &PhiSpec) -> Result<Arc<ConformalFactor>> {
        Ok(Arc::new(ConformalFactor::with_group(spec, self.group.clone())?))
    }

    fn metric(&self, m: &MetricConfig) -> Result<ConformalMetric> {
        ConformalMetric::new(self.factor(&m.phi())?, m.eps)
    }

    fn reference_metric(&self) -> Result<ConformalMetric> {
        ConformalMetric::new(self.factor(&PhiSpec::constant(0.0))?, 0.0)
    }

    fn spectrum(&self, metric: &ConformalMetric) -> Result<DoubleSpectrum> {
        let (ds, hit) = build_double_spectrum(metric, &self.cfg.spectrum_options(), self.cfg.cache.as_deref())?;
        if !hit {
            log::info!("spectrum computed: {} classes, {} failures", ds.entries.len(), ds.meta.failures);
        }
        Ok(ds)
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, text)?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn write_json(&self, name: &str, result: &impl Serialize) -> Result<()> {
        let v = json!({
            "tool": "stretch",
            "version": TOOL_VERSION,
            "command": self.command,
            "config_hash": self.hash,
            "seed": self.cfg.seed,
            "result": result,
        });
        self.write(name, &(serde_json::to_string_pretty(&v)? + "\n"))
    }

    fn write_csv(&self, name: &str, body: &str) -> Result<()> {
        let head = format!("# stretch {TOOL_VERSION} command {} config_hash {} seed {}\n", self.command, self.hash, self.cfg.seed);
        self.write(name, &(head + body))
    }

    /// `g0`, `g` and the comparison metrics, by name.
    fn named_metrics(&self) -> Result<Vec<(String, ConformalMetric)>> {
        let mut v = vec![("g0".to_string(), self.reference_metric()?), ("g".to_string(), self.metric(&self.cfg.metric)?)];
        for m in &self.cfg.compare {
            v.push((m.name.clone(), self.metric(&m.metric)?));
        }
        Ok(v)
    }
}

pub fn spectrum(ctx: &Ctx) -> Result<bool> {
    let mut index = Vec::new();
    for (name, metric) in ctx.named_metrics()? {
        let ds = ctx.spectrum(&metric)?;
        ctx.write_csv(&format!("spectrum_{name}.csv"), &ds.to_csv())?;
        index.push(json!({ "name": name, "eps": metric.eps, "classes": ds.entries.len(), "meta": ds.meta }));
    }
    ctx.write_json("spectrum.json", &index)?;
    Ok(true)
}

fn thermo_block(th: &Thermo) -> Result<Value> {
    Ok(json!({
        "pressure_minus_ju": th.pressure(&PotentialCombo::MINUS_JU)?,
        "entropy": th.entropy()?,
        "stretch_liouville": th.stretch(Measure::Liouville)?,
        "stretch_bowen_margulis": th.stretch(Measure::BowenMargulis)?,
        "psi": th.psi()?,
        "intersection": th.intersection(&JU, &V)?,
        "renormalized_intersection": th.renormalized_intersection(&JU, &V)?,
    }))
}

pub fn thermo(ctx: &Ctx) -> Result<bool> {
    let m = &ctx.cfg.metric;
    let opts = ctx.cfg.thermo_options();
    let g = ctx.metric(m)?;
    let plus = ctx.spectrum(&g)?;
    let mut result = json!({ "eps": m.eps, "window": opts, "metric": thermo_block(&Thermo::new(&plus, opts))? });
    if m.eps != 0.0 {
        let minus = ctx.spectrum(&ctx.metric(&MetricConfig { eps: -m.eps, ..m.clone() })?)?;
        let psi_plus = Thermo::new(&plus, opts).psi()?.psi;
        let psi_minus = Thermo::new(&minus, opts).psi()?.psi;
        let var = variance(&ctx.group, &Centered::new(&g.phi), &ctx.cfg.variance_options())?;
        result["hessian_check"] = json!({
            "psi_plus": psi_plus,
            "psi_minus": psi_minus,
            "variance_2phi": var,
            "ratio": hessian_check(&psi_plus, &psi_minus, m.eps, &var),
        });
    }
    ctx.write_json("thermo.json", &result)?;
    Ok(true)
}

pub fn variance_cmd(ctx: &Ctx) -> Result<bool> {
    let vo = ctx.cfg.variance_options();
    let phi = ctx.factor(&ctx.cfg.metric.phi())?;
    let mut forms = Vec::new();
    for m in &ctx.cfg.compare {
        let other = ctx.factor(&m.metric.phi())?;
        forms.push(json!({ "with": m.name, "form": pressure_metric_form(&ctx.group, &phi, &other, &vo)? }));
    }
    let result = json!({
        "options": vo,
        "variance_2phi": variance(&ctx.group, &Centered::new(&phi), &vo)?,
        "coboundary_variance": variance(&ctx.group, &Coboundary { w: &phi }, &vo)?,
        "pressure_metric_self": pressure_metric_form(&ctx.group, &phi, &phi, &vo)?,
        "pressure_metric_compare": forms,
    });
    ctx.write_json("variance.json", &result)?;
    Ok(true)
}

pub fn distance(ctx: &Ctx) -> Result<bool> {
    let opts = ctx.cfg.thermo_options();
    let width = ctx.cfg.thermo.width;
    let named = ctx.named_metrics()?;
    let names: Vec<String> = named.iter().map(|(n, _)| n.clone()).collect();
    let spectra = named.iter().map(|(_, m)| ctx.spectrum(m)).collect::<Result<Vec<_>>>()?;
    let dl = distance_matrix(&spectra, |a, b| Ok(d_length(a, b, width)?.value))?;
    let dt = distance_matrix(&spectra, |a, b| Ok(d_thurston(a, b, opts, width)?.value))?;
    ctx.write_csv("d_length.csv", &matrix_csv(&names, &dl))?;
    ctx.write_csv("d_thurston.csv", &matrix_csv(&names, &dt))?;
    let (g0, g) = (&spectra[0], &spectra[1]);
    let tail = tail_ratios(g, width)?;
    ctx.write_csv("tails_g.csv", &tail.to_csv())?;
    let metric = &named[1].1;
    let mut result = json!({
        "names": names,
        "d_length_g0_g": d_length(g0, g, width)?,
        "d_thurston_g0_g": d_thurston(g0, g, opts, width)?,
        "finsler_norm": finsler_norm(&metric.phi, g0, &ctx.cfg.spectrum_options().n_policy, width)?,
        "tail": { "plus": tail.plus, "minus": tail.minus, "plus_drift": tail.plus_drift, "minus_drift": tail.minus_drift },
    });
    if metric.eps != 0.0 {
        let psi = Thermo::new(g, opts).psi()?;
        let var = variance(&ctx.group, &Centered::new(&metric.phi), &ctx.cfg.variance_options())?;
        result["stability"] = serde_json::to_value(stability_report(metric.eps, &psi, &tail, &var, 1.0))?;
    }
    ctx.write_json("distance.json", &result)?;
    Ok(true)
}

pub fn conjugacy(ctx: &Ctx) -> Result<bool> {
    let b = &ctx.cfg.busemann;
    let bo = ctx.cfg.busemann_options();
    let metric = ctx.metric(&ctx.cfg.metric)?;
    let ds = ctx.spectrum(&metric)?;
    let eps = metric.eps;
    let mut csv = String::from("canonical_word,l0,lg,axis_integral,truncation,tolerance,min_a\n");
    let mut rows = Vec::new();
    let mut ok = true;
    for e in ds.valid().take(b.classes) {
        let r = axis_integral(&metric, &e.word, b.nodes, &bo)?;
        let tol = (1e-3f64).max(2.0 * eps * eps * e.l0);
        ok &= (r.value - e.lg).abs() <= tol;
        csv.push_str(&format!("{},{},{},{},{},{},{}\n", e.word, e.l0, e.lg, r.value, r.truncation, tol, r.diagnostics["min_a"]));
        rows.push(r);
    }
    ctx.write_csv("conjugacy.csv", &csv)?;
    let g0 = ctx.reference_metric()?;
    let mut oracle = Vec::new();
    for k in 0..4 {
        let t = k as f64;
        let (x0, x) = (C64::from_polar(0.2 + 0.15 * t, 1.1 * t), C64::from_polar(0.6 - 0.1 * t, 2.5 + t));
        let xi = BoundaryPoint::new(0.5 + 1.7 * t);
        let r = busemann(&g0, x0, x, &xi, &bo)?;
        oracle.push(json!({ "x0": [x0.re, x0.im], "x": [x.re, x.im], "xi": xi.angle(), "value": r.value, "closed_form": hyperbolic_busemann(x0, x, &xi) }));
    }
    ctx.write_json("conjugacy.json", &json!({ "eps": eps, "within_tolerance": ok, "classes": rows, "hyperbolic_oracle": oracle }))?;
    Ok(ok)
}

pub fn verify(ctx: &Ctx) -> Result<bool> {
    let cfg = &ctx.cfg;
    let lab = Lab::new(cfg.verify_settings(), &ctx.group, &cfg.metric.phi(), &cfg.second_phi(), cfg.cache.clone())?;
    let th = curvature_thresholds(&lab.configs[0], &domain_grid(12));
    let ids: Vec<u8> = if cfg.verify.criteria.is_empty() { (1..=11).collect() } else { cfg.verify.criteria.clone() };
    let mut results = Vec::new();
    for id in ids {
        let r = lab.run(id);
        log::info!("{}", r.line());
        println!("{}", r.line());
        results.push(r);
    }
    let pass = results.iter().all(|r| r.pass);
    ctx.write_json("verify.json", &json!({ "settings": lab.settings, "thresholds": th, "pass": pass, "criteria": results }))?;
    Ok(pass)
}

/// Error report printed on stderr.
pub fn error_json(e: &Error) -> String {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

pub fn resolve_out(cli: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    cli.map(Path::to_path_buf).or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"))
}
