//! Closed geodesics of conformal metrics and the double length spectrum.
//!
//! The closed `g`-geodesic in a class is sought as a graph `r(s)` over the
//! `g0`-axis in Fermi coordinates, where `g0 = dr^2 + cosh^2 r ds^2`. The
//! axis is invariant under the class element, so `r` is simply periodic with
//! period `l0`, and the length
//!
//! `L[r] = int_0^l0 exp(eps phi(s, r)) sqrt(r'^2 + cosh^2 r) ds`
//!
//! is discretized with Fourier differentiation and the trapezoid rule, both
//! spectrally accurate for periodic integrands. Critical points are found by
//! damped Newton iteration with an exact Hessian.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disk::{Su11, C64};
use crate::error::{Error, Result};
use crate::flow::FrameFlow;
use crate::fuchsian::{ClassRecord, EnumerateOptions, FuchsianGroup, Word};
use crate::metric::{ConformalFactor, ConformalMetric};
use crate::quadrature::fourier_diff;
use crate::report::{hash_json, TOOL_VERSION};

/// Discretization size as a function of the reference length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NPolicy {
    pub min: usize,
    pub per_length: f64,
}

impl Default for NPolicy {
    fn default() -> Self {
        NPolicy { min: 64, per_length: 16.0 }
    }
}

impl NPolicy {
    pub fn nodes(&self, l0: f64) -> usize {
        let n = self.min.max((self.per_length * l0).ceil() as usize);
        n + n % 2
    }
}

/// Newton iteration controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Target for the largest component of the length gradient per node.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iter: 60, tol: 1e-11 }
    }
}

/// A closed geodesic as a normal graph over the reference axis.
#[derive(Clone, Debug)]
pub struct ClosedGeodesic {
    pub l0: f64,
    pub lg: f64,
    /// Largest gradient component divided by the mean node weight.
    pub residual: f64,
    pub iterations: usize,
    /// Normal offsets at arclengths `k l0 / N`.
    pub offsets: Vec<f64>,
    /// Frame whose real diameter is the axis.
    pub frame: Su11,
}

impl ClosedGeodesic {
    /// Disk points of the curve over one period.
    pub fn points(&self) -> Vec<C64> {
        let n = self.offsets.len();
        let h = self.l0 / n as f64;
        (0..n).map(|i| fermi_point(&self.frame.mul(&Su11::translation(i as f64 * h)), self.offsets[i]).0).collect()
    }
}

/// Point at signed normal distance `r` from the origin of the frame `m`,
/// with its first and second derivatives in `r`.
fn fermi_point(m: &Su11, r: f64) -> (C64, C64, C64) {
    let t = (0.5 * r).tanh();
    let w = C64::new(0.0, t);
    let sech2 = 1.0 - t * t;
    let w1 = C64::new(0.0, 0.5 * sech2);
    let w2 = C64::new(0.0, -0.5 * sech2 * t);
    let d1 = m.deriv(w);
    (m.apply(w), d1 * w1, m.second_deriv(w) * w1 * w1 + d1 * w2)
}

/// A frame moved next to the fundamental domain by the group.
pub(crate) fn reduce_frame(group: &FuchsianGroup, mut m: Su11) -> Su11 {
    FrameFlow { group }.reduce(&mut m, &mut Vec::new());
    m
}

/// Frames `frame translation(s)` moved next to the fundamental domain.
fn node_frames(group: &FuchsianGroup, frame: &Su11, nodes: &[f64]) -> Vec<Su11> {
    nodes.iter().map(|&s| reduce_frame(group, frame.mul(&Su11::translation(s)))).collect()
}

struct Integrand {
    value: Vec<f64>,
    fr: Vec<f64>,
    fp: Vec<f64>,
    frr: Vec<f64>,
    frp: Vec<f64>,
    fpp: Vec<f64>,
}

fn integrand(phi: &ConformalFactor, eps: f64, frames: &[Su11], r: &[f64], p: &[f64], second: bool) -> Result<Integrand> {
    let n = r.len();
    let mut out = Integrand {
        value: vec![0.0; n],
        fr: vec![0.0; n],
        fp: vec![0.0; n],
        frr: vec![0.0; n],
        frp: vec![0.0; n],
        fpp: vec![0.0; n],
    };
    for i in 0..n {
        let (ri, pi) = (r[i], p[i]);
        let (c, sh) = (ri.cosh(), ri.sinh());
        let q = (pi * pi + c * c).sqrt();
        let (e, a1, a2) = if eps == 0.0 {
            (1.0, 0.0, 0.0)
        } else {
            let (z, z1, z2) = fermi_point(&frames[i], ri);
            let j = phi.jet(z)?;
            let d1 = 2.0 * (j.dz * z1).re;
            let d2 = 2.0 * (j.dzz * z1 * z1 + j.dz * z2).re + 2.0 * j.dzzbar * z1.norm_sqr();
            ((eps * j.value).exp(), eps * d1, eps * d2)
        };
        let cs = c * sh;
        out.value[i] = e * q;
        out.fr[i] = e * (a1 * q + cs / q);
        out.fp[i] = e * pi / q;
        if second {
            let q3 = q * q * q;
            out.frr[i] = e * ((a2 + a1 * a1) * q + 2.0 * a1 * cs / q + (2.0 * ri).cosh() / q - cs * cs / q3);
            out.frp[i] = e * (a1 * pi / q - pi * cs / q3);
            out.fpp[i] = e * c * c / q3;
        }
    }
    Ok(out)
}

/// Discretized length of normal graphs `r(s)` over a `g0`-geodesic segment.
///
/// The integrand is sampled at quadrature points; point `q` carries the
/// offset `r[point[q]]` and the slope `(diff r)_q`.
pub(crate) struct GraphProblem<'a> {
    pub metric: &'a ConformalMetric,
    /// Frame of each quadrature point, its real diameter along the segment.
    pub frames: Vec<Su11>,
    pub weights: Vec<f64>,
    pub point: Vec<usize>,
    /// Row-major `points x unknowns` derivative matrix.
    pub diff: DMatrix<f64>,
    /// Unknowns that are optimized; the rest stay fixed.
    pub free: Vec<usize>,
}

pub(crate) struct GraphSolution {
    pub r: Vec<f64>,
    pub length: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl GraphProblem<'_> {
    fn eval(&self, r: &[f64], second: bool) -> Result<Integrand> {
        let rq: Vec<f64> = self.point.iter().map(|&j| r[j]).collect();
        let p = &self.diff * DVector::from_column_slice(r);
        integrand(&self.metric.phi, self.metric.eps, &self.frames, &rq, p.as_slice(), second)
    }

    fn length(&self, r: &[f64]) -> Result<f64> {
        let f = self.eval(r, false)?;
        Ok(f.value.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }

    /// Slope of the solution at quadrature point `q`.
    pub fn slope(&self, r: &[f64], q: usize) -> f64 {
        self.diff.row(q).iter().zip(r).map(|(d, x)| d * x).sum()
    }

    /// Damped Newton iteration on the free unknowns.
    pub fn solve(&self, mut r: Vec<f64>, opts: &SolverOptions) -> Result<GraphSolution> {
        let n = r.len();
        let nq = self.weights.len();
        let m = self.free.len();
        let wv = DVector::from_vec(self.weights.clone());
        let mean_w = wv.sum() / n as f64;
        let sel = DMatrix::from_fn(nq, n, |q, j| if self.point[q] == j { 1.0 } else { 0.0 });
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        let mut length = self.length(&r)?;
        while iterations < opts.max_iter {
            let f = self.eval(&r, true)?;
            let wfr = DVector::from_vec(f.fr.clone()).component_mul(&wv);
            let wfp = DVector::from_vec(f.fp.clone()).component_mul(&wv);
            let full = sel.transpose() * wfr + self.diff.transpose() * wfp;
            let grad = DVector::from_iterator(m, self.free.iter().map(|&j| full[j]));
            residual = grad.amax() / mean_w;
            length = f.value.iter().zip(&self.weights).map(|(v, w)| v * w).sum();
            if residual < opts.tol {
                break;
            }
            iterations += 1;
            let diag = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_vec(v.to_vec()).component_mul(&wv));
            let mut hess = sel.transpose() * diag(&f.frr) * &sel;
            let drp = sel.transpose() * diag(&f.frp) * &self.diff;
            hess += &drp + drp.transpose();
            hess += self.diff.transpose() * diag(&f.fpp) * &self.diff;
            let hess = DMatrix::from_fn(m, m, |a, b| hess[(self.free[a], self.free[b])]);
            let step = match hess.cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => -&grad,
            };
            let slope = step.dot(&grad);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let mut trial = r.clone();
                for (k, &j) in self.free.iter().enumerate() {
                    trial[j] += t * step[k];
                }
                let lt = self.length(&trial)?;
                if lt <= length + 1e-4 * t * slope || (lt - length).abs() <= 1e-15 * length {
                    r = trial;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok(GraphSolution { r, length, residual, iterations })
    }
}

/// Length `lg` and closed geodesic of a class for `metric`.
pub fn closed_length(metric: &ConformalMetric, word: &Word, n_nodes: usize, opts: &SolverOptions) -> Result<ClosedGeodesic> {
    closed_length_from(metric, word, n_nodes, opts, None)
}

/// As [`closed_length`], starting from the given normal offsets.
pub fn closed_length_from(metric: &ConformalMetric, word: &Word, n_nodes: usize, opts: &SolverOptions, start: Option<&[f64]>) -> Result<ClosedGeodesic> {
    let group = metric.phi.group();
    let exact = group.word_exact(word)?;
    let gamma = exact.to_dd().to_f64();
    let l0 = exact.to_dd().translation_length();
    if l0 <= 0.0 {
        return Err(Error::Invalid(format!("class {word} is not hyperbolic")));
    }
    let frame = gamma.axis_frame().ok_or_else(|| Error::Invalid(format!("class {word} is not hyperbolic")))?;
    let n = n_nodes.max(8);
    if n % 2 == 1 {
        return Err(Error::Invalid("node count must be even".into()));
    }
    let h = l0 / n as f64;
    let r: Vec<f64> = match start {
        Some(s) if s.len() == n => s.to_vec(),
        Some(_) => return Err(Error::Invalid("start curve has the wrong size".into())),
        None => vec![0.0; n],
    };
    let problem = GraphProblem {
        metric,
        frames: node_frames(group, &frame, &(0..n).map(|i| i as f64 * h).collect::<Vec<_>>()),
        weights: vec![h; n],
        point: (0..n).collect(),
        diff: DMatrix::from_row_slice(n, n, &fourier_diff(n, l0)),
        free: (0..n).collect(),
    };
    let sol = problem.solve(r, opts)?;
    if !(sol.residual < opts.tol.max(1e-8)) {
        return Err(Error::Convergence(format!(
            "class {word}: length gradient stalled at {:.3e} after {} iterations",
            sol.residual, sol.iterations
        )));
    }
    Ok(ClosedGeodesic { l0, lg: sol.length, residual: sol.residual, iterations: sol.iterations, offsets: sol.r, frame })
}

/// `int_0^l0 phi` along the `g0`-axis of the class.
pub fn xray_integral(phi: &ConformalFactor, word: &Word, n_nodes: usize) -> Result<f64> {
    let exact = phi.group().word_exact(word)?;
    let gamma = exact.to_dd().to_f64();
    let l0 = exact.to_dd().translation_length();
    let frame = gamma.axis_frame().ok_or_else(|| Error::Invalid(format!("class {word} is not hyperbolic")))?;
    let h = l0 / n_nodes as f64;
    let mut s = 0.0;
    for i in 0..n_nodes {
        let m = frame.mul(&Su11::translation(i as f64 * h));
        s += phi.value(m.apply(C64::new(0.0, 0.0)))?;
    }
    Ok(s * h)
}

/// One row of a double spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub word: Word,
    pub l0: f64,
    /// `NaN` marks a class whose optimizer failed.
    pub lg: f64,
    pub residual: f64,
}

impl SpectrumEntry {
    pub fn ok(&self) -> bool {
        self.lg.is_finite()
    }
}

/// Sidecar metadata of a spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub metric_hash: String,
    pub generator_order: [u8; 8],
    pub cap: f64,
    pub n_policy: NPolicy,
    pub version: String,
    pub failures: usize,
}

/// Pairs `(L_g0(c), L_g(c))` over primitive classes up to a length cap.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleSpectrum {
    pub entries: Vec<SpectrumEntry>,
    pub meta: SpectrumMeta,
}

impl DoubleSpectrum {
    /// Spectrum with `lg = l0`.
    pub fn reference(classes: &[ClassRecord], cap: f64, order: [u8; 8]) -> DoubleSpectrum {
        let entries = classes
            .iter()
            .map(|c| SpectrumEntry { word: c.word.clone(), l0: c.l0, lg: c.l0, residual: 0.0 })
            .collect();
        let meta = SpectrumMeta {
            metric_hash: ConformalMetric::hyperbolic().hash(),
            generator_order: order,
            cap,
            n_policy: NPolicy::default(),
            version: TOOL_VERSION.to_string(),
            failures: 0,
        };
        DoubleSpectrum { entries, meta }
    }

    /// Entries whose optimizer succeeded.
    pub fn valid(&self) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries.iter().filter(|e| e.ok())
    }

    /// Spectrum of `lambda^2 g`.
    pub fn scaled(&self, lambda: f64) -> DoubleSpectrum {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.lg *= lambda;
        }
        out.meta.metric_hash = hash_json(&serde_json::json!({ "base": self.meta.metric_hash, "scale": lambda }));
        out
    }

    /// Restriction to `l0 <= cap`.
    pub fn truncated(&self, cap: f64) -> DoubleSpectrum {
        let mut out = self.clone();
        out.entries.retain(|e| e.l0 <= cap);
        out.meta.cap = cap.min(self.meta.cap);
        out.meta.failures = out.entries.iter().filter(|e| !e.ok()).count();
        out
    }

    /// Spectrum pairing the `g` columns of two spectra over the same classes:
    /// `l0` taken from `a`, `lg` from `b`.
    pub fn pair(a: &DoubleSpectrum, b: &DoubleSpectrum) -> Result<DoubleSpectrum> {
        if a.entries.len() != b.entries.len() || a.entries.iter().zip(&b.entries).any(|(x, y)| x.word != y.word) {
            return Err(Error::Mismatch("spectra do not share their class list".into()));
        }
        let entries = a
            .entries
            .iter()
            .zip(&b.entries)
            .map(|(x, y)| SpectrumEntry {
                word: x.word.clone(),
                l0: x.lg,
                lg: y.lg,
                residual: x.residual.max(y.residual),
            })
            .collect();
        let mut meta = a.meta.clone();
        meta.metric_hash = hash_json(&serde_json::json!({ "from": a.meta.metric_hash, "to": b.meta.metric_hash }));
        Ok(DoubleSpectrum { entries, meta })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("canonical_word,l0,lg,residual\n");
        for e in &self.entries {
            s.push_str(&format!("{},{},{},{}\n", e.word, e.l0, e.lg, e.residual));
        }
        s
    }

    pub fn from_csv(text: &str, meta: SpectrumMeta) -> Result<DoubleSpectrum> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<&str> { rec.get(i).ok_or_else(|| Error::Serde("short spectrum row".into())) };
            let num = |i: usize| -> Result<f64> { field(i)?.parse::<f64>().map_err(|e| Error::Serde(e.to_string())) };
            entries.push(SpectrumEntry { word: field(0)?.parse()?, l0: num(1)?, lg: num(2)?, residual: num(3)? });
        }
        Ok(DoubleSpectrum { entries, meta })
    }

    /// Write `spectrum.csv` and `spectrum.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join("spectrum.csv"), self.to_csv().as_bytes())?;
        write_atomic(&dir.join("spectrum.json"), serde_json::to_string_pretty(&self.meta)?.as_bytes())?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<DoubleSpectrum> {
        let meta: SpectrumMeta = serde_json::from_str(&fs::read_to_string(dir.join("spectrum.json"))?)?;
        DoubleSpectrum::from_csv(&fs::read_to_string(dir.join("spectrum.csv"))?, meta)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// Settings of a spectrum computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub cap: f64,
    pub n_policy: NPolicy,
    pub solver: SolverOptions,
    pub enumerate: EnumerateOptions,
}

impl SpectrumOptions {
    pub fn new(cap: f64) -> SpectrumOptions {
        SpectrumOptions { cap, n_policy: NPolicy::default(), solver: SolverOptions::default(), enumerate: EnumerateOptions::default() }
    }
}

/// Cache directory name for a metric, group ordering and cap.
pub fn cache_key(metric: &ConformalMetric, order: [u8; 8], opts: &SpectrumOptions) -> String {
    hash_json(&serde_json::json!({
        "metric": metric.hash(),
        "order": order,
        "cap": opts.cap,
        "n_policy": opts.n_policy,
        "solver": opts.solver,
        "version": TOOL_VERSION,
    }))
}

/// Compute `lg` for each class, in parallel, flagging failures with `NaN`.
pub fn solve_classes(metric: &ConformalMetric, classes: &[ClassRecord], opts: &SpectrumOptions) -> Vec<SpectrumEntry> {
    classes
        .par_iter()
        .map(|c| {
            if metric.is_hyperbolic() {
                return SpectrumEntry { word: c.word.clone(), l0: c.l0, lg: c.l0, residual: 0.0 };
            }
            match closed_length(metric, &c.word, opts.n_policy.nodes(c.l0), &opts.solver) {
                Ok(g) => SpectrumEntry { word: c.word.clone(), l0: c.l0, lg: g.lg, residual: g.residual },
                Err(e) => {
                    log::warn!("class {}: {e}", c.word);
                    SpectrumEntry { word: c.word.clone(), l0: c.l0, lg: f64::NAN, residual: f64::INFINITY }
                }
            }
        })
        .collect()
}

/// Double spectrum up to `opts.cap`, reusing `cache_root/<key>` when present.
pub fn build_double_spectrum(metric: &ConformalMetric, opts: &SpectrumOptions, cache_root: Option<&Path>) -> Result<(DoubleSpectrum, bool)> {
    let group = metric.phi.group();
    let order = group.order();
    let dir: Option<PathBuf> = cache_root.map(|root| root.join(cache_key(metric, order, opts)));
    if let Some(d) = &dir {
        if d.join("spectrum.csv").exists() && d.join("spectrum.json").exists() {
            log::info!("spectrum cache hit: {}", d.display());
            return Ok((DoubleSpectrum::load(d)?, true));
        }
    }
    let classes = group.enumerate_classes(opts.cap, &opts.enumerate)?;
    let entries = solve_classes(metric, &classes, opts);
    let failures = entries.iter().filter(|e| !e.ok()).count();
    let ds = DoubleSpectrum {
        entries,
        meta: SpectrumMeta {
            metric_hash: metric.hash(),
            generator_order: order,
            cap: opts.cap,
            n_policy: opts.n_policy,
            version: TOOL_VERSION.to_string(),
            failures,
        },
    };
    if let Some(d) = &dir {
        ds.save(d)?;
    }
    Ok((ds, false))
}

/// Shortest primitive classes of the reference surface, in spectrum order.
pub fn shortest_classes(group: &FuchsianGroup, count: usize) -> Result<Vec<ClassRecord>> {
    let mut cap = FuchsianGroup::systole() + 1.0;
    loop {
        let cl = group.enumerate_classes(cap, &EnumerateOptions::default())?;
        if cl.len() >= count {
            return Ok(cl.into_iter().take(count).collect());
        }
        cap += 1.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PhiSpec;
    use std::sync::Arc;

    fn metric(eps: f64) -> ConformalMetric {
        let phi = ConformalFactor::new(&PhiSpec::single(C64::from_polar(0.3, 0.4), 1.5, 0.5)).unwrap();
        ConformalMetric::new(Arc::new(phi), eps).unwrap()
    }

    #[test]
    fn hyperbolic_length_is_the_trace_length() {
        let m = ConformalMetric::hyperbolic();
        let w: Word = "aB".parse().unwrap();
        let g = closed_length(&m, &w, 64, &SolverOptions::default()).unwrap();
        let want = m.phi.group().translation_length(&w);
        assert!((g.lg - want).abs() < 1e-12 * want);
        assert_eq!(g.iterations, 0);
    }

    #[test]
    fn perturbed_start_relaxes_to_the_axis() {
        let m = ConformalMetric::hyperbolic();
        let w: Word = "abAB".parse().unwrap_or_else(|_| "ab".parse().unwrap());
        let n = 64;
        let start: Vec<f64> = (0..n).map(|i| 0.05 * (2.0 * std::f64::consts::PI * 3.0 * i as f64 / n as f64).sin()).collect();
        let g = closed_length_from(&m, &w, n, &SolverOptions::default(), Some(&start)).unwrap();
        assert!((g.lg - g.l0).abs() < 1e-10 * g.l0);
        assert!(g.offsets.iter().all(|r| r.abs() < 1e-8));
    }

    #[test]
    fn perturbed_length_is_refinement_stable() {
        let m = metric(0.02);
        let w: Word = "ab".parse().unwrap();
        let a = closed_length(&m, &w, 64, &SolverOptions::default()).unwrap();
        let b = closed_length(&m, &w, 128, &SolverOptions::default()).unwrap();
        assert!((a.lg - b.lg).abs() < 1e-9 * a.l0, "{} {}", a.lg, b.lg);
    }

    #[test]
    fn length_derivative_is_the_xray_integral() {
        let w: Word = "ab".parse().unwrap();
        let eps = 1e-3;
        let lp = closed_length(&metric(eps), &w, 64, &SolverOptions::default()).unwrap();
        let lm = closed_length(&metric(-eps), &w, 64, &SolverOptions::default()).unwrap();
        let x = xray_integral(&metric(0.0).phi, &w, 64).unwrap();
        assert!(((lp.lg - lm.lg) / (2.0 * eps) - x).abs() < 1e-5 * (1.0 + x.abs()));
    }

    #[test]
    fn csv_round_trips() {
        let g = FuchsianGroup::bolza();
        let cl = g.enumerate_classes(5.0, &EnumerateOptions::default()).unwrap();
        let ds = DoubleSpectrum::reference(&cl, 5.0, g.order());
        let back = DoubleSpectrum::from_csv(&ds.to_csv(), ds.meta.clone()).unwrap();
        assert_eq!(ds, back);
    }
}
