//! Length and Thurston distances, ratio tails and the Thurston norm.
//!
//! Suprema over classes are taken cumulatively over `l0 <= T`: by shadowing,
//! the supremum over all classes approximates the supremum over invariant
//! measures. The drift between `T - w` and `T` is the truncation error, and
//! the extremes over the last annulus `(T - w, T]` are reported alongside.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesics::{xray_integral, DoubleSpectrum, NPolicy, SpectrumEntry};
use crate::metric::{area_average, ConformalFactor};
use crate::report::FunctionalReport;
use crate::thermo::{Measure, PsiReport, Thermo, ThermoOptions};

/// Extremes of `lg/l0 - 1` up to `t` and over the annulus `(t - width, t]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailWindow {
    pub t: f64,
    pub max: f64,
    pub min: f64,
    pub window_count: usize,
    pub window_max: f64,
    pub window_min: f64,
    pub window_mean: f64,
}

/// Estimates of `L+` and `L-` with their window history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioTail {
    pub windows: Vec<TailWindow>,
    pub plus: f64,
    pub minus: f64,
    pub plus_drift: f64,
    pub minus_drift: f64,
}

impl RatioTail {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("T,max,min,window_count,window_max,window_min,window_mean\n");
        for w in &self.windows {
            s.push_str(&format!("{},{},{},{},{},{},{}\n", w.t, w.max, w.min, w.window_count, w.window_max, w.window_min, w.window_mean));
        }
        s
    }
}

fn window_ends(ds: &DoubleSpectrum, width: f64) -> Result<Vec<f64>> {
    if !(width > 0.0) {
        return Err(Error::Invalid("window width must be positive".into()));
    }
    let first = ds.valid().map(|e| e.l0).fold(f64::INFINITY, f64::min);
    if !first.is_finite() {
        return Err(Error::Invalid("spectrum has no valid classes".into()));
    }
    let mut ends = Vec::new();
    let mut t = ds.meta.cap;
    while t >= first {
        ends.push(t);
        t -= width;
    }
    ends.reverse();
    Ok(ends)
}

/// Windowed extremes of `lg/l0 - 1` ordered by `l0`.
pub fn tail_ratios(ds: &DoubleSpectrum, width: f64) -> Result<RatioTail> {
    let ends = window_ends(ds, width)?;
    let x: Vec<(f64, f64)> = ds.valid().map(|e| (e.l0, e.lg / e.l0 - 1.0)).collect();
    let windows: Vec<TailWindow> = ends
        .iter()
        .map(|&t| {
            let upto = x.iter().filter(|(l, _)| *l <= t).map(|p| p.1);
            let ann: Vec<f64> = x.iter().filter(|(l, _)| *l <= t && *l > t - width).map(|p| p.1).collect();
            TailWindow {
                t,
                max: upto.clone().fold(f64::NEG_INFINITY, f64::max),
                min: upto.fold(f64::INFINITY, f64::min),
                window_count: ann.len(),
                window_max: ann.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                window_min: ann.iter().copied().fold(f64::INFINITY, f64::min),
                window_mean: if ann.is_empty() { f64::NAN } else { ann.iter().sum::<f64>() / ann.len() as f64 },
            }
        })
        .collect();
    let last = windows.last().expect("at least one window");
    let prev = if windows.len() > 1 { &windows[windows.len() - 2] } else { last };
    Ok(RatioTail { plus: last.max, minus: last.min, plus_drift: last.max - prev.max, minus_drift: prev.min - last.min, windows })
}

/// `(1/l0) int phi` along the reference geodesic of each entry.
pub fn xray_averages(phi: &ConformalFactor, entries: &[SpectrumEntry], policy: &NPolicy) -> Result<Vec<f64>> {
    entries.par_iter().map(|e| Ok(xray_integral(phi, &e.word, policy.nodes(e.l0))? / e.l0)).collect()
}

/// Annulus means of `(lg/l0 - 1)/eps` against the X-ray averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderWindow {
    pub t: f64,
    pub count: usize,
    pub ratio_mean: f64,
    pub xray_mean: f64,
}

pub fn first_order_windows(ds: &DoubleSpectrum, xray: &[f64], eps: f64, width: f64) -> Result<Vec<FirstOrderWindow>> {
    if xray.len() != ds.entries.len() {
        return Err(Error::Mismatch("one X-ray average per class is required".into()));
    }
    let ends = window_ends(ds, width)?;
    Ok(ends
        .iter()
        .map(|&t| {
            let sel: Vec<(f64, f64)> = ds
                .entries
                .iter()
                .zip(xray)
                .filter(|(e, _)| e.ok() && e.l0 <= t && e.l0 > t - width)
                .map(|(e, x)| ((e.lg / e.l0 - 1.0) / eps, *x))
                .collect();
            let n = sel.len() as f64;
            FirstOrderWindow {
                t,
                count: sel.len(),
                ratio_mean: sel.iter().map(|p| p.0).sum::<f64>() / n,
                xray_mean: sel.iter().map(|p| p.1).sum::<f64>() / n,
            }
        })
        .collect())
}

fn check_classes(a: &DoubleSpectrum, b: &DoubleSpectrum) -> Result<()> {
    if a.entries.len() != b.entries.len() || a.entries.iter().zip(&b.entries).any(|(x, y)| x.word != y.word || x.l0 != y.l0) {
        return Err(Error::Mismatch("spectra do not share their class list".into()));
    }
    Ok(())
}

/// Cumulative supremum of `f(a, b)` over classes valid in both, up to `t`,
/// with the maximizing class.
fn sup_upto(a: &DoubleSpectrum, b: &DoubleSpectrum, t: f64, lo: f64, f: &dyn Fn(&SpectrumEntry, &SpectrumEntry) -> f64) -> (f64, Option<usize>) {
    let mut best = (f64::NEG_INFINITY, None);
    for (i, (x, y)) in a.entries.iter().zip(&b.entries).enumerate() {
        if x.ok() && y.ok() && x.l0 <= t && x.l0 > lo {
            let v = f(x, y);
            if v > best.0 {
                best = (v, Some(i));
            }
        }
    }
    best
}

fn sup_report(name: &str, a: &DoubleSpectrum, b: &DoubleSpectrum, width: f64, f: &dyn Fn(&SpectrumEntry, &SpectrumEntry) -> f64) -> Result<FunctionalReport> {
    let cap = a.meta.cap.min(b.meta.cap);
    let (v, arg) = sup_upto(a, b, cap, f64::NEG_INFINITY, f);
    let Some(i) = arg else {
        return Err(Error::Invalid("no class is valid in both spectra".into()));
    };
    let (prev, _) = sup_upto(a, b, cap - width, f64::NEG_INFINITY, f);
    let (ann, _) = sup_upto(a, b, cap, cap - width, f);
    let mut r = FunctionalReport::new(name, v).with_window(0.0, Some(cap));
    r.truncation = if prev.is_finite() { v - prev } else { 0.0 };
    r.n = a.entries.iter().zip(&b.entries).filter(|(x, y)| x.ok() && y.ok() && x.l0 <= cap).count();
    r.inputs_hash = crate::report::hash_json(&serde_json::json!([a.meta.metric_hash, b.meta.metric_hash]));
    Ok(r.with_diag("value_previous_window", prev)
        .with_diag("last_window_sup", ann)
        .with_diag("argmax_l0", a.entries[i].l0)
        .note(format!("argmax class: {}", a.entries[i].word)))
}

/// `sup |log(L1/L2)|` over the class list.
///
/// Differences of logarithms of nearby lengths are exact in floating point,
/// so symmetry and the triangle inequality hold exactly for the estimator.
pub fn d_length(a: &DoubleSpectrum, b: &DoubleSpectrum, width: f64) -> Result<FunctionalReport> {
    check_classes(a, b)?;
    sup_report("d_length", a, b, width, &|x, y| (x.lg.ln() - y.lg.ln()).abs())
}

/// Thurston distance `sup log(h2 L2 / (h1 L1))` after entropy normalization.
pub fn d_thurston(a: &DoubleSpectrum, b: &DoubleSpectrum, opts: ThermoOptions, width: f64) -> Result<FunctionalReport> {
    check_classes(a, b)?;
    let ha = Thermo::new(a, opts).entropy().map_err(|e| Error::Convergence(format!("entropy normalization failed: {e}")))?;
    let hb = Thermo::new(b, opts).entropy().map_err(|e| Error::Convergence(format!("entropy normalization failed: {e}")))?;
    let (la, lb) = (ha.value.ln(), hb.value.ln());
    let mut r = sup_report("d_thurston", a, b, width, &|x, y| (lb + y.lg.ln()) - (la + x.lg.ln()))?;
    r.truncation += ha.band() / ha.value + hb.band() / hb.value;
    let na = a.scaled(ha.value);
    let nb = b.scaled(hb.value);
    let pair = DoubleSpectrum::pair(&na, &nb)?;
    let bm = Thermo::new(&pair, ThermoOptions { t: opts.t.min(pair.meta.cap - opts.width), ..opts }).stretch(Measure::BowenMargulis)?;
    Ok(r.with_diag("entropy_from", ha.value).with_diag("entropy_to", hb.value).with_diag("log_bm_stretch", bm.value.ln()))
}

/// Thurston norm `(1/2) sup_c (1/l0) int_c 2 (phi - m)` from per-class X-ray
/// averages, with `m` the Bowen–Margulis mean of `phi`.
pub fn finsler_norm_from(entries: &[SpectrumEntry], xray: &[f64], mean: f64, cap: f64, width: f64) -> Result<FunctionalReport> {
    if xray.len() != entries.len() {
        return Err(Error::Mismatch("one X-ray average per class is required".into()));
    }
    let sup = |t: f64| -> (f64, Option<usize>) {
        let mut best = (f64::NEG_INFINITY, None);
        for (i, (e, x)) in entries.iter().zip(xray).enumerate() {
            let v = 0.5 * (2.0 * x - 2.0 * mean);
            if e.l0 <= t && v > best.0 {
                best = (v, Some(i));
            }
        }
        best
    };
    let (v, arg) = sup(cap);
    let Some(i) = arg else {
        return Err(Error::Invalid("no classes up to the cap".into()));
    };
    let (prev, prev_arg) = sup(cap - width);
    let mut r = FunctionalReport::new("finsler_norm", v).with_window(0.0, Some(cap));
    r.truncation = if prev.is_finite() { v - prev } else { 0.0 };
    r.n = entries.iter().filter(|e| e.l0 <= cap).count();
    r = r
        .with_diag("mean", mean)
        .with_diag("value_previous_window", prev)
        .with_diag("argmax_l0", entries[i].l0)
        .with_diag("argmax_stable", if prev_arg == Some(i) { 1.0 } else { 0.0 })
        .note(format!("argmax class: {}", entries[i].word));
    Ok(r)
}

/// Thurston norm of the direction `2 phi g0` over the classes of `ds`.
pub fn finsler_norm(phi: &ConformalFactor, ds: &DoubleSpectrum, policy: &NPolicy, width: f64) -> Result<FunctionalReport> {
    let xray = xray_averages(phi, &ds.entries, policy)?;
    let mean = area_average(16, |x| phi.value_in_domain(x));
    let mut r = finsler_norm_from(&ds.entries, &xray, mean, ds.meta.cap, width)?;
    r.inputs_hash = crate::report::hash_of(phi.spec());
    // Orbit estimate of the Bowen–Margulis mean over the last window.
    let (mut num, mut den) = (0.0, 0.0);
    for (e, x) in ds.entries.iter().zip(&xray) {
        if e.l0 > ds.meta.cap - width && e.l0 <= ds.meta.cap {
            num += x * e.l0;
            den += e.l0;
        }
    }
    Ok(r.with_diag("orbit_mean", num / den))
}

/// Right-hand sides of the stability estimate against the variance proxy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eps: f64,
    pub c_n: f64,
    pub psi: f64,
    pub phi: f64,
    /// `Psi + C_n Phi^2`.
    pub functional_rhs: f64,
    pub functional_band: f64,
    /// `|L+| + |L-|`.
    pub tail_rhs: f64,
    pub tail_band: f64,
    /// `eps^2 Var(2 phi_centered)`.
    pub proxy_lhs: f64,
    pub functional_over_eps2: f64,
    pub tail_over_eps2: f64,
    pub rhs_nonnegative: bool,
    pub tail_dominates_phi: bool,
}

pub fn stability_report(eps: f64, psi: &PsiReport, tail: &RatioTail, var_2phi: &FunctionalReport, c_n: f64) -> StabilityReport {
    let functional_rhs = psi.psi.value + c_n * psi.phi.value * psi.phi.value;
    let functional_band = psi.psi.band() + c_n * (2.0 * psi.phi.value.abs() * psi.phi.band() + psi.phi.band().powi(2));
    let tail_rhs = tail.plus.abs() + tail.minus.abs();
    let tail_band = tail.plus_drift.abs() + tail.minus_drift.abs();
    let e2 = if eps == 0.0 { f64::NAN } else { eps * eps };
    StabilityReport {
        eps,
        c_n,
        psi: psi.psi.value,
        phi: psi.phi.value,
        functional_rhs,
        functional_band,
        tail_rhs,
        tail_band,
        proxy_lhs: eps * eps * var_2phi.value,
        functional_over_eps2: functional_rhs / e2,
        tail_over_eps2: tail_rhs / e2,
        rhs_nonnegative: functional_rhs >= -functional_band && tail_rhs >= 0.0,
        tail_dominates_phi: tail_rhs + tail_band >= psi.phi.value.abs() - psi.phi.band(),
    }
}

/// Pairwise values of a distance over a list of spectra.
pub fn distance_matrix(spectra: &[DoubleSpectrum], d: impl Fn(&DoubleSpectrum, &DoubleSpectrum) -> Result<f64>) -> Result<Vec<Vec<f64>>> {
    spectra.iter().map(|a| spectra.iter().map(|b| d(a, b)).collect()).collect()
}

pub fn matrix_csv(names: &[String], m: &[Vec<f64>]) -> String {
    let mut s = String::from("from");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (n, row) in names.iter().zip(m) {
        s.push_str(n);
        for v in row {
            s.push_str(&format!(",{v}"));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::{EnumerateOptions, FuchsianGroup};

    fn synthetic(f: impl Fn(f64, usize) -> f64) -> DoubleSpectrum {
        let g = FuchsianGroup::bolza();
        let cl = g.enumerate_classes(8.0, &EnumerateOptions::default()).unwrap();
        let mut ds = DoubleSpectrum::reference(&cl, 8.0, g.order());
        for (i, e) in ds.entries.iter_mut().enumerate() {
            e.lg = e.l0 * f(e.l0, i);
        }
        ds
    }

    #[test]
    fn reference_tails_vanish() {
        let t = tail_ratios(&synthetic(|_, _| 1.0), 1.0).unwrap();
        assert_eq!((t.plus, t.minus), (0.0, 0.0));
        assert!(t.windows.windows(2).all(|w| w[0].t < w[1].t && w[1].max >= w[0].max));
    }

    #[test]
    fn length_distance_is_a_pseudometric_on_samples() {
        let a = synthetic(|l, i| 1.0 + 0.01 * ((i as f64).sin() + 1.0 / l));
        let b = synthetic(|_, i| 1.0 - 0.02 * (0.3 * i as f64).cos());
        let c = synthetic(|l, _| 1.0 + 0.005 * l);
        let d = |x: &DoubleSpectrum, y: &DoubleSpectrum| d_length(x, y, 1.0).unwrap().value;
        assert_eq!(d(&a, &a), 0.0);
        assert_eq!(d(&a, &b), d(&b, &a));
        assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        assert!(d(&b, &c) <= d(&b, &a) + d(&a, &c));
    }

    #[test]
    fn thurston_distance_ignores_scale() {
        let a = synthetic(|_, i| 1.0 + 0.01 * (i as f64).sin());
        let b = synthetic(|_, i| 1.0 + 0.01 * (0.7 * i as f64).cos());
        let o = ThermoOptions::calibrated(7.0);
        let d = d_thurston(&a, &b, o, 1.0).unwrap();
        let d2 = d_thurston(&a.scaled(1.7), &b.scaled(0.6), o, 1.0).unwrap();
        assert!((d.value - d2.value).abs() < 1e-11);
        assert!(d.value >= d.diagnostics["log_bm_stretch"]);
        assert!(d_thurston(&a, &a, o, 1.0).unwrap().value == 0.0);
    }

    #[test]
    fn finsler_norm_is_homogeneous() {
        let ds = synthetic(|_, _| 1.0);
        let x: Vec<f64> = (0..ds.entries.len()).map(|i| (i as f64).sin()).collect();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let n = finsler_norm_from(&ds.entries, &x, 0.1, 8.0, 1.0).unwrap().value;
        let n2 = finsler_norm_from(&ds.entries, &x2, 0.2, 8.0, 1.0).unwrap().value;
        assert_eq!(n2, 2.0 * n);
        assert_eq!(finsler_norm_from(&ds.entries, &vec![0.0; x.len()], 0.0, 8.0, 1.0).unwrap().value, 0.0);
    }
}
