//! Thermodynamic formalism over a double length spectrum.
//!
//! Every potential used here has an exact class integral in terms of
//! `(l0, lg)`: on the reference surface `J^u = 1`, and the reparametrization
//! `a_g` integrates to `lg` over the reference geodesic of a class.
//!
//! Pressure over a window `[T, T + w)` is the root `P` of
//!
//! `sum 2 l0 exp(int f - P l0) = w`,
//!
//! the weighted prime orbit theorem with both orientations of each class
//! counted. The literal ratio `(1/T) log sum exp(int f)` is also reported;
//! it carries an `O(log T / T)` bias.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{variance, Observable, PhasePoint, VarianceOptions};
use crate::fuchsian::FuchsianGroup;
use crate::geodesics::{DoubleSpectrum, SpectrumEntry};
use crate::metric::{area_average, ConformalFactor};
use crate::report::FunctionalReport;

/// Potential `alpha + beta a_g + gamma J^u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialCombo {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PotentialCombo {
    pub const ZERO: PotentialCombo = PotentialCombo { alpha: 0.0, beta: 0.0, gamma: 0.0 };

    /// `-J^u`, whose equilibrium state is the Liouville measure.
    pub const MINUS_JU: PotentialCombo = PotentialCombo { alpha: 0.0, beta: 0.0, gamma: -1.0 };

    /// `-V_g = -(J^u + a_g - 1)`.
    pub const MINUS_V: PotentialCombo = PotentialCombo { alpha: 1.0, beta: -1.0, gamma: -1.0 };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> PotentialCombo {
        PotentialCombo { alpha, beta, gamma }
    }

    pub fn scaled(&self, s: f64) -> PotentialCombo {
        PotentialCombo { alpha: s * self.alpha, beta: s * self.beta, gamma: s * self.gamma }
    }

    /// Integral over the reference geodesic of the class.
    pub fn integral(&self, e: &SpectrumEntry) -> f64 {
        (self.alpha + self.gamma) * e.l0 + self.beta * e.lg
    }
}

/// How window pressures are normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// The window root as is.
    Raw,
    /// Subtract the same-window value of `P(-J^u)`, which vanishes exactly
    /// on the reference surface, as a control variate.
    Calibrated,
}

/// Invariant measure on the reference flow for stretch estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Liouville,
    BowenMargulis,
    Equilibrium(PotentialCombo),
}

impl Measure {
    fn potential(&self) -> PotentialCombo {
        match self {
            Measure::Liouville => PotentialCombo::MINUS_JU,
            Measure::BowenMargulis => PotentialCombo::ZERO,
            Measure::Equilibrium(f) => *f,
        }
    }
}

/// Window settings for orbit-sum estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoOptions {
    /// Window start `T`; windows are `[T, T + width)`.
    pub t: f64,
    pub width: f64,
    /// Periodic orbits per class (two orientations).
    pub multiplicity: f64,
    pub estimator: Estimator,
    /// Bracket for entropy-type roots.
    pub bracket: (f64, f64),
    pub root_tol: f64,
}

impl Default for ThermoOptions {
    fn default() -> Self {
        ThermoOptions { t: 9.0, width: 1.0, multiplicity: 2.0, estimator: Estimator::Calibrated, bracket: (0.5, 2.0), root_tol: 1e-13 }
    }
}

impl ThermoOptions {
    pub fn raw(t: f64) -> ThermoOptions {
        ThermoOptions { t, estimator: Estimator::Raw, ..ThermoOptions::default() }
    }

    pub fn calibrated(t: f64) -> ThermoOptions {
        ThermoOptions { t, ..ThermoOptions::default() }
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Orbit-sum estimators on one double spectrum.
#[derive(Clone, Copy, Debug)]
pub struct Thermo<'a> {
    pub ds: &'a DoubleSpectrum,
    pub opts: ThermoOptions,
}

impl<'a> Thermo<'a> {
    pub fn new(ds: &'a DoubleSpectrum, opts: ThermoOptions) -> Thermo<'a> {
        Thermo { ds, opts }
    }

    fn at(&self, t: f64) -> Thermo<'a> {
        Thermo { ds: self.ds, opts: ThermoOptions { t, ..self.opts } }
    }

    /// Valid entries with `l0` in the window.
    pub fn window(&self) -> Vec<&'a SpectrumEntry> {
        let (lo, hi) = (self.opts.t, self.opts.t + self.opts.width);
        self.ds.valid().filter(|e| e.l0 >= lo && e.l0 < hi).collect()
    }

    fn check_window(&self) -> Result<Vec<&'a SpectrumEntry>> {
        if self.ds.meta.cap < self.opts.t + self.opts.width {
            return Err(Error::Invalid(format!(
                "spectrum cap {} does not cover the window [{}, {}]",
                self.ds.meta.cap,
                self.opts.t,
                self.opts.t + self.opts.width
            )));
        }
        let w = self.window();
        if w.is_empty() {
            return Err(Error::Invalid(format!("window at T = {} is empty", self.opts.t)));
        }
        Ok(w)
    }

    /// Window root without calibration.
    pub fn raw_pressure(&self, f: &PotentialCombo) -> Result<f64> {
        let w = self.check_window()?;
        let m = self.opts.multiplicity;
        let target = self.opts.width.ln();
        let g = |p: f64| -> (f64, f64) {
            let terms: Vec<f64> = w.iter().map(|e| (m * e.l0).ln() + f.integral(e) - p * e.l0).collect();
            let lse = log_sum_exp(terms.iter().copied());
            let mean_l = w.iter().zip(&terms).map(|(e, t)| e.l0 * (t - lse).exp()).sum::<f64>();
            (lse - target, mean_l)
        };
        let mut p = 0.0;
        for _ in 0..100 {
            let (val, slope) = g(p);
            let dp = val / slope;
            p += dp;
            if dp.abs() < 1e-15 * (1.0 + p.abs()) {
                return Ok(p);
            }
        }
        Ok(p)
    }

    /// Literal `(1/T) log sum exp(int f)` over the window.
    pub fn bowen_ratio(&self, f: &PotentialCombo) -> Result<f64> {
        let w = self.check_window()?;
        Ok(log_sum_exp(w.iter().map(|e| f.integral(e))) / self.opts.t)
    }

    fn calibration(&self) -> Result<f64> {
        match self.opts.estimator {
            Estimator::Raw => Ok(0.0),
            Estimator::Calibrated => self.raw_pressure(&PotentialCombo::MINUS_JU),
        }
    }

    /// Window pressure under the configured estimator.
    pub fn pressure_value(&self, f: &PotentialCombo) -> Result<f64> {
        Ok(self.raw_pressure(f)? - self.calibration()?)
    }

    fn report(&self, name: &str, value_at: impl Fn(&Thermo) -> Result<f64>) -> Result<FunctionalReport> {
        let v = value_at(self)?;
        let prev = value_at(&self.at(self.opts.t - 1.0))?;
        let mut r = FunctionalReport::new(name, v).with_window(self.opts.t, Some(self.opts.t + self.opts.width));
        r.truncation = (v - prev).abs();
        r.n = self.window().len();
        r.inputs_hash = self.ds.meta.metric_hash.clone();
        Ok(r.with_diag("value_previous_window", prev).with_diag("drift", v - prev))
    }

    pub fn pressure(&self, f: &PotentialCombo) -> Result<FunctionalReport> {
        let r = self.report("pressure", |th| th.pressure_value(f))?;
        Ok(r.with_diag("raw", self.raw_pressure(f)?).with_diag("bowen_ratio", self.bowen_ratio(f)?))
    }

    /// Root `s` of `P(-s f) = 0` by bisection on the bracket.
    pub fn root(&self, f: &PotentialCombo) -> Result<f64> {
        let (mut lo, mut hi) = self.opts.bracket;
        let p = |s: f64| self.pressure_value(&f.scaled(-s));
        let (plo, phi) = (p(lo)?, p(hi)?);
        if !(plo > 0.0 && phi < 0.0) {
            return Err(Error::Convergence(format!("root of P(-s f) not bracketed by [{lo}, {hi}]: values {plo:.3e}, {phi:.3e}")));
        }
        while hi - lo > self.opts.root_tol {
            let mid = 0.5 * (lo + hi);
            if p(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Topological entropy of `g`: the root of `P(-s a_g) = 0`.
    pub fn entropy(&self) -> Result<FunctionalReport> {
        let ag = PotentialCombo::new(0.0, 1.0, 0.0);
        let r = self.report("entropy", |th| th.root(&ag))?;
        let raw = Thermo { ds: self.ds, opts: ThermoOptions { estimator: Estimator::Raw, ..self.opts } }.root(&ag)?;
        Ok(r.with_diag("raw", raw))
    }

    /// `sum w u / sum w l0` with `w = exp(int f)` over the window.
    pub fn equilibrium_value(&self, f: &PotentialCombo, u: &dyn Fn(&SpectrumEntry) -> f64) -> Result<f64> {
        let w = self.check_window()?;
        let m = w.iter().map(|e| f.integral(e)).fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for e in &w {
            let wt = (f.integral(e) - m).exp();
            num += wt * u(e);
            den += wt * e.l0;
        }
        Ok(num / den)
    }

    pub fn equilibrium_average(&self, f: &PotentialCombo, u: &dyn Fn(&SpectrumEntry) -> f64) -> Result<FunctionalReport> {
        self.report("equilibrium_average", |th| th.equilibrium_value(f, u))
    }

    /// Geodesic stretch `I_mu(g0, g)`.
    pub fn stretch(&self, measure: Measure) -> Result<FunctionalReport> {
        let f = measure.potential();
        let mut r = self.report("stretch", |th| th.equilibrium_value(&f, &|e| e.lg))?;
        r.notes.push(format!("measure: {measure:?}"));
        Ok(r)
    }

    /// `F(g) = P(-V_g)`, `Phi(g) = I_L(g0, g) - 1` and `Psi = F + Phi`.
    pub fn psi(&self) -> Result<PsiReport> {
        let f = self.report("F", |th| th.pressure_value(&PotentialCombo::MINUS_V))?;
        let phi = self.report("Phi", |th| Ok(th.equilibrium_value(&PotentialCombo::MINUS_JU, &|e| e.lg)? - 1.0))?;
        let mut psi = self.report("Psi", |th| {
            Ok(th.pressure_value(&PotentialCombo::MINUS_V)? + th.equilibrium_value(&PotentialCombo::MINUS_JU, &|e| e.lg)? - 1.0)
        })?;
        psi = psi.with_diag("raw", self.raw_pressure(&PotentialCombo::MINUS_V)? + phi.value);
        Ok(PsiReport { psi, f, phi })
    }

    /// `I(f, f') = int f' d mu / int f d mu` for `mu` the equilibrium state of `-h_f f`.
    pub fn intersection_value(&self, f: &PotentialCombo, fp: &PotentialCombo) -> Result<f64> {
        let h = self.root(f)?;
        let weight = f.scaled(-h);
        let num = self.equilibrium_value(&weight, &|e| fp.integral(e))?;
        let den = self.equilibrium_value(&weight, &|e| f.integral(e))?;
        Ok(num / den)
    }

    pub fn intersection(&self, f: &PotentialCombo, fp: &PotentialCombo) -> Result<FunctionalReport> {
        self.report("intersection", |th| th.intersection_value(f, fp))
    }

    /// `J(f, f') = (h_f' / h_f) I(f, f')`.
    pub fn renormalized_intersection(&self, f: &PotentialCombo, fp: &PotentialCombo) -> Result<FunctionalReport> {
        let r = self.report("renormalized_intersection", |th| Ok(th.root(fp)? / th.root(f)? * th.intersection_value(f, fp)?))?;
        Ok(r.with_diag("h_f", self.root(f)?).with_diag("h_f_prime", self.root(fp)?))
    }
}

/// Rescale `g` to `lambda^2 g` so that `P(-V_g) = 0`; returns `lambda` and
/// the rescaled spectrum.
pub fn normalize_pressure(ds: &DoubleSpectrum, opts: ThermoOptions) -> Result<(f64, DoubleSpectrum)> {
    let p = |lambda: f64| Thermo::new(&ds.scaled(lambda), opts).pressure_value(&PotentialCombo::MINUS_V);
    let (mut lo, mut hi) = opts.bracket;
    let (plo, phi) = (p(lo)?, p(hi)?);
    if !(plo > 0.0 && phi < 0.0) {
        return Err(Error::Convergence(format!("P(-V) not bracketed by scales [{lo}, {hi}]: values {plo:.3e}, {phi:.3e}")));
    }
    while hi - lo > opts.root_tol {
        let mid = 0.5 * (lo + hi);
        if p(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    Ok((lambda, ds.scaled(lambda)))
}

/// The rigidity functional with its two parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    pub psi: FunctionalReport,
    pub f: FunctionalReport,
    pub phi: FunctionalReport,
}

/// `J^u` and `V_g = J^u + a_g - 1` as combos.
pub const JU: PotentialCombo = PotentialCombo { alpha: 0.0, beta: 0.0, gamma: 1.0 };
pub const V: PotentialCombo = PotentialCombo { alpha: -1.0, beta: 1.0, gamma: 1.0 };

/// `2 (phi - mean)` with the mean taken for the hyperbolic area.
pub struct Centered<'a> {
    pub phi: &'a ConformalFactor,
    pub mean: f64,
}

impl<'a> Centered<'a> {
    pub fn new(phi: &'a ConformalFactor) -> Centered<'a> {
        Centered { phi, mean: area_average(16, |x| phi.value_in_domain(x)) }
    }
}

impl Observable for Centered<'_> {
    fn eval(&self, z: &PhasePoint) -> f64 {
        2.0 * (self.phi.value_in_domain(z.x) - self.mean)
    }
}

struct Combination<'a> {
    a: &'a Centered<'a>,
    b: &'a Centered<'a>,
    sign: f64,
}

impl Observable for Combination<'_> {
    fn eval(&self, z: &PhasePoint) -> f64 {
        self.a.eval(z) + self.sign * self.b.eval(z)
    }
}

/// `G(h1, h2) = (Var(u1 + u2) - Var(u1 - u2)) / 4` with `u_i = 2 phi_i` centered.
pub fn pressure_metric_form(group: &FuchsianGroup, phi1: &ConformalFactor, phi2: &ConformalFactor, opts: &VarianceOptions) -> Result<FunctionalReport> {
    let c1 = Centered::new(phi1);
    let c2 = Centered::new(phi2);
    let plus = variance(group, &Combination { a: &c1, b: &c2, sign: 1.0 }, opts)?;
    let minus = variance(group, &Combination { a: &c1, b: &c2, sign: -1.0 }, opts)?;
    let mut r = FunctionalReport::new("pressure_metric", 0.25 * (plus.value - minus.value)).with_window(plus.t, None);
    r.stderr = 0.25 * (plus.stderr + minus.stderr);
    r.truncation = 0.25 * (plus.truncation + minus.truncation);
    r.n = opts.n;
    r.seed = Some(opts.seed);
    Ok(r.with_diag("variance_sum", plus.value).with_diag("variance_difference", minus.value))
}

/// Second difference `[Psi(eps) + Psi(-eps)] / eps^2` against the flow variance.
///
/// With `a_g = 1 + eps phi` up to coboundaries and second order,
/// `Psi(g_eps) = eps^2 Var(phi) / 2 + O(eps^3)`, so the second difference
/// tends to `Var(phi) = Var(2 phi) / 4`.
pub fn hessian_check(psi_plus: &FunctionalReport, psi_minus: &FunctionalReport, eps: f64, var_2phi: &FunctionalReport) -> FunctionalReport {
    let second = (psi_plus.value + psi_minus.value) / (eps * eps);
    let target = 0.25 * var_2phi.value;
    let mut r = FunctionalReport::new("hessian_check", second / target).with_window(psi_plus.t, psi_plus.t_end);
    r.truncation = (psi_plus.band() + psi_minus.band()) / (eps * eps) / target;
    r.stderr = second / target * var_2phi.stderr / var_2phi.value;
    r.seed = var_2phi.seed;
    r.n = var_2phi.n;
    r.with_diag("second_difference", second)
        .with_diag("quarter_variance_2phi", target)
        .with_diag("variance_2phi", var_2phi.value)
        .with_diag("ratio_to_variance_2phi", second / var_2phi.value)
        .with_diag("eps", eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::EnumerateOptions;
    use crate::geodesics::DoubleSpectrum;
    use std::sync::OnceLock;

    fn reference() -> &'static DoubleSpectrum {
        static DS: OnceLock<DoubleSpectrum> = OnceLock::new();
        DS.get_or_init(|| {
            let g = FuchsianGroup::bolza();
            let cl = g.enumerate_classes(10.0, &EnumerateOptions::default()).unwrap();
            DoubleSpectrum::reference(&cl, 10.0, g.order())
        })
    }

    #[test]
    fn reference_normalizations() {
        let th = Thermo::new(reference(), ThermoOptions::raw(9.0));
        let p = th.pressure(&PotentialCombo::MINUS_JU).unwrap();
        assert!(p.value.abs() < 0.03, "{p:?}");
        let h = th.entropy().unwrap();
        assert!((h.value - 1.0).abs() < 0.03);
        let cal = Thermo::new(reference(), ThermoOptions::calibrated(9.0));
        assert!(cal.pressure_value(&PotentialCombo::MINUS_JU).unwrap().abs() < 1e-15);
        assert!((cal.entropy().unwrap().value - 1.0).abs() < 1e-12);
        assert!(cal.psi().unwrap().psi.value.abs() < 1e-14);
    }

    #[test]
    fn entropy_scales_inversely() {
        let ds = reference().scaled(1.3);
        let a = Thermo::new(reference(), ThermoOptions::raw(9.0)).entropy().unwrap().value;
        let b = Thermo::new(&ds, ThermoOptions::raw(9.0)).entropy().unwrap().value;
        assert!((b - a / 1.3).abs() < 1e-10);
    }

    #[test]
    fn pressure_is_convex_along_rays() {
        let th = Thermo::new(reference(), ThermoOptions::raw(9.0));
        let ag = PotentialCombo::new(0.0, 1.0, 0.0);
        let p: Vec<f64> = (0..7).map(|k| th.pressure_value(&ag.scaled(-(0.7 + 0.1 * k as f64))).unwrap()).collect();
        for w in p.windows(3) {
            assert!(w[0] > w[1] && w[1] > w[2]);
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-14);
        }
    }

    #[test]
    fn unit_observable_averages_to_one() {
        let th = Thermo::new(reference(), ThermoOptions::raw(9.0));
        let v = th.equilibrium_value(&PotentialCombo::new(0.3, 0.0, 0.0), &|e| e.l0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn renormalized_self_intersection_is_one() {
        let th = Thermo::new(reference(), ThermoOptions::calibrated(9.0));
        let f = PotentialCombo::new(0.5, 0.0, 1.0);
        let j = th.renormalized_intersection(&f, &f).unwrap();
        assert!((j.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pressure_normalization_lands_on_the_zero_set() {
        let mut ds = reference().clone();
        for (i, e) in ds.entries.iter_mut().enumerate() {
            e.lg = e.l0 * (1.03 + 0.01 * (i as f64).sin());
        }
        let o = ThermoOptions::calibrated(9.0);
        let (lambda, n) = normalize_pressure(&ds, o).unwrap();
        assert!(lambda < 1.0);
        let th = Thermo::new(&n, o);
        assert!(th.pressure_value(&PotentialCombo::MINUS_V).unwrap().abs() < 1e-10);
        let j = th.renormalized_intersection(&JU, &V).unwrap().value;
        let il = th.stretch(Measure::Liouville).unwrap().value;
        assert!((j - il).abs() < 1e-9, "{j} {il}");
    }
}
