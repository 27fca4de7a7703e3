//! Busemann functions of conformal metrics and the reparametrization `a_g`.
//!
//! Distances are computed by fixed-endpoint length minimization of normal
//! graphs over the `g0`-segment between two points, on a Chebyshev grid.
//! Points are carried as frames (`Su11` elements) so that far truncation
//! points keep full relative precision.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disk::{Su11, C64};
use crate::error::{Error, Result};
use crate::flow::PhasePoint;
use crate::fuchsian::Word;
use crate::geodesics::{reduce_frame, GraphProblem, SolverOptions};
use crate::metric::ConformalMetric;
use crate::quadrature::Chebyshev;
use crate::report::FunctionalReport;

/// Ideal boundary point of the disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    angle: f64,
}

impl BoundaryPoint {
    pub fn new(angle: f64) -> BoundaryPoint {
        let a = angle.rem_euclid(TAU);
        BoundaryPoint { angle: if a >= TAU { 0.0 } else { a } }
    }

    pub fn from_point(z: C64) -> BoundaryPoint {
        BoundaryPoint::new(z.arg())
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn point(&self) -> C64 {
        C64::from_polar(1.0, self.angle)
    }

    pub fn moved(&self, g: &Su11) -> BoundaryPoint {
        BoundaryPoint::from_point(g.apply(self.point()))
    }
}

/// Truncation, discretization and differencing controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusemannOptions {
    pub t_trunc: f64,
    /// Nominal length of a spectral element.
    pub panel_length: f64,
    /// Polynomial degree on each element.
    pub degree: usize,
    /// Central-difference step for the Busemann gradient.
    pub fd_step: f64,
    pub solver: SolverOptions,
}

impl Default for BusemannOptions {
    fn default() -> Self {
        BusemannOptions { t_trunc: 20.0, panel_length: 2.0, degree: 12, fd_step: 1e-4, solver: SolverOptions::default() }
    }
}

impl BusemannOptions {
    fn with_t(&self, t: f64) -> BusemannOptions {
        BusemannOptions { t_trunc: t, ..*self }
    }
}

/// Minimizing segment between two points.
#[derive(Clone, Debug)]
pub struct Segment {
    pub length: f64,
    pub l0: f64,
    pub residual: f64,
    /// Slope `dr/ds` of the normal graph at the start point.
    pub start_slope: f64,
}

/// `g`-distance between the origin images of two frames.
pub fn segment(metric: &ConformalMetric, from: &Su11, to: &Su11, opts: &BusemannOptions) -> Result<Segment> {
    let m = from.inv().mul(to);
    let l0 = 2.0 * m.a.norm().max(1.0).acosh();
    if l0 < 1e-12 {
        return Ok(Segment { length: 0.0, l0, residual: 0.0, start_slope: 0.0 });
    }
    let theta = (m.b / m.a.conj()).arg();
    let frame = from.mul(&Su11::rotation(theta));
    let mi = m.inv();
    // The far half hangs off the endpoint reduced once, so that its frames do
    // not depend on the start point through rounding.
    let group = metric.phi.group();
    let back = reduce_frame(group, *to).mul(&Su11::rotation((mi.b / mi.a.conj()).arg()));
    let panels = ((l0 / opts.panel_length).round() as usize).max(1);
    let deg = opts.degree;
    let cheb = Chebyshev::new(deg, l0 / panels as f64);
    let n = panels * deg + 1;
    let nq = panels * (deg + 1);
    let mut diff = DMatrix::zeros(nq, n);
    let (mut nodes, mut weights, mut point) = (Vec::with_capacity(nq), Vec::with_capacity(nq), Vec::with_capacity(nq));
    for k in 0..panels {
        let s0 = k as f64 * l0 / panels as f64;
        for i in 0..=deg {
            let q = k * (deg + 1) + i;
            nodes.push(s0 + cheb.nodes[i]);
            weights.push(cheb.weights[i]);
            point.push(k * deg + i);
            for j in 0..=deg {
                diff[(q, k * deg + j)] = cheb.diff[i * (deg + 1) + j];
            }
        }
    }
    let frames = nodes
        .iter()
        .map(|&s| {
            let m = if s <= 0.5 * l0 {
                frame.mul(&Su11::translation(s))
            } else {
                back.mul(&Su11::translation(l0 - s)).mul(&Su11::rotation(std::f64::consts::PI))
            };
            reduce_frame(group, m)
        })
        .collect();
    let problem = GraphProblem { metric, frames, weights, point, diff, free: (1..n - 1).collect() };
    let sol = problem.solve(vec![0.0; n], &opts.solver)?;
    if !(sol.residual < opts.solver.tol.max(1e-8)) {
        return Err(Error::Convergence(format!(
            "segment of length {l0:.3}: length gradient stalled at {:.3e} after {} iterations",
            sol.residual, sol.iterations
        )));
    }
    let start_slope = problem.slope(&sol.r, 0);
    Ok(Segment { length: sol.length, l0, residual: sol.residual, start_slope })
}

/// Frame at `x0` pointing toward `xi`.
fn frame_toward(x0: C64, xi: &BoundaryPoint) -> Su11 {
    let p = Su11::to_point(x0);
    let w = p.inv().apply(xi.point());
    p.mul(&Su11::rotation(w.arg()))
}

/// `d_g(x0, z_T) - d_g(x, z_T)` for `z_T` at `g0`-distance `t_trunc` from `x0` toward `xi`.
pub fn busemann_value(metric: &ConformalMetric, x0: C64, x: C64, xi: &BoundaryPoint, opts: &BusemannOptions) -> Result<f64> {
    let start = frame_toward(x0, xi);
    let far = start.mul(&Su11::translation(opts.t_trunc));
    let d0 = segment(metric, &start, &far, opts)?.length;
    let d1 = segment(metric, &Su11::to_point(x), &far, opts)?.length;
    Ok(d0 - d1)
}

/// Busemann function with the half-truncation value as diagnostic.
pub fn busemann(metric: &ConformalMetric, x0: C64, x: C64, xi: &BoundaryPoint, opts: &BusemannOptions) -> Result<FunctionalReport> {
    for p in [x0, x] {
        if !(p.norm() < 1.0) {
            return Err(Error::Invalid(format!("point {p} is not in the disk")));
        }
    }
    if !(opts.t_trunc > 0.0) {
        return Err(Error::Invalid("truncation must be positive".into()));
    }
    let v = busemann_value(metric, x0, x, xi, opts)?;
    let half = busemann_value(metric, x0, x, xi, &opts.with_t(0.5 * opts.t_trunc))?;
    let mut r = FunctionalReport::new("busemann", v).with_window(opts.t_trunc, None);
    r.truncation = (v - half).abs();
    r.inputs_hash = metric.hash();
    Ok(r.with_diag("value_half_t", half))
}

/// Hyperbolic Busemann function `log((1-|x|^2)/|x-xi|^2)` relative to `x0`.
pub fn hyperbolic_busemann(x0: C64, x: C64, xi: &BoundaryPoint) -> f64 {
    let h = |p: C64| ((1.0 - p.norm_sqr()) / (p - xi.point()).norm_sqr()).ln();
    h(x) - h(x0)
}

/// `a_g(z)` by central differences of the Busemann function toward the
/// forward endpoint of the `g0`-geodesic of `z`.
pub fn reparam_a(metric: &ConformalMetric, z: &PhasePoint, opts: &BusemannOptions) -> Result<f64> {
    Ok(reparam_sample(metric, &z.frame(), opts)?.a)
}

/// One evaluation of `a_g` with its first-variation cross-check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReparamSample {
    pub a: f64,
    /// `exp(eps phi) cos(angle)` between `v` and the minimizing segment.
    pub first_variation: f64,
}

fn reparam_sample(metric: &ConformalMetric, frame: &Su11, opts: &BusemannOptions) -> Result<ReparamSample> {
    let far = frame.mul(&Su11::translation(opts.t_trunc));
    let h = opts.fd_step;
    let back = segment(metric, &frame.mul(&Su11::translation(-h)), &far, opts)?;
    let ahead = segment(metric, &frame.mul(&Su11::translation(h)), &far, opts)?;
    let a = (back.length - ahead.length) / (2.0 * h);
    let at = segment(metric, frame, &far, opts)?;
    let x = frame.apply(C64::new(0.0, 0.0));
    let e = (metric.eps * metric.phi.value(x)?).exp();
    let first_variation = e / (1.0 + at.start_slope * at.start_slope).sqrt();
    Ok(ReparamSample { a, first_variation })
}

/// `int_0^l0 a_g` along the `g0`-axis of a class, by the trapezoid rule.
///
/// The integral equals the `g`-length of the class, which makes this an
/// optimizer-free length estimate.
pub fn axis_integral(metric: &ConformalMetric, word: &Word, n_nodes: usize, opts: &BusemannOptions) -> Result<FunctionalReport> {
    let exact = metric.phi.group().word_exact(word)?;
    let gamma = exact.to_dd().to_f64();
    let l0 = exact.to_dd().translation_length();
    let frame = gamma.axis_frame().ok_or_else(|| Error::Invalid(format!("class {word} is not hyperbolic")))?;
    let h = l0 / n_nodes as f64;
    let samples: Vec<ReparamSample> = (0..n_nodes)
        .into_par_iter()
        .map(|i| reparam_sample(metric, &frame.mul(&Su11::translation(i as f64 * h)), opts))
        .collect::<Result<_>>()?;
    let value = h * samples.iter().map(|s| s.a).sum::<f64>();
    let fv = h * samples.iter().map(|s| s.first_variation).sum::<f64>();
    let min_a = samples.iter().map(|s| s.a).fold(f64::INFINITY, f64::min);
    let mut r = FunctionalReport::new("axis_integral", value).with_window(opts.t_trunc, None);
    r.n = n_nodes;
    r.inputs_hash = metric.hash();
    // Telescoped form b(x, gamma x) toward the attracting endpoint.
    let tele = |t: f64| -> Result<f64> {
        let far = frame.mul(&Su11::translation(t));
        Ok(segment(metric, &frame, &far, opts)?.length - segment(metric, &gamma.mul(&frame), &far, opts)?.length)
    };
    let (full, half) = (tele(opts.t_trunc)?, tele(0.5 * opts.t_trunc)?);
    r.truncation = (full - half).abs();
    Ok(r.with_diag("l0", l0)
        .with_diag("first_variation", fv)
        .with_diag("telescoped", full)
        .with_diag("telescoped_half_t", half)
        .with_diag("min_a", min_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{ConformalFactor, PhiSpec};
    use std::sync::Arc;

    fn bump(eps: f64) -> ConformalMetric {
        let phi = Arc::new(ConformalFactor::new(&PhiSpec::single(C64::from_polar(0.3, 0.4), 1.5, 0.5)).unwrap());
        ConformalMetric::new(phi, eps).unwrap()
    }

    #[test]
    fn hyperbolic_matches_closed_form() {
        let g = ConformalMetric::hyperbolic();
        let xi = BoundaryPoint::new(2.0);
        let (x0, x) = (C64::new(0.1, -0.2), C64::new(-0.3, 0.4));
        let b = busemann(&g, x0, x, &xi, &BusemannOptions::default()).unwrap();
        assert!((b.value - hyperbolic_busemann(x0, x, &xi)).abs() < 1e-5, "{b:?}");
        assert_eq!(busemann_value(&g, x, x, &xi, &BusemannOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn segment_length_converges_in_nodes() {
        let g = bump(0.04);
        let a = Su11::to_point(C64::new(0.2, 0.1));
        let b = a.mul(&Su11::rotation(0.7)).mul(&Su11::translation(20.0));
        let coarse = segment(&g, &a, &b, &BusemannOptions::default()).unwrap();
        let fine = segment(&g, &a, &b, &BusemannOptions { degree: 24, ..Default::default() });
        let fine = match fine { Ok(f) => f, Err(e) => panic!("{e}") };
        assert!((coarse.length - fine.length).abs() < 1e-8, "{} {}", coarse.length, fine.length);
        assert!(coarse.length > coarse.l0);
    }

    #[test]
    fn reparametrization_is_one_on_the_reference() {
        let z = PhasePoint::hyperbolic(C64::new(0.2, -0.1), 1.1);
        let a = reparam_a(&ConformalMetric::hyperbolic(), &z, &BusemannOptions::default()).unwrap();
        assert!((a - 1.0).abs() < 1e-4);
    }

    #[test]
    fn reparametrization_matches_first_variation() {
        let g = bump(0.04);
        let s = reparam_sample(&g, &PhasePoint::hyperbolic(C64::new(0.25, 0.05), 0.3).frame(), &BusemannOptions::default()).unwrap();
        assert!(s.a > 0.0);
        assert!((s.a - s.first_variation).abs() < 1e-6, "{s:?}");
    }

    #[test]
    fn cocycle_and_equivariance() {
        let g = bump(0.04);
        let o = BusemannOptions::default();
        let xi = BoundaryPoint::new(4.0);
        let (x0, x1, x) = (C64::new(0.1, 0.2), C64::new(-0.2, 0.1), C64::new(0.3, -0.3));
        let b = busemann_value(&g, x0, x, &xi, &o).unwrap();
        let split = busemann_value(&g, x0, x1, &xi, &o).unwrap() + busemann_value(&g, x1, x, &xi, &o).unwrap();
        assert!((b - split).abs() < 1e-7, "{b} {split}");
        let gamma = g.phi.group().generator(2).mul(&g.phi.group().generator(5));
        let moved = busemann_value(&g, gamma.apply(x0), gamma.apply(x), &xi.moved(&gamma), &o).unwrap();
        assert!((b - moved).abs() < 1e-7, "{b} {moved}");
    }

    #[test]
    fn axis_integral_is_the_class_length() {
        let g = bump(0.02);
        let w: Word = "a".parse().unwrap();
        let geo = crate::geodesics::closed_length(&g, &w, 64, &SolverOptions::default()).unwrap();
        let r = axis_integral(&g, &w, 16, &BusemannOptions::default()).unwrap();
        assert!((r.value - geo.lg).abs() < 1e-7, "{r:?} {}", geo.lg);
        assert!((r.diagnostics["telescoped"] - geo.lg).abs() < 1e-8);
        assert!(r.diagnostics["min_a"] > 0.0);
    }
}
