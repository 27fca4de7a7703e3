//! Conformal metrics `g = exp(2 eps phi) g0` on the Bolza surface.
//!
//! `phi` is a sum of hyperbolic Gaussian bumps `A exp(-sinh^2(d/2) / w^2)`,
//! periodized over the group. A Euclidean Gaussian in disk coordinates has no
//! convergent periodization, while the hyperbolic one decays like
//! `exp(-e^d / (4 w^2))` and beats the exponential orbit growth.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::disk::{distance_from_origin, Su11, C64};
use crate::error::{Error, Result};
use crate::fuchsian::{FuchsianGroup, Octagon, PointIndex};
use crate::quadrature::gauss_legendre;

/// One Gaussian bump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    /// Center in disk coordinates.
    pub center: [f64; 2],
    pub amplitude: f64,
    /// Width `w` in `exp(-sinh^2(d/2) / w^2)`.
    pub width: f64,
}

/// Serializable description of a conformal factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiSpec {
    pub bumps: Vec<Bump>,
    #[serde(default)]
    pub offset: f64,
    /// Word length cap of the orbit search for bump images.
    #[serde(default = "default_depth")]
    pub periodization_depth: usize,
}

fn default_depth() -> usize {
    10
}

impl PhiSpec {
    pub fn single(center: C64, amplitude: f64, width: f64) -> PhiSpec {
        PhiSpec {
            bumps: vec![Bump { center: [center.re, center.im], amplitude, width }],
            offset: 0.0,
            periodization_depth: default_depth(),
        }
    }

    pub fn constant(c: f64) -> PhiSpec {
        PhiSpec { bumps: vec![], offset: c, periodization_depth: default_depth() }
    }

    pub fn scaled(&self, s: f64) -> PhiSpec {
        let mut out = self.clone();
        for b in &mut out.bumps {
            b.amplitude *= s;
        }
        out.offset *= s;
        out
    }

    pub fn validate(&self) -> Result<()> {
        for b in &self.bumps {
            let c = C64::new(b.center[0], b.center[1]);
            if !(c.norm() < 1.0) || !(b.width > 0.0) || !b.amplitude.is_finite() {
                return Err(Error::Config(format!("invalid bump {b:?}")));
            }
        }
        if !self.offset.is_finite() {
            return Err(Error::Config("offset must be finite".into()));
        }
        if self.periodization_depth == 0 || self.periodization_depth > 24 {
            return Err(Error::Config("periodization depth must lie in 1..=24".into()));
        }
        Ok(())
    }
}

/// Value and Wirtinger derivatives `phi_z`, `phi_zz`, `phi_{z zbar}`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub dz: C64,
    pub dzz: C64,
    pub dzzbar: f64,
}

impl Jet {
    /// Euclidean gradient as a complex number, `phi_x + i phi_y`.
    pub fn grad(&self) -> C64 {
        2.0 * self.dz.conj()
    }

    /// Hyperbolic Laplacian at `x`.
    pub fn laplacian_hyp(&self, x: C64) -> f64 {
        let d = 1.0 - x.norm_sqr();
        d * d * self.dzzbar
    }

    /// Jet of `phi o h` at `x` given the jet of `phi` at `h(x)`.
    pub fn pull_back(&self, d1: C64, d2: C64) -> Jet {
        Jet {
            value: self.value,
            dz: self.dz * d1,
            dzz: self.dzz * d1 * d1 + self.dz * d2,
            dzzbar: self.dzzbar * d1.norm_sqr(),
        }
    }
}

#[derive(Clone, Debug)]
struct Image {
    p: C64,
    k: f64,
    amp: f64,
    inv_w2: f64,
}

/// Periodized conformal factor with its truncation bound.
#[derive(Clone, Debug)]
pub struct ConformalFactor {
    spec: PhiSpec,
    images: Vec<Image>,
    group: FuchsianGroup,
    tail: f64,
}

/// Exponent beyond which a bump contributes below `e^-CUT` of its amplitude.
const CUT: f64 = 45.0;

impl ConformalFactor {
    pub fn new(spec: &PhiSpec) -> Result<ConformalFactor> {
        ConformalFactor::with_group(spec, FuchsianGroup::bolza())
    }

    /// Factor periodized over `group`, whose generator order drives every search.
    pub fn with_group(spec: &PhiSpec, group: FuchsianGroup) -> Result<ConformalFactor> {
        spec.validate()?;
        let oct = Octagon::get();
        let mut images = Vec::new();
        let mut tail = 0.0;
        for b in &spec.bumps {
            let c = group.reduce_point(C64::new(b.center[0], b.center[1]))?.point;
            let w2 = b.width * b.width;
            // sinh^2(rho/2) = CUT w^2
            let rho = 2.0 * (CUT * w2).sqrt().asinh();
            let reach = oct.r_f + rho;
            let (tiles, shell) = tiles_within(&group, reach + oct.r_f, spec.periodization_depth);
            for t in &tiles {
                let p = t.apply(c);
                if distance_from_origin(p) <= reach {
                    images.push(Image { p, k: 1.0 - p.norm_sqr(), amp: b.amplitude, inv_w2: 1.0 / w2 });
                }
            }
            // images first reached one word beyond the cap
            let mut shell_extra = 0.0;
            for t in &shell {
                let d = distance_from_origin(t.apply(c)) - oct.r_f;
                if d <= rho {
                    let s = (0.5 * d.max(0.0)).sinh();
                    shell_extra += b.amplitude.abs() * (-(s * s) / w2).exp();
                }
            }
            tail += b.amplitude.abs() * analytic_tail(rho, w2) + shell_extra;
        }
        Ok(ConformalFactor { spec: spec.clone(), images, group, tail })
    }

    pub fn spec(&self) -> &PhiSpec {
        &self.spec
    }

    pub fn image_count(&self) -> usize {
        self.images.len()
    }

    /// Bound on the neglected part of the periodized sum.
    pub fn tail_bound(&self) -> f64 {
        self.tail
    }

    pub fn group(&self) -> &FuchsianGroup {
        &self.group
    }

    /// Value at a point of the closed fundamental domain.
    pub fn value_in_domain(&self, x: C64) -> f64 {
        let dn = 1.0 - x.norm_sqr();
        let mut v = self.spec.offset;
        for im in &self.images {
            let e = (x - im.p).norm_sqr() / (dn * im.k) * im.inv_w2;
            if e < CUT + 5.0 {
                v += im.amp * (-e).exp();
            }
        }
        v
    }

    /// Jet at a point of the closed fundamental domain.
    pub fn jet_in_domain(&self, x: C64) -> Jet {
        let dn = 1.0 - x.norm_sqr();
        let xb = x.conj();
        let mut j = Jet { value: self.spec.offset, ..Jet::default() };
        for im in &self.images {
            let dx = x - im.p;
            let n = dx.norm_sqr();
            let e = n / (dn * im.k) * im.inv_w2;
            if e >= CUT + 5.0 {
                continue;
            }
            let f = im.amp * (-e).exp();
            let ik = 1.0 / im.k;
            let dxb = dx.conj();
            let d_z = ik * (dxb / dn + n * xb / (dn * dn));
            let d_zz = ik * (2.0 * dxb * xb / (dn * dn) + 2.0 * n * xb * xb / (dn * dn * dn));
            let d_zzb = ik * (1.0 / dn + (2.0 * (dx * xb).re + n) / (dn * dn) + 2.0 * n * x.norm_sqr() / (dn * dn * dn));
            let a = im.inv_w2;
            j.value += f;
            j.dz += -f * a * d_z;
            j.dzz += f * (a * a * d_z * d_z - a * d_zz);
            j.dzzbar += f * (a * a * d_z.norm_sqr() - a * d_zzb);
        }
        j
    }

    pub fn value(&self, x: C64) -> Result<f64> {
        let r = self.group.reduce_point(x)?;
        Ok(self.value_in_domain(r.point))
    }

    /// Jet at an arbitrary disk point.
    pub fn jet(&self, x: C64) -> Result<Jet> {
        let r = self.group.reduce_point(x)?;
        let j = self.jet_in_domain(r.point);
        if r.crossings.is_empty() {
            return Ok(j);
        }
        Ok(j.pull_back(r.element.deriv(x), r.element.second_deriv(x)))
    }
}

/// Tiles `t F` whose centers lie within `radius` of the origin, found by
/// breadth-first search over adjacent tiles up to `depth` steps, together
/// with the tiles first reached at step `depth + 1`.
fn tiles_within(group: &FuchsianGroup, radius: f64, depth: usize) -> (Vec<Su11>, Vec<Su11>) {
    let origin = C64::new(0.0, 0.0);
    let mut tiles = vec![Su11::IDENTITY];
    let mut centers = vec![origin];
    let mut index = PointIndex::new(1e-6);
    index.insert(origin, 0);
    let mut frontier = vec![0usize];
    let mut shell = Vec::new();
    for step in 1..=depth + 1 {
        let mut next = Vec::new();
        for &i in &frontier {
            for k in 0..8u8 {
                let t = tiles[i].mul(&group.generator(k));
                let z = t.apply(origin);
                if distance_from_origin(z) > radius || index.find(z, |j| centers[j as usize], 1e-8).is_some() {
                    continue;
                }
                if step > depth {
                    if !shell.iter().any(|s: &Su11| (s.apply(origin) - z).norm() < 1e-8) {
                        shell.push(t);
                    }
                    continue;
                }
                index.insert(z, tiles.len() as u32);
                next.push(tiles.len());
                tiles.push(t);
                centers.push(z);
            }
        }
        frontier = next;
    }
    (tiles, shell)
}

/// Bound on `sum exp(-sinh^2(d/2) / w^2)` over orbit points at distance
/// greater than `rho`, using that orbit points are `systole` apart.
fn analytic_tail(rho: f64, w2: f64) -> f64 {
    let r = 0.5 * FuchsianGroup::systole();
    let ball = r.cosh() - 1.0;
    let mut total = 0.0;
    for k in 0..200 {
        let inner = rho + k as f64 * 0.5;
        let count = ((inner + 0.5 + r).cosh() - 1.0) / ball;
        let s = (0.5 * inner).sinh();
        let term = count * (-(s * s) / w2).exp();
        total += term;
        if term < 1e-300 {
            break;
        }
    }
    total
}

/// A conformal metric `exp(2 eps phi) g0`.
#[derive(Clone, Debug)]
pub struct ConformalMetric {
    pub phi: Arc<ConformalFactor>,
    pub eps: f64,
}

impl ConformalMetric {
    /// The hyperbolic metric itself.
    pub fn hyperbolic() -> ConformalMetric {
        let phi = ConformalFactor::new(&PhiSpec::constant(0.0)).expect("zero factor");
        ConformalMetric { phi: Arc::new(phi), eps: 0.0 }
    }

    /// Build `exp(2 eps phi) g0`, refusing metrics that are not negatively curved.
    pub fn new(phi: Arc<ConformalFactor>, eps: f64) -> Result<ConformalMetric> {
        if !eps.is_finite() {
            return Err(Error::Config("eps must be finite".into()));
        }
        let th = curvature_thresholds(&phi, &domain_grid(12));
        if eps > th.eps_plus || eps < th.eps_minus {
            return Err(Error::Curvature(format!(
                "eps = {eps} leaves the negatively curved range ({}, {})",
                th.eps_minus, th.eps_plus
            )));
        }
        Ok(ConformalMetric { phi, eps })
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.eps == 0.0
    }

    /// Density `lambda` with `g = lambda^2 |dz|^2`.
    pub fn density(&self, x: C64) -> Result<f64> {
        Ok((self.eps * self.phi.value(x)?).exp() * 2.0 / (1.0 - x.norm_sqr()))
    }

    /// `(lambda, grad lambda)` with the gradient as `d_x + i d_y`.
    pub fn metric_coeffs(&self, x: C64) -> Result<(f64, C64)> {
        let j = self.phi.jet(x)?;
        let lam = (self.eps * j.value).exp() * 2.0 / (1.0 - x.norm_sqr());
        Ok((lam, lam * self.log_density_grad_with(x, &j)))
    }

    /// Gradient of `log lambda` given the jet of `phi` at `x`.
    pub fn log_density_grad_with(&self, x: C64, j: &Jet) -> C64 {
        self.eps * j.grad() + 2.0 * x / (1.0 - x.norm_sqr())
    }

    pub fn curvature(&self, x: C64) -> Result<f64> {
        let j = self.phi.jet(x)?;
        Ok(curvature_from_jet(self.eps, x, &j))
    }

    /// Riemannian area of the surface.
    pub fn volume(&self) -> f64 {
        integrate_domain(16, |x| (2.0 * self.eps * self.phi.value_in_domain(x)).exp())
    }

    /// Stable identifier of the metric for caching and provenance.
    pub fn hash(&self) -> String {
        crate::report::hash_json(&serde_json::json!({ "phi": self.phi.spec(), "eps": self.eps }))
    }
}

pub fn curvature_from_jet(eps: f64, x: C64, j: &Jet) -> f64 {
    (-2.0 * eps * j.value).exp() * (-1.0 - eps * j.laplacian_hyp(x))
}

/// Range of `eps` on which `exp(2 eps phi) g0` stays negatively curved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps_plus: f64,
    pub eps_minus: f64,
}

/// Thresholds from the extremes of the hyperbolic Laplacian over a grid.
pub fn curvature_thresholds(phi: &ConformalFactor, grid: &[C64]) -> Thresholds {
    let lap = |x: C64| phi.jet_in_domain(x).laplacian_hyp(x);
    let samples: Vec<(C64, f64)> = grid.iter().map(|&x| (x, lap(x))).collect();
    let spacing = Octagon::get().r_f / ((grid.len() as f64 / 8.0).sqrt()).max(1.0);
    let max_neg = polished_max(&samples, spacing, |x| -lap(x), |l| -l);
    let max_pos = polished_max(&samples, spacing, lap, |l| l);
    Thresholds {
        eps_plus: if max_neg > 0.0 { 1.0 / max_neg } else { f64::INFINITY },
        eps_minus: if max_pos > 0.0 { -1.0 / max_pos } else { f64::NEG_INFINITY },
    }
}

/// Grid maximum of `f`, refined by compass search from the best few grid points.
fn polished_max(samples: &[(C64, f64)], spacing: f64, f: impl Fn(C64) -> f64, key: impl Fn(f64) -> f64) -> f64 {
    let mut top: Vec<(C64, f64)> = samples.iter().map(|&(x, l)| (x, key(l))).collect();
    top.sort_by(|a, b| b.1.total_cmp(&a.1));
    let best = top.first().map_or(0.0, |t| t.1);
    if best <= 0.0 {
        return best.max(0.0);
    }
    let rmax = (0.5 * Octagon::get().r_f).tanh();
    let dirs = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
    let mut starts: Vec<(C64, f64)> = Vec::new();
    for &(x, v) in top.iter().take_while(|t| t.1 > 0.0) {
        if starts.len() == 16 {
            break;
        }
        if starts.iter().all(|s| 2.0 * (x - s.0).norm() / (1.0 - x.norm_sqr()) > 3.0 * spacing) {
            starts.push((x, v));
        }
    }
    let mut out = best;
    for (mut x, mut v) in starts {
        let mut step = 0.5 * spacing * (1.0 - x.norm_sqr());
        while step > 1e-9 {
            let next = dirs
                .iter()
                .map(|&d| x + d * step)
                .filter(|y| y.norm() <= rmax)
                .map(|y| (y, f(y)))
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match next {
                Some((y, fy)) if fy > v => (x, v) = (y, fy),
                _ => step *= 0.5,
            }
        }
        out = out.max(newton_polish(&f, x, v, rmax).1);
    }
    out
}

/// Newton steps on finite-difference derivatives, accepted only when `f` increases.
fn newton_polish(f: &impl Fn(C64) -> f64, mut x: C64, mut v: f64, rmax: f64) -> (C64, f64) {
    for _ in 0..20 {
        let h = 1e-4 * (1.0 - x.norm_sqr());
        let (ex, ey) = (C64::new(h, 0.0), C64::new(0.0, h));
        let (fxp, fxm, fyp, fym) = (f(x + ex), f(x - ex), f(x + ey), f(x - ey));
        let g = nalgebra::Vector2::new(fxp - fxm, fyp - fym) / (2.0 * h);
        let hxx = (fxp - 2.0 * v + fxm) / (h * h);
        let hyy = (fyp - 2.0 * v + fym) / (h * h);
        let hxy = (f(x + ex + ey) - f(x + ex - ey) - f(x - ex + ey) + f(x - ex - ey)) / (4.0 * h * h);
        let hess = nalgebra::Matrix2::new(hxx, hxy, hxy, hyy);
        let Some(step) = hess.try_inverse().map(|hi| -(hi * g)) else { break };
        let y = x + C64::new(step[0], step[1]);
        if y.norm() > rmax {
            break;
        }
        let fy = f(y);
        if !(fy > v) {
            break;
        }
        (x, v) = (y, fy);
    }
    (x, v)
}

/// Geodesic polar parametrization of the domain as sixteen right triangles.
fn sector_point(k: usize, theta_off: f64, r: f64) -> C64 {
    C64::from_polar((0.5 * r).tanh(), k as f64 * PI / 4.0 + theta_off)
}

fn r_max(theta_off: f64) -> f64 {
    let oct = Octagon::get();
    (oct.r_in.tanh() / theta_off.cos()).atanh()
}

/// Points of the closed domain on a polar grid with `n` steps per direction.
pub fn domain_grid(n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    for k in 0..8 {
        for i in 0..n {
            let t = -PI / 8.0 + PI / 4.0 * (i as f64 + 0.5) / n as f64;
            let rm = r_max(t);
            for j in 1..=n {
                out.push(sector_point(k, t, rm * j as f64 / n as f64));
            }
        }
    }
    out
}

/// Panel breaks in units of `pi/8`, graded toward the vertex where the
/// radial extent has a nearby complex singularity.
const PANELS: [f64; 7] = [0.0, 0.5, 0.8, 0.93, 0.975, 0.993, 1.0];

/// `int_F f dA` for the hyperbolic area, by composite Gauss–Legendre in
/// polar coordinates over sixteen right triangles, `n` nodes per panel.
pub fn integrate_domain(n: usize, f: impl Fn(C64) -> f64) -> f64 {
    let mut nodes = Vec::new();
    for w in PANELS.windows(2) {
        let (ts, tw) = gauss_legendre(n, w[0] * PI / 8.0, w[1] * PI / 8.0);
        nodes.extend(ts.into_iter().zip(tw));
    }
    let mut total = 0.0;
    for k in 0..8 {
        for sign in [-1.0, 1.0] {
            for &(t, wt) in &nodes {
                let rm = r_max(t);
                let (rs, rw) = gauss_legendre(n, 0.0, rm);
                let mut inner = 0.0;
                for (r, wr) in rs.iter().zip(&rw) {
                    inner += wr * r.sinh() * f(sector_point(k, sign * t, *r));
                }
                total += wt * inner;
            }
        }
    }
    total
}

/// Average of `f` over the surface for the hyperbolic area.
pub fn area_average(n: usize, f: impl Fn(C64) -> f64) -> f64 {
    integrate_domain(n, f) / (4.0 * PI)
}

/// Hyperbolic area of the part of the domain within distance `rho` of the origin.
pub fn domain_ball_area(rho: f64) -> f64 {
    let oct = Octagon::get();
    let t = oct.r_in.tanh();
    let c = (1.0 - t * t).sqrt();
    let half = PI / 8.0;
    if rho <= oct.r_in {
        return 16.0 * half * (rho.cosh() - 1.0);
    }
    let rho = rho.min(oct.r_f);
    // the side cuts the ball for angles below th
    let th = (t / rho.tanh()).clamp(-1.0, 1.0).acos().min(half);
    // int_0^th (cosh r_max - 1) with cosh r_max = cos / sqrt(cos^2 - t^2)
    let prim = |x: f64| (x.sin() / c).clamp(-1.0, 1.0).asin();
    16.0 * ((half - th) * (rho.cosh() - 1.0) + prim(th) - th)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> ConformalFactor {
        ConformalFactor::new(&PhiSpec::single(C64::new(0.3, 0.2), 1.0, 0.5)).unwrap()
    }

    #[test]
    fn domain_area_is_four_pi() {
        let a = integrate_domain(12, |_| 1.0);
        assert!((a - 4.0 * PI).abs() < 1e-10, "{a}");
        assert!((domain_ball_area(10.0) - 4.0 * PI).abs() < 1e-12, "{}", domain_ball_area(10.0));
    }

    #[test]
    fn ball_area_matches_quadrature() {
        for rho in [0.7, 1.6, 2.0, 2.4] {
            let q = integrate_domain(40, |x| if distance_from_origin(x) <= rho { 1.0 } else { 0.0 });
            assert!((q - domain_ball_area(rho)).abs() < 2e-2, "{rho}");
        }
    }

    #[test]
    fn factor_is_group_invariant() {
        let phi = bump();
        let g = FuchsianGroup::bolza();
        let x = C64::new(0.2, -0.35);
        for k in 0..8 {
            let y = g.generator(k).apply(x);
            assert!((phi.value(y).unwrap() - phi.value(x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let phi = bump();
        for x in [C64::new(0.1, 0.05), C64::new(-0.4, 0.3), C64::new(0.8, 0.1)] {
            let j = phi.jet(x).unwrap();
            let h = 1e-5;
            let f = |z: C64| phi.value(z).unwrap();
            let fx = (f(x + h) - f(x - h)) / (2.0 * h);
            let fy = (f(x + C64::new(0.0, h)) - f(x - C64::new(0.0, h))) / (2.0 * h);
            let g = j.grad();
            assert!((g.re - fx).abs() < 1e-6 && (g.im - fy).abs() < 1e-6, "{x}: {g} vs {fx} {fy}");
            let lap = (f(x + h) + f(x - h) + f(x + C64::new(0.0, h)) + f(x - C64::new(0.0, h)) - 4.0 * f(x)) / (h * h);
            assert!((4.0 * j.dzzbar - lap).abs() < 1e-3 * (1.0 + lap.abs()));
            let jz = |z: C64| phi.jet(z).unwrap().dz;
            let dzz_fd = 0.5 * ((jz(x + h) - jz(x - h)) / (2.0 * h) - C64::i() * (jz(x + C64::new(0.0, h)) - jz(x - C64::new(0.0, h))) / (2.0 * h));
            assert!((dzz_fd - j.dzz).norm() < 1e-5 * (1.0 + j.dzz.norm()));
        }
    }

    #[test]
    fn tail_bound_is_tiny() {
        let phi = bump();
        assert!(phi.tail_bound() < 1e-12, "{}", phi.tail_bound());
    }

    #[test]
    fn hyperbolic_metric_has_constant_curvature() {
        let m = ConformalMetric::hyperbolic();
        for x in domain_grid(4) {
            assert!((m.curvature(x).unwrap() + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn curvature_gate_rejects_large_eps() {
        let phi = Arc::new(bump());
        let th = curvature_thresholds(&phi, &domain_grid(12));
        assert!(ConformalMetric::new(phi.clone(), 0.5 * th.eps_plus).is_ok());
        let err = ConformalMetric::new(phi, 1.5 * th.eps_plus).unwrap_err();
        assert_eq!(err.kind(), "curvature");
    }

    #[test]
    fn volume_linearizes_around_four_pi() {
        let phi = Arc::new(bump());
        let lin = 2.0 * integrate_domain(16, |x| phi.value_in_domain(x));
        let eps = 1e-4;
        let v = ConformalMetric { phi, eps }.volume();
        assert!(((v - 4.0 * PI) / eps - lin).abs() < 1e-2 * lin.abs());
    }
}
