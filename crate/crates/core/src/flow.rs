//! Geodesic flows on the unit tangent bundle, Liouville sampling and
//! Birkhoff-integral estimators.
//!
//! Positions are kept in the closed fundamental domain; whenever an orbit
//! leaves it the state is moved back by a side pairing and the side index is
//! appended to the orbit's deck word.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disk::{Su11, C64};
use crate::error::{Error, Result};
use crate::fuchsian::{inverse_letter, FuchsianGroup, Octagon, Word};
use crate::metric::{curvature_from_jet, ConformalFactor, ConformalMetric};
use crate::quadrature::simpson_weights;
use crate::report::FunctionalReport;

/// Tolerance for leaving the closed domain in the Klein model.
const EXIT_TOL: f64 = 1e-12;

/// A point of the unit tangent bundle: position and Euclidean components of a
/// tangent vector of unit length for the metric in use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: C64,
    pub v: C64,
}

impl PhasePoint {
    /// Unit vector for `g0` at `x` pointing in direction `theta`.
    pub fn hyperbolic(x: C64, theta: f64) -> PhasePoint {
        PhasePoint { x, v: C64::from_polar(0.5 * (1.0 - x.norm_sqr()), theta) }
    }

    /// Unit vector for `metric` at `x` in direction `theta`.
    pub fn unit(metric: &ConformalMetric, x: C64, theta: f64) -> Result<PhasePoint> {
        Ok(PhasePoint { x, v: C64::from_polar(1.0 / metric.density(x)?, theta) })
    }

    pub fn flip(&self) -> PhasePoint {
        PhasePoint { x: self.x, v: -self.v }
    }

    /// The `g0` frame sending `0` to `x` and `1` to the direction of `v`.
    pub fn frame(&self) -> Su11 {
        Su11::frame(self.x, self.v.arg())
    }

    pub fn from_frame(m: &Su11) -> PhasePoint {
        let d = m.denom(C64::new(0.0, 0.0));
        PhasePoint { x: m.b / m.a.conj(), v: 0.5 / (d * d) }
    }

    /// Image under an isometry of the disk.
    pub fn moved(&self, g: &Su11) -> PhasePoint {
        PhasePoint { x: g.apply(self.x), v: g.deriv(self.x) * self.v }
    }

    pub fn speed(&self, metric: &ConformalMetric) -> Result<f64> {
        Ok(metric.density(self.x)? * self.v.norm())
    }
}

/// Scalar function on the unit tangent bundle, evaluated at points of the
/// closed fundamental domain.
pub trait Observable: Sync {
    fn eval(&self, z: &PhasePoint) -> f64;
}

impl<F: Fn(&PhasePoint) -> f64 + Sync> Observable for F {
    fn eval(&self, z: &PhasePoint) -> f64 {
        self(z)
    }
}

/// `scale (phi(x) - shift)`.
pub struct Potential<'a> {
    pub phi: &'a ConformalFactor,
    pub scale: f64,
    pub shift: f64,
}

impl Observable for Potential<'_> {
    fn eval(&self, z: &PhasePoint) -> f64 {
        self.scale * (self.phi.value_in_domain(z.x) - self.shift)
    }
}

/// `X w` for a function `w` on the surface: `dw(v)`, for `g0`-unit vectors.
pub struct Coboundary<'a> {
    pub w: &'a ConformalFactor,
}

impl Observable for Coboundary<'_> {
    fn eval(&self, z: &PhasePoint) -> f64 {
        (2.0 * self.w.jet_in_domain(z.x).dz * z.v).re
    }
}

/// Integrator settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Largest step.
    pub dt: f64,
    /// Local error tolerance per step.
    pub tol: f64,
    /// Sampling stride of the recorded orbit.
    pub stride: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { dt: 0.05, tol: 1e-12, stride: 0.1 }
    }
}

/// Integrated trajectory with its deck word.
#[derive(Clone, Debug)]
pub struct OrbitSegment {
    /// States at times `0, stride, 2 stride, ...` (the last one at `total_time`).
    pub samples: Vec<PhasePoint>,
    pub times: Vec<f64>,
    /// Sides crossed in order; the raw endpoint is `word(samples.last())`.
    pub word: Word,
    pub total_time: f64,
    /// Largest `| |v|_g - 1 |` per unit time before renormalization.
    pub speed_drift: f64,
    pub steps: usize,
}

impl OrbitSegment {
    pub fn end(&self) -> PhasePoint {
        *self.samples.last().expect("orbit has a start")
    }
}

#[derive(Clone, Copy)]
struct State {
    x: C64,
    v: C64,
    j: f64,
    jp: f64,
}

impl State {
    fn axpy(&self, h: f64, k: &State) -> State {
        State { x: self.x + h * k.x, v: self.v + h * k.v, j: self.j + h * k.j, jp: self.jp + h * k.jp }
    }
}

// Dormand–Prince 5(4)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Geodesic flow of a conformal metric.
pub struct Flow<'a> {
    pub metric: &'a ConformalMetric,
    pub opts: FlowOptions,
    jacobi: bool,
}

impl<'a> Flow<'a> {
    pub fn new(metric: &'a ConformalMetric, opts: FlowOptions) -> Flow<'a> {
        Flow { metric, opts, jacobi: false }
    }

    fn group(&self) -> &FuchsianGroup {
        self.metric.phi.group()
    }

    /// Geodesic equation `x'' = -2 (grad s . x') x' + |x'|^2 grad s`, `s = log lambda`,
    /// with the Jacobi equation `J'' = -K J` appended.
    fn rhs(&self, y: &State) -> State {
        let eps = self.metric.eps;
        let (gs, k) = if eps == 0.0 {
            (2.0 * y.x / (1.0 - y.x.norm_sqr()), -1.0)
        } else {
            let jet = self.metric.phi.jet_in_domain(y.x);
            let k = if self.jacobi { curvature_from_jet(eps, y.x, &jet) } else { 0.0 };
            (self.metric.log_density_grad_with(y.x, &jet), k)
        };
        let dot = gs.re * y.v.re + gs.im * y.v.im;
        let acc = -2.0 * dot * y.v + y.v.norm_sqr() * gs;
        State { x: y.v, v: acc, j: y.jp, jp: -k * y.j }
    }

    fn density(&self, x: C64) -> f64 {
        let h = 2.0 / (1.0 - x.norm_sqr());
        if self.metric.eps == 0.0 {
            h
        } else {
            (self.metric.eps * self.metric.phi.value_in_domain(x)).exp() * h
        }
    }

    /// One adaptive step of at most `h_max`; returns the new state and the step taken.
    fn step(&self, y: &State, h_try: f64, h_max: f64) -> Result<(State, f64, f64)> {
        let mut h = h_try.min(h_max);
        for _ in 0..60 {
            let mut k: [State; 7] = [*y; 7];
            k[0] = self.rhs(y);
            for s in 1..7 {
                let mut acc = *y;
                for (r, kr) in k.iter().enumerate().take(s) {
                    if A[s][r] != 0.0 {
                        acc = acc.axpy(h * A[s][r], kr);
                    }
                }
                k[s] = self.rhs(&acc);
            }
            let mut y5 = *y;
            let mut e = State { x: C64::new(0.0, 0.0), v: C64::new(0.0, 0.0), j: 0.0, jp: 0.0 };
            for s in 0..7 {
                y5 = y5.axpy(h * B5[s], &k[s]);
                e = e.axpy(h * (B5[s] - B4[s]), &k[s]);
            }
            let lam = 2.0 / (1.0 - y.x.norm_sqr());
            let scale_j = 1.0 + y.j.abs().max(y.jp.abs());
            let err = ((e.x.norm() * lam).max(e.v.norm() * lam)).max((e.j.abs() + e.jp.abs()) / scale_j);
            if err <= self.opts.tol && y5.x.norm() < 1.0 {
                let fac = if err == 0.0 { 5.0 } else { (0.9 * (self.opts.tol / err).powf(0.2)).clamp(0.2, 5.0) };
                return Ok((y5, h, h * fac));
            }
            let fac = if err.is_finite() { (0.9 * (self.opts.tol / err).powf(0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h *= fac;
            if h < 1e-12 {
                break;
            }
        }
        Err(Error::Convergence(format!("integrator step failed at x = {}", y.x)))
    }

    fn reduce(&self, y: &mut State, word: &mut Vec<u8>) {
        while let Some(k) = self.group().exit_letter(y.x, EXIT_TOL) {
            let g = self.group().generator(inverse_letter(k));
            y.v = g.deriv(y.x) * y.v;
            y.x = g.apply(y.x);
            word.push(k);
        }
    }

    fn run(&self, z: &PhasePoint, t_total: f64, mut visit: impl FnMut(f64, &State)) -> Result<(State, Vec<u8>, f64, usize)> {
        if !(t_total >= 0.0) || !(self.opts.dt > 0.0) || !(self.opts.stride > 0.0) {
            return Err(Error::Invalid("flow needs T >= 0 and positive steps".into()));
        }
        if !(z.x.norm() < 1.0) {
            return Err(Error::Invalid(format!("point {} is not in the disk", z.x)));
        }
        let mut y = State { x: z.x, v: z.v, j: 1.0, jp: 0.0 };
        let mut word = Vec::new();
        self.reduce(&mut y, &mut word);
        visit(0.0, &y);
        let n = (t_total / self.opts.stride).round().max(if t_total > 0.0 { 1.0 } else { 0.0 }) as usize;
        let mut t = 0.0;
        let mut h = self.opts.dt;
        let mut drift = 0.0f64;
        let mut steps = 0;
        for i in 1..=n {
            let target = if i == n { t_total } else { i as f64 * self.opts.stride };
            while target - t > 1e-14 {
                let rem = target - t;
                let (mut y1, taken, next) = self.step(&y, h, rem.min(self.opts.dt))?;
                steps += 1;
                let speed = self.density(y1.x) * y1.v.norm();
                drift = drift.max((speed - 1.0).abs() / taken);
                y1.v /= speed;
                self.reduce(&mut y1, &mut word);
                y = y1;
                t = if taken >= rem { target } else { t + taken };
                if taken < rem {
                    h = next;
                }
            }
            visit(t, &y);
        }
        Ok((y, word, drift, steps))
    }

    /// Integrate for time `t_total`, recording states at the sampling stride.
    pub fn integrate(&self, z: &PhasePoint, t_total: f64) -> Result<OrbitSegment> {
        let mut samples = Vec::new();
        let mut times = Vec::new();
        let (_, word, drift, steps) = self.run(z, t_total, |t, y| {
            samples.push(PhasePoint { x: y.x, v: y.v });
            times.push(t);
        })?;
        Ok(OrbitSegment { samples, times, word: Word::new(word), total_time: t_total, speed_drift: drift, steps })
    }

    /// `(1/T) int_0^T u(phi_t z) dt` by Simpson's rule on the sampling stride.
    pub fn birkhoff_average(&self, u: &dyn Observable, z: &PhasePoint, t_total: f64) -> Result<f64> {
        let seg = self.integrate(z, t_total)?;
        let vals: Vec<f64> = seg.samples.iter().map(|p| u.eval(p)).collect();
        Ok(uniform_integral(&vals, &seg.times) / t_total)
    }

    /// Top Lyapunov exponent from the Jacobi equation, using the growth over `[T/2, T]`.
    pub fn lyapunov(&self, z: &PhasePoint, t_total: f64) -> Result<f64> {
        let jf = Flow { metric: self.metric, opts: self.opts, jacobi: true };
        let mut log_growth = 0.0;
        let mut mark = None;
        let half = 0.5 * t_total;
        // rescaling J changes nothing in the linear equation, so renormalize per sample
        let mut last = 0.0f64;
        let mut scale = 0.0f64;
        jf.run(z, t_total, |t, y| {
            let nrm = (y.j * y.j + y.jp * y.jp).sqrt().ln();
            if t == 0.0 {
                last = nrm;
                return;
            }
            scale += nrm - last;
            last = nrm;
            if mark.is_none() && t >= half {
                mark = Some(scale);
            }
            log_growth = scale;
        })?;
        let m = mark.unwrap_or(0.0);
        Ok((log_growth - m) / (t_total - half))
    }
}

/// Composite Simpson on uniform samples, trapezoid on a trailing odd panel.
fn uniform_integral(vals: &[f64], times: &[f64]) -> f64 {
    let n = vals.len();
    if n < 2 {
        return 0.0;
    }
    let h = times[1] - times[0];
    let even = (n - 1) / 2 * 2;
    let mut s = 0.0;
    if even >= 2 {
        let w = simpson_weights(even, h);
        s += w.iter().zip(vals).map(|(a, b)| a * b).sum::<f64>();
    }
    for i in even..n - 1 {
        s += 0.5 * (times[i + 1] - times[i]) * (vals[i] + vals[i + 1]);
    }
    s
}

/// Exact geodesic flow of `g0` acting on frames, `M -> M translation(t)`.
#[derive(Clone, Debug)]
pub struct FrameFlow<'a> {
    pub group: &'a FuchsianGroup,
}

impl FrameFlow<'_> {
    /// Move the frame into the fundamental domain, appending the sides crossed.
    pub fn reduce(&self, m: &mut Su11, word: &mut Vec<u8>) {
        loop {
            let x = m.b / m.a.conj();
            match self.group.exit_letter(x, EXIT_TOL) {
                Some(k) => {
                    *m = self.group.generator(inverse_letter(k)).mul(m).renormalized();
                    word.push(k);
                }
                None => return,
            }
        }
    }

    /// Birkhoff integrals of `u` at times `checkpoints` (ascending), sampled with step `h`.
    pub fn integrals(&self, u: &dyn Observable, z: &PhasePoint, h: f64, checkpoints: &[f64]) -> Vec<f64> {
        let t_end = checkpoints.last().copied().unwrap_or(0.0);
        let n = (t_end / h).round() as usize;
        let step = Su11::translation(h);
        let mut m = z.frame();
        let mut word = Vec::new();
        self.reduce(&mut m, &mut word);
        let mut vals = Vec::with_capacity(n + 1);
        vals.push(u.eval(&PhasePoint::from_frame(&m)));
        for _ in 0..n {
            m = m.mul(&step);
            self.reduce(&mut m, &mut word);
            vals.push(u.eval(&PhasePoint::from_frame(&m)));
        }
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        checkpoints
            .iter()
            .map(|&t| {
                let k = (t / h).round() as usize;
                uniform_integral(&vals[..=k], &times[..=k])
            })
            .collect()
    }

    /// Values of `u` along the orbit at spacing `h` up to `t_end`.
    pub fn samples(&self, u: &dyn Observable, z: &PhasePoint, h: f64, t_end: f64) -> Vec<f64> {
        let n = (t_end / h).round() as usize;
        let step = Su11::translation(h);
        let mut m = z.frame();
        let mut word = Vec::new();
        self.reduce(&mut m, &mut word);
        let mut vals = Vec::with_capacity(n + 1);
        vals.push(u.eval(&PhasePoint::from_frame(&m)));
        for _ in 0..n {
            m = m.mul(&step);
            self.reduce(&mut m, &mut word);
            vals.push(u.eval(&PhasePoint::from_frame(&m)));
        }
        vals
    }
}

/// Random generator for job `job` of a run seeded with `seed`.
pub fn job_rng(seed: u64, job: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(job);
    rng
}

/// One Liouville-distributed point for `g0`, drawn from `rng`.
pub fn liouville_point(rng: &mut impl Rng) -> PhasePoint {
    let oct = Octagon::get();
    let c_max = oct.r_f.cosh() - 1.0;
    loop {
        let r = (1.0 + rng.gen::<f64>() * c_max).acosh();
        let a = rng.gen::<f64>() * std::f64::consts::TAU;
        let x = C64::from_polar((0.5 * r).tanh(), a);
        if oct.contains(x, 0.0) {
            let theta = rng.gen::<f64>() * std::f64::consts::TAU;
            return PhasePoint::hyperbolic(x, theta);
        }
    }
}

/// `n` i.i.d. Liouville points; point `i` comes from stream `i` of `seed`.
pub fn sample_liouville(n: usize, seed: u64) -> Vec<PhasePoint> {
    (0..n).map(|i| liouville_point(&mut job_rng(seed, i as u64))).collect()
}

/// Settings of the variance estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceOptions {
    pub t: f64,
    pub n: usize,
    pub seed: u64,
    /// Quadrature step along orbits.
    pub h: f64,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        VarianceOptions { t: 200.0, n: 2000, seed: 1, h: 0.1 }
    }
}

/// Raw Birkhoff integrals `S_i(t)` of `u` over Liouville samples at each checkpoint.
pub fn birkhoff_integrals(group: &FuchsianGroup, u: &dyn Observable, n: usize, seed: u64, h: f64, checkpoints: &[f64]) -> Vec<Vec<f64>> {
    let ff = FrameFlow { group };
    (0..n)
        .into_par_iter()
        .map(|i| {
            let z = liouville_point(&mut job_rng(seed, i as u64));
            ff.integrals(u, &z, h, checkpoints)
        })
        .collect()
}

/// `(1/n) sum (S_i - mean T)^2 / T` and its Monte-Carlo standard error.
pub fn variance_from_integrals(s: &[f64], t: f64) -> (f64, f64) {
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let q: Vec<f64> = s.iter().map(|x| (x - mean) * (x - mean) / t).collect();
    let v = q.iter().sum::<f64>() / n;
    let var_q = q.iter().map(|x| (x - v) * (x - v)).sum::<f64>() / (n - 1.0).max(1.0);
    (v, (var_q / n).sqrt())
}

/// Asymptotic variance of `u` under the `g0` geodesic flow and Liouville measure.
pub fn variance(group: &FuchsianGroup, u: &dyn Observable, opts: &VarianceOptions) -> Result<FunctionalReport> {
    if opts.n < 2 {
        return Err(Error::Invalid("variance needs at least two samples".into()));
    }
    if !(opts.t > 0.0) || !(opts.h > 0.0) {
        return Err(Error::Invalid("variance needs positive T and step".into()));
    }
    let ff = FrameFlow { group };
    let t = (opts.t / opts.h / 2.0).round() * 2.0 * opts.h;
    let half = (t / opts.h / 4.0).round() * 2.0 * opts.h;
    let win = (t / opts.h / 8.0).round() * 2.0 * opts.h;
    let rows: Vec<(f64, f64, Vec<f64>)> = (0..opts.n)
        .into_par_iter()
        .map(|i| {
            let z = liouville_point(&mut job_rng(opts.seed, i as u64));
            let vals = ff.samples(u, &z, opts.h, t);
            let times: Vec<f64> = (0..vals.len()).map(|k| k as f64 * opts.h).collect();
            let kh = (half / opts.h).round() as usize;
            let full = uniform_integral(&vals, &times);
            let s_half = uniform_integral(&vals[..=kh], &times[..=kh]);
            // overlapping windows of length T/4 at offsets of T/8
            let kw = (win / opts.h).round() as usize;
            let mut windows = Vec::new();
            let mut start = 0;
            while start + kw < vals.len() {
                windows.push(uniform_integral(&vals[start..=start + kw], &times[..=kw]));
                start += kw / 2;
            }
            (full, s_half, windows)
        })
        .collect();
    let full: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let halves: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (v, se) = variance_from_integrals(&full, t);
    let (v_half, se_half) = variance_from_integrals(&halves, half);
    let mean = full.iter().sum::<f64>() / (opts.n as f64 * t);
    let mut wsum = 0.0;
    let mut wcount = 0usize;
    for r in &rows {
        for s in &r.2 {
            let d = s - mean * win;
            wsum += d * d / win;
            wcount += 1;
        }
    }
    let overlap = wsum / wcount.max(1) as f64;
    let mut rep = FunctionalReport::new("variance", v).with_window(t, None);
    rep.stderr = se;
    rep.truncation = (v - v_half).abs();
    rep.n = opts.n;
    rep.seed = Some(opts.seed);
    Ok(rep
        .with_diag("value_half_t", v_half)
        .with_diag("stderr_half_t", se_half)
        .with_diag("overlapping_windows", overlap)
        .with_diag("window_length", win)
        .with_diag("mean", mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PhiSpec;
    use std::sync::Arc;

    #[test]
    fn frames_round_trip_phase_points() {
        let z = PhasePoint::hyperbolic(C64::new(0.2, -0.1), 2.3);
        let back = PhasePoint::from_frame(&z.frame());
        assert!((back.x - z.x).norm() < 1e-15 && (back.v - z.v).norm() < 1e-15);
    }

    #[test]
    fn zero_time_gives_single_sample() {
        let m = ConformalMetric::hyperbolic();
        let seg = Flow::new(&m, FlowOptions::default()).integrate(&PhasePoint::hyperbolic(C64::new(0.1, 0.0), 0.0), 0.0).unwrap();
        assert_eq!(seg.samples.len(), 1);
        assert!(seg.word.is_empty());
    }

    #[test]
    fn runge_kutta_matches_exact_hyperbolic_flow() {
        let m = ConformalMetric::hyperbolic();
        let g = FuchsianGroup::bolza();
        let z = PhasePoint::hyperbolic(C64::new(0.15, 0.3), 0.7);
        let seg = Flow::new(&m, FlowOptions::default()).integrate(&z, 12.0).unwrap();
        let raw = z.frame().mul(&Su11::translation(12.0));
        let w = g.word_matrix(&seg.word);
        let end = seg.end().moved(&w);
        let want = PhasePoint::from_frame(&raw);
        assert!((end.x - want.x).norm() < 1e-9, "{} {}", end.x, want.x);
        assert!(seg.speed_drift < 1e-7);
    }

    #[test]
    fn liouville_is_deterministic() {
        assert_eq!(sample_liouville(5, 9), sample_liouville(5, 9));
        assert_ne!(sample_liouville(5, 9), sample_liouville(5, 10));
    }

    #[test]
    fn hyperbolic_lyapunov_exponent_is_one() {
        let m = ConformalMetric::hyperbolic();
        let l = Flow::new(&m, FlowOptions::default()).lyapunov(&PhasePoint::hyperbolic(C64::new(0.0, 0.1), 0.3), 20.0).unwrap();
        assert!((l - 1.0).abs() < 0.02, "{l}");
    }

    #[test]
    fn variance_is_quadratic_in_the_observable() {
        let g = FuchsianGroup::bolza();
        let phi = Arc::new(ConformalFactor::new(&PhiSpec::single(C64::new(0.2, 0.1), 1.0, 0.5)).unwrap());
        let opts = VarianceOptions { t: 20.0, n: 16, seed: 3, h: 0.1 };
        let u1 = Potential { phi: &phi, scale: 1.0, shift: 0.0 };
        let u3 = Potential { phi: &phi, scale: 3.0, shift: 0.0 };
        let a = variance(&g, &u1, &opts).unwrap().value;
        let b = variance(&g, &u3, &opts).unwrap().value;
        assert!((b - 9.0 * a).abs() < 1e-12 * b.abs());
    }
}
