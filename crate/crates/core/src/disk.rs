//! Poincaré disk geometry with SU(1,1) isometries.
//!
//! An element `(a, b)` stands for the matrix `[[a, b], [conj b, conj a]]`
//! acting by `z -> (a z + b) / (conj(b) z + conj(a))`.

use crate::dd::{Cdd, Dd};
pub use num_complex::Complex64 as C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su11 {
    pub a: C64,
    pub b: C64,
}

#[inline]
fn cmul_fma(x: C64, y: C64) -> C64 {
    C64::new(x.re.mul_add(y.re, -x.im * y.im), x.re.mul_add(y.im, x.im * y.re))
}

impl Su11 {
    pub const IDENTITY: Su11 = Su11 { a: C64 { re: 1.0, im: 0.0 }, b: C64 { re: 0.0, im: 0.0 } };

    /// Translation by `s` along the real diameter toward `+1`.
    pub fn translation(s: f64) -> Su11 {
        let h = 0.5 * s;
        Su11 { a: C64::new(h.cosh(), 0.0), b: C64::new(h.sinh(), 0.0) }
    }

    /// Rotation `z -> e^{i theta} z`.
    pub fn rotation(theta: f64) -> Su11 {
        Su11 { a: C64::from_polar(1.0, 0.5 * theta), b: C64::new(0.0, 0.0) }
    }

    /// The transvection taking `0` to `p`.
    pub fn to_point(p: C64) -> Su11 {
        let k = 1.0 / (1.0 - p.norm_sqr()).sqrt();
        Su11 { a: C64::new(k, 0.0), b: p * k }
    }

    /// Frame sending `0` to `x` and the direction `1` to `e^{i theta}`.
    pub fn frame(x: C64, theta: f64) -> Su11 {
        Su11::to_point(x).mul(&Su11::rotation(theta))
    }

    pub fn mul(&self, o: &Su11) -> Su11 {
        Su11 {
            a: cmul_fma(self.a, o.a) + cmul_fma(self.b, o.b.conj()),
            b: cmul_fma(self.a, o.b) + cmul_fma(self.b, o.a.conj()),
        }
    }

    pub fn inv(&self) -> Su11 {
        Su11 { a: self.a.conj(), b: -self.b }
    }

    pub fn det(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    /// Rescale so that the determinant is exactly one again.
    pub fn renormalized(&self) -> Su11 {
        let k = 1.0 / self.det().sqrt();
        Su11 { a: self.a * k, b: self.b * k }
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    pub fn denom(&self, z: C64) -> C64 {
        self.b.conj() * z + self.a.conj()
    }

    pub fn deriv(&self, z: C64) -> C64 {
        let d = self.denom(z);
        1.0 / (d * d)
    }

    pub fn second_deriv(&self, z: C64) -> C64 {
        let d = self.denom(z);
        -2.0 * self.b.conj() / (d * d * d)
    }

    /// `1 - |g z|^2` computed without cancellation.
    pub fn one_minus_norm_sqr(&self, z: C64, one_minus_z: f64) -> f64 {
        one_minus_z / self.denom(z).norm_sqr()
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    pub fn translation_length(&self) -> f64 {
        let t = self.trace().abs() * 0.5;
        if t <= 1.0 {
            0.0
        } else {
            2.0 * t.acosh()
        }
    }

    /// Repelling and attracting fixed points on the unit circle.
    pub fn axis_endpoints(&self) -> Option<(C64, C64)> {
        let re = self.a.re;
        if re.abs() <= 1.0 {
            return None;
        }
        let root = (re * re - 1.0).sqrt() * re.signum();
        let bc = self.b.conj();
        let plus = C64::new(root, self.a.im) / bc;
        let minus = C64::new(-root, self.a.im) / bc;
        Some((minus / minus.norm(), plus / plus.norm()))
    }

    /// Frame `F` whose real diameter maps onto the axis, `F(-1)` and `F(1)`
    /// being the repelling and attracting endpoints and `F(0)` the axis point
    /// nearest the origin. Then `F translation(l) F^-1 = +-self`.
    pub fn axis_frame(&self) -> Option<Su11> {
        let (m, p) = self.axis_endpoints()?;
        let mid = m + p;
        let (c, q) = if mid.norm() < 1e-15 {
            (p * C64::i(), C64::new(0.0, 0.0))
        } else {
            let c = mid / mid.norm();
            let sin_psi = (p / c).im.abs();
            let cos_psi = (1.0 - sin_psi * sin_psi).sqrt();
            (c, c * ((1.0 - sin_psi) / cos_psi))
        };
        let dir = if (p / c).im >= 0.0 { c * C64::i() } else { -c * C64::i() };
        Some(Su11::frame(q, dir.arg()))
    }

    pub fn to_dd(&self) -> Su11Dd {
        Su11Dd {
            a: Cdd::new(Dd::new(self.a.re), Dd::new(self.a.im)),
            b: Cdd::new(Dd::new(self.b.re), Dd::new(self.b.im)),
        }
    }

    pub fn max_abs_diff(&self, o: &Su11) -> f64 {
        (self.a - o.a).norm().max((self.b - o.b).norm())
    }
}

/// Double-double SU(1,1) element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su11Dd {
    pub a: Cdd,
    pub b: Cdd,
}

impl Su11Dd {
    pub fn identity() -> Su11Dd {
        Su11Dd { a: Cdd::new(Dd::ONE, Dd::ZERO), b: Cdd::default() }
    }

    pub fn mul(&self, o: &Su11Dd) -> Su11Dd {
        Su11Dd {
            a: self.a * o.a + self.b * o.b.conj(),
            b: self.a * o.b + self.b * o.a.conj(),
        }
    }

    pub fn inv(&self) -> Su11Dd {
        Su11Dd { a: self.a.conj(), b: Cdd::new(-self.b.re, -self.b.im) }
    }

    pub fn renormalized(&self) -> Su11Dd {
        let det = self.a.norm_sqr() - self.b.norm_sqr();
        let k = Dd::ONE / det.sqrt();
        Su11Dd { a: self.a.scale(k), b: self.b.scale(k) }
    }

    pub fn to_f64(&self) -> Su11 {
        Su11 { a: self.a.to_c64(), b: self.b.to_c64() }
    }

    pub fn trace_abs_half(&self) -> Dd {
        self.a.re.abs()
    }

    pub fn translation_length(&self) -> f64 {
        let t = self.trace_abs_half();
        let x = t - Dd::ONE;
        if x.hi <= 0.0 {
            return 0.0;
        }
        // acosh(t) = log(t + sqrt((t - 1)(t + 1))) with t - 1 kept exact
        let s = (x * (t + Dd::ONE)).sqrt();
        2.0 * (x.to_f64() + s.to_f64()).ln_1p()
    }

    /// Fixed points on the circle, computed in extended precision.
    pub fn axis_endpoints(&self) -> Option<(C64, C64)> {
        let re = self.a.re;
        let x = re.abs() - Dd::ONE;
        if x.hi <= 0.0 {
            return None;
        }
        let mut root = (x * (re.abs() + Dd::ONE)).sqrt();
        if re.hi < 0.0 {
            root = -root;
        }
        let bc = self.b.conj();
        let den = bc.norm_sqr();
        let over = |num: Cdd| -> C64 {
            // num / bc = num * b / |b|^2
            let q = num * self.b;
            let z = C64::new((q.re / den).to_f64(), (q.im / den).to_f64());
            z / z.norm()
        };
        let plus = over(Cdd::new(root, self.a.im));
        let minus = over(Cdd::new(-root, self.a.im));
        Some((minus, plus))
    }

    pub fn close_to(&self, o: &Su11Dd, tol: f64) -> bool {
        let d = |x: Cdd, y: Cdd| (x - y).to_c64().norm();
        let scale = self.a.to_c64().norm().max(1.0);
        d(self.a, o.a).max(d(self.b, o.b)) <= tol * scale
    }
}

/// Hyperbolic distance in the disk, stable for nearby points.
pub fn distance(z: C64, w: C64) -> f64 {
    let num = (z - w).norm();
    let den = ((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr())).sqrt();
    2.0 * (num / den).asinh()
}

/// Hyperbolic distance when `1 - |z|^2` and `1 - |w|^2` are known accurately.
pub fn distance_with(z: C64, oz: f64, w: C64, ow: f64) -> f64 {
    2.0 * ((z - w).norm() / (oz * ow).sqrt()).asinh()
}

/// Hyperbolic distance from the origin.
pub fn distance_from_origin(z: C64) -> f64 {
    2.0 * z.norm().atanh()
}

/// Conformal density of the hyperbolic metric, `2 / (1 - |z|^2)`.
pub fn hyperbolic_density(z: C64) -> f64 {
    2.0 / (1.0 - z.norm_sqr())
}

/// Klein model image of a disk point.
pub fn to_klein(z: C64) -> C64 {
    z * (2.0 / (1.0 + z.norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_moves_origin_by_its_length() {
        let t = Su11::translation(1.7);
        assert!((distance_from_origin(t.apply(C64::new(0.0, 0.0))) - 1.7).abs() < 1e-14);
        assert!((t.translation_length() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn frames_point_where_asked() {
        let x = C64::new(0.3, -0.2);
        let f = Su11::frame(x, 0.9);
        assert!((f.apply(C64::new(0.0, 0.0)) - x).norm() < 1e-15);
        let d = f.deriv(C64::new(0.0, 0.0));
        assert!((d.arg() - 0.9).abs() < 1e-14);
    }

    #[test]
    fn endpoints_are_fixed_and_ordered() {
        let g = Su11::frame(C64::new(0.1, 0.4), 2.0).mul(&Su11::translation(2.5)).mul(&Su11::frame(C64::new(0.1, 0.4), 2.0).inv());
        let (m, p) = g.axis_endpoints().unwrap();
        assert!((g.apply(p) - p).norm() < 1e-12);
        assert!((g.apply(m) - m).norm() < 1e-12);
        let z = C64::new(0.05, 0.0);
        let mut w = z;
        for _ in 0..30 {
            w = g.apply(w);
        }
        assert!((w - p).norm() < 1e-8);
        let (md, pd) = g.to_dd().axis_endpoints().unwrap();
        assert!((md - m).norm() < 1e-13 && (pd - p).norm() < 1e-13);
    }

    #[test]
    fn axis_frame_conjugates_to_translation() {
        let g = Su11::frame(C64::new(0.3, -0.4), 1.1).mul(&Su11::translation(2.2)).mul(&Su11::frame(C64::new(0.3, -0.4), 1.1).inv());
        let f = g.axis_frame().unwrap();
        let h = f.mul(&Su11::translation(g.translation_length())).mul(&f.inv());
        assert!(h.max_abs_diff(&g) < 1e-12 || h.max_abs_diff(&Su11 { a: -g.a, b: -g.b }) < 1e-12);
        let d = distance_from_origin(f.apply(C64::new(0.0, 0.0)));
        let z0 = C64::new(0.0, 0.0);
        for s in [-0.3, 0.2, 0.7] {
            assert!(distance_from_origin(f.mul(&Su11::translation(s)).apply(z0)) >= d - 1e-12);
        }
    }

    #[test]
    fn distance_is_invariant() {
        let g = Su11::frame(C64::new(-0.5, 0.2), 0.3);
        let z = C64::new(0.1, 0.1);
        let w = C64::new(-0.2, 0.6);
        assert!((distance(g.apply(z), g.apply(w)) - distance(z, w)).abs() < 1e-12);
    }
}
