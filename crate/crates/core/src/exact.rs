//! Exact arithmetic for the Bolza group.
//!
//! With `u = sqrt(1 + sqrt 2)` every generator entry lies in `Z[u][i]`,
//! where `u^4 = 2 u^2 + 1`. Products are carried out on integer
//! coefficients, so conjugating along long axes loses nothing.

use std::ops::Neg;

use crate::dd::{Cdd, Dd};
use crate::disk::Su11Dd;
use crate::error::{Error, Result};

/// Element `c0 + c1 u + c2 u^2 + c3 u^3` of `Z[u]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Zu(pub [i128; 4]);

fn overflow() -> Error {
    Error::Resource("exact group arithmetic overflowed 128-bit coefficients".into())
}

impl Zu {
    pub fn checked_add(self, o: Zu) -> Option<Zu> {
        let mut r = [0i128; 4];
        for (k, v) in r.iter_mut().enumerate() {
            *v = self.0[k].checked_add(o.0[k])?;
        }
        Some(Zu(r))
    }

    pub fn checked_sub(self, o: Zu) -> Option<Zu> {
        self.checked_add(-o)
    }

    pub fn checked_mul(self, o: Zu) -> Option<Zu> {
        let mut p = [0i128; 7];
        for i in 0..4 {
            if self.0[i] == 0 {
                continue;
            }
            for j in 0..4 {
                let t = self.0[i].checked_mul(o.0[j])?;
                p[i + j] = p[i + j].checked_add(t)?;
            }
        }
        // u^4 = 2u^2 + 1, u^5 = 2u^3 + u, u^6 = 5u^2 + 2
        let c0 = p[0].checked_add(p[4])?.checked_add(p[6].checked_mul(2)?)?;
        let c1 = p[1].checked_add(p[5])?;
        let c2 = p[2].checked_add(p[4].checked_mul(2)?)?.checked_add(p[6].checked_mul(5)?)?;
        let c3 = p[3].checked_add(p[5].checked_mul(2)?)?;
        Some(Zu([c0, c1, c2, c3]))
    }

    pub fn to_dd(self) -> Dd {
        let u = u_dd();
        let mut acc = Dd::ZERO;
        for k in (0..4).rev() {
            acc = acc * u + i128_to_dd(self.0[k]);
        }
        acc
    }
}

fn i128_to_dd(x: i128) -> Dd {
    let hi = x as f64;
    let rest = x - hi as i128;
    Dd::new(hi) + Dd::new(rest as f64)
}

fn u_dd() -> Dd {
    (Dd::ONE + Dd::new(2.0).sqrt()).sqrt()
}

/// Element of `Z[u][i]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Gu {
    pub re: Zu,
    pub im: Zu,
}

impl Gu {
    pub fn conj(self) -> Gu {
        Gu { re: self.re, im: -self.im }
    }

    fn checked_add(self, o: Gu) -> Option<Gu> {
        Some(Gu { re: self.re.checked_add(o.re)?, im: self.im.checked_add(o.im)? })
    }

    fn checked_mul(self, o: Gu) -> Option<Gu> {
        Some(Gu {
            re: self.re.checked_mul(o.re)?.checked_sub(self.im.checked_mul(o.im)?)?,
            im: self.re.checked_mul(o.im)?.checked_add(self.im.checked_mul(o.re)?)?,
        })
    }

    pub fn to_cdd(self) -> Cdd {
        Cdd::new(self.re.to_dd(), self.im.to_dd())
    }
}

/// Exact SU(1,1) element `[[a, b], [conj b, conj a]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExactSu11 {
    pub a: Gu,
    pub b: Gu,
}

impl ExactSu11 {
    pub fn identity() -> ExactSu11 {
        ExactSu11 { a: Gu { re: Zu([1, 0, 0, 0]), im: Zu::default() }, b: Gu::default() }
    }

    /// Side pairing `k`, translating by `2 acosh(1 + sqrt 2)` in direction `k pi / 4`.
    pub fn generator(k: u8) -> ExactSu11 {
        let s = Zu([0, -1, 0, 1]);
        let u = Zu([0, 1, 0, 0]);
        let z = Zu::default();
        let b = match k % 8 {
            0 => Gu { re: s, im: z },
            1 => Gu { re: u, im: u },
            2 => Gu { re: z, im: s },
            3 => Gu { re: -u, im: u },
            4 => Gu { re: -s, im: z },
            5 => Gu { re: -u, im: -u },
            6 => Gu { re: z, im: -s },
            _ => Gu { re: u, im: -u },
        };
        ExactSu11 { a: Gu { re: Zu([0, 0, 1, 0]), im: z }, b }
    }

    pub fn mul(&self, o: &ExactSu11) -> Result<ExactSu11> {
        let f = || -> Option<ExactSu11> {
            Some(ExactSu11 {
                a: self.a.checked_mul(o.a)?.checked_add(self.b.checked_mul(o.b.conj())?)?,
                b: self.a.checked_mul(o.b)?.checked_add(self.b.checked_mul(o.a.conj())?)?,
            })
        };
        f().ok_or_else(overflow)
    }

    pub fn inv(&self) -> ExactSu11 {
        ExactSu11 { a: self.a.conj(), b: -self.b }
    }

    /// `g^{-1} self g`.
    pub fn conjugate_by(&self, g: &ExactSu11) -> Result<ExactSu11> {
        g.inv().mul(self)?.mul(g)
    }

    pub fn is_identity_up_to_sign(&self) -> bool {
        let id = ExactSu11::identity();
        self.b == Gu::default() && (self.a == id.a || self.a == -id.a)
    }

    pub fn to_dd(&self) -> Su11Dd {
        Su11Dd { a: self.a.to_cdd(), b: self.b.to_cdd() }
    }
}

impl Neg for Zu {
    type Output = Zu;
    fn neg(self) -> Zu {
        Zu(self.0.map(|c| -c))
    }
}

impl Neg for Gu {
    type Output = Gu;
    fn neg(self) -> Gu {
        Gu { re: -self.re, im: -self.im }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_have_unit_determinant() {
        for k in 0..8 {
            let g = ExactSu11::generator(k);
            let det = g.a.checked_mul(g.a.conj()).unwrap().re.checked_sub(g.b.checked_mul(g.b.conj()).unwrap().re).unwrap();
            assert_eq!(det, Zu([1, 0, 0, 0]));
        }
    }

    #[test]
    fn generator_times_inverse_letter_is_identity() {
        for k in 0..4 {
            let p = ExactSu11::generator(k).mul(&ExactSu11::generator(k + 4)).unwrap();
            assert!(p.is_identity_up_to_sign());
        }
    }

    #[test]
    fn relator_is_exactly_trivial() {
        let mut m = ExactSu11::identity();
        for k in [0u8, 5, 2, 7, 4, 1, 6, 3] {
            m = m.mul(&ExactSu11::generator(k)).unwrap();
        }
        assert!(m.is_identity_up_to_sign());
    }

    #[test]
    fn ring_evaluation_matches_floating_point() {
        let u = (1.0 + 2f64.sqrt()).sqrt();
        let x = Zu([3, -2, 5, 1]);
        let want = 3.0 - 2.0 * u + 5.0 * u * u + u * u * u;
        assert!((x.to_dd().to_f64() - want).abs() < 1e-12);
        let y = x.checked_mul(x).unwrap().to_dd().to_f64();
        assert!((y - want * want).abs() < 1e-10);
    }
}
