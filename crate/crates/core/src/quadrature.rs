//! Quadrature rules and spectral differentiation matrices.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
        x[i] = m - h * z;
        x[n - 1 - i] = m + h * z;
        w[i] = h * wi;
        w[n - 1 - i] = h * wi;
    }
    (x, w)
}

/// Composite Simpson weights for `n` intervals of width `h` (`n` even).
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n.is_multiple_of(2), "Simpson rule needs an even number of intervals");
    (0..=n)
        .map(|i| {
            let c = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// Row-major Fourier differentiation matrix on `n` equispaced nodes of a period.
pub fn fourier_diff(n: usize, period: f64) -> Vec<f64> {
    assert!(n.is_multiple_of(2), "Fourier differentiation needs an even node count");
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let k = i as isize - j as isize;
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                d[i * n + j] = (PI / period) * sign / (PI * k as f64 / n as f64).tan();
            }
        }
    }
    d
}

/// Chebyshev–Gauss–Lobatto grid on `[0, len]`.
#[derive(Clone, Debug)]
pub struct Chebyshev {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `(n+1) x (n+1)` derivative matrix in `s`.
    pub diff: Vec<f64>,
}

impl Chebyshev {
    pub fn new(n: usize, len: f64) -> Chebyshev {
        let m = n + 1;
        let x: Vec<f64> = (0..m).map(|j| (PI * j as f64 / n as f64).cos()).collect();
        let c = |j: usize| -> f64 {
            let e = if j == 0 || j == n { 2.0 } else { 1.0 };
            if j.is_multiple_of(2) {
                e
            } else {
                -e
            }
        };
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    d[i * m + j] = c(i) / c(j) / (x[i] - x[j]);
                }
            }
        }
        for i in 0..m {
            let s: f64 = (0..m).filter(|&j| j != i).map(|j| d[i * m + j]).sum();
            d[i * m + i] = -s;
        }
        let scale = -2.0 / len;
        for v in d.iter_mut() {
            *v *= scale;
        }
        let nodes = x.iter().map(|&xi| 0.5 * len * (1.0 - xi)).collect();
        let weights = clenshaw_curtis(n).into_iter().map(|w| 0.5 * len * w).collect();
        Chebyshev { nodes, weights, diff: d }
    }
}

/// Clenshaw–Curtis weights on `[-1, 1]` for the nodes `cos(j pi / n)`.
pub fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / n as f64).collect();
    if n.is_multiple_of(2) {
        w[0] = 1.0 / ((n * n - 1) as f64);
        w[n] = w[0];
    } else {
        w[0] = 1.0 / ((n * n) as f64);
        w[n] = w[0];
    }
    for i in 1..n {
        let mut v = 1.0;
        let half = n / 2;
        if n.is_multiple_of(2) {
            for k in 1..half {
                v -= 2.0 * (2.0 * k as f64 * theta[i]).cos() / ((4 * k * k - 1) as f64);
            }
            v -= (n as f64 * theta[i]).cos() / ((n * n - 1) as f64);
        } else {
            for k in 1..=(n - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta[i]).cos() / ((4 * k * k - 1) as f64);
            }
        }
        w[i] = 2.0 * v / n as f64;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7, 0.0, 2.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(13)).sum();
        assert!((s - 2f64.powi(14) / 14.0).abs() < 1e-9);
    }

    #[test]
    fn fourier_derivative_of_trig_polynomial() {
        let n = 16;
        let p = 3.0;
        let d = fourier_diff(n, p);
        let s: Vec<f64> = (0..n).map(|i| p * i as f64 / n as f64).collect();
        let k = 2.0 * PI / p;
        for i in 0..n {
            let du: f64 = (0..n).map(|j| d[i * n + j] * (3.0 * k * s[j]).sin()).sum();
            assert!((du - 3.0 * k * (3.0 * k * s[i]).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn chebyshev_grid_differentiates_and_integrates() {
        let c = Chebyshev::new(24, 5.0);
        let m = 25;
        for i in 0..m {
            let du: f64 = (0..m).map(|j| c.diff[i * m + j] * c.nodes[j].sin()).sum();
            assert!((du - c.nodes[i].cos()).abs() < 1e-10);
        }
        let int: f64 = c.nodes.iter().zip(&c.weights).map(|(s, w)| w * s.exp()).sum();
        assert!((int - (5f64.exp() - 1.0)).abs() < 1e-9);
        assert!(c.nodes[0].abs() < 1e-15 && (c.nodes[24] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let w = simpson_weights(4, 0.5);
        let s: f64 = w.iter().enumerate().map(|(i, w)| w * (0.5 * i as f64).powi(3)).sum();
        assert!((s - 4.0).abs() < 1e-13);
    }
}
