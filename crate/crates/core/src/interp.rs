//! Interpolation of tabulated spectra.
//!
//! [`Spectrum`] interpolates `n` and `k` linearly in `(ln omega, ln n)` and
//! `(ln omega, ln k)`. Because `eps'' = 2 n k`, this makes `ln eps''` exactly
//! piecewise linear in `ln omega`: the log-log interpolation of `eps''`
//! between nodes. Panels with a vanishing `k` endpoint fall back to linear
//! interpolation of `k` in `ln omega`.
//!
//! [`MonotoneCubic`] is a Fritsch-Carlson (PCHIP) interpolant used for the
//! smooth, monotone `eps(i xi)` curves fed to the Lifshitz formula.

use num_complex::Complex64;

use crate::data::OpticalDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Spectrum {
    omega: Vec<f64>,
    ln_omega: Vec<f64>,
    ln_n: Vec<f64>,
    k: Vec<f64>,
    ln_k: Vec<f64>,
}

impl Spectrum {
    pub fn new(data: &OpticalDataset) -> Self {
        let s = data.samples();
        Self {
            omega: s.iter().map(|x| x.omega.value()).collect(),
            ln_omega: s.iter().map(|x| x.omega.value().ln()).collect(),
            ln_n: s.iter().map(|x| x.n.ln()).collect(),
            k: s.iter().map(|x| x.k).collect(),
            ln_k: s.iter().map(|x| if x.k > 0.0 { x.k.ln() } else { f64::NEG_INFINITY }).collect(),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.omega
    }

    pub fn omega_min(&self) -> f64 {
        self.omega[0]
    }

    pub fn omega_max(&self) -> f64 {
        self.omega[self.omega.len() - 1]
    }

    pub fn panels(&self) -> usize {
        self.omega.len() - 1
    }

    /// `(n, k)` at the node `i`.
    pub fn node_nk(&self, i: usize) -> (f64, f64) {
        (self.ln_n[i].exp(), self.k[i])
    }

    pub fn node_eps(&self, i: usize) -> Complex64 {
        let (n, k) = self.node_nk(i);
        Complex64::new(n * n - k * k, 2.0 * n * k)
    }

    /// `(n, k)` at `omega` assumed to lie in panel `i` (`omega_i <= omega <= omega_{i+1}`).
    #[inline]
    pub fn nk_in_panel(&self, i: usize, omega: f64) -> (f64, f64) {
        let (l0, l1) = (self.ln_omega[i], self.ln_omega[i + 1]);
        let t = (omega.ln() - l0) / (l1 - l0);
        let n = (self.ln_n[i] + t * (self.ln_n[i + 1] - self.ln_n[i])).exp();
        let k = if self.k[i] > 0.0 && self.k[i + 1] > 0.0 {
            (self.ln_k[i] + t * (self.ln_k[i + 1] - self.ln_k[i])).exp()
        } else {
            self.k[i] + t * (self.k[i + 1] - self.k[i])
        };
        (n, k)
    }

    #[inline]
    pub fn eps_in_panel(&self, i: usize, omega: f64) -> Complex64 {
        let (n, k) = self.nk_in_panel(i, omega);
        Complex64::new(n * n - k * k, 2.0 * n * k)
    }

    /// Panel index containing `omega`, or `None` outside the data range.
    pub fn locate(&self, omega: f64) -> Option<usize> {
        if !(omega >= self.omega_min() && omega <= self.omega_max()) {
            return None;
        }
        let i = self.omega.partition_point(|&w| w <= omega);
        Some(i.saturating_sub(1).min(self.panels() - 1))
    }

    pub fn eps(&self, omega: f64) -> Result<Complex64> {
        let i = self.locate(omega).ok_or(Error::OutOfRange {
            what: "omega",
            value: omega,
            lo: self.omega_min(),
            hi: self.omega_max(),
        })?;
        Ok(self.eps_in_panel(i, omega))
    }
}

/// Monotone piecewise-cubic Hermite interpolant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::invalid("monotone cubic needs >= 2 matching points"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("interpolation abscissae must increase strictly"));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] <= 0.0 {
                    d[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value at `t`; `None` outside the tabulated domain.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return None;
        }
        let i = self
            .x
            .partition_point(|&v| v <= t)
            .saturating_sub(1)
            .min(self.x.len() - 2);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Some(h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1])
    }
}

// Three-point end derivative, limited to preserve monotonicity.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
