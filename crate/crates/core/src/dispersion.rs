//! Dispersion relations mapping tabulated `eps(omega)` to `eps(i xi)`.
//!
//! Every result is split as `eps(i xi) = 1 + eps_cut + eps_expt`, where
//! `eps_cut` collects the contribution of the Drude extrapolation below the
//! first data point and `eps_expt` the contribution of the data themselves
//! plus a power-law tail `eps''(omega) = eps''(omega_max) (omega_max/omega)^t`
//! above the last one.
//!
//! The weighted relation for a window `f` is
//!
//! ```text
//! eps(i xi) = 1 + 2 / (pi f(i xi)) int_0^inf omega / (omega^2 + xi^2) Im[f(omega) (eps(omega) - 1)] d omega
//! ```
//!
//! For the square-root window the integral is evaluated after the
//! substitutions `omega = b sin y` below `b` and `omega = b cosh y` above it,
//! which removes the integrable singularity at `omega = b`:
//!
//! ```text
//! eps(i xi) = 1 + (2/pi) sqrt(1 + b^2/xi^2) [ int_0^{pi/2} sin^2 y / (sin^2 y + xi^2/b^2) (1 - eps'(b sin y)) dy
//!                                         + int_0^inf cosh^2 y / (cosh^2 y + xi^2/b^2) eps''(b cosh y) dy ]
//! ```
//!
//! Integrals over data are split at the data nodes and each panel is
//! integrated with adaptive Gauss-Legendre quadrature.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::data::{ImagAxisResult, OpticalDataset, PointStatus};
use crate::error::{Error, Result};
use crate::interp::Spectrum;
use crate::models::DrudeParams;
use crate::quadrature::Adaptive;
use crate::units::Frequency;
use crate::window::WindowSpec;

/// Interpolation used between data nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// `n` and `k` linear in log-log coordinates.
    #[default]
    LogLog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Relative tolerance of each adaptive panel integral.
    pub rel_tol: f64,
    /// Maximum bisection depth per panel.
    pub subdiv_limit: u32,
    /// Power-law exponent of `eps''` above the last data point.
    pub tail_exponent: f64,
    pub interp: Interpolation,
    /// Cancellation ratio below which a window counts as vanishing on the
    /// imaginary axis.
    pub window_zero_threshold: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            subdiv_limit: 30,
            tail_exponent: 3.0,
            interp: Interpolation::LogLog,
            window_zero_threshold: 0.01,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::invalid(format!("rel_tol = {} must lie in (0, 1)", self.rel_tol)));
        }
        if !(self.tail_exponent > 1.0) || !self.tail_exponent.is_finite() {
            return Err(Error::invalid(format!(
                "tail_exponent = {} must exceed 1",
                self.tail_exponent
            )));
        }
        if self.subdiv_limit == 0 || self.subdiv_limit > 60 {
            return Err(Error::invalid("subdiv_limit must lie in [1, 60]"));
        }
        if !(self.window_zero_threshold >= 0.0 && self.window_zero_threshold < 1.0) {
            return Err(Error::invalid("window_zero_threshold must lie in [0, 1)"));
        }
        Ok(())
    }

    pub(crate) fn adaptive(&self) -> Adaptive {
        Adaptive::new(self.rel_tol, self.subdiv_limit)
    }
}

fn check_xi(xi_grid: &[Frequency]) -> Result<()> {
    if xi_grid.is_empty() {
        return Err(Error::invalid("empty xi grid"));
    }
    match xi_grid.iter().find(|x| !(x.value() > 0.0) || !x.value().is_finite()) {
        Some(x) => Err(Error::invalid(format!("xi grid values must be > 0, got {}", x.value()))),
        None => Ok(()),
    }
}

// Calls `seg(i, lo, hi)` for every panel `i` overlapping `[lo, hi]`, with the
// overlap as arguments, and sums the results in panel order.
pub(crate) fn over_panels(sp: &Spectrum, lo: f64, hi: f64, mut seg: impl FnMut(usize, f64, f64) -> f64) -> f64 {
    let nodes = sp.nodes();
    let mut s = 0.0;
    for i in 0..sp.panels() {
        let a = nodes[i].max(lo);
        let b = nodes[i + 1].min(hi);
        if b > a {
            s += seg(i, a, b);
        }
    }
    s
}

pub(crate) fn last_eps(sp: &Spectrum) -> Complex64 {
    sp.node_eps(sp.panels())
}

/// `(2/pi) int_{omega_min}^inf omega eps''/(omega^2 + xi^2)` over the data and
/// the power-law tail.
pub(crate) fn standard_expt(sp: &Spectrum, xi: f64, quad: &QuadratureConfig) -> f64 {
    let q = quad.adaptive();
    let x2 = xi * xi;
    let data = over_panels(sp, sp.omega_min(), sp.omega_max(), |i, a, b| {
        q.integrate(
            |u| {
                let w = u.exp();
                w * w * sp.eps_in_panel(i, w).im / (w * w + x2)
            },
            a.ln(),
            b.ln(),
        )
    });
    FRAC_2_PI * (data + standard_tail(sp, xi, quad))
}

// omega = c / v maps [c, inf) to (0, 1].
fn standard_tail(sp: &Spectrum, xi: f64, quad: &QuadratureConfig) -> f64 {
    let (c, e2, t) = (sp.omega_max(), last_eps(sp).im, quad.tail_exponent);
    if e2 == 0.0 {
        return 0.0;
    }
    quad.adaptive()
        .integrate(|v| e2 * c * c * v.powf(t - 1.0) / (c * c + xi * xi * v * v), 0.0, 1.0)
}

/// `int_{max(b, omega_min)}^inf omega^2/(omega^2 + xi^2) eps''/sqrt(omega^2 - b^2) d omega`
/// over the data and the power-law tail, evaluated in `y = acosh(omega/b)`.
pub(crate) fn sqrt_eps2_integral(sp: &Spectrum, b: f64, xi: f64, quad: &QuadratureConfig) -> f64 {
    let q = quad.adaptive();
    let s2 = (xi / b).powi(2);
    let data = over_panels(sp, b.max(sp.omega_min()), sp.omega_max(), |i, lo, hi| {
        q.integrate(
            |y| {
                let c = y.cosh();
                c * c / (c * c + s2) * sp.eps_in_panel(i, b * c).im
            },
            (lo / b).acosh(),
            (hi / b).acosh(),
        )
    });
    let (c, e2, t) = (sp.omega_max(), last_eps(sp).im, quad.tail_exponent);
    let tail = if e2 == 0.0 {
        0.0
    } else {
        q.integrate(
            |v| {
                e2 * c.powi(3) * v.powf(t - 1.0)
                    / ((c * c + xi * xi * v * v) * (c * c - b * b * v * v).sqrt())
            },
            0.0,
            1.0,
        )
    };
    data + tail
}

fn sqrt_point(sp: &Spectrum, drude: &DrudeParams, b: f64, xi: f64, quad: &QuadratureConfig) -> (f64, f64, usize) {
    let q = quad.adaptive();
    let s2 = (xi / b).powi(2);
    let pref = FRAC_2_PI * (1.0 + (b / xi).powi(2)).sqrt();
    let wmin = sp.omega_min();

    // eps' part, omega in (0, b)
    let y_split = (wmin.min(b) / b).asin();
    let cut_re = q.integrate(
        |y| {
            let s = y.sin();
            s * s / (s * s + s2) * drude.one_minus_eps_re(b * s)
        },
        0.0,
        y_split,
    );
    let mut negative = 0usize;
    let expt_re = if b > wmin {
        over_panels(sp, wmin, b, |i, lo, hi| {
            q.integrate(
                |y| {
                    let s = y.sin();
                    let v = 1.0 - sp.eps_in_panel(i, b * s).re;
                    if v < 0.0 {
                        negative += 1;
                    }
                    s * s / (s * s + s2) * v
                },
                (lo / b).asin(),
                (hi / b).min(1.0).asin(),
            )
        })
    } else {
        0.0
    };

    // eps'' part, omega > b
    let cut_im = if wmin > b {
        q.integrate(
            |y| {
                let c = y.cosh();
                c * c / (c * c + s2) * drude.eps_unchecked(b * c).im
            },
            0.0,
            (wmin / b).acosh(),
        )
    } else {
        0.0
    };
    let expt_im = sqrt_eps2_integral(sp, b, xi, quad);

    (pref * (cut_re + cut_im), pref * (expt_re + expt_im), negative)
}

fn generic_point(
    sp: &Spectrum,
    drude: &DrudeParams,
    window: &WindowSpec,
    xi: f64,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let fi = window.eval_imag(xi, quad.window_zero_threshold)?;
    let q = quad.adaptive();
    let x2 = xi * xi;
    let one = Complex64::new(1.0, 0.0);
    let kern = |w: f64, e: Complex64| -> f64 {
        w / (w * w + x2) * (window.eval_complex(Complex64::new(w, 0.0)) * (e - one)).im
    };
    let wmin = sp.omega_min();
    let cut = q.integrate(|w| kern(w, drude.eps_unchecked(w)), 0.0, wmin);
    let data = over_panels(sp, wmin, sp.omega_max(), |i, a, b| {
        q.integrate(
            |u| {
                let w = u.exp();
                w * kern(w, sp.eps_in_panel(i, w))
            },
            a.ln(),
            b.ln(),
        )
    });
    // eps' - 1 ~ (c/omega)^2 and eps'' ~ (c/omega)^t above the data
    let (c, e, t) = (sp.omega_max(), last_eps(sp), quad.tail_exponent);
    let tail = q.integrate(
        |v| {
            let w = c / v;
            let de = Complex64::new((e.re - 1.0) * v * v, e.im * v.powf(t));
            c * c / (v * (c * c + x2 * v * v)) * (window.eval_complex(Complex64::new(w, 0.0)) * de).im
        },
        0.0,
        1.0,
    );
    let pref = FRAC_2_PI / fi;
    Ok((pref * cut, pref * (data + tail)))
}

/// `(eps_cut, eps_expt, status)` at one imaginary frequency.
pub(crate) fn window_point(
    sp: &Spectrum,
    drude: &DrudeParams,
    window: &WindowSpec,
    xi: f64,
    quad: &QuadratureConfig,
) -> Result<(f64, f64, PointStatus)> {
    let mut status = PointStatus::default();
    let (cut, expt) = match *window {
        _ if window.is_identity() => (drude.standard_cut(xi, sp.omega_min()), standard_expt(sp, xi, quad)),
        WindowSpec::Sqrt { b } => {
            let (c, e, neg) = sqrt_point(sp, drude, b, xi, quad);
            status.negative_kernel_nodes = neg;
            (c, e)
        }
        _ => generic_point(sp, drude, window, xi, quad)?,
    };
    Ok((cut, expt, status))
}

fn run(
    data: &OpticalDataset,
    extrap: &DrudeParams,
    window: &WindowSpec,
    xi_grid: &[Frequency],
    quad: &QuadratureConfig,
) -> Result<ImagAxisResult> {
    let sp = Spectrum::new(data);
    let parts = xi_grid
        .par_iter()
        .map(|xi| window_point(&sp, extrap, window, xi.value(), quad))
        .collect::<Result<Vec<_>>>()?;
    let res = ImagAxisResult::from_parts(xi_grid.to_vec(), parts, *window, *extrap);
    let neg = res.negative_count();
    if neg > 0 {
        log::warn!("{neg} grid points with eps(i xi) <= 0 for window {}", window.label());
    }
    Ok(res)
}

/// Standard Kramers-Kronig relation. The Drude part below the first data
/// point is integrated in closed form.
pub fn kk_standard(
    data: &OpticalDataset,
    extrap: &DrudeParams,
    xi_grid: &[Frequency],
    quad: &QuadratureConfig,
) -> Result<ImagAxisResult> {
    quad.validate()?;
    check_xi(xi_grid)?;
    run(data, extrap, &WindowSpec::Identity, xi_grid, quad)
}

/// Window-weighted dispersion relation. `Sqrt { b: 0 }` and `Identity`
/// reduce to [`kk_standard`].
pub fn kk_windowed(
    data: &OpticalDataset,
    extrap: &DrudeParams,
    window: &WindowSpec,
    xi_grid: &[Frequency],
    quad: &QuadratureConfig,
) -> Result<ImagAxisResult> {
    quad.validate()?;
    window.validate()?;
    check_xi(xi_grid)?;
    if let WindowSpec::Sqrt { b } = *window {
        let wmax = data.omega_max().value();
        if b >= wmax {
            return Err(Error::invalid(format!(
                "window parameter b = {b} must lie below the last data point {wmax}"
            )));
        }
        let above = data
            .samples()
            .iter()
            .filter(|s| s.omega.value() < b && s.eps().re >= 1.0)
            .count();
        if above > 0 {
            log::warn!("{above} samples below b = {b} have eps' >= 1; the kernel is not positive there");
        }
    }
    window.check_grid(xi_grid.iter().map(|x| x.value()), quad.window_zero_threshold)?;
    run(data, extrap, window, xi_grid, quad)
}

/// Integrand `2/(pi f(i xi)) omega/(omega^2 + xi^2) Im[f(omega)(eps(omega) - 1)]`
/// at the data nodes. Nodes on a window pole are skipped.
pub fn g_diagnostic(
    data: &OpticalDataset,
    window: &WindowSpec,
    xi: Frequency,
    quad: &QuadratureConfig,
) -> Result<Vec<(Frequency, f64)>> {
    window.validate()?;
    let xi = xi.value();
    let fi = window.eval_imag(xi, quad.window_zero_threshold)?;
    let mut out = Vec::with_capacity(data.len());
    for s in data.samples() {
        let w = s.omega.value();
        let f = match window.eval_real(w) {
            Ok(f) => f,
            Err(Error::WindowPole { .. }) => continue,
            Err(e) => return Err(e),
        };
        let g = FRAC_2_PI / fi * w / (w * w + xi * xi) * (f * (s.eps() - 1.0)).im;
        out.push((s.omega, g));
    }
    Ok(out)
}

/// `eps_cut / eps_total` per grid point, unclamped.
pub fn cut_fraction(result: &ImagAxisResult) -> Vec<f64> {
    result
        .eps_cut
        .iter()
        .zip(&result.eps_total)
        .map(|(c, t)| c / t)
        .collect()
}

/// [`cut_fraction`] clamped to `[0, 1]` for reporting.
pub fn cut_fraction_clamped(result: &ImagAxisResult) -> Vec<f64> {
    cut_fraction(result).into_iter().map(|f| f.clamp(0.0, 1.0)).collect()
}
