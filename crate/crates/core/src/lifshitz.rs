//! Casimir pressure between two identical thick plates from the Lifshitz
//! formula at finite temperature.
//!
//! With `y = 2 a q` and `zeta_n = 2 a xi_n / c` the pressure reads
//!
//! ```text
//! P(a, T) = -(k_B T / (8 pi a^3)) sum'_n sum_{TE,TM} int_{zeta_n}^inf y^2 r^2 / (e^y - r^2) dy
//! ```
//!
//! where the primed sum gives the `n = 0` term half weight and the
//! reflection coefficients are
//!
//! ```text
//! r_TE = -(eps - 1) zeta^2 / (y + K)^2
//! r_TM = (eps - 1) [(eps + 1) y^2 - zeta^2] / (eps y + K)^2,   K = sqrt(y^2 + (eps - 1) zeta^2)
//! ```
//!
//! Negative pressure means attraction.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::data::ImagAxisResult;
use crate::dispersion::QuadratureConfig;
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature::Adaptive;
use crate::units::{Frequency, C_LIGHT, EV_TO_RAD_PER_S, E_CHARGE, HBAR, K_B};

/// Riemann zeta(3).
const ZETA3: f64 = 1.202_056_903_159_594_3;

/// Treatment of the zero-frequency Matsubara term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prescription {
    /// TE contributes nothing at `n = 0`; TM reflects perfectly.
    Drude,
    /// `eps ~ omega_p^2 / xi^2` at low frequency, which gives a finite TE
    /// reflection at `n = 0`.
    GeneralizedPlasma { omega_p: Frequency },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasimirConfig {
    pub separation_m: f64,
    pub temperature_k: f64,
    pub prescription: Prescription,
    /// Matsubara modes are kept up to `xi_n <= n_max_factor * c / (2a)`.
    pub n_max_factor: f64,
    /// Largest accepted estimate of the truncated Matsubara remainder,
    /// relative to the pressure.
    pub matsubara_tol: f64,
    pub kperp_quad: QuadratureConfig,
}

impl CasimirConfig {
    pub fn new(separation_m: f64, temperature_k: f64) -> Self {
        Self {
            separation_m,
            temperature_k,
            prescription: Prescription::Drude,
            n_max_factor: 10.0,
            matsubara_tol: 5e-3,
            kperp_quad: QuadratureConfig::default(),
        }
    }

    pub fn with_separation(mut self, separation_m: f64) -> Self {
        self.separation_m = separation_m;
        self
    }

    pub fn with_prescription(mut self, prescription: Prescription) -> Self {
        self.prescription = prescription;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation_m > 0.0) || !self.separation_m.is_finite() {
            return Err(Error::invalid(format!("separation must be > 0, got {}", self.separation_m)));
        }
        if !(self.temperature_k > 0.0) || !self.temperature_k.is_finite() {
            return Err(Error::invalid(format!(
                "temperature must be > 0 K, got {}",
                self.temperature_k
            )));
        }
        if !(self.n_max_factor > 0.0) {
            return Err(Error::invalid("n_max_factor must be > 0"));
        }
        if !(self.matsubara_tol > 0.0) {
            return Err(Error::invalid("matsubara_tol must be > 0"));
        }
        if let Prescription::GeneralizedPlasma { omega_p } = self.prescription {
            if !(omega_p.value() > 0.0) {
                return Err(Error::invalid("plasma frequency must be > 0"));
            }
        }
        self.kperp_quad.validate()
    }

    /// `c / (2a)` in eV.
    pub fn characteristic_frequency(&self) -> Frequency {
        Frequency::ev(C_LIGHT / (2.0 * self.separation_m) / EV_TO_RAD_PER_S)
    }

    /// Index of the last Matsubara term kept (at least 1).
    pub fn n_max(&self) -> usize {
        let xi1 = matsubara_step(self.temperature_k);
        let n = (self.n_max_factor * self.characteristic_frequency().value() / xi1).floor();
        (n as usize).max(1)
    }

    /// `xi_1 .. xi_{n_max}`, the frequencies a permittivity provider must cover.
    pub fn required_frequencies(&self) -> Vec<Frequency> {
        let step = matsubara_step(self.temperature_k);
        (1..=self.n_max()).map(|n| Frequency::ev(step * n as f64)).collect()
    }

    fn zeta(&self, xi_ev: f64) -> f64 {
        2.0 * self.separation_m * xi_ev * EV_TO_RAD_PER_S / C_LIGHT
    }
}

// xi_1 = 2 pi k_B T / hbar in eV
fn matsubara_step(temperature_k: f64) -> f64 {
    2.0 * PI * K_B * temperature_k / E_CHARGE
}

/// `xi_n = 2 pi n k_B T / hbar` for `n = 0..=n_max`, in eV.
pub fn matsubara_freqs(temperature_k: f64, n_max: usize) -> Result<Vec<Frequency>> {
    if !(temperature_k > 0.0) {
        return Err(Error::invalid(format!("temperature must be > 0 K, got {temperature_k}")));
    }
    let step = matsubara_step(temperature_k);
    Ok((0..=n_max).map(|n| Frequency::ev(step * n as f64)).collect())
}

/// Source of `eps(i xi)` for `xi > 0` in eV.
pub trait EpsProvider: Sync {
    fn eps_at(&self, xi: f64) -> Result<f64>;
}

impl<F: Fn(f64) -> f64 + Sync> EpsProvider for F {
    fn eps_at(&self, xi: f64) -> Result<f64> {
        Ok(self(xi))
    }
}

/// Monotone cubic interpolation of `ln(eps - 1)` against `ln xi` through a
/// computed [`ImagAxisResult`]. Never extrapolates.
#[derive(Debug, Clone)]
pub struct ImagAxisInterp {
    curve: MonotoneCubic,
}

impl ImagAxisInterp {
    pub fn new(result: &ImagAxisResult) -> Result<Self> {
        if result.len() < 2 {
            return Err(Error::invalid("interpolation needs at least two xi points"));
        }
        let mut x = Vec::with_capacity(result.len());
        let mut y = Vec::with_capacity(result.len());
        for (xi, eps) in result.xi_grid.iter().zip(&result.eps_total) {
            if !(*eps > 1.0) {
                return Err(Error::invalid(format!(
                    "eps(i xi) = {eps} at xi = {} is not above 1",
                    xi.value()
                )));
            }
            x.push(xi.value().ln());
            y.push((eps - 1.0).ln());
        }
        Ok(Self {
            curve: MonotoneCubic::new(x, y)?,
        })
    }
}

impl EpsProvider for ImagAxisInterp {
    fn eps_at(&self, xi: f64) -> Result<f64> {
        let (lo, hi) = self.curve.domain();
        // tolerate round-off at the tabulated ends
        let t = xi.ln();
        let t = if (t - lo).abs() < 1e-12 {
            lo
        } else if (t - hi).abs() < 1e-12 {
            hi
        } else {
            t
        };
        match self.curve.eval(t) {
            Some(v) => Ok(1.0 + v.exp()),
            None => Err(Error::OutOfRange {
                what: "xi",
                value: xi,
                lo: lo.exp(),
                hi: hi.exp(),
            }),
        }
    }
}

/// `(r_TE, r_TM)` at imaginary frequency `xi` and in-plane wave number
/// `kperp` (1/m).
pub fn fresnel_imag(eps: f64, xi: Frequency, kperp: f64) -> Result<(f64, f64)> {
    if !(eps >= 1.0) {
        return Err(Error::invalid(format!("eps(i xi) = {eps} must be >= 1")));
    }
    let xc = xi.rad_per_s() / C_LIGHT;
    if !(kperp >= 0.0) || (kperp == 0.0 && xc == 0.0) {
        return Err(Error::invalid("kperp must be > 0 when xi = 0"));
    }
    let q = (kperp * kperp + xc * xc).sqrt();
    Ok(reflection(eps, xc, q))
}

// Reflection coefficients in any consistent wave-number units, in the
// cancellation-free form.
#[inline]
fn reflection(eps: f64, zeta: f64, y: f64) -> (f64, f64) {
    let d = (eps - 1.0) * zeta * zeta;
    let k = (y * y + d).sqrt();
    let te = -d / (y + k).powi(2);
    let tm = (eps - 1.0) * ((eps + 1.0) * y * y - zeta * zeta) / (eps * y + k).powi(2);
    (te, tm)
}

// Breakpoints of y - zeta for the exponentially decaying mode integrand; the
// integrand has dropped below 1e-25 of its peak at the last one.
const Y_BREAKS: [f64; 6] = [0.0, 2.0, 6.0, 15.0, 35.0, 70.0];

// int_zeta^inf y^2 R e^-y / (1 - R e^-y) dy for a reflectivity R(y) = r^2.
fn mode_integral(q: &Adaptive, zeta: f64, mut refl2: impl FnMut(f64) -> f64) -> f64 {
    let mut s = 0.0;
    for w in Y_BREAKS.windows(2) {
        s += q.integrate(
            |y| {
                let r = refl2(y) * (-y).exp();
                y * y * r / (1.0 - r)
            },
            zeta + w[0],
            zeta + w[1],
        );
    }
    s
}

// Sum over both polarizations of the mode integral at zeta > 0.
fn both_polarizations(q: &Adaptive, eps: f64, zeta: f64) -> Result<f64> {
    if !(eps >= 1.0) {
        return Err(Error::invalid(format!("eps(i xi) = {eps} must be >= 1")));
    }
    let te = mode_integral(q, zeta, |y| reflection(eps, zeta, y).0.powi(2));
    let tm = mode_integral(q, zeta, |y| reflection(eps, zeta, y).1.powi(2));
    Ok(te + tm)
}

fn zero_mode(q: &Adaptive, cfg: &CasimirConfig) -> f64 {
    let tm = 2.0 * ZETA3;
    let te = match cfg.prescription {
        Prescription::Drude => 0.0,
        Prescription::GeneralizedPlasma { omega_p } => {
            let om = cfg.zeta(omega_p.value());
            mode_integral(q, 0.0, |y| {
                let k = (y * y + om * om).sqrt();
                ((y - k) / (y + k)).powi(2)
            })
        }
    };
    te + tm
}

/// Lifshitz pressure in Pa. Fails when the Matsubara remainder, estimated
/// from the geometric decay of the last two terms, exceeds `matsubara_tol`.
pub fn pressure<P: EpsProvider + ?Sized>(eps: &P, cfg: &CasimirConfig) -> Result<f64> {
    cfg.validate()?;
    let q = cfg.kperp_quad.adaptive();
    let freqs = cfg.required_frequencies();
    let terms = freqs
        .par_iter()
        .map(|xi| {
            let e = eps.eps_at(xi.value())?;
            both_polarizations(&q, e, cfg.zeta(xi.value()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sum = 0.5 * zero_mode(&q, cfg);
    for t in &terms {
        sum += t;
    }

    if terms.len() >= 2 {
        let (prev, last) = (terms[terms.len() - 2], terms[terms.len() - 1]);
        let rho = last / prev;
        let remainder = if (0.0..1.0).contains(&rho) {
            last * rho / (1.0 - rho)
        } else {
            f64::INFINITY
        };
        if remainder > cfg.matsubara_tol * sum {
            return Err(Error::MatsubaraNotConverged {
                n_max: terms.len(),
                remainder: remainder / sum,
            });
        }
    }

    let a = cfg.separation_m;
    Ok(-K_B * cfg.temperature_k / (8.0 * PI * a.powi(3)) * sum)
}

/// Zero-temperature Lifshitz pressure in Pa; the Matsubara sum becomes an
/// integral over `xi`. The provider must be defined for all `xi > 0`.
pub fn pressure_zero_temperature<P: EpsProvider + ?Sized>(
    eps: &P,
    separation_m: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    if !(separation_m > 0.0) {
        return Err(Error::invalid("separation must be > 0"));
    }
    quad.validate()?;
    let q = quad.adaptive();
    let to_ev = C_LIGHT / (2.0 * separation_m * EV_TO_RAD_PER_S);
    let mut err = None;
    let mut total = 0.0;
    for w in Y_BREAKS.windows(2) {
        total += q.integrate(
            |zeta| match eps
                .eps_at(zeta * to_ev)
                .and_then(|e| both_polarizations(&q, e, zeta))
            {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            w[0],
            w[1],
        );
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(-HBAR * C_LIGHT / (32.0 * PI * PI * separation_m.powi(4)) * total)
}

/// `-pi^2 hbar c / (240 a^4)`, the ideal-metal pressure at zero temperature.
pub fn ideal_metal_pressure(separation_m: f64) -> f64 {
    -PI * PI * HBAR * C_LIGHT / (240.0 * separation_m.powi(4))
}

/// Percent difference `100 (P_a - P_b) / P_b` at each separation, with both
/// pressures computed from interpolated imaginary-axis results.
pub fn pressure_diff_report(
    res_a: &ImagAxisResult,
    res_b: &ImagAxisResult,
    cfg: &CasimirConfig,
    separations: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let ia = ImagAxisInterp::new(res_a)?;
    let ib = ImagAxisInterp::new(res_b)?;
    separations
        .iter()
        .map(|&a| {
            let c = cfg.with_separation(a);
            let pa = pressure(&ia, &c)?;
            let pb = pressure(&ib, &c)?;
            Ok((a, 100.0 * (pa - pb) / pb))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DrudeParams;
    use proptest::prelude::*;

    #[test]
    fn matsubara_room_temperature() {
        let f = matsubara_freqs(300.0, 10).unwrap();
        assert_eq!(f[0].value(), 0.0);
        assert!((f[1].value() - 0.162).abs() < 1e-3);
        assert!((f[10].value() - 10.0 * f[1].value()).abs() < 1e-14);
        assert!(matsubara_freqs(0.0, 3).is_err());
    }

    #[test]
    fn vacuum_does_not_reflect() {
        assert_eq!(fresnel_imag(1.0, Frequency::ev(1.0), 1e6).unwrap(), (0.0, 0.0));
        assert!(fresnel_imag(0.5, Frequency::ev(1.0), 1e6).is_err());
        assert!(fresnel_imag(2.0, Frequency::ZERO, 0.0).is_err());
    }

    #[test]
    fn ideal_limit() {
        let (te, tm) = fresnel_imag(1e14, Frequency::ev(1.0), 1e6).unwrap();
        assert!((te + 1.0).abs() < 1e-5 && (tm - 1.0).abs() < 1e-5);
    }

    #[test]
    fn fresnel_against_direct_formula() {
        let xi = Frequency::ev(1.0);
        let eps = 79.26;
        let xc = xi.rad_per_s() / C_LIGHT;
        let kp = xc;
        let q = (kp * kp + xc * xc).sqrt();
        let k = (kp * kp + eps * xc * xc).sqrt();
        let (te, tm) = fresnel_imag(eps, xi, kp).unwrap();
        assert!((te - (q - k) / (q + k)).abs() < 1e-14);
        assert!((tm - (eps * q - k) / (eps * q + k)).abs() < 1e-14);
    }

    #[test]
    fn n_max_rule() {
        let c = CasimirConfig::new(100e-9, 300.0);
        // zeta_1 = 2 a xi_1 / c ~ 0.1645, so floor(10 / zeta_1) = 60
        assert_eq!(c.n_max(), 60);
        assert_eq!(CasimirConfig::new(1e-2, 300.0).n_max(), 1);
    }

    fn drude_gold(xi: f64) -> f64 {
        DrudeParams::gold().eps_imag_axis(xi).unwrap()
    }

    #[test]
    fn pressure_sign_and_monotonicity() {
        let mut prev = f64::NEG_INFINITY;
        for a in [50e-9, 100e-9, 300e-9, 1e-6, 3e-6, 7e-6] {
            let p = pressure(&drude_gold, &CasimirConfig::new(a, 300.0)).unwrap();
            assert!(p < 0.0);
            assert!(p > prev, "|P| must decrease with a");
            prev = p;
        }
    }

    #[test]
    fn plasma_prescription_attracts_more() {
        let c = CasimirConfig::new(1e-6, 300.0);
        let plasma = |xi: f64| 1.0 + 81.0 / (xi * xi);
        let pd = pressure(&plasma, &c).unwrap();
        let pg = pressure(
            &plasma,
            &c.with_prescription(Prescription::GeneralizedPlasma {
                omega_p: Frequency::ev(9.0),
            }),
        )
        .unwrap();
        assert!(pg < pd);
    }

    #[test]
    fn interp_reproduces_nodes_and_refuses_extrapolation() {
        let p = DrudeParams::gold();
        let xi: Vec<Frequency> = [0.1, 0.3, 1.0, 3.0, 10.0].iter().map(|&x| Frequency::ev(x)).collect();
        let parts = xi
            .iter()
            .map(|x| (p.eps_imag_axis(x.value()).unwrap() - 1.0, 0.0, Default::default()))
            .collect();
        let r = ImagAxisResult::from_parts(xi, parts, crate::WindowSpec::Identity, p);
        let it = ImagAxisInterp::new(&r).unwrap();
        assert!((it.eps_at(1.0).unwrap() / p.eps_imag_axis(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((it.eps_at(0.5).unwrap() / p.eps_imag_axis(0.5).unwrap() - 1.0).abs() < 2e-2);
        assert!(it.eps_at(0.05).is_err());
        assert!(it.eps_at(11.0).is_err());
    }

    proptest! {
        #[test]
        fn reflection_bounded(eps in 1.0f64..1e8, zeta in 0.0f64..50.0, dy in 0.0f64..80.0) {
            let y = zeta + dy + 1e-9;
            let (te, tm) = reflection(eps, zeta, y);
            prop_assert!(te.abs() <= 1.0 && tm.abs() <= 1.0);
            prop_assert!(te <= 0.0);
        }
    }
}
