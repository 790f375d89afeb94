//! Analytic permittivity models: Drude, plasma, Lorentz oscillators and the
//! generalized plasma prescription.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;

use crate::data::{OpticalDataset, OpticalSample};
use crate::dispersion::{self, QuadratureConfig};
use crate::error::{Error, Result};
use crate::interp::Spectrum;
use crate::units::Frequency;

/// Drude conduction-electron parameters. `gamma = 0` is the plasma model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeParams {
    pub omega_p: Frequency,
    pub gamma: Frequency,
}

impl DrudeParams {
    pub fn new(omega_p: Frequency, gamma: Frequency) -> Result<Self> {
        if !(omega_p.value() > 0.0) {
            return Err(Error::invalid("plasma frequency must be > 0"));
        }
        Ok(Self { omega_p, gamma })
    }

    /// Commonly quoted gold values: 9 eV and 35 meV.
    pub fn gold() -> Self {
        Self {
            omega_p: Frequency::ev(9.0),
            gamma: Frequency::ev(0.035),
        }
    }

    pub fn is_plasma(&self) -> bool {
        self.gamma.value() == 0.0
    }

    /// Copy with `omega_p` and `gamma` scaled by `(1 + d_omega_p)` and
    /// `(1 + d_gamma)`.
    pub fn perturbed(&self, d_omega_p: f64, d_gamma: f64) -> Self {
        Self {
            omega_p: Frequency::ev(self.omega_p.value() * (1.0 + d_omega_p)),
            gamma: Frequency::ev(self.gamma.value() * (1.0 + d_gamma)),
        }
    }

    /// `1 - omega_p^2 / (omega (omega + i gamma))`.
    pub fn eps(&self, omega: f64) -> Result<Complex64> {
        if !(omega > 0.0) {
            return Err(Error::invalid(format!("Drude model has a pole at omega = {omega}")));
        }
        Ok(self.eps_unchecked(omega))
    }

    #[inline]
    pub(crate) fn eps_unchecked(&self, omega: f64) -> Complex64 {
        let (wp2, g) = (self.omega_p.value().powi(2), self.gamma.value());
        let d = omega * omega + g * g;
        Complex64::new(1.0 - wp2 / d, wp2 * g / (omega * d))
    }

    /// `1 - eps'(omega) = omega_p^2 / (omega^2 + gamma^2)`, finite at zero.
    #[inline]
    pub(crate) fn one_minus_eps_re(&self, omega: f64) -> f64 {
        let g = self.gamma.value();
        self.omega_p.value().powi(2) / (omega * omega + g * g)
    }

    /// `1 + omega_p^2 / (xi (xi + gamma))`.
    pub fn eps_imag_axis(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::invalid(format!("Drude model diverges at xi = {xi}")));
        }
        Ok(1.0 + self.omega_p.value().powi(2) / (xi * (xi + self.gamma.value())))
    }

    /// `(2/pi) int_0^w_max omega eps''(omega) / (omega^2 + xi^2) d omega`,
    /// the standard Kramers-Kronig integral of the Drude absorption over
    /// `[0, w_max]`, in closed form. For the plasma model the whole weight
    /// sits at `omega = 0` and the result is `omega_p^2 / xi^2`.
    pub fn standard_cut(&self, xi: f64, w_max: f64) -> f64 {
        let (wp2, g) = (self.omega_p.value().powi(2), self.gamma.value());
        if g == 0.0 {
            return wp2 / (xi * xi);
        }
        if w_max <= 0.0 {
            return 0.0;
        }
        let denom = xi * xi - g * g;
        if denom.abs() > 1e-6 * g * g {
            FRAC_2_PI * wp2 * g / denom * ((w_max / g).atan() / g - (w_max / xi).atan() / xi)
        } else {
            // xi ~ gamma: partial fractions cancel, integrate directly
            let f = |w: f64| wp2 * g / ((w * w + g * g) * (w * w + xi * xi));
            FRAC_2_PI * crate::quadrature::Adaptive::new(1e-13, 40).integrate(f, 0.0, w_max)
        }
    }
}

/// Drude permittivity on the real axis.
pub fn drude_eps_real_axis(p: &DrudeParams, omega: Frequency) -> Result<Complex64> {
    p.eps(omega.value())
}

/// Drude permittivity continued to `omega = i xi`.
pub fn drude_eps_imag_axis(p: &DrudeParams, xi: Frequency) -> Result<f64> {
    p.eps_imag_axis(xi.value())
}

/// `strength * omega_0^2 / (omega_0^2 - omega^2 - i omega width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzOscillator {
    pub strength: f64,
    pub omega_0: Frequency,
    pub width: Frequency,
}

impl LorentzOscillator {
    pub fn new(strength: f64, omega_0: Frequency, width: Frequency) -> Result<Self> {
        if !(strength >= 0.0) {
            return Err(Error::invalid("oscillator strength must be >= 0"));
        }
        if !(omega_0.value() > 0.0) || !(width.value() > 0.0) {
            return Err(Error::invalid("oscillator resonance and width must be > 0"));
        }
        Ok(Self {
            strength,
            omega_0,
            width,
        })
    }

    pub fn eps(&self, omega: f64) -> Complex64 {
        let w02 = self.omega_0.value().powi(2);
        let num = self.strength * w02;
        num / Complex64::new(w02 - omega * omega, -omega * self.width.value())
    }

    pub fn eps_imag_axis(&self, xi: f64) -> f64 {
        let w02 = self.omega_0.value().powi(2);
        self.strength * w02 / (w02 + xi * xi + xi * self.width.value())
    }
}

/// Optional Drude term plus a sum of Lorentz oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorModel {
    pub drude: Option<DrudeParams>,
    pub oscillators: Vec<LorentzOscillator>,
}

impl OscillatorModel {
    pub fn eps(&self, omega: f64) -> Result<Complex64> {
        let mut e = match &self.drude {
            Some(d) => d.eps(omega)?,
            None => Complex64::new(1.0, 0.0),
        };
        for o in &self.oscillators {
            e += o.eps(omega);
        }
        Ok(e)
    }

    pub fn eps_imag_axis(&self, xi: f64) -> Result<f64> {
        let mut e = match &self.drude {
            Some(d) => d.eps_imag_axis(xi)?,
            None => 1.0,
        };
        e += self.oscillators.iter().map(|o| o.eps_imag_axis(xi)).sum::<f64>();
        Ok(e)
    }

    /// Tabulates the model on `grid` as `(n, k)` samples.
    pub fn tabulate(&self, grid: &[Frequency], label: &str) -> Result<OpticalDataset> {
        let samples = grid
            .iter()
            .map(|&w| OpticalSample::from_eps(w, self.eps(w.value())?))
            .collect::<Result<Vec<_>>>()?;
        OpticalDataset::new(samples, label, "synthetic")
    }
}

/// Interband oscillators used by the `drude-lorentz-gold` fixture. These are
/// convenient stand-ins for the gold interband edge, not fitted values.
pub fn gold_interband_oscillators() -> Vec<LorentzOscillator> {
    vec![
        LorentzOscillator {
            strength: 2.5,
            omega_0: Frequency::ev(3.0),
            width: Frequency::ev(1.0),
        },
        LorentzOscillator {
            strength: 3.0,
            omega_0: Frequency::ev(5.5),
            width: Frequency::ev(3.0),
        },
    ]
}

/// Drude plus oscillators tabulated on `grid`. The result is exactly
/// Kramers-Kronig consistent since it samples an analytic causal model.
pub fn synthetic_dataset(
    p: &DrudeParams,
    oscillators: &[LorentzOscillator],
    grid: &[Frequency],
) -> Result<OpticalDataset> {
    OscillatorModel {
        drude: Some(*p),
        oscillators: oscillators.to_vec(),
    }
    .tabulate(grid, "synthetic")
}

/// Plasma conduction term plus core-electron absorption.
#[derive(Debug, Clone)]
pub struct GeneralizedPlasmaSpec {
    pub omega_p: Frequency,
    core: Option<(OpticalDataset, Spectrum)>,
    pub eps_core_bar: f64,
    pub omega_inter: Frequency,
}

impl GeneralizedPlasmaSpec {
    /// Core data below `omega_inter` are dropped.
    pub fn new(
        omega_p: Frequency,
        core_data: Option<&OpticalDataset>,
        eps_core_bar: f64,
        omega_inter: Frequency,
    ) -> Result<Self> {
        if !(omega_p.value() > 0.0) {
            return Err(Error::invalid("plasma frequency must be > 0"));
        }
        if !(omega_inter.value() > 0.0) {
            return Err(Error::invalid("omega_inter must be > 0"));
        }
        if !(eps_core_bar >= 0.0) {
            return Err(Error::invalid("eps_core_bar must be >= 0"));
        }
        let core = match core_data {
            Some(d) => {
                let r = d.restrict(omega_inter, d.omega_max())?;
                let sp = Spectrum::new(&r);
                Some((r, sp))
            }
            None => {
                if eps_core_bar > 0.0 {
                    return Err(Error::invalid(
                        "a core contribution (eps_core_bar > 0) needs core data",
                    ));
                }
                None
            }
        };
        Ok(Self {
            omega_p,
            core,
            eps_core_bar,
            omega_inter,
        })
    }

    pub fn core_data(&self) -> Option<&OpticalDataset> {
        self.core.as_ref().map(|(d, _)| d)
    }

    fn plasma_term(&self, xi: f64) -> f64 {
        1.0 + self.omega_p.value().powi(2) / (xi * xi)
    }
}

/// `1 + omega_p^2/xi^2 + (2/pi) int omega eps''_core / (omega^2 + xi^2)`.
pub fn gp_eps_imag_axis_direct(spec: &GeneralizedPlasmaSpec, xi: Frequency, quad: &QuadratureConfig) -> Result<f64> {
    let xi = xi.value();
    if !(xi > 0.0) {
        return Err(Error::invalid("xi must be > 0"));
    }
    let core = match &spec.core {
        Some((_, sp)) => dispersion::standard_expt(sp, xi, quad),
        None => 0.0,
    };
    Ok(spec.plasma_term(xi) + core)
}

/// Windowed form with `eps'_core` taken constant (`eps_core_bar`) below `b`:
///
/// `1 + omega_p^2/xi^2 + eps_core_bar [1 - sqrt(1 + b^2/xi^2)]
///   + (2/pi) sqrt(1 + b^2/xi^2) int_b^inf omega^2/(omega^2+xi^2) eps''_core / sqrt(omega^2 - b^2)`.
pub fn gp_eps_imag_axis_windowed(
    spec: &GeneralizedPlasmaSpec,
    xi: Frequency,
    b: Frequency,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let (xi_v, b) = (xi.value(), b.value());
    if !(b >= 0.0) || b >= spec.omega_inter.value() {
        return Err(Error::invalid(format!(
            "window b = {b} must lie in [0, omega_inter = {})",
            spec.omega_inter.value()
        )));
    }
    if b == 0.0 {
        return gp_eps_imag_axis_direct(spec, xi, quad);
    }
    if !(xi_v > 0.0) {
        return Err(Error::invalid("xi must be > 0"));
    }
    let root = (1.0 + (b / xi_v).powi(2)).sqrt();
    let mut eps = spec.plasma_term(xi_v) + spec.eps_core_bar * (1.0 - root);
    if let Some((_, sp)) = &spec.core {
        eps += FRAC_2_PI * root * dispersion::sqrt_eps2_integral(sp, b, xi_v, quad);
    }
    Ok(eps)
}
