//! Physical constants and the frequency unit used throughout the crate.
//!
//! Every frequency is stored as a photon energy in eV, i.e. an angular
//! frequency in units of eV/hbar. One eV/hbar is `EV_TO_RAD_PER_S` rad/s.

use std::fmt;

/// Reduced Planck constant, J s (CODATA 2018, exact in SI 2019).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// 1 eV/hbar expressed in rad/s.
pub const EV_TO_RAD_PER_S: f64 = E_CHARGE / HBAR;
/// h c in eV um: `omega[eV] = HC_EV_UM / lambda[um]`.
pub const HC_EV_UM: f64 = 1.239_841_984;

/// Angular frequency in eV/hbar.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Frequency(f64);

impl Frequency {
    pub const ZERO: Frequency = Frequency(0.0);

    /// Panics on negative or non-finite input; use [`Frequency::try_ev`] for
    /// untrusted values.
    pub fn ev(value: f64) -> Self {
        Self::try_ev(value).expect("frequency must be finite and non-negative")
    }

    pub fn try_ev(value: f64) -> Option<Self> {
        (value.is_finite() && value >= 0.0).then_some(Frequency(value))
    }

    pub fn from_rad_per_s(w: f64) -> Option<Self> {
        Self::try_ev(w / EV_TO_RAD_PER_S)
    }

    pub fn from_wavelength_um(lambda_um: f64) -> Option<Self> {
        if lambda_um > 0.0 {
            Self::try_ev(HC_EV_UM / lambda_um)
        } else {
            None
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn rad_per_s(self) -> f64 {
        self.0 * EV_TO_RAD_PER_S
    }

    /// Vacuum wavelength in um. Infinite at zero frequency.
    pub fn wavelength_um(self) -> f64 {
        HC_EV_UM / self.0
    }
}

impl From<Frequency> for f64 {
    fn from(f: Frequency) -> f64 {
        f.0
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} eV", self.0)
    }
}

/// Thermal energy k_B T in eV.
pub fn thermal_energy_ev(temperature_k: f64) -> f64 {
    K_B * temperature_k / E_CHARGE
}
