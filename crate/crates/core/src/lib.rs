//! Weighted Kramers-Kronig dispersion relations for ohmic conductors and the
//! Lifshitz pressure between parallel plates.
//!
//! The imaginary-axis permittivity `eps(i xi)` of a metal cannot be measured;
//! it is reconstructed from band-limited optical data `(omega, n, k)`. The
//! standard Kramers-Kronig integral leans heavily on a Drude extrapolation
//! below the lowest measured frequency. The square-root window
//! `f(z; b) = z / sqrt(z^2 - b^2)` suppresses that region while keeping a
//! positive integration kernel. This crate implements both transforms, the
//! Lifshitz formula that consumes them, Monte Carlo error propagation, plasma
//! frequency fits, and CSV ingestion of optical tables.
//!
//! All frequencies are photon energies in eV (that is, angular frequency in
//! units of eV/hbar). Conversions to rad/s and wavelengths live in [`units`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod dispersion;
pub mod error;
pub mod fitting;
pub mod ingest;
pub mod interp;
pub mod lifshitz;
pub mod models;
pub mod quadrature;
pub mod uncertainty;
pub mod units;
pub mod window;

pub use data::{
    eps_from_nk, make_log_grid, nk_from_eps, ImagAxisResult, OpticalDataset, OpticalSample,
    PointStatus,
};
pub use dispersion::{cut_fraction, g_diagnostic, kk_standard, kk_windowed, QuadratureConfig};
pub use error::{Error, Result};
pub use lifshitz::{CasimirConfig, EpsProvider, Prescription};
pub use models::{DrudeParams, GeneralizedPlasmaSpec, LorentzOscillator};
pub use units::Frequency;
pub use window::WindowSpec;

pub use num_complex::Complex64;
