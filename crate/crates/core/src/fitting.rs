//! Plasma frequency from the infrared law `eps' = 1 + eps_inter - (omega_p / hc)^2 lambda^2`
//! and the static interband constant from its dispersion integral.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;

use crate::data::OpticalDataset;
use crate::dispersion::{self, QuadratureConfig};
use crate::error::{Error, Result};
use crate::interp::Spectrum;
use crate::units::{Frequency, HC_EV_UM};

/// Closed frequency interval used to select fit points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitRange {
    pub lo: Frequency,
    pub hi: Frequency,
}

impl FitRange {
    pub fn new(lo: Frequency, hi: Frequency) -> Result<Self> {
        if !(lo.value() > 0.0 && hi > lo) {
            return Err(Error::invalid(format!(
                "fit range [{}, {}] is empty",
                lo.value(),
                hi.value()
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Infrared-to-red default: above `5 gamma` and below 1.6 eV.
    pub fn default_for(gamma: Frequency) -> Result<Self> {
        Self::new(Frequency::ev(5.0 * gamma.value()), Frequency::ev(1.6))
    }

    pub fn contains(&self, w: Frequency) -> bool {
        w >= self.lo && w <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlasmaFit {
    pub omega_p: Frequency,
    pub eps_inter: f64,
    /// `(lambda^2_min, lambda^2_max)` of the fitted points in um^2.
    pub fit_range: (f64, f64),
    pub residual_rms: f64,
    /// False when `eps_inter` was supplied and the intercept constrained.
    pub eps_inter_was_fitted: bool,
    pub n_points: usize,
}

/// Least-squares fit of `eps'` against `lambda^2` for `(lambda, eps')`
/// pairs. `hc` converts wavelength to photon energy in the wavelength unit
/// used (1.239841984 for micrometres); `omega_p` comes back in eV.
pub fn fit_lambda_squared(points: &[(f64, f64)], hc: f64, eps_inter_fixed: Option<f64>) -> Result<PlasmaFit> {
    if points.len() < 3 {
        return Err(Error::FitRejected(format!(
            "need at least 3 points in the fit range, got {}",
            points.len()
        )));
    }
    if !(hc > 0.0) {
        return Err(Error::invalid("hc must be > 0"));
    }
    let xs: Vec<f64> = points.iter().map(|(l, _)| l * l).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| *e).collect();
    let n = xs.len() as f64;

    let (slope, intercept) = match eps_inter_fixed {
        Some(ei) => {
            let c = 1.0 + ei;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * (y - c)).sum();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            (sxy / sxx, c)
        }
        None => {
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            if sxx == 0.0 {
                return Err(Error::FitRejected("all fit points share one wavelength".into()));
            }
            let s = sxy / sxx;
            (s, my - s * mx)
        }
    };
    if !(slope < 0.0) {
        return Err(Error::FitRejected(format!(
            "slope {slope:.4e} of eps' against lambda^2 is not negative; no metallic behaviour"
        )));
    }
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let mean_abs = ys.iter().map(|y| y.abs()).sum::<f64>() / n;
    if rms > 0.01 * mean_abs {
        log::warn!("plasma fit residual {rms:.3e} exceeds 1% of mean |eps'| ({mean_abs:.3e})");
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PlasmaFit {
        omega_p: Frequency::ev(hc * (-slope).sqrt()),
        eps_inter: intercept - 1.0,
        fit_range: (lo, hi),
        residual_rms: rms,
        eps_inter_was_fitted: eps_inter_fixed.is_none(),
        n_points: points.len(),
    })
}

/// Fits the samples of `data` inside `range`.
pub fn fit_plasma_frequency(data: &OpticalDataset, range: &FitRange, eps_inter_fixed: Option<f64>) -> Result<PlasmaFit> {
    let points: Vec<(f64, f64)> = data
        .samples()
        .iter()
        .filter(|s| range.contains(s.omega))
        .map(|s| (s.omega.wavelength_um(), s.eps().re))
        .collect();
    fit_lambda_squared(&points, HC_EV_UM, eps_inter_fixed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterbandEstimate {
    pub value: f64,
    /// Share of `value` coming from the power-law tail above the data.
    pub tail_fraction: f64,
}

/// `(2/pi) int_{omega_inter}^inf eps''(omega) / omega d omega` over the data
/// plus the power-law tail `eps''_max / t`.
pub fn interband_constant(data: &OpticalDataset, omega_inter: Frequency, quad: &QuadratureConfig) -> Result<InterbandEstimate> {
    quad.validate()?;
    let sp = Spectrum::new(data);
    let w0 = omega_inter.value();
    if !(w0 >= sp.omega_min() && w0 < sp.omega_max()) {
        return Err(Error::OutOfRange {
            what: "omega_inter",
            value: w0,
            lo: sp.omega_min(),
            hi: sp.omega_max(),
        });
    }
    let q = quad.adaptive();
    let body = dispersion::over_panels(&sp, w0, sp.omega_max(), |i, a, b| {
        q.integrate(|u| sp.eps_in_panel(i, u.exp()).im, a.ln(), b.ln())
    });
    let tail = dispersion::last_eps(&sp).im / quad.tail_exponent;
    let value = FRAC_2_PI * (body + tail);
    let tail_fraction = if value > 0.0 { FRAC_2_PI * tail / value } else { 0.0 };
    if tail_fraction > 0.1 {
        log::warn!(
            "power-law tail supplies {:.1}% of the interband constant",
            100.0 * tail_fraction
        );
    }
    Ok(InterbandEstimate { value, tail_fraction })
}

/// Permittivities of all datasets at one probe frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub omega: Frequency,
    /// `None` where the probe lies outside a dataset.
    pub eps: Vec<Option<Complex64>>,
    /// `(i, j, 2 |eps_i - eps_j| / (|eps_i| + |eps_j|))` for `i < j`.
    pub pair_diffs: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub probes: Vec<ProbeRow>,
    /// Plasma fit per dataset, or the reason it failed.
    pub fits: Vec<std::result::Result<PlasmaFit, String>>,
    /// `(i, j, relative difference)` for fitted plasma frequencies differing
    /// by more than 5%.
    pub flagged: Vec<(usize, usize, f64)>,
}

/// Threshold on relative plasma-frequency differences in
/// [`consistency_report`].
pub const OMEGA_P_FLAG: f64 = 0.05;

/// Compares datasets at probe frequencies and through their plasma fits.
pub fn consistency_report(sets: &[OpticalDataset], probes: &[Frequency], range: &FitRange) -> Result<ConsistencyReport> {
    if sets.len() < 2 {
        return Err(Error::invalid("consistency report needs at least two datasets"));
    }
    let spectra: Vec<Spectrum> = sets.iter().map(Spectrum::new).collect();
    let probes = probes
        .iter()
        .map(|&w| {
            let eps: Vec<Option<Complex64>> = spectra.iter().map(|s| s.eps(w.value()).ok()).collect();
            let mut pair_diffs = Vec::new();
            for i in 0..eps.len() {
                for j in i + 1..eps.len() {
                    if let (Some(a), Some(b)) = (eps[i], eps[j]) {
                        pair_diffs.push((i, j, 2.0 * (a - b).norm() / (a.norm() + b.norm())));
                    }
                }
            }
            ProbeRow {
                omega: w,
                eps,
                pair_diffs,
            }
        })
        .collect();
    let fits: Vec<_> = sets
        .iter()
        .map(|d| fit_plasma_frequency(d, range, None).map_err(|e| e.to_string()))
        .collect();
    let mut flagged = Vec::new();
    for i in 0..fits.len() {
        for j in i + 1..fits.len() {
            if let (Ok(a), Ok(b)) = (&fits[i], &fits[j]) {
                let (a, b) = (a.omega_p.value(), b.omega_p.value());
                let rel = (a - b).abs() / a.min(b);
                if rel > OMEGA_P_FLAG {
                    flagged.push((i, j, rel));
                }
            }
        }
    }
    Ok(ConsistencyReport {
        probes,
        fits,
        flagged,
    })
}
