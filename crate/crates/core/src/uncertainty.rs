//! Propagation of optical-data errors through the dispersion transforms.
//!
//! Resamples perturb every `n` and `k` independently with Gaussian noise of
//! standard deviation `delta_exp` times the measured value. Each resample is
//! driven by its own ChaCha stream `(seed, stream_index)`, so results do not
//! depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::{ImagAxisResult, OpticalDataset};
use crate::dispersion::{self, kk_standard, kk_windowed, QuadratureConfig};
use crate::error::{Error, Result};
use crate::interp::Spectrum;
use crate::lifshitz::{pressure, CasimirConfig, ImagAxisInterp};
use crate::models::DrudeParams;
use crate::units::Frequency;
use crate::window::WindowSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Relative standard deviation applied to every `n` and `k`.
    pub delta_exp: f64,
    pub n_resamples: usize,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(delta_exp: f64, n_resamples: usize, seed: u64) -> Result<Self> {
        let s = Self {
            delta_exp,
            n_resamples,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_exp > 0.0 && self.delta_exp < 0.5) {
            return Err(Error::invalid(format!(
                "delta_exp = {} must lie in (0, 0.5)",
                self.delta_exp
            )));
        }
        if self.n_resamples < 2 {
            return Err(Error::invalid("n_resamples must be >= 2"));
        }
        Ok(())
    }
}

/// One perturbed copy of `data`, plus the number of `k` draws clamped at 0.
///
/// Per node, `n` is drawn first and then `k`. A non-positive `n` is redrawn;
/// a negative `k` is set to 0.
pub fn resample_dataset_counted(data: &OpticalDataset, noise: &NoiseSpec, stream_index: u64) -> (OpticalDataset, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(stream_index);
    let d = noise.delta_exp;
    let mut clamped = 0;
    let values: Vec<(f64, f64)> = data
        .samples()
        .iter()
        .map(|s| {
            let n = loop {
                let z: f64 = rng.sample(StandardNormal);
                let n = s.n * (1.0 + d * z);
                if n > 0.0 {
                    break n;
                }
            };
            let z: f64 = rng.sample(StandardNormal);
            let mut k = s.k * (1.0 + d * z);
            if k < 0.0 {
                k = 0.0;
                clamped += 1;
            }
            (n, k)
        })
        .collect();
    (data.with_values(values), clamped)
}

pub fn resample_dataset(data: &OpticalDataset, noise: &NoiseSpec, stream_index: u64) -> OpticalDataset {
    resample_dataset_counted(data, noise, stream_index).0
}

/// Outcome of [`mc_propagate`].
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    /// Transform of the unperturbed data.
    pub reference: Vec<f64>,
    /// `sqrt(sum_alpha (x_alpha - reference)^2 / (M - 1))` per output.
    pub sigma: Vec<f64>,
    /// Resamples with at least one output `<= 0`.
    pub nonpositive_resamples: usize,
    pub clamped_k_draws: usize,
}

/// Runs `transform` on the data and on `noise.n_resamples` resamples
/// (streams `0..M`) and returns the spread around the unperturbed value.
pub fn mc_propagate<T>(data: &OpticalDataset, noise: &NoiseSpec, transform: T) -> Result<McSummary>
where
    T: Fn(&OpticalDataset) -> Result<Vec<f64>> + Sync,
{
    noise.validate()?;
    let reference = transform(data)?;
    let runs = (0..noise.n_resamples as u64)
        .into_par_iter()
        .map(|alpha| {
            let (d, clamped) = resample_dataset_counted(data, noise, alpha);
            transform(&d).map(|v| (v, clamped))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sq = vec![0.0; reference.len()];
    let mut nonpositive = 0;
    let mut clamped_total = 0;
    for (values, clamped) in &runs {
        if values.len() != reference.len() {
            return Err(Error::invalid("transform output length changed between resamples"));
        }
        for ((acc, v), r) in sq.iter_mut().zip(values).zip(&reference) {
            *acc += (v - r).powi(2);
        }
        if values.iter().any(|v| !(*v > 0.0)) {
            nonpositive += 1;
        }
        clamped_total += clamped;
    }
    let m1 = (noise.n_resamples - 1) as f64;
    Ok(McSummary {
        reference,
        sigma: sq.into_iter().map(|s| (s / m1).sqrt()).collect(),
        nonpositive_resamples: nonpositive,
        clamped_k_draws: clamped_total,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyResult {
    pub xi_grid: Vec<Frequency>,
    pub delta_eps_abs: Vec<f64>,
    /// `delta_eps_abs` divided by the standard Kramers-Kronig value of the
    /// unperturbed data.
    pub delta_eps_rel: Vec<f64>,
    /// Standard Kramers-Kronig result of the unperturbed data.
    pub reference: ImagAxisResult,
    /// Resamples giving `eps(i xi) <= 0` somewhere on the grid. They are
    /// kept in the statistics.
    pub negative_resamples: usize,
    pub clamped_k_draws: usize,
}

/// Monte Carlo uncertainty of `eps(i xi)` for the given window. The Drude
/// extrapolation is not perturbed, so only `eps_expt` varies.
pub fn mc_uncertainty(
    data: &OpticalDataset,
    extrap: &DrudeParams,
    window: &WindowSpec,
    xi_grid: &[Frequency],
    noise: &NoiseSpec,
    quad: &QuadratureConfig,
) -> Result<UncertaintyResult> {
    noise.validate()?;
    let reference = kk_standard(data, extrap, xi_grid, quad)?;
    let nominal = kk_windowed(data, extrap, window, xi_grid, quad)?;
    let cut = nominal.eps_cut.clone();
    let summary = mc_propagate(data, noise, |d| {
        let sp = Spectrum::new(d);
        xi_grid
            .iter()
            .zip(&cut)
            .map(|(xi, c)| {
                dispersion::window_point(&sp, extrap, window, xi.value(), quad).map(|(_, e, _)| 1.0 + c + e)
            })
            .collect()
    })?;
    let delta_eps_rel = summary
        .sigma
        .iter()
        .zip(&reference.eps_total)
        .map(|(s, e)| s / e)
        .collect();
    if summary.nonpositive_resamples > 0 {
        log::warn!(
            "{} of {} resamples gave eps(i xi) <= 0 for window {}",
            summary.nonpositive_resamples,
            noise.n_resamples,
            window.label()
        );
    }
    Ok(UncertaintyResult {
        xi_grid: xi_grid.to_vec(),
        delta_eps_abs: summary.sigma,
        delta_eps_rel,
        reference,
        negative_resamples: summary.nonpositive_resamples,
        clamped_k_draws: summary.clamped_k_draws,
    })
}

/// Percent change of `eps(i xi)` when one Drude parameter is perturbed.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityTable {
    pub xi_grid: Vec<Frequency>,
    pub eps_base: Vec<f64>,
    /// `100 (eps(omega_p (1 + d)) - eps) / eps`.
    pub pct_omega_p: Vec<f64>,
    /// `100 (eps(gamma (1 + d)) - eps) / eps`.
    pub pct_gamma: Vec<f64>,
}

fn pct(new: &[f64], base: &[f64]) -> Vec<f64> {
    new.iter().zip(base).map(|(n, b)| 100.0 * (n - b) / b).collect()
}

/// Recomputes `eps(i xi)` with `omega_p` and, separately, `gamma` scaled by
/// `1 + d_omega_p` and `1 + d_gamma`.
pub fn drude_sensitivity(
    data: &OpticalDataset,
    extrap: &DrudeParams,
    window: &WindowSpec,
    xi_grid: &[Frequency],
    d_omega_p: f64,
    d_gamma: f64,
    quad: &QuadratureConfig,
) -> Result<SensitivityTable> {
    let eval = |p: &DrudeParams| kk_windowed(data, p, window, xi_grid, quad).map(|r| r.eps_total);
    let base = eval(extrap)?;
    let wp = eval(&extrap.perturbed(d_omega_p, 0.0))?;
    let g = eval(&extrap.perturbed(0.0, d_gamma))?;
    Ok(SensitivityTable {
        xi_grid: xi_grid.to_vec(),
        pct_omega_p: pct(&wp, &base),
        pct_gamma: pct(&g, &base),
        eps_base: base,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureSensitivity {
    pub separation_m: f64,
    pub pressure_pa: f64,
    pub pct_omega_p: f64,
    pub pct_gamma: f64,
}

/// Chains [`drude_sensitivity`] into the Lifshitz pressure. `eps(i xi)` is
/// computed at the Matsubara frequencies required by the smallest
/// separation, which serve all larger ones.
#[allow(clippy::too_many_arguments)]
pub fn drude_pressure_sensitivity(
    data: &OpticalDataset,
    extrap: &DrudeParams,
    window: &WindowSpec,
    cfg: &CasimirConfig,
    separations: &[f64],
    d_omega_p: f64,
    d_gamma: f64,
    quad: &QuadratureConfig,
) -> Result<Vec<PressureSensitivity>> {
    let a_min = separations
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !a_min.is_finite() {
        return Err(Error::invalid("no separations given"));
    }
    let xi = cfg.with_separation(a_min).required_frequencies();
    let interp = |p: &DrudeParams| -> Result<ImagAxisInterp> {
        let r = kk_windowed(data, p, window, &xi, quad)?;
        ImagAxisInterp::new(&r)
    };
    let base = interp(extrap)?;
    let wp = interp(&extrap.perturbed(d_omega_p, 0.0))?;
    let g = interp(&extrap.perturbed(0.0, d_gamma))?;
    separations
        .iter()
        .map(|&a| {
            let c = cfg.with_separation(a);
            let p0 = pressure(&base, &c)?;
            let p1 = pressure(&wp, &c)?;
            let p2 = pressure(&g, &c)?;
            Ok(PressureSensitivity {
                separation_m: a,
                pressure_pa: p0,
                pct_omega_p: 100.0 * (p1 - p0) / p0,
                pct_gamma: 100.0 * (p2 - p0) / p0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_log_grid;
    use crate::models::synthetic_dataset;

    fn data() -> OpticalDataset {
        let g = make_log_grid(Frequency::ev(0.1), Frequency::ev(100.0), 5).unwrap();
        synthetic_dataset(&DrudeParams::gold(), &[], &g).unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let d = data();
        let noise = NoiseSpec {
            delta_exp: 0.0,
            n_resamples: 2,
            seed: 9,
        };
        assert_eq!(resample_dataset(&d, &noise, 3), d);
    }

    #[test]
    fn resamples_are_reproducible_and_distinct() {
        let d = data();
        let noise = NoiseSpec::new(0.03, 10, 42).unwrap();
        let a = resample_dataset(&d, &noise, 5);
        let b = resample_dataset(&d, &noise, 5);
        let c = resample_dataset(&d, &noise, 6);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.frequencies().collect::<Vec<_>>(), d.frequencies().collect::<Vec<_>>());
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseSpec::new(0.0, 10, 1).is_err());
        assert!(NoiseSpec::new(0.6, 10, 1).is_err());
        assert!(NoiseSpec::new(0.03, 1, 1).is_err());
    }

    #[test]
    fn zero_perturbation_table_is_zero() {
        let d = data();
        let t = drude_sensitivity(
            &d,
            &DrudeParams::gold(),
            &WindowSpec::sqrt(1.0),
            &[Frequency::ev(0.5), Frequency::ev(2.0)],
            0.0,
            0.0,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(t.pct_omega_p.iter().chain(&t.pct_gamma).all(|v| *v == 0.0));
    }
}
