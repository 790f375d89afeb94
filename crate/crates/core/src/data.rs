//! Shared data model: tabulated optical samples, frequency grids and
//! imaginary-axis results.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::DrudeParams;
use crate::units::Frequency;
use crate::window::WindowSpec;

/// Minimum number of samples a dataset must hold.
pub const MIN_SAMPLES: usize = 4;

/// Logarithmically spaced grid from `start` to `stop` inclusive.
///
/// The number of intervals is `ceil(points_per_decade * decades)` (rounded to
/// the nearest integer first so exact decade spans are not padded by
/// floating-point noise). Both endpoints are reproduced exactly.
pub fn make_log_grid(
    start: Frequency,
    stop: Frequency,
    points_per_decade: u32,
) -> Result<Vec<Frequency>> {
    let (a, b) = (start.value(), stop.value());
    if a <= 0.0 {
        return Err(Error::invalid(format!("grid start must be > 0, got {a}")));
    }
    if b <= a {
        return Err(Error::invalid(format!(
            "grid stop {b} must exceed start {a}"
        )));
    }
    if points_per_decade == 0 {
        return Err(Error::invalid("points_per_decade must be >= 1"));
    }
    let decades = (b / a).log10();
    let raw = decades * points_per_decade as f64;
    let intervals = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    }
    .max(1.0) as usize;
    let (la, lb) = (a.ln(), b.ln());
    let step = (lb - la) / intervals as f64;
    let mut grid: Vec<Frequency> = (0..=intervals)
        .map(|i| Frequency::ev((la + step * i as f64).exp()))
        .collect();
    grid[0] = start;
    grid[intervals] = stop;
    Ok(grid)
}

/// Complex permittivity `(n + i k)^2`.
pub fn eps_from_nk(n: f64, k: f64) -> Result<Complex64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::invalid(format!("refraction index must be > 0, got {n}")));
    }
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::invalid(format!(
            "extinction coefficient must be >= 0, got {k}"
        )));
    }
    Ok(Complex64::new(n * n - k * k, 2.0 * n * k))
}

/// Inverse of [`eps_from_nk`]: principal square root, which has a
/// non-negative real part and, for `Im eps >= 0`, a non-negative imaginary
/// part.
pub fn nk_from_eps(eps: Complex64) -> (f64, f64) {
    let r = eps.sqrt();
    // sqrt of a value on the negative real axis may come back as -0.0 imag
    (r.re, r.im.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalSample {
    pub omega: Frequency,
    pub n: f64,
    pub k: f64,
}

impl OpticalSample {
    pub fn new(omega: Frequency, n: f64, k: f64) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidSample {
            omega: omega.value(),
            reason: reason.to_string(),
        };
        if omega.value() <= 0.0 {
            return Err(bad("frequency must be > 0"));
        }
        if !(n > 0.0) || !n.is_finite() {
            return Err(bad(&format!("n = {n} must be > 0")));
        }
        if !(k >= 0.0) || !k.is_finite() {
            return Err(bad(&format!("k = {k} must be >= 0")));
        }
        Ok(Self { omega, n, k })
    }

    pub fn from_eps(omega: Frequency, eps: Complex64) -> Result<Self> {
        if eps.im < 0.0 {
            return Err(Error::InvalidSample {
                omega: omega.value(),
                reason: format!("eps'' = {} must be >= 0", eps.im),
            });
        }
        let (n, k) = nk_from_eps(eps);
        Self::new(omega, n, k)
    }

    #[inline]
    pub fn eps(&self) -> Complex64 {
        Complex64::new(self.n * self.n - self.k * self.k, 2.0 * self.n * self.k)
    }
}

/// Tabulated optical data, strictly increasing in frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalDataset {
    samples: Vec<OpticalSample>,
    label: String,
    source_meta: String,
}

impl OpticalDataset {
    /// Sorts the samples by frequency; rejects duplicates and sets smaller
    /// than [`MIN_SAMPLES`].
    pub fn new(
        mut samples: Vec<OpticalSample>,
        label: impl Into<String>,
        source_meta: impl Into<String>,
    ) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                min: MIN_SAMPLES,
                got: samples.len(),
            });
        }
        samples.sort_by(|a, b| a.omega.value().total_cmp(&b.omega.value()));
        if let Some(w) = samples.windows(2).find(|w| w[0].omega == w[1].omega) {
            return Err(Error::DuplicateFrequency {
                omega: w[0].omega.value(),
            });
        }
        Ok(Self {
            samples,
            label: label.into(),
            source_meta: source_meta.into(),
        })
    }

    pub fn samples(&self) -> &[OpticalSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source_meta(&self) -> &str {
        &self.source_meta
    }

    pub fn omega_min(&self) -> Frequency {
        self.samples[0].omega
    }

    pub fn omega_max(&self) -> Frequency {
        self.samples[self.samples.len() - 1].omega
    }

    pub fn frequencies(&self) -> impl Iterator<Item = Frequency> + '_ {
        self.samples.iter().map(|s| s.omega)
    }

    /// Samples with `lo <= omega <= hi`, as a new dataset.
    pub fn restrict(&self, lo: Frequency, hi: Frequency) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .filter(|s| s.omega >= lo && s.omega <= hi)
            .copied()
            .collect();
        Self::new(
            samples,
            self.label.clone(),
            format!("{} restricted to [{}, {}] eV", self.source_meta, lo.value(), hi.value()),
        )
    }

    /// Same frequencies, replaced `(n, k)` values. Used by resampling.
    pub(crate) fn with_values(&self, values: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let samples = self
            .samples
            .iter()
            .zip(values)
            .map(|(s, (n, k))| OpticalSample { omega: s.omega, n, k })
            .collect();
        Self {
            samples,
            label: self.label.clone(),
            source_meta: self.source_meta.clone(),
        }
    }
}

/// Per-grid-point diagnostics attached to an [`ImagAxisResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PointStatus {
    /// `eps_total <= 0`, physically inadmissible on the imaginary axis.
    pub negative_eps: bool,
    /// Quadrature nodes where a nominally positive kernel came out negative
    /// (square-root window with `eps' >= 1` somewhere below `b`).
    pub negative_kernel_nodes: usize,
}

impl PointStatus {
    pub fn is_clean(&self) -> bool {
        !self.negative_eps && self.negative_kernel_nodes == 0
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.negative_eps {
            parts.push("negative eps(i xi)".to_string());
        }
        if self.negative_kernel_nodes > 0 {
            parts.push(format!("{} negative kernel nodes", self.negative_kernel_nodes));
        }
        parts.join("; ")
    }
}

/// `eps(i xi) = 1 + eps_cut + eps_expt` on a grid of imaginary frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagAxisResult {
    pub xi_grid: Vec<Frequency>,
    pub eps_total: Vec<f64>,
    pub eps_cut: Vec<f64>,
    pub eps_expt: Vec<f64>,
    pub window: WindowSpec,
    pub drude_params: DrudeParams,
    pub status: Vec<PointStatus>,
}

impl ImagAxisResult {
    pub(crate) fn from_parts(
        xi_grid: Vec<Frequency>,
        parts: Vec<(f64, f64, PointStatus)>,
        window: WindowSpec,
        drude_params: DrudeParams,
    ) -> Self {
        let mut eps_cut = Vec::with_capacity(parts.len());
        let mut eps_expt = Vec::with_capacity(parts.len());
        let mut eps_total = Vec::with_capacity(parts.len());
        let mut status = Vec::with_capacity(parts.len());
        for (cut, expt, mut st) in parts {
            let total = 1.0 + cut + expt;
            st.negative_eps = !(total > 0.0);
            eps_cut.push(cut);
            eps_expt.push(expt);
            eps_total.push(total);
            status.push(st);
        }
        Self {
            xi_grid,
            eps_total,
            eps_cut,
            eps_expt,
            window,
            drude_params,
            status,
        }
    }

    pub fn len(&self) -> usize {
        self.xi_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_grid.is_empty()
    }

    /// Same result with the extrapolation contribution dropped.
    pub fn without_cut(&self) -> Self {
        let parts = self
            .eps_expt
            .iter()
            .zip(&self.status)
            .map(|(&e, &s)| (0.0, e, s))
            .collect();
        Self::from_parts(self.xi_grid.clone(), parts, self.window, self.drude_params)
    }

    pub fn negative_count(&self) -> usize {
        self.status.iter().filter(|s| s.negative_eps).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(x: f64) -> Frequency {
        Frequency::ev(x)
    }

    #[test]
    fn decade_grid_endpoints() {
        let g = make_log_grid(ev(0.1), ev(10.0), 1).unwrap();
        let v: Vec<f64> = g.iter().map(|f| f.value()).collect();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], 0.1);
        assert!((v[1] - 1.0).abs() < 1e-12);
        assert_eq!(v[2], 10.0);
    }

    #[test]
    fn grid_ratio() {
        let g = make_log_grid(ev(0.1), ev(10.0), 10).unwrap();
        assert_eq!(g.len(), 21);
        let r = 10f64.powf(0.1);
        for w in g.windows(2) {
            assert!((w[1].value() / w[0].value() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_grid_rejected() {
        assert!(make_log_grid(ev(1.0), ev(1.0), 5).is_err());
        assert!(make_log_grid(ev(0.0), ev(1.0), 5).is_err());
        assert!(make_log_grid(ev(1.0), ev(2.0), 0).is_err());
    }

    #[test]
    fn grid_is_deterministic() {
        let a = make_log_grid(ev(0.042), ev(9.0), 37).unwrap();
        let b = make_log_grid(ev(0.042), ev(9.0), 37).unwrap();
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| x.value().to_bits() == y.value().to_bits()));
    }

    #[test]
    fn eps_from_nk_values() {
        assert_eq!(eps_from_nk(1.0, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(eps_from_nk(0.5, 2.0).unwrap(), Complex64::new(-3.75, 2.0));
        assert!(eps_from_nk(0.0, 1.0).is_err());
        assert!(eps_from_nk(-1.0, 1.0).is_err());
        assert!(eps_from_nk(1.0, -0.1).is_err());
    }

    #[test]
    fn dataset_guards() {
        let s = |w: f64| OpticalSample::new(ev(w), 1.0, 0.5).unwrap();
        assert!(matches!(
            OpticalDataset::new(vec![s(1.0), s(2.0), s(3.0)], "x", ""),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(
            OpticalDataset::new(vec![s(1.0), s(2.0), s(2.0), s(3.0)], "x", ""),
            Err(Error::DuplicateFrequency { .. })
        ));
        let d = OpticalDataset::new(vec![s(3.0), s(1.0), s(4.0), s(2.0)], "x", "").unwrap();
        assert_eq!(d.omega_min().value(), 1.0);
        assert_eq!(d.omega_max().value(), 4.0);
        assert!(d.samples().iter().all(|s| s.eps().im >= 0.0));
    }

    #[test]
    fn decomposition_identity_is_exact() {
        let xi = vec![ev(1.0), ev(2.0)];
        let r = ImagAxisResult::from_parts(
            xi,
            vec![(0.3, 5.1, PointStatus::default()), (-2.0, 0.5, PointStatus::default())],
            WindowSpec::Identity,
            DrudeParams::new(ev(9.0), ev(0.035)).unwrap(),
        );
        for i in 0..r.len() {
            assert_eq!(r.eps_total[i], 1.0 + r.eps_cut[i] + r.eps_expt[i]);
        }
        assert!(!r.status[0].negative_eps);
        assert!(r.status[1].negative_eps);
    }

    proptest! {
        #[test]
        fn nk_round_trip(n in 1e-3f64..50.0, k in 0.0f64..50.0) {
            let eps = eps_from_nk(n, k).unwrap();
            let (n2, k2) = nk_from_eps(eps);
            let scale = n.max(k);
            prop_assert!((n2 - n).abs() <= 1e-10 * scale);
            prop_assert!((k2 - k).abs() <= 1e-10 * scale);
        }
    }
}
