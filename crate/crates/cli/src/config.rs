//! TOML run files.
//!
//! Paths inside a run file are resolved relative to the file's directory.

use std::path::{Path, PathBuf};

use kkwin::data::make_log_grid;
use kkwin::ingest::{load_dataset, merge_datasets, FileSchema, SyntheticPreset};
use kkwin::{Complex64, DrudeParams, Frequency, LorentzOscillator, OpticalDataset, QuadratureConfig, WindowSpec};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub output: OutputSection,
    pub input: Option<InputSection>,
    pub drude: Option<DrudeSection>,
    #[serde(default)]
    pub windows: Vec<WindowSection>,
    pub xi_grid: Option<GridSection>,
    #[serde(default)]
    pub quadrature: QuadSection,
    pub casimir: Option<CasimirSection>,
    pub noise: Option<NoiseSection>,
    pub sensitivity: Option<SensitivitySection>,
    pub fit: Option<FitSection>,
    pub synth: Option<SynthSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    #[serde(default)]
    pub files: Vec<FileEntry>,
    pub synthetic: Option<SyntheticSection>,
    /// Half-open `[lo, hi)` frequency intervals removed after merging.
    #[serde(default)]
    pub exclude_ev: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    pub path: PathBuf,
    #[serde(default = "default_schema")]
    pub schema: String,
}

fn default_schema() -> String {
    "nk".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub preset: String,
    pub min_ev: f64,
    pub max_ev: f64,
    pub points_per_decade: u32,
    /// Interband oscillators for `preset = "custom"`; the Drude part comes
    /// from `[drude]`.
    #[serde(default)]
    pub oscillators: Vec<OscillatorSection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSection {
    pub strength: f64,
    pub omega_0_ev: f64,
    pub width_ev: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrudeSection {
    pub omega_p_ev: f64,
    pub gamma_ev: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WindowSection {
    Kk,
    Sqrt { b_ev: f64 },
    Old { p: u32, q: u32, w_re_ev: f64, w_im_ev: f64 },
}

impl WindowSection {
    pub fn spec(&self) -> WindowSpec {
        match *self {
            WindowSection::Kk => WindowSpec::Identity,
            WindowSection::Sqrt { b_ev } => WindowSpec::sqrt(b_ev),
            WindowSection::Old { p, q, w_re_ev, w_im_ev } => {
                WindowSpec::old_rational(p, q, Complex64::new(w_re_ev, w_im_ev))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min_ev: f64,
    pub max_ev: f64,
    pub points_per_decade: u32,
}

impl GridSection {
    pub fn build(&self) -> CliResult<Vec<Frequency>> {
        make_log_grid(Frequency::ev(self.min_ev), Frequency::ev(self.max_ev), self.points_per_decade)
            .map_err(CliError::config)
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSection {
    pub rel_tol: Option<f64>,
    pub subdiv_limit: Option<u32>,
    pub tail_exponent: Option<f64>,
    pub window_zero_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrescriptionName {
    Drude,
    GeneralizedPlasma,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasimirSection {
    pub separations_nm: Vec<f64>,
    pub temperature_k: f64,
    #[serde(default = "default_prescriptions")]
    pub prescriptions: Vec<PrescriptionName>,
    pub n_max_factor: Option<f64>,
    pub matsubara_tol: Option<f64>,
    /// Adds variants with the Drude extrapolation dropped from `eps(i xi)`.
    #[serde(default)]
    pub drop_cut: bool,
    /// Adds a perfectly reflecting reference computed with the same
    /// Matsubara machinery.
    #[serde(default)]
    pub ideal_metal: bool,
    /// Lower edge of core-electron absorption for the generalized plasma
    /// prescription.
    pub omega_inter_ev: Option<f64>,
    /// Constant core permittivity below `omega_inter`; estimated from the
    /// data when absent.
    pub eps_core_bar: Option<f64>,
}

fn default_prescriptions() -> Vec<PrescriptionName> {
    vec![PrescriptionName::Drude]
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub delta_exp: f64,
    pub n_resamples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivitySection {
    pub d_omega_p: f64,
    pub d_gamma: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub range_min_ev: Option<f64>,
    pub range_max_ev: Option<f64>,
    /// Fixed interband constant; mutually exclusive with `eps_inter_from_ev`.
    pub eps_inter: Option<f64>,
    /// Estimate the interband constant from absorption above this energy.
    pub eps_inter_from_ev: Option<f64>,
    #[serde(default)]
    pub probes_ev: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub file: Option<String>,
}

/// A parsed run file together with its location and hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub sha256: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            config,
            base_dir,
            sha256,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn quad(&self) -> CliResult<QuadratureConfig> {
        let s = &self.config.quadrature;
        let mut q = QuadratureConfig::default();
        if let Some(v) = s.rel_tol {
            q.rel_tol = v;
        }
        if let Some(v) = s.subdiv_limit {
            q.subdiv_limit = v;
        }
        if let Some(v) = s.tail_exponent {
            q.tail_exponent = v;
        }
        if let Some(v) = s.window_zero_threshold {
            q.window_zero_threshold = v;
        }
        q.validate().map_err(CliError::config)?;
        Ok(q)
    }

    fn input(&self) -> CliResult<&InputSection> {
        self.config
            .input
            .as_ref()
            .ok_or_else(|| CliError::config("missing [input] section"))
    }

    pub fn synthetic_preset(&self, s: &SyntheticSection) -> CliResult<SyntheticPreset> {
        if s.preset == "custom" {
            let drude = self.drude_params()?;
            let oscillators = s
                .oscillators
                .iter()
                .map(|o| {
                    LorentzOscillator::new(o.strength, Frequency::ev(o.omega_0_ev), Frequency::ev(o.width_ev))
                        .map_err(CliError::config)
                })
                .collect::<CliResult<Vec<_>>>()?;
            return Ok(SyntheticPreset::Custom { drude, oscillators });
        }
        if !s.oscillators.is_empty() {
            return Err(CliError::config("oscillators are only accepted with preset = \"custom\""));
        }
        SyntheticPreset::from_name(&s.preset).map_err(CliError::config)
    }

    pub fn synthetic_grid(s: &SyntheticSection) -> CliResult<Vec<Frequency>> {
        make_log_grid(Frequency::ev(s.min_ev), Frequency::ev(s.max_ev), s.points_per_decade).map_err(CliError::config)
    }

    /// Checks that every input file exists and every schema name is known.
    pub fn check_files(&self) -> CliResult<()> {
        let input = self.input()?;
        match (input.files.is_empty(), &input.synthetic) {
            (true, None) => return Err(CliError::config("[input] needs `files` or `synthetic`")),
            (false, Some(_)) => return Err(CliError::config("[input] takes either `files` or `synthetic`, not both")),
            _ => {}
        }
        for f in &input.files {
            FileSchema::from_name(&f.schema).map_err(CliError::config)?;
            let p = self.resolve(&f.path);
            if !p.is_file() {
                return Err(CliError::Input(format!("file not found: {}", p.display())));
            }
        }
        Ok(())
    }

    /// Every input as its own dataset.
    pub fn datasets(&self) -> CliResult<Vec<OpticalDataset>> {
        self.check_files()?;
        let input = self.input()?;
        if let Some(s) = &input.synthetic {
            let preset = self.synthetic_preset(s)?;
            let grid = Self::synthetic_grid(s)?;
            return Ok(vec![preset.dataset(&grid).map_err(CliError::config)?]);
        }
        input
            .files
            .iter()
            .map(|f| {
                let schema = FileSchema::from_name(&f.schema).map_err(CliError::config)?;
                load_dataset(&self.resolve(&f.path), schema).map_err(CliError::input)
            })
            .collect()
    }

    /// All inputs merged into one dataset, with exclusions applied.
    pub fn merged_dataset(&self) -> CliResult<OpticalDataset> {
        let mut sets = self.datasets()?;
        let input = self.input()?;
        let exclusions = input
            .exclude_ev
            .iter()
            .map(|[lo, hi]| {
                if lo < hi {
                    Ok((Frequency::ev(*lo), Frequency::ev(*hi)))
                } else {
                    Err(CliError::Config(format!("exclusion [{lo}, {hi}] is empty")))
                }
            })
            .collect::<CliResult<Vec<_>>>()?;
        if sets.len() == 1 && exclusions.is_empty() {
            if let Some(only) = sets.pop() {
                return Ok(only);
            }
        }
        let merged = merge_datasets(&sets, &exclusions).map_err(CliError::input)?;
        for w in &merged.warnings {
            log::warn!("{w}");
        }
        Ok(merged.dataset)
    }

    /// Drude extrapolation from `[drude]`, falling back to the synthetic
    /// preset's own parameters.
    pub fn drude_params(&self) -> CliResult<DrudeParams> {
        if let Some(d) = self.config.drude {
            return DrudeParams::new(Frequency::ev(d.omega_p_ev), Frequency::ev(d.gamma_ev)).map_err(CliError::config);
        }
        if let Some(s) = self.config.input.as_ref().and_then(|i| i.synthetic.as_ref()) {
            if s.preset != "custom" {
                if let Some(d) = self.synthetic_preset(s)?.model().drude {
                    return Ok(d);
                }
            }
        }
        Err(CliError::config("missing [drude] section"))
    }

    pub fn xi_grid(&self) -> CliResult<Vec<Frequency>> {
        self.config
            .xi_grid
            .as_ref()
            .ok_or_else(|| CliError::config("missing [xi_grid] section"))?
            .build()
    }

    /// Configured windows in file order, validated against the data range
    /// and, when given, the imaginary-frequency grid.
    pub fn windows(&self, data: Option<&OpticalDataset>, xi: Option<&[Frequency]>, quad: &QuadratureConfig) -> CliResult<Vec<WindowSpec>> {
        let mut out: Vec<WindowSpec> = Vec::new();
        for w in &self.config.windows {
            let spec = w.spec();
            spec.validate().map_err(CliError::config)?;
            if let (WindowSpec::Sqrt { b }, Some(d)) = (spec, data) {
                if b >= d.omega_max().value() {
                    return Err(CliError::Config(format!(
                        "window b = {b} eV must lie below the last data point {} eV",
                        d.omega_max().value()
                    )));
                }
            }
            if let Some(xi) = xi {
                spec.check_grid(xi.iter().map(|x| x.value()), quad.window_zero_threshold)
                    .map_err(CliError::config)?;
            }
            if out.iter().any(|o| o.label() == spec.label()) {
                return Err(CliError::Config(format!("window `{}` listed twice", spec.label())));
            }
            out.push(spec);
        }
        Ok(out)
    }

    pub fn output_dir(&self, cli_out: Option<&Path>) -> PathBuf {
        match (cli_out, &self.config.output.dir) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.resolve(p),
            (None, None) => self.base_dir.join("out"),
        }
    }
}
