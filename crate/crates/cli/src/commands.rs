//! One function per subcommand. Each returns the files it wrote and the
//! number of table cells that carry an error.

use std::path::{Path, PathBuf};

use kkwin::fitting::{consistency_report, fit_plasma_frequency, interband_constant, FitRange};
use kkwin::lifshitz::{pressure, ImagAxisInterp};
use kkwin::models::{gp_eps_imag_axis_direct, gp_eps_imag_axis_windowed};
use kkwin::uncertainty::{drude_pressure_sensitivity, drude_sensitivity, mc_uncertainty, NoiseSpec};
use kkwin::{
    kk_windowed, CasimirConfig, DrudeParams, EpsProvider, Frequency, GeneralizedPlasmaSpec, ImagAxisResult,
    OpticalDataset, PointStatus, Prescription, QuadratureConfig, WindowSpec,
};
use rayon::prelude::*;

use crate::config::{LoadedConfig, PrescriptionName};
use crate::error::{CliError, CliResult};
use crate::output::{num, text, write_dataset, Meta, Table};

/// Permittivity used for the perfectly reflecting reference.
const IDEAL_EPS: f64 = 1e12;
/// Plasma frequency (eV) giving perfect TE reflection at zero frequency.
const IDEAL_OMEGA_P: f64 = 1e6;

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub errors: usize,
}

fn h(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn join_errors(errs: &[String]) -> String {
    text(&errs.join("; "))
}

/// Standard relation first, then every configured non-identity window.
fn with_reference(windows: Vec<WindowSpec>) -> Vec<WindowSpec> {
    let mut all = vec![WindowSpec::Identity];
    all.extend(windows.into_iter().filter(|w| !matches!(w, WindowSpec::Identity)));
    all
}

#[derive(Debug, Clone)]
struct Point {
    total: f64,
    cut: f64,
    expt: f64,
    status: PointStatus,
    error: Option<String>,
}

fn points_of(r: &ImagAxisResult) -> Vec<Point> {
    (0..r.len())
        .map(|i| Point {
            total: r.eps_total[i],
            cut: r.eps_cut[i],
            expt: r.eps_expt[i],
            status: r.status[i],
            error: None,
        })
        .collect()
}

/// Whole-grid transform; on failure each point is retried alone so that
/// one bad frequency does not blank the table.
fn eval_grid(
    data: &OpticalDataset,
    drude: &DrudeParams,
    window: &WindowSpec,
    xi: &[Frequency],
    quad: &QuadratureConfig,
) -> Vec<Point> {
    match kk_windowed(data, drude, window, xi, quad) {
        Ok(r) => points_of(&r),
        Err(_) => xi
            .iter()
            .map(|x| match kk_windowed(data, drude, window, &[*x], quad) {
                Ok(r) => points_of(&r).remove(0),
                Err(e) => Point {
                    total: f64::NAN,
                    cut: f64::NAN,
                    expt: f64::NAN,
                    status: PointStatus::default(),
                    error: Some(e.to_string()),
                },
            })
            .collect(),
    }
}

pub fn epsilon(cfg: &LoadedConfig, out: &Path, meta: &Meta) -> CliResult<Outcome> {
    let quad = cfg.quad()?;
    let data = cfg.merged_dataset()?;
    let drude = cfg.drude_params()?;
    let xi = cfg.xi_grid()?;
    let windows = with_reference(cfg.windows(Some(&data), Some(&xi), &quad)?);
    let mut outcome = Outcome::default();

    let results: Vec<Vec<Point>> = windows.iter().map(|w| eval_grid(&data, &drude, w, &xi, &quad)).collect();

    for (w, pts) in windows.iter().zip(&results) {
        let mut t = Table::new(h(&["xi_eV", "eps_total", "eps_cut", "eps_expt", "cut_fraction", "status", "errors"]));
        for (x, p) in xi.iter().zip(pts) {
            outcome.errors += p.error.is_some() as usize;
            t.push(vec![
                num(x.value()),
                num(p.total),
                num(p.cut),
                num(p.expt),
                num(p.cut / p.total),
                text(&p.status.describe()),
                text(p.error.as_deref().unwrap_or("")),
            ]);
        }
        outcome.files.push(t.write(out, &format!("eps_{}.csv", w.label()), meta)?);
    }

    let mut header = vec!["xi_eV".to_string()];
    header.extend(windows[1..].iter().map(|w| format!("pct_{}", w.label())));
    header.push("errors".to_string());
    let mut t = Table::new(header);
    for (i, x) in xi.iter().enumerate() {
        let reference = &results[0][i];
        let mut row = vec![num(x.value())];
        let mut errs = Vec::new();
        for (w, pts) in windows[1..].iter().zip(&results[1..]) {
            row.push(num(100.0 * (pts[i].total - reference.total) / reference.total));
            if let Some(e) = &pts[i].error {
                errs.push(format!("{}: {e}", w.label()));
            }
        }
        if let Some(e) = &reference.error {
            errs.push(format!("kk: {e}"));
        }
        row.push(join_errors(&errs));
        t.push(row);
    }
    outcome.files.push(t.write(out, "eps_comparison.csv", meta)?);

    if let Some(s) = cfg.config.sensitivity {
        let mut header = vec!["xi_eV".to_string()];
        let mut columns = Vec::new();
        for w in &windows {
            let table = drude_sensitivity(&data, &drude, w, &xi, s.d_omega_p, s.d_gamma, &quad).map_err(CliError::compute)?;
            header.push(format!("pct_omega_p_{}", w.label()));
            header.push(format!("pct_gamma_{}", w.label()));
            columns.push(table);
        }
        let mut t = Table::new(header);
        for (i, x) in xi.iter().enumerate() {
            let mut row = vec![num(x.value())];
            for c in &columns {
                row.push(num(c.pct_omega_p[i]));
                row.push(num(c.pct_gamma[i]));
            }
            t.push(row);
        }
        outcome.files.push(t.write(out, "eps_sensitivity.csv", meta)?);
    }
    Ok(outcome)
}

struct Variant {
    name: String,
    provider: Result<Box<dyn EpsProvider>, String>,
    prescription: Prescription,
}

fn interp_of(r: &ImagAxisResult) -> Result<Box<dyn EpsProvider>, String> {
    ImagAxisInterp::new(r)
        .map(|i| Box::new(i) as Box<dyn EpsProvider>)
        .map_err(|e| e.to_string())
}

fn gp_result(
    spec: &GeneralizedPlasmaSpec,
    window: &WindowSpec,
    drude: &DrudeParams,
    xi: &[Frequency],
    quad: &QuadratureConfig,
) -> Result<Box<dyn EpsProvider>, String> {
    let eps = xi
        .par_iter()
        .map(|x| match *window {
            WindowSpec::Identity => gp_eps_imag_axis_direct(spec, *x, quad),
            WindowSpec::Sqrt { b } => gp_eps_imag_axis_windowed(spec, *x, Frequency::ev(b), quad),
            WindowSpec::OldRational { .. } => unreachable!("rejected during validation"),
        })
        .collect::<kkwin::Result<Vec<f64>>>()
        .map_err(|e| e.to_string())?;
    let n = xi.len();
    let r = ImagAxisResult {
        xi_grid: xi.to_vec(),
        eps_expt: eps.iter().map(|e| e - 1.0).collect(),
        eps_total: eps,
        eps_cut: vec![0.0; n],
        window: *window,
        drude_params: *drude,
        status: vec![PointStatus::default(); n],
    };
    interp_of(&r)
}

pub fn pressure_cmd(cfg: &LoadedConfig, out: &Path, meta: &Meta) -> CliResult<Outcome> {
    let quad = cfg.quad()?;
    let cs = cfg
        .config
        .casimir
        .clone()
        .ok_or_else(|| CliError::config("missing [casimir] section"))?;
    if cs.separations_nm.is_empty() || cs.separations_nm.iter().any(|a| !(*a > 0.0)) {
        return Err(CliError::config("separations_nm must be a non-empty list of positive values"));
    }
    let seps: Vec<f64> = cs.separations_nm.iter().map(|a| a / 1e9).collect();
    let a_min = seps.iter().copied().fold(f64::INFINITY, f64::min);
    let mut base = CasimirConfig::new(a_min, cs.temperature_k);
    if let Some(f) = cs.n_max_factor {
        base.n_max_factor = f;
    }
    if let Some(t) = cs.matsubara_tol {
        base.matsubara_tol = t;
    }
    base.kperp_quad = quad;
    base.validate().map_err(CliError::config)?;

    let mut xi = base.required_frequencies();
    if xi.len() < 2 {
        xi.push(Frequency::ev(2.0 * xi[0].value()));
    }

    let mut variants: Vec<Variant> = Vec::new();
    if cs.ideal_metal {
        variants.push(Variant {
            name: "ideal".to_string(),
            provider: Ok(Box::new(|_: f64| IDEAL_EPS)),
            prescription: Prescription::GeneralizedPlasma {
                omega_p: Frequency::ev(IDEAL_OMEGA_P),
            },
        });
    }

    let mut sensitivity_inputs = None;
    if cfg.config.input.is_some() {
        let data = cfg.merged_dataset()?;
        let drude = cfg.drude_params()?;
        let windows = with_reference(cfg.windows(Some(&data), Some(&xi), &quad)?);
        let gp = if cs.prescriptions.contains(&PrescriptionName::GeneralizedPlasma) {
            let w_inter = cs
                .omega_inter_ev
                .ok_or_else(|| CliError::config("generalized-plasma needs casimir.omega_inter_ev"))?;
            for w in &windows {
                match *w {
                    WindowSpec::OldRational { .. } => {
                        return Err(CliError::config("generalized-plasma supports kk and sqrt windows only"))
                    }
                    WindowSpec::Sqrt { b } if b >= w_inter => {
                        return Err(CliError::Config(format!(
                            "window b = {b} eV must lie below omega_inter = {w_inter} eV"
                        )))
                    }
                    _ => {}
                }
            }
            let w_inter = Frequency::ev(w_inter);
            let bar = match cs.eps_core_bar {
                Some(v) => v,
                None => interband_constant(&data, w_inter, &quad).map_err(CliError::compute)?.value,
            };
            Some(GeneralizedPlasmaSpec::new(drude.omega_p, Some(&data), bar, w_inter).map_err(CliError::config)?)
        } else {
            None
        };

        for w in &windows {
            let label = w.label();
            for p in &cs.prescriptions {
                match p {
                    PrescriptionName::Drude => {
                        let r = kk_windowed(&data, &drude, w, &xi, &quad).map_err(|e| e.to_string());
                        variants.push(Variant {
                            name: format!("{label}_drude"),
                            provider: r.as_ref().map_err(Clone::clone).and_then(interp_of),
                            prescription: Prescription::Drude,
                        });
                        if cs.drop_cut {
                            variants.push(Variant {
                                name: format!("{label}_drude_nocut"),
                                provider: r.and_then(|r| interp_of(&r.without_cut())),
                                prescription: Prescription::Drude,
                            });
                        }
                    }
                    PrescriptionName::GeneralizedPlasma => {
                        let spec = gp.as_ref().ok_or_else(|| CliError::config("generalized-plasma not configured"))?;
                        variants.push(Variant {
                            name: format!("{label}_gp"),
                            provider: gp_result(spec, w, &drude, &xi, &quad),
                            prescription: Prescription::GeneralizedPlasma { omega_p: drude.omega_p },
                        });
                    }
                }
            }
        }
        sensitivity_inputs = Some((data, drude, windows));
    }
    if variants.is_empty() {
        return Err(CliError::config("pressure needs [input] data or casimir.ideal_metal = true"));
    }

    let mut header = vec!["a_m".to_string()];
    header.extend(variants.iter().map(|v| format!("P_{}_Pa", v.name)));
    let mut pairs = Vec::new();
    for i in 0..variants.len() {
        for j in i + 1..variants.len() {
            header.push(format!("pct_{}_vs_{}", variants[i].name, variants[j].name));
            pairs.push((i, j));
        }
    }
    header.push("errors".to_string());

    let mut outcome = Outcome::default();
    let mut t = Table::new(header);
    for &a in &seps {
        let mut errs = Vec::new();
        let values: Vec<f64> = variants
            .iter()
            .map(|v| {
                let c = base.with_separation(a).with_prescription(v.prescription);
                let r = v
                    .provider
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|p| pressure(p.as_ref(), &c).map_err(|e| e.to_string()));
                r.unwrap_or_else(|e| {
                    errs.push(format!("{}: {e}", v.name));
                    f64::NAN
                })
            })
            .collect();
        outcome.errors += errs.len();
        let mut row = vec![num(a)];
        row.extend(values.iter().map(|v| num(*v)));
        row.extend(pairs.iter().map(|&(i, j)| num(100.0 * (values[i] - values[j]) / values[j])));
        row.push(join_errors(&errs));
        t.push(row);
    }
    outcome.files.push(t.write(out, "pressure.csv", meta)?);

    if let (Some(s), Some((data, drude, windows))) = (cfg.config.sensitivity, sensitivity_inputs) {
        let mut header = vec!["a_m".to_string()];
        let mut columns = Vec::new();
        for w in &windows {
            let rows = drude_pressure_sensitivity(&data, &drude, w, &base, &seps, s.d_omega_p, s.d_gamma, &quad)
                .map_err(CliError::compute)?;
            let l = w.label();
            header.extend([format!("P_{l}_Pa"), format!("pct_omega_p_{l}"), format!("pct_gamma_{l}")]);
            columns.push(rows);
        }
        let mut t = Table::new(header);
        for (i, a) in seps.iter().enumerate() {
            let mut row = vec![num(*a)];
            for c in &columns {
                row.extend([num(c[i].pressure_pa), num(c[i].pct_omega_p), num(c[i].pct_gamma)]);
            }
            t.push(row);
        }
        outcome.files.push(t.write(out, "pressure_sensitivity.csv", meta)?);
    }
    Ok(outcome)
}

pub fn mc(cfg: &LoadedConfig, out: &Path, meta: &Meta) -> CliResult<Outcome> {
    let quad = cfg.quad()?;
    let ns = cfg
        .config
        .noise
        .ok_or_else(|| CliError::config("missing [noise] section"))?;
    let noise = NoiseSpec::new(ns.delta_exp, ns.n_resamples, ns.seed).map_err(CliError::config)?;
    let data = cfg.merged_dataset()?;
    let drude = cfg.drude_params()?;
    let xi = cfg.xi_grid()?;
    let mut windows = cfg.windows(Some(&data), Some(&xi), &quad)?;
    if windows.is_empty() {
        windows.push(WindowSpec::Identity);
    }

    let results: Vec<_> = windows
        .iter()
        .map(|w| mc_uncertainty(&data, &drude, w, &xi, &noise, &quad).map_err(|e| e.to_string()))
        .collect();

    let mut header = vec!["xi_eV".to_string()];
    header.extend(windows.iter().map(|w| format!("delta_eps_rel_percent_{}", w.label())));
    header.push("errors".to_string());
    let mut t = Table::new(header);
    let mut outcome = Outcome::default();
    let failures: Vec<String> = windows
        .iter()
        .zip(&results)
        .filter_map(|(w, r)| r.as_ref().err().map(|e| format!("{}: {e}", w.label())))
        .collect();
    outcome.errors += failures.len();
    for (i, x) in xi.iter().enumerate() {
        let mut row = vec![num(x.value())];
        row.extend(
            results
                .iter()
                .map(|r| num(r.as_ref().map_or(f64::NAN, |u| 100.0 * u.delta_eps_rel[i]))),
        );
        row.push(join_errors(&failures));
        t.push(row);
    }
    let footer = |name: &str, f: &dyn Fn(&kkwin::uncertainty::UncertaintyResult) -> usize| {
        let mut row = vec![name.to_string()];
        row.extend(results.iter().map(|r| r.as_ref().map_or("NaN".to_string(), |u| f(u).to_string())));
        row.push(String::new());
        row
    };
    t.push(footer("negative_resamples", &|u| u.negative_resamples));
    t.push(footer("clamped_k_draws", &|u| u.clamped_k_draws));
    outcome.files.push(t.write(out, "mc.csv", meta)?);
    Ok(outcome)
}

pub fn fit(cfg: &LoadedConfig, out: &Path, meta: &Meta) -> CliResult<Outcome> {
    let quad = cfg.quad()?;
    let fs = cfg.config.fit.clone().unwrap_or_default();
    if fs.eps_inter.is_some() && fs.eps_inter_from_ev.is_some() {
        return Err(CliError::config("fit takes `eps_inter` or `eps_inter_from_ev`, not both"));
    }
    let default = match (fs.range_min_ev, fs.range_max_ev) {
        (Some(_), Some(_)) => None,
        _ => Some(FitRange::default_for(cfg.drude_params()?.gamma).map_err(CliError::config)?),
    };
    let lo = fs.range_min_ev.map(Frequency::ev).or(default.map(|d| d.lo));
    let hi = fs.range_max_ev.map(Frequency::ev).or(default.map(|d| d.hi));
    let range = match (lo, hi) {
        (Some(lo), Some(hi)) => FitRange::new(lo, hi).map_err(CliError::config)?,
        _ => return Err(CliError::config("fit range is incomplete")),
    };
    let sets = cfg.datasets()?;

    let mut outcome = Outcome::default();
    let mut t = Table::new(h(&[
        "dataset",
        "label",
        "omega_p_eV",
        "eps_inter",
        "eps_inter_fitted",
        "residual_rms",
        "lambda2_min_um2",
        "lambda2_max_um2",
        "n_points",
        "errors",
    ]));
    for (i, d) in sets.iter().enumerate() {
        let fixed = match (fs.eps_inter, fs.eps_inter_from_ev) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(w)) => interband_constant(d, Frequency::ev(w), &quad).map(|e| Some(e.value)),
            (None, None) => Ok(None),
        };
        let r = fixed.and_then(|f| fit_plasma_frequency(d, &range, f));
        let mut row = vec![i.to_string(), text(d.label())];
        match r {
            Ok(f) => {
                row.extend([
                    num(f.omega_p.value()),
                    num(f.eps_inter),
                    f.eps_inter_was_fitted.to_string(),
                    num(f.residual_rms),
                    num(f.fit_range.0),
                    num(f.fit_range.1),
                    f.n_points.to_string(),
                    String::new(),
                ]);
            }
            Err(e) => {
                outcome.errors += 1;
                row.extend(["NaN", "NaN", "", "NaN", "NaN", "NaN", "0"].map(String::from));
                row.push(text(&e.to_string()));
            }
        }
        t.push(row);
    }
    outcome.files.push(t.write(out, "fit.csv", meta)?);

    if sets.len() >= 2 {
        let probes: Vec<Frequency> = fs.probes_ev.iter().map(|&w| Frequency::ev(w)).collect();
        let report = consistency_report(&sets, &probes, &range).map_err(CliError::compute)?;
        let mut header = vec!["omega_eV".to_string()];
        for i in 0..sets.len() {
            header.push(format!("eps_re_{i}"));
            header.push(format!("eps_im_{i}"));
        }
        header.push("max_pair_rel_diff".to_string());
        let mut t = Table::new(header);
        for p in &report.probes {
            let mut row = vec![num(p.omega.value())];
            for e in &p.eps {
                row.push(num(e.map_or(f64::NAN, |e| e.re)));
                row.push(num(e.map_or(f64::NAN, |e| e.im)));
            }
            let worst = p.pair_diffs.iter().map(|d| d.2).fold(f64::NAN, f64::max);
            row.push(num(worst));
            t.push(row);
        }
        outcome.files.push(t.write(out, "fit_probes.csv", meta)?);

        let mut t = Table::new(h(&["dataset_a", "dataset_b", "omega_p_rel_diff"]));
        for &(i, j, rel) in &report.flagged {
            t.push(vec![i.to_string(), j.to_string(), num(rel)]);
        }
        outcome.files.push(t.write(out, "fit_flags.csv", meta)?);
    }
    Ok(outcome)
}

pub fn synth(cfg: &LoadedConfig, out: &Path, meta: &Meta) -> CliResult<Outcome> {
    let s = cfg
        .config
        .input
        .as_ref()
        .and_then(|i| i.synthetic.as_ref())
        .ok_or_else(|| CliError::config("synth needs an [input.synthetic] section"))?;
    let preset = cfg.synthetic_preset(s)?;
    let grid = LoadedConfig::synthetic_grid(s)?;
    let data = preset.dataset(&grid).map_err(CliError::config)?;
    let name = cfg
        .config
        .synth
        .as_ref()
        .and_then(|s| s.file.clone())
        .unwrap_or_else(|| format!("{}.csv", preset.name()));
    let path = write_dataset(out, &name, meta, &data)?;
    Ok(Outcome {
        files: vec![path],
        errors: 0,
    })
}
