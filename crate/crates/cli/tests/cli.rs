use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const HBAR: f64 = 1.054_571_817e-34;
const C: f64 = 299_792_458.0;

fn kkwin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kkwin"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn run(dir: &Path, cmd: &str, config: &str) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    kkwin(&[
        cmd,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--no-timestamp",
        "--threads",
        "1",
    ])
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "exit {:?}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: PathBuf) -> Self {
        let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Self { header, rows }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.header));
        self.rows.iter().filter_map(|r| r[i].parse().ok()).collect()
    }
}

const LORENTZ_GOLD: &str = r#"
[input.synthetic]
preset = "drude-lorentz-gold"
min_ev = 0.125
max_ev = 1e4
points_per_decade = 20
"#;

const XI: &str = r#"
[xi_grid]
min_ev = 0.1
max_ev = 10
points_per_decade = 5
"#;

#[test]
fn synth_output_loads_back() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "synth", &format!("{LORENTZ_GOLD}\n[synth]\nfile = \"gold.csv\"\n"));
    ok(&o);
    let data = kkwin::ingest::load_dataset(&dir.path().join("out/gold.csv"), kkwin::ingest::FileSchema::Nk).unwrap();
    assert_eq!(data.len(), 100);
    assert_eq!(data.omega_min().value(), 0.125);
}

#[test]
fn epsilon_zero_b_matches_standard() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{LORENTZ_GOLD}{XI}\n[[windows]]\nkind = \"sqrt\"\nb_ev = 0.0\n");
    ok(&run(dir.path(), "epsilon", &cfg));
    let t = Csv::read(dir.path().join("out/eps_comparison.csv"));
    let pct = t.col("pct_sqrt_b0");
    assert_eq!(pct.len(), 11);
    assert!(pct.iter().all(|p| *p == 0.0), "{pct:?}");
}

#[test]
fn epsilon_two_windows_agree() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "{LORENTZ_GOLD}{XI}\n[[windows]]\nkind = \"sqrt\"\nb_ev = 1.0\n[[windows]]\nkind = \"sqrt\"\nb_ev = 1.5\n"
    );
    ok(&run(dir.path(), "epsilon", &cfg));
    let a = Csv::read(dir.path().join("out/eps_sqrt_b1.csv")).col("eps_total");
    let b = Csv::read(dir.path().join("out/eps_sqrt_b1.5.csv")).col("eps_total");
    let worst = a.iter().zip(&b).map(|(x, y)| 100.0 * ((x - y) / y).abs()).fold(0.0, f64::max);
    assert!(worst < 0.1, "max window difference {worst}%");
}

#[test]
fn epsilon_standard_cut_dominates_for_drude_metal() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "[input.synthetic]\npreset = \"drude-gold\"\nmin_ev = 0.125\nmax_ev = 1e4\npoints_per_decade = 20\n{XI}"
    );
    ok(&run(dir.path(), "epsilon", &cfg));
    let t = Csv::read(dir.path().join("out/eps_kk.csv"));
    let xi = t.col("xi_eV");
    let frac = t.col("cut_fraction");
    assert_eq!(xi[0], 0.1);
    assert!(frac[0] > 0.9, "cut fraction {}", frac[0]);
}

#[test]
fn pressure_ideal_metal_limit() {
    let dir = TempDir::new().unwrap();
    let cfg = "[casimir]\nseparations_nm = [1000]\ntemperature_k = 1\nideal_metal = true\n";
    ok(&run(dir.path(), "pressure", cfg));
    let p = Csv::read(dir.path().join("out/pressure.csv")).col("P_ideal_Pa")[0];
    let a: f64 = 1e-6;
    let exact = -std::f64::consts::PI.powi(2) * HBAR * C / (240.0 * a.powi(4));
    assert!(((p - exact) / exact).abs() < 0.01, "{p} vs {exact}");
}

#[test]
fn pressure_drop_cut_reduces_attraction() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{LORENTZ_GOLD}\n[casimir]\nseparations_nm = [100]\ntemperature_k = 300\ndrop_cut = true\n");
    ok(&run(dir.path(), "pressure", &cfg));
    let t = Csv::read(dir.path().join("out/pressure.csv"));
    let full = t.col("P_kk_drude_Pa")[0];
    let nocut = t.col("P_kk_drude_nocut_Pa")[0];
    assert!(full < nocut && nocut < 0.0);
    let deficit = t.col("pct_kk_drude_vs_kk_drude_nocut")[0];
    assert!(deficit > 15.0, "deficit {deficit}%");
}

#[test]
fn mc_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "{LORENTZ_GOLD}{XI}\n[[windows]]\nkind = \"sqrt\"\nb_ev = 1.0\n[noise]\ndelta_exp = 0.03\nn_resamples = 20\nseed = 11\n"
    );
    ok(&run(dir.path(), "mc", &cfg));
    let first = fs::read(dir.path().join("out/mc.csv")).unwrap();
    ok(&run(dir.path(), "mc", &cfg));
    let second = fs::read(dir.path().join("out/mc.csv")).unwrap();
    assert_eq!(first, second);
    let t = Csv::read(dir.path().join("out/mc.csv"));
    assert_eq!(t.rows.last().unwrap()[0], "clamped_k_draws");
    let delta = t.col("delta_eps_rel_percent_sqrt_b1");
    assert_eq!(delta.len(), 11 + 2);
    assert!(delta[..11].iter().all(|v| *v > 0.0 && *v < 3.0));
}

#[test]
fn fit_recovers_synthetic_plasma_frequency() {
    let dir = TempDir::new().unwrap();
    let cfg = "[input.synthetic]\npreset = \"drude-gold\"\nmin_ev = 0.125\nmax_ev = 10\npoints_per_decade = 40\n[fit]\nrange_min_ev = 0.3\nrange_max_ev = 0.8\n";
    ok(&run(dir.path(), "fit", cfg));
    let wp = Csv::read(dir.path().join("out/fit.csv")).col("omega_p_eV")[0];
    assert!((wp - 9.0).abs() < 0.09, "omega_p {wp}");
}

#[test]
fn fit_flags_inconsistent_files() {
    let dir = TempDir::new().unwrap();
    for (name, wp) in [("a", 9.0), ("b", 7.7)] {
        let cfg = format!(
            "[drude]\nomega_p_ev = {wp}\ngamma_ev = 0.035\n[input.synthetic]\npreset = \"custom\"\nmin_ev = 0.125\nmax_ev = 10\npoints_per_decade = 40\n[synth]\nfile = \"{name}.csv\"\n"
        );
        ok(&run(dir.path(), "synth", &cfg));
    }
    let cfg = "[drude]\nomega_p_ev = 9\ngamma_ev = 0.035\n[[input.files]]\npath = \"out/a.csv\"\n[[input.files]]\npath = \"out/b.csv\"\n[fit]\nprobes_ev = [0.5]\n";
    ok(&run(dir.path(), "fit", cfg));
    let flags = Csv::read(dir.path().join("out/fit_flags.csv"));
    assert_eq!(flags.rows.len(), 1);
    assert_eq!(flags.rows[0][..2], ["0".to_string(), "1".to_string()]);
}

#[test]
fn bad_toml_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(dir.path(), "epsilon", "[xi_grid\n").status.code(), Some(2));
    assert_eq!(run(dir.path(), "epsilon", "[unknown]\nx = 1\n").status.code(), Some(2));
}

#[test]
fn missing_input_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("[drude]\nomega_p_ev = 9\ngamma_ev = 0.035\n[[input.files]]\npath = \"nope.csv\"\n{XI}");
    assert_eq!(run(dir.path(), "epsilon", &cfg).status.code(), Some(3));
}

#[test]
fn malformed_input_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.csv"), "omega_eV,n,k\n1.0,0.5\n").unwrap();
    let cfg = format!("[drude]\nomega_p_ev = 9\ngamma_ev = 0.035\n[[input.files]]\npath = \"bad.csv\"\n{XI}");
    assert_eq!(run(dir.path(), "epsilon", &cfg).status.code(), Some(3));
}

#[test]
fn window_zero_on_grid_is_rejected_before_computing() {
    let dir = TempDir::new().unwrap();
    // f(i xi) = 0 at xi = sqrt(3) Re(w) + Im(w) = 1.
    let cfg = format!(
        "{LORENTZ_GOLD}\n[xi_grid]\nmin_ev = 0.1\nmax_ev = 10\npoints_per_decade = 1\n[[windows]]\nkind = \"old\"\np = 1\nq = 1\nw_re_ev = 1.1547005383792515\nw_im_ev = -1.0\n"
    );
    let o = run(dir.path(), "epsilon", &cfg);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("out/eps_kk.csv").exists());
}

#[test]
fn b_above_data_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{LORENTZ_GOLD}{XI}\n[[windows]]\nkind = \"sqrt\"\nb_ev = 2e4\n");
    assert_eq!(run(dir.path(), "epsilon", &cfg).status.code(), Some(2));
}

#[test]
fn header_carries_config_hash() {
    let dir = TempDir::new().unwrap();
    ok(&run(dir.path(), "synth", LORENTZ_GOLD));
    let text = fs::read_to_string(dir.path().join("out/drude-lorentz-gold.csv")).unwrap();
    let hash_line = text.lines().find(|l| l.starts_with("# config_sha256: ")).unwrap();
    assert_eq!(hash_line.len(), "# config_sha256: ".len() + 64);
    assert!(!text.contains("timestamp"));
}
