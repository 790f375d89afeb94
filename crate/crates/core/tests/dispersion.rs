use kkwin::data::make_log_grid;
use kkwin::ingest::SyntheticPreset;
use kkwin::{
    g_diagnostic, kk_standard, kk_windowed, Complex64, DrudeParams, Error, Frequency, OpticalDataset,
    QuadratureConfig, WindowSpec,
};
use proptest::prelude::*;

fn ev(x: f64) -> Frequency {
    Frequency::ev(x)
}

fn gold(lo: f64, hi: f64, ppd: u32) -> OpticalDataset {
    let grid = make_log_grid(ev(lo), ev(hi), ppd).unwrap();
    SyntheticPreset::DrudeLorentzGold.dataset(&grid).unwrap()
}

fn xi_grid() -> Vec<Frequency> {
    make_log_grid(ev(0.1), ev(10.0), 8).unwrap()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn eps_decreases_along_the_imaginary_axis() {
    let data = gold(0.125, 1e4, 20);
    let quad = QuadratureConfig::default();
    let drude = DrudeParams::gold();
    let xi = xi_grid();
    let standard = kk_standard(&data, &drude, &xi, &quad).unwrap();
    assert!(strictly_decreasing(&standard.eps_total));
    for b in [0.5, 1.0, 2.0] {
        let r = kk_windowed(&data, &drude, &WindowSpec::sqrt(b), &xi, &quad).unwrap();
        assert!(strictly_decreasing(&r.eps_total), "b = {b}");
    }
}

#[test]
fn sqrt_kernel_stays_positive_below_b() {
    let data = gold(0.125, 1e4, 20);
    let quad = QuadratureConfig::default();
    let r = kk_windowed(&data, &DrudeParams::gold(), &WindowSpec::sqrt(1.0), &xi_grid(), &quad).unwrap();
    assert!(r.status.iter().all(|s| s.negative_kernel_nodes == 0 && !s.negative_eps));
    for xi in [0.1, 1.0, 10.0] {
        let g = g_diagnostic(&data, &WindowSpec::sqrt(1.0), ev(xi), &quad).unwrap();
        assert!(g.iter().all(|(_, v)| *v >= 0.0), "xi = {xi}");
    }
}

#[test]
fn windows_agree_on_wide_data() {
    let data = gold(0.01, 1e4, 20);
    let quad = QuadratureConfig::default();
    let drude = DrudeParams::gold();
    let xi = xi_grid();
    let a = kk_windowed(&data, &drude, &WindowSpec::sqrt(1.0), &xi, &quad).unwrap();
    let b = kk_windowed(&data, &drude, &WindowSpec::sqrt(1.5), &xi, &quad).unwrap();
    for (x, y) in a.eps_total.iter().zip(&b.eps_total) {
        assert!(((x - y) / y).abs() < 1e-3, "{x} vs {y}");
    }
}

#[test]
fn zero_b_reproduces_standard_relation() {
    let data = gold(0.125, 1e4, 20);
    let quad = QuadratureConfig::default();
    let drude = DrudeParams::gold();
    let xi = xi_grid();
    let a = kk_standard(&data, &drude, &xi, &quad).unwrap();
    let b = kk_windowed(&data, &drude, &WindowSpec::sqrt(0.0), &xi, &quad).unwrap();
    for (x, y) in a.eps_total.iter().zip(&b.eps_total) {
        assert!(((x - y) / y).abs() <= 10.0 * quad.rel_tol);
    }
}

#[test]
fn old_window_zero_on_grid_is_refused() {
    let data = gold(0.125, 1e4, 20);
    let quad = QuadratureConfig::default();
    // f(i xi) vanishes at xi = sqrt(3) Re(w) + Im(w) = 1
    let w = WindowSpec::old_rational(1, 1, Complex64::new(2.0 / 3f64.sqrt(), -1.0));
    let xi = [ev(0.5), ev(1.0), ev(2.0)];
    assert!(matches!(
        kk_windowed(&data, &DrudeParams::gold(), &w, &xi, &quad),
        Err(Error::WindowZero { .. })
    ));
    let away = [ev(0.5), ev(2.0)];
    assert!(kk_windowed(&data, &DrudeParams::gold(), &w, &away, &quad).is_ok());
}

fn windows() -> Vec<WindowSpec> {
    vec![
        WindowSpec::Identity,
        WindowSpec::sqrt(0.0),
        WindowSpec::sqrt(0.7),
        WindowSpec::sqrt(3.0),
        WindowSpec::old_rational(1, 2, Complex64::new(1.0, -1.5)),
        WindowSpec::old_rational(2, 4, Complex64::new(0.0, -2.0)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn windows_are_real_on_the_imaginary_axis(xi in 1e-3f64..1e3) {
        for w in windows() {
            let f = w.eval_complex(Complex64::new(0.0, xi));
            prop_assert!(f.im.abs() <= 1e-12 * f.norm().max(1e-300), "{} at {xi}: {f}", w.label());
        }
    }
}
