use kkwin::data::make_log_grid;
use kkwin::ingest::SyntheticPreset;
use kkwin::uncertainty::{mc_propagate, mc_uncertainty, resample_dataset, resample_dataset_counted, NoiseSpec};
use kkwin::{DrudeParams, Frequency, OpticalDataset, OpticalSample, QuadratureConfig, WindowSpec};

fn ev(x: f64) -> Frequency {
    Frequency::ev(x)
}

fn gold() -> OpticalDataset {
    let grid = make_log_grid(ev(0.125), ev(1e4), 20).unwrap();
    SyntheticPreset::DrudeLorentzGold.dataset(&grid).unwrap()
}

#[test]
fn one_node_stub_recovers_the_input_spread() {
    let data = gold();
    let node = 30;
    let n0 = data.samples()[node].n;
    let k0 = data.samples()[node].k;
    let noise = NoiseSpec::new(0.03, 10_000, 5).unwrap();
    let s = mc_propagate(&data, &noise, |d| Ok(vec![d.samples()[node].n, d.samples()[node].k])).unwrap();
    assert!((s.sigma[0] / (0.03 * n0) - 1.0).abs() < 0.05, "{}", s.sigma[0] / (0.03 * n0));
    assert!((s.sigma[1] / (0.03 * k0) - 1.0).abs() < 0.05, "{}", s.sigma[1] / (0.03 * k0));
}

#[test]
fn resample_mean_converges_to_the_data() {
    let data = gold();
    let noise = NoiseSpec::new(0.05, 4000, 9).unwrap();
    let m = noise.n_resamples as f64;
    let mut mean_k = vec![0.0; data.len()];
    for alpha in 0..noise.n_resamples as u64 {
        for (acc, s) in mean_k.iter_mut().zip(resample_dataset(&data, &noise, alpha).samples()) {
            *acc += s.k / m;
        }
    }
    for (mk, s) in mean_k.iter().zip(data.samples()) {
        // standard error of the mean is 0.05 / sqrt(4000) = 7.9e-4 relative
        assert!((mk / s.k - 1.0).abs() < 4e-3);
    }
}

#[test]
fn spread_scales_with_input_noise() {
    let data = gold();
    let quad = QuadratureConfig::default();
    let xi = [ev(0.3), ev(1.0), ev(3.0)];
    let w = WindowSpec::sqrt(1.0);
    let at = |delta: f64| {
        let noise = NoiseSpec::new(delta, 200, 3).unwrap();
        mc_uncertainty(&data, &DrudeParams::gold(), &w, &xi, &noise, &quad)
            .unwrap()
            .delta_eps_rel
    };
    let (small, mid, large) = (at(0.01), at(0.02), at(0.04));
    for i in 0..xi.len() {
        assert!(small[i] < mid[i] && mid[i] < large[i]);
        let ratio = small[i] / mid[i];
        assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn clamped_k_draws_are_counted() {
    let samples = (1..=6)
        .map(|i| OpticalSample::new(ev(i as f64), 1.5, 1e-3).unwrap())
        .collect();
    let data = OpticalDataset::new(samples, "glass", "").unwrap();
    let noise = NoiseSpec::new(0.4, 2, 1).unwrap();
    let total: usize = (0..50).map(|a| resample_dataset_counted(&data, &noise, a).1).sum();
    // P(k < 0) is P(z < -2.5) = 0.6% per draw at delta 0.4, so a few of 300
    assert!(total < 20);
    let mut strong = NoiseSpec::new(0.49, 2, 1).unwrap();
    strong.seed = 2;
    let zeros: usize = (0..200)
        .map(|a| resample_dataset(&data, &strong, a).samples().iter().filter(|s| s.k == 0.0).count())
        .sum();
    let counted: usize = (0..200).map(|a| resample_dataset_counted(&data, &strong, a).1).sum();
    assert_eq!(zeros, counted);
}
