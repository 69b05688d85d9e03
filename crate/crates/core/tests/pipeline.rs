use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sram_ser::io::SimConfig;
use sram_ser::pipeline::{at_supply, simulate_parts, to_datasets};
use sram_ser::protocols::{
    run_hold_sweep, run_read_sweep, run_ser_test, run_wlvm_sweep, word_line_voltage_margin, Pattern, SerTest,
    DEFAULT_DELTA_V,
};
use sram_ser::radiation::{generate_events, AlphaSource};
use sram_ser::sram_model::{
    ArrayGeometry, ArraySampler, CellType, CellTypeName, MemoryArray, SeuRateLaw, VariationModel,
};
use sram_ser::stats::{calibrate_parts, CalibrationOptions};
use sram_ser::Millivolts;

fn block(model: &VariationModel, t: CellTypeName, rows: usize, cols: usize, law: SeuRateLaw, seed: u64) -> MemoryArray {
    ArraySampler::new(model)
        .geometry(ArrayGeometry::new(rows, cols).unwrap())
        .law(law)
        .sample(CellType::bundled(t), 0.0, seed)
        .unwrap()
}

#[test]
fn sampled_means_converge() {
    let model = VariationModel::bundled();
    let tv = *model.get(CellTypeName::SM).unwrap();
    let n = 4096.0f64;
    let mut inside = 0;
    for seed in 0..200 {
        let a = block(&model, CellTypeName::SM, 64, 64, SeuRateLaw::default(), seed);
        let mean = a.mean_vwl_min();
        // integer rounding shifts the mean by at most half a millivolt
        if (mean - tv.mu_vwlmin).abs() <= 4.0 * tv.sigma_vwlmin / n.sqrt() + 0.5 {
            inside += 1;
        }
        let top = a.v_dd_nominal();
        assert!(a.cells().iter().all(|c| c.v_wl_min > Millivolts::ZERO && c.v_wl_min <= top));
    }
    assert!(inside >= 198, "{inside}/200");
}

/// Kolmogorov-Smirnov distance against Exp(rate).
fn ks_exponential(samples: &mut [f64], rate: f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-rate * x).exp();
            (cdf - i as f64 / n).abs().max((i as f64 + 1.0) / n - cdf)
        })
        .fold(0.0, f64::max)
}

#[test]
fn single_cell_inter_arrivals_are_exponential() {
    let model = VariationModel::bundled();
    // 1e6 µSEU/(bit·s) is one event per second
    let a = block(&model, CellTypeName::LS, 1, 1, SeuRateLaw::Uniform { rate: 1e6 }, 0);
    let source = AlphaSource::nominal(1e6).unwrap();
    let mut pass = 0;
    for seed in 0..100 {
        let events = generate_events(&a, &source, 400.0, seed).unwrap();
        let mut gaps: Vec<f64> = events.windows(2).map(|w| w[1].time - w[0].time).collect();
        let d = ks_exponential(&mut gaps, 1.0);
        // alpha = 0.01
        if d < 1.628 / (gaps.len() as f64).sqrt() {
            pass += 1;
        }
    }
    assert!(pass >= 95, "{pass}/100");
}

#[test]
fn window_counts_are_poisson_dispersed() {
    let model = VariationModel::bundled();
    let a = block(&model, CellTypeName::SS, 64, 64, SeuRateLaw::Uniform { rate: 1.5 }, 1);
    let source = AlphaSource::nominal(1.5).unwrap();
    let k = 400usize;
    let window = 600.0;
    let mut inside = 0;
    for seed in 0..20 {
        let events = generate_events(&a, &source, k as f64 * window, seed).unwrap();
        let mut counts = vec![0f64; k];
        for e in &events {
            counts[((e.time / window) as usize).min(k - 1)] += 1.0;
        }
        let mean = counts.iter().sum::<f64>() / k as f64;
        let stat: f64 = counts.iter().map(|c| (c - mean).powi(2) / mean).sum();
        let df = (k - 1) as f64;
        if (stat - df).abs() <= 3.5 * (2.0 * df).sqrt() {
            inside += 1;
        }
    }
    assert!(inside >= 19, "{inside}/20");
}

#[test]
fn geometric_factor_scales_counts_linearly() {
    let model = VariationModel::bundled();
    let rate = 1.0;
    let a = block(&model, CellTypeName::MM, 32, 32, SeuRateLaw::Uniform { rate }, 2);
    let duration = 36_000.0;
    let mean_count = |g: f64| {
        let source = AlphaSource::new(rate, g).unwrap();
        let total: usize = (0..200)
            .map(|s| generate_events(&a, &source, duration, s).unwrap().len())
            .sum();
        total as f64 / 200.0
    };
    for g in [0.9, 1.0, 1.1] {
        let expected = rate * g * 1e-6 * 1024.0 * duration;
        let got = mean_count(g);
        let se = (expected / 200.0).sqrt();
        assert!((got - expected).abs() < 4.0 * se, "g = {g}: {got} vs {expected}");
    }
}

#[test]
fn cumulative_counts_grow_linearly() {
    let model = VariationModel::bundled();
    let mut a = block(&model, CellTypeName::SS, 64, 64, SeuRateLaw::Uniform { rate: 1.47 }, 3);
    let source = AlphaSource::nominal(1.47).unwrap();
    let m = run_ser_test(&mut a, &source, 1800.0, 432_000.0, 11).unwrap();
    let cum = m.cumulative();
    let t: Vec<f64> = (1..=cum.len()).map(|k| k as f64 * m.ts).collect();
    let n = t.len() as f64;
    let tbar = t.iter().sum::<f64>() / n;
    let cbar = cum.iter().map(|&c| c as f64).sum::<f64>() / n;
    let stt: f64 = t.iter().map(|x| (x - tbar).powi(2)).sum();
    let stc: f64 = t.iter().zip(&cum).map(|(x, &c)| (x - tbar) * (c as f64 - cbar)).sum();
    let slope = stc / stt;
    let rate = m.n_tot as f64 / m.t_exp;
    // least-squares slope of a cumulative Poisson walk: var ~ 6/5 * rate / t_exp
    let sigma = (1.2 * rate / m.t_exp).sqrt();
    assert!((slope - rate).abs() < 4.0 * sigma, "{slope} vs {rate}");
}

#[test]
fn ser_is_invariant_to_background_pattern() {
    let model = VariationModel::bundled();
    let rate = 1.2;
    let source = AlphaSource::nominal(rate).unwrap();
    for pattern in [Pattern::Zeros, Pattern::Ones, Pattern::Checkerboard] {
        let mut a = block(&model, CellTypeName::SM, 64, 64, SeuRateLaw::Uniform { rate }, 4);
        let m = SerTest::new(1800.0, 432_000.0)
            .unwrap()
            .with_pattern(pattern)
            .run(&mut a, &source, 99)
            .unwrap();
        let sigma = rate / (m.n_tot as f64).sqrt();
        assert!((m.ser - rate).abs() < 4.0 * sigma, "{pattern:?}: {}", m.ser);
    }
}

#[test]
fn sweep_mean_plus_margin_is_nominal() {
    let model = VariationModel::bundled();
    for (i, t) in CellTypeName::ALL.into_iter().enumerate() {
        let mut a = block(&model, t, 32, 32, SeuRateLaw::default(), 10 + i as u64);
        let r = run_wlvm_sweep(&mut a, DEFAULT_DELTA_V, Pattern::Checkerboard).unwrap();
        let v = a.v_dd_nominal().as_f64();
        assert_eq!(word_line_voltage_margin(v, r.mu).unwrap() + r.mu, v);
        assert_eq!(r.histogram.values().sum::<usize>(), a.len());
        let steps = r.steps();
        assert!(steps.windows(2).all(|w| w[0].cumulative_failures <= w[1].cumulative_failures));
    }
}

#[test]
fn control_sweeps_recover_their_distributions() {
    let model = VariationModel::bundled();
    for t in [CellTypeName::SS, CellTypeName::LS] {
        let tv = *model.get(t).unwrap();
        let mut a = block(&model, t, 64, 64, SeuRateLaw::default(), 20);
        let half = DEFAULT_DELTA_V.as_f64() / 2.0;

        let hold = run_hold_sweep(&mut a, DEFAULT_DELTA_V, Pattern::Zeros).unwrap();
        assert_eq!(hold.n_cells(), a.len());
        assert!((hold.mu - tv.mu_hold).abs() <= 3.0 * hold.se_mean + half + 1.0, "{t} hold {}", hold.mu);

        let read = run_read_sweep(&mut a, DEFAULT_DELTA_V, Pattern::Zeros).unwrap();
        assert_eq!(read.n_cells(), a.len());
        assert!((read.mu - tv.mu_read).abs() <= 3.0 * read.se_mean + half + 1.0, "{t} read {}", read.mu);
    }
}

#[test]
fn control_quantities_do_not_track_ser() {
    // bundled hold/read distributions are identical across types, so their
    // means carry no information about the per-type SER
    let cfg = SimConfig { n_parts: 1, ..SimConfig::bundled() };
    let parts = simulate_parts(&cfg, 31, true).unwrap();
    let holds: Vec<f64> = parts[0].blocks.iter().map(|b| b.hold.as_ref().unwrap().mu).collect();
    let spread = holds.iter().cloned().fold(f64::MIN, f64::max) - holds.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 10.0, "{holds:?}");
}

#[test]
fn calibration_holds_across_supply_voltages() {
    for v in [1080, 1200, 1320] {
        let cfg = at_supply(&SimConfig::bundled(), Millivolts(v));
        let parts = simulate_parts(&cfg, 500 + v as u64, false).unwrap();
        let datasets = to_datasets(&parts);
        assert!(datasets.iter().all(|d| d.v_dd == Millivolts(v)));
        let fit = calibrate_parts(&datasets, &CalibrationOptions::default()).unwrap();
        assert!(fit.m > 0.0 && fit.r2 > 0.9, "{v} mV: m = {}, R^2 = {}", fit.m, fit.r2);
    }
}

#[test]
fn simulation_is_reproducible() {
    let cfg = SimConfig { n_parts: 2, ..SimConfig::bundled() };
    let a = to_datasets(&simulate_parts(&cfg, 42, false).unwrap());
    let b = to_datasets(&simulate_parts(&cfg, 42, false).unwrap());
    let c = to_datasets(&simulate_parts(&cfg, 43, false).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn hand_built_upsets_match_direct_bookkeeping() {
    let model = VariationModel::bundled();
    let mut a = block(&model, CellTypeName::SL, 16, 16, SeuRateLaw::default(), 5);
    let nominal = a.v_dd_nominal();
    for i in 0..a.len() {
        a.write_cell(i, false, nominal).unwrap();
    }
    let mut expected = vec![false; a.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let i = rng.random_range(0..a.len());
        a.flip_cell(i).unwrap();
        expected[i] ^= true;
    }
    assert_eq!(a.state(), &expected[..]);
}
