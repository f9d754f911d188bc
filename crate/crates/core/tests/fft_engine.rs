mod common;

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use srm_core::fft_engine::*;
use srm_core::spectral_models::*;
use srm_core::srm_simulators::*;
use srm_core::C64;

#[test]
fn fft_matches_direct_on_presets() {
    for m in 1..=3 {
        let pre = common::preset(m);
        let second = SynthesisPlan::second_order(&pre.s).unwrap();
        for plan in [&pre.plan, &second] {
            for seed in 0..6 {
                let phases = draw_phases(seed, seed as u32, &pre.grid);
                let direct = evaluate_direct(plan, &phases, &pre.times).unwrap();
                let fft = simulate_fft(plan, &phases, &pre.times).unwrap();
                assert!(direct.max_abs_difference(&fft) < 1e-8 * direct.rms(), "m={m} seed={seed}");
            }
        }
    }
}

#[test]
fn fft_matches_direct_on_wind_samples() {
    let plan = common::wind_plan();
    let times = SamplingPlan::fundamental(plan.grid());
    for seed in [1, 77] {
        let phases = draw_phases(seed, 0, plan.grid());
        let fft = simulate_fft(&plan, &phases, &times).unwrap();
        let period = times.period_samples() as u64;
        let idx: Vec<u64> = (0..200).chain((0..400).map(|r| (r * 149 + 13) % period)).collect();
        let direct = evaluate_direct_at(&plan, &phases, &times, &idx).unwrap();
        let rms = fft.rms();
        for (row, series) in direct.iter().zip(&fft.values) {
            for (s, &r) in idx.iter().enumerate() {
                assert!((row[s] - series[r as usize]).abs() < 1e-8 * rms);
            }
        }
    }
}

#[test]
fn term_counts_are_conserved_on_wind() {
    let plan = common::wind_plan();
    let grid = plan.grid();
    let channels = assemble_coefficients(&plan, &draw_phases(0, 0, grid), 2 * grid.bins()).unwrap();
    let (m, n) = (grid.variates(), grid.bins());
    let linear = m * n;
    let mut interactions = 0;
    for i in 1..n {
        for j in 1..=i {
            if i + j < n {
                interactions += if i == j { m * (m + 1) / 2 } else { m * m };
            }
        }
    }
    assert_eq!(plan.linear_count(), linear);
    assert_eq!(plan.interaction_count(), interactions);
    assert_eq!(channels.iter().map(|c| c.term_count).sum::<usize>(), linear + interactions);
    for c in &channels {
        assert!(c.max_index < 2 * n, "aliasing guard");
    }
}

#[test]
fn two_variate_channel_offsets() {
    let n = 16;
    let grid = FrequencyGrid::new(2, n, 0.1, OffsetRule::MultivariateDoubleIndex).unwrap();
    let (s, b) = LineTargets {
        spectrum_bins: (1..n).collect(),
        level: 1.0,
        correlation: 0.3,
        phase_step: 0.2,
        channel_tilt: 0.0,
        bispectrum_bins: vec![(3, 2), (4, 4)],
        bispectrum_level: 0.1,
        excluded_channel_sums: vec![],
    }
    .build(&grid)
    .unwrap();
    let plan = SynthesisPlan::third_order(&s, &b).unwrap();
    let channels = assemble_coefficients(&plan, &draw_phases(4, 0, &grid), 2 * n).unwrap();
    let offsets: Vec<Ratio> = channels.iter().map(|c| c.offset).collect();
    let nn = n as u64;
    let expect = [
        Ratio::new(1, 4) + Ratio::new(1, nn),
        Ratio::new(2, 4) + Ratio::new(1, nn),
        Ratio::new(2, 4) + Ratio::new(2, nn),
        Ratio::new(3, 4) + Ratio::new(2, nn),
        Ratio::new(4, 4) + Ratio::new(2, nn),
    ];
    assert_eq!(offsets, expect);
    assert_eq!(channels[3].sources, vec![ChannelSource::Interaction { p: 0, q: 1 }, ChannelSource::Interaction { p: 1, q: 0 }]);
}

#[test]
fn single_linear_channel_for_gaussian_scalar() {
    let grid = FrequencyGrid::new(1, 8, 0.3, OffsetRule::UnivariateErgodic).unwrap();
    let s = CrossSpectrum::from_fn(grid.clone(), |_, k| DMatrix::from_element(1, 1, C64::new(1.0 + k as f64, 0.0))).unwrap();
    let plan = SynthesisPlan::second_order(&s).unwrap();
    let phases = draw_phases(9, 0, &grid);
    let channels = assemble_coefficients(&plan, &phases, 16).unwrap();
    assert_eq!(channels.len(), 1);
    for k in 0..8 {
        let expect = C64::from_polar(2.0 * ((1.0 + k as f64) * 0.3).sqrt(), phases.get(0, k));
        assert!((channels[0].coefficients[0][k] - expect).norm() < 1e-14);
    }
    assert!(channels[0].coefficients[0][8..].iter().all(|c| c.norm() == 0.0));
}

fn best_of<T>(runs: usize, mut f: impl FnMut() -> T) -> Duration {
    (0..runs)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed()
        })
        .min()
        .unwrap()
}

#[test]
fn fft_cost_grows_slower_than_direct() {
    let ratio = |n: usize| {
        let grid = FrequencyGrid::new(2, n, 1.0 / n as f64, OffsetRule::MultivariateDoubleIndex).unwrap();
        let s = CrossSpectrum::from_fn(grid.clone(), |_, k| {
            DMatrix::from_fn(2, 2, |a, b| C64::new(if a == b { 1.0 } else { 0.4 }, 0.0) / (1.0 + k as f64))
        })
        .unwrap();
        let plan = SynthesisPlan::second_order(&s).unwrap();
        let times = SamplingPlan::fundamental(&grid);
        let phases = draw_phases(1, 0, &grid);
        let fft = best_of(3, || simulate_fft(&plan, &phases, &times).unwrap());
        let direct = best_of(3, || evaluate_direct(&plan, &phases, &times).unwrap());
        (fft, direct)
    };
    let (f1, d1) = ratio(64);
    let (f2, d2) = ratio(128);
    let fft_growth = f2.as_secs_f64() / f1.as_secs_f64();
    let direct_growth = d2.as_secs_f64() / d1.as_secs_f64();
    println!("growth from N=64 to N=128: fft {fft_growth:.2}, direct {direct_growth:.2}");
    assert!(fft_growth < direct_growth);
}
