mod common;

use proptest::prelude::*;
use srm_core::estimators::*;
use srm_core::fft_engine::simulate_fft;
use srm_core::pure_spectrum::{compute_pure_multivariate, InteractionWeight};
use srm_core::spectral_models::*;
use srm_core::srm_simulators::*;
use srm_core::C64;

/// Second moment of the term set written out from the factors and transfer vectors.
fn factor_oracle_second(pre: &common::Preset, a: usize, b: usize, tau: f64) -> f64 {
    let grid = &pre.grid;
    let p = compute_pure_multivariate(&pre.s, &pre.b).unwrap();
    let dw = grid.delta_omega();
    let mut total = 0.0;
    for c in 0..grid.channels() {
        for k in 0..grid.bins() {
            if let Some(h) = p.factor.at(c, k) {
                let w = grid.frequency(c, k);
                total += 2.0 * dw * (h[(a, c)].conj() * h[(b, c)] * C64::from_polar(1.0, -w * tau)).re;
            }
        }
    }
    for inter in &p.interactions {
        let pair = inter.pair;
        let w = grid.frequency(pair.p, pair.i) + grid.frequency(pair.q, pair.j);
        let (ta, tb) = (inter.transfer[a], inter.transfer[b]);
        total += 2.0 * dw * dw * (ta * tb.conj() * C64::from_polar(1.0, -w * tau)).re;
    }
    total
}

#[test]
fn second_order_targets_match_factor_oracle() {
    for m in 2..=3 {
        let pre = common::preset(m);
        for a in 0..m {
            for b in 0..m {
                for tau in [0.0, 1.3, 7.9] {
                    let got = discrete_target_second(&pre.plan, a, b, tau);
                    let expect = factor_oracle_second(&pre, a, b, tau);
                    assert!((got - expect).abs() < 1e-12 * expect.abs().max(1.0));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn univariate_third_moment_at_zero_lag(
        mags in prop::collection::vec(0.0f64..0.3, 100),
        biph in prop::collection::vec(-3.0f64..3.0, 100),
        squared in any::<bool>(),
    ) {
        let n = 10;
        let dw = 0.2;
        let bfun = |i: usize, j: usize| if i == j { C64::new(mags[i * n + j], 0.0) } else { C64::from_polar(mags[i * n + j], biph[i * n + j]) };
        let (s, b) = common::univariate(n, dw, |_| 1.0, bfun);
        let weight = if squared { InteractionWeight::DeltaOmegaSquared } else { InteractionWeight::DeltaOmega };
        let Ok(plan) = SynthesisPlan::third_order_with(&s, &b, weight) else { return Ok(()) };
        // Sum over ordered pairs: each unordered pair with i > j appears twice.
        let mut expect = 0.0;
        for i in 1..n {
            for j in 1..n {
                if i + j < n {
                    let v = if i >= j { bfun(i, j) } else { bfun(j, i).conj() };
                    expect += 6.0 * v.norm() * dw * dw * (-v.arg()).cos();
                }
            }
        }
        let got = discrete_target_third(&plan, 0, 0, 0, 0.0, 0.0);
        prop_assert!((got - expect).abs() < 1e-12 * expect.abs().max(1e-3));
    }

    #[test]
    fn third_moment_estimator_symmetry(seed in any::<u64>(), l1 in 0usize..200, l2 in 0usize..200) {
        let pre = common::preset(3);
        let rec = evaluate_direct(&pre.plan, &draw_phases(seed, 0, &pre.grid), &pre.times).unwrap();
        let rms3 = rec.rms().powi(3);
        for (a, b, c) in [(0, 1, 2), (2, 2, 0), (1, 0, 1)] {
            let x = temporal_third_moment(&rec, a, b, c, l1, l2).unwrap().value;
            let y = temporal_third_moment(&rec, a, c, b, l2, l1).unwrap().value;
            prop_assert!((x - y).abs() < 1e-10 * rms3);
        }
    }
}

#[test]
fn single_entry_target_is_one_term() {
    let (dw, b) = (0.3, 0.7);
    for (i, j, mult) in [(2usize, 2usize, 6.0), (3, 1, 12.0)] {
        let (s, bs) = common::univariate(8, dw, |_| 1.0, |x, y| C64::new(if (x, y) == (i, j) { b } else { 0.0 }, 0.0));
        let plan = SynthesisPlan::third_order_univariate(&s, &bs).unwrap();
        let got = discrete_target_third(&plan, 0, 0, 0, 0.0, 0.0);
        assert!((got - mult * b * dw * dw).abs() < 1e-14, "({i},{j}): {got}");
    }
}

#[test]
fn pure_cosine_has_no_third_moment() {
    let grid = FrequencyGrid::new(1, 8, 0.5, OffsetRule::UnivariateErgodic).unwrap();
    let s = CrossSpectrum::from_fn(grid.clone(), |_, k| common::scalar(if k == 2 { 3.0 } else { 0.0 })).unwrap();
    let times = SamplingPlan::fundamental(&grid);
    let rec = simulate_2nd_order_mv(&s, &draw_phases(1, 0, &grid), &times).unwrap();
    let rms = rec.rms();
    assert!(temporal_mean(&rec, 0).unwrap().value.abs() < 1e-12 * rms);
    for (l1, l2) in [(0, 0), (3, 9), (40, 2)] {
        assert!(temporal_third_moment(&rec, 0, 0, 0, l1, l2).unwrap().value.abs() < 1e-12 * rms.powi(3));
    }
}

#[test]
fn standard_error_shrinks_with_realizations() {
    let pre = common::preset(2);
    let partial = SamplingPlan::new(&pre.grid, 32, 1).unwrap();
    let labels: Vec<MomentLabel> = ["f1^2", "f1f2", "f2^2", "f1^3"].iter().map(|s| s.parse().unwrap()).collect();
    let mut previous: Option<Vec<f64>> = None;
    for r in [10u32, 40, 160] {
        let records: Vec<SampleRecord> =
            (0..r).map(|i| evaluate_direct(&pre.plan, &draw_phases(99, i, &pre.grid), &partial).unwrap()).collect();
        let se: Vec<f64> = ensemble_statistics(&records, &labels).unwrap().iter().map(|s| s.standard_error).collect();
        if let Some(prev) = &previous {
            for (now, before) in se.iter().zip(prev) {
                assert!(now < before, "{se:?} vs {prev:?}");
            }
        }
        previous = Some(se);
    }
}

fn third_moments(grid: &FrequencyGrid, realizations: u32) -> Vec<EnsembleStatistic> {
    let (s, _) = build_example_targets(grid).unwrap();
    let plan = SynthesisPlan::second_order(&s).unwrap();
    let times = SamplingPlan::fundamental(grid);
    let records: Vec<SampleRecord> =
        (0..realizations).map(|r| simulate_fft(&plan, &draw_phases(7, r, grid), &times).unwrap()).collect();
    let labels: Vec<MomentLabel> = ["f1^3", "f2^3", "f3^3"].iter().map(|s| s.parse().unwrap()).collect();
    ensemble_statistics(&records, &labels).unwrap()
}

#[test]
fn gaussian_baseline_has_small_third_moments() {
    for stat in third_moments(&common::wind_grid(), 200) {
        assert!(stat.mean.abs() < 0.1, "{}: {}", stat.label, stat.mean);
    }
    // Classic offsets leave frequency triads, so single records carry
    // phase-dependent third moments that only average out across the ensemble.
    let classic = FrequencyGrid::new(3, 100, 0.02, OffsetRule::SecondOrderClassic).unwrap();
    for stat in third_moments(&classic, 200) {
        println!("classic {}: {:.4} (se {:.4})", stat.label, stat.mean, stat.standard_error);
        assert!(stat.mean.abs() < 4.0 * stat.standard_error);
    }
}

#[test]
fn ensemble_report_rows_follow_tolerances() {
    let pre = common::preset(2);
    let records: Vec<SampleRecord> =
        (0..20).map(|i| evaluate_direct(&pre.plan, &draw_phases(5, i, &pre.grid), &pre.times).unwrap()).collect();
    let specs: Vec<MomentSpec> = ["f1", "f2", "f1f2", "f2^2", "f1f2^2"]
        .iter()
        .map(|s| {
            let label: MomentLabel = s.parse().unwrap();
            MomentSpec {
                target: discrete_target(&pre.plan, &label),
                label,
                tolerance: Tolerance::Either { relative: 1e-8, absolute: 1e-10 },
                informational: false,
            }
        })
        .collect();
    let report = ensemble_moments(&records, &specs).unwrap();
    assert_eq!(report.rows.len(), 5);
    assert!(report.pass(), "{}", report.to_text());
    for row in &report.rows {
        assert_eq!(row.pass, row.error <= row.tolerance);
    }
    assert_eq!(report.metadata.realizations, 20);
}

#[test]
fn wind_report_separates_resonant_rows() {
    let plan = common::wind_plan();
    let times = SamplingPlan::fundamental(plan.grid());
    let phases = draw_phases(31, 0, plan.grid());
    let rec = simulate_fft(&plan, &phases, &times).unwrap();
    let checks = ErgodicChecks { lag_pairs: vec![(0, 0)], ..ErgodicChecks::default() };
    let (report, res) = ergodic_report(&plan, &phases, &times, &rec, &checks).unwrap();
    assert!(res.second_order > 0 && res.third_order > 0);
    assert!(report.pass(), "{}", report.to_text());
    assert!(report.rows.iter().any(|r| r.informational));
    assert!(report.rows.iter().filter(|r| r.label.ends_with("phase-resolved")).count() == 27);
}
