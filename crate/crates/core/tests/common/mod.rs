#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use srm_core::pure_spectrum::InteractionWeight;
use srm_core::spectral_models::{
    build_example_targets, CrossBispectrum, CrossSpectrum, FrequencyGrid, LineTargets, OffsetRule, PairIndex, Tensor3,
};
use srm_core::srm_simulators::{SamplingPlan, SynthesisPlan};
use srm_core::C64;

pub struct Preset {
    pub grid: FrequencyGrid,
    pub s: CrossSpectrum,
    pub b: CrossBispectrum,
    pub plan: SynthesisPlan,
    pub times: SamplingPlan,
}

pub fn preset(m: usize) -> Preset {
    let (grid, lines) = LineTargets::resonance_free(m).unwrap();
    let (s, b) = lines.build(&grid).unwrap();
    let plan = if m == 1 {
        SynthesisPlan::third_order_univariate(&s, &b).unwrap()
    } else {
        SynthesisPlan::third_order(&s, &b).unwrap()
    };
    let times = SamplingPlan::fundamental(&grid);
    Preset { grid, s, b, plan, times }
}

pub fn wind_grid() -> FrequencyGrid {
    FrequencyGrid::new(3, 100, 0.02, OffsetRule::MultivariateDoubleIndex).unwrap()
}

pub fn wind_targets() -> (CrossSpectrum, CrossBispectrum) {
    build_example_targets(&wind_grid()).unwrap()
}

pub fn wind_plan() -> SynthesisPlan {
    let (s, b) = wind_targets();
    SynthesisPlan::third_order_with(&s, &b, InteractionWeight::DeltaOmegaSquared).unwrap()
}

pub fn scalar(v: f64) -> DMatrix<C64> {
    DMatrix::from_element(1, 1, C64::new(v, 0.0))
}

pub fn scalar_tensor(v: C64) -> Tensor3 {
    let mut t = Tensor3::zeros(1);
    t.set(0, 0, 0, v);
    t
}

/// Univariate targets from closures over bins; `b(i, j)` is queried for `i >= j`.
pub fn univariate(
    n: usize,
    dw: f64,
    s: impl Fn(usize) -> f64,
    b: impl Fn(usize, usize) -> C64,
) -> (CrossSpectrum, CrossBispectrum) {
    let grid = FrequencyGrid::new(1, n, dw, OffsetRule::UnivariateErgodic).unwrap();
    let spec = CrossSpectrum::from_fn(grid.clone(), |_, k| scalar(s(k))).unwrap();
    let mut map = BTreeMap::new();
    for i in 1..n {
        for j in 1..=i {
            let v = if i == j { C64::new(b(i, j).re, 0.0) } else { b(i, j) };
            if v.norm() == 0.0 {
                continue;
            }
            map.insert(PairIndex::new(0, i, 0, j), scalar_tensor(v));
            map.insert(PairIndex::new(0, j, 0, i), scalar_tensor(v.conj()));
        }
    }
    (spec, CrossBispectrum::sparse(grid, map).unwrap())
}

/// Straight transcription of the scalar recursion, summing over every `(i, j)`
/// with `i >= j >= 1` and `i + j = k`. Returns the pure spectrum or the first
/// bin that goes negative.
pub fn scalar_recursion_oracle(s: &[f64], b: impl Fn(usize, usize) -> f64, w: f64) -> Result<Vec<f64>, usize> {
    let n = s.len();
    let mut sp = vec![0.0; n];
    for k in 0..n {
        let mut sum = 0.0;
        for i in 1..k {
            let j = k - i;
            if j < 1 || j > i {
                continue;
            }
            let mag = b(i, j);
            if mag == 0.0 {
                continue;
            }
            sum += mag * mag / (sp[i] * sp[j]);
        }
        sp[k] = s[k] - w * sum;
        if sp[k] < 0.0 {
            return Err(k);
        }
    }
    Ok(sp)
}

pub fn rel_err(value: f64, target: f64, floor: f64) -> f64 {
    (value - target).abs() / target.abs().max(floor)
}
