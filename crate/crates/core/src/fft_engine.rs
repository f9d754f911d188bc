//! FFT synthesis of the third-order sum.
//!
//! Terms are grouped by their fractional frequency offset. Within a group the
//! frequencies are integer multiples of `delta_omega`, so one inverse FFT of
//! length `block_len` per group yields every sample of a block; the offset
//! enters as an exact per-sample phase rotation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectral_models::Ratio;
use crate::srm_simulators::{ComponentKind, Method, PhaseSet, SampleRecord, SamplingPlan, SynthesisPlan};
use crate::C64;

/// Where the terms of a channel come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ChannelSource {
    Linear { channel: usize },
    Interaction { p: usize, q: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OffsetChannelCoefficients {
    /// Offset in units of `delta_omega`. May exceed one for interactions.
    pub offset: Ratio,
    /// Offset in units of `delta_omega / period_blocks`.
    pub offset_index: u64,
    /// `coefficients[a][k]`, zero padded to the block length.
    pub coefficients: Vec<Vec<C64>>,
    pub sources: Vec<ChannelSource>,
    pub term_count: usize,
    pub max_index: usize,
}

pub fn assemble_coefficients(
    plan: &SynthesisPlan,
    phases: &PhaseSet,
    block_len: usize,
) -> Result<Vec<OffsetChannelCoefficients>> {
    let grid = plan.grid();
    if phases.grid() != grid {
        return Err(Error::Dimension("phase set was drawn for a different grid".into()));
    }
    let q = grid.period_blocks();
    let m = grid.variates();
    let mut channels: BTreeMap<u64, OffsetChannelCoefficients> = BTreeMap::new();
    for c in plan.components() {
        let (offset_index, bin) = c.channel_slot(grid);
        if bin >= block_len {
            return Err(Error::CoefficientOverflow { index: bin, block_len });
        }
        let source = match c.kind {
            ComponentKind::Linear { channel, .. } => ChannelSource::Linear { channel },
            ComponentKind::Interaction(p) => ChannelSource::Interaction { p: p.p, q: p.q },
        };
        let entry = channels.entry(offset_index).or_insert_with(|| OffsetChannelCoefficients {
            offset: Ratio::new(offset_index, q),
            offset_index,
            coefficients: vec![vec![C64::new(0.0, 0.0); block_len]; m],
            sources: Vec::new(),
            term_count: 0,
            max_index: 0,
        });
        let rot = C64::from_polar(1.0, c.signature.evaluate(phases.values()));
        for (a, z) in c.amplitude.iter().enumerate() {
            entry.coefficients[a][bin] += z * rot;
        }
        if !entry.sources.contains(&source) {
            entry.sources.push(source);
        }
        entry.term_count += 1;
        entry.max_index = entry.max_index.max(bin);
    }
    let mut out: Vec<_> = channels.into_values().collect();
    for ch in &mut out {
        ch.sources.sort();
    }
    Ok(out)
}

/// Inverse transform of every channel, continued over the plan's blocks.
pub fn synthesize_fft(
    channels: &[OffsetChannelCoefficients],
    plan: &SynthesisPlan,
    phases: &PhaseSet,
    times: &SamplingPlan,
) -> Result<SampleRecord> {
    let m = plan.grid().variates();
    let block_len = times.block_len();
    let samples = times.samples();
    let period = times.period_samples() as u64;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(block_len);
    let table: Vec<C64> = (0..period)
        .map(|r| C64::from_polar(1.0, std::f64::consts::TAU * r as f64 / period as f64))
        .collect();
    // Each channel contributes independently; summation over channels is in offset order.
    let blocks: Vec<Vec<Vec<C64>>> = channels
        .par_iter()
        .map(|ch| {
            ch.coefficients
                .iter()
                .map(|c| {
                    if c.len() != block_len {
                        return Err(Error::Dimension(format!(
                            "channel has {} coefficients, block length is {block_len}",
                            c.len()
                        )));
                    }
                    let mut buf = c.clone();
                    fft.process(&mut buf);
                    Ok(buf)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![vec![0.0; samples]; m];
    for (ch, g) in channels.iter().zip(&blocks) {
        let step = ch.offset_index % period;
        let mut idx = 0u64;
        for r in 0..samples {
            let e = table[idx as usize];
            let local = r % block_len;
            for (series, ga) in values.iter_mut().zip(g) {
                let z = ga[local];
                series[r] += z.re * e.re - z.im * e.im;
            }
            idx += step;
            if idx >= period {
                idx -= period;
            }
        }
    }
    Ok(SampleRecord {
        values,
        delta_t: times.delta_t(),
        method: Method::ThirdOrderMultivariateFft,
        seed: phases.seed(),
        realization: phases.realization(),
        period_samples: Some(times.period_samples()),
    })
}

/// Assembles and synthesizes in one call.
pub fn simulate_fft(plan: &SynthesisPlan, phases: &PhaseSet, times: &SamplingPlan) -> Result<SampleRecord> {
    let channels = assemble_coefficients(plan, phases, times.block_len())?;
    let mut rec = synthesize_fft(&channels, plan, phases, times)?;
    if plan.method() == Method::SecondOrder {
        rec.method = Method::SecondOrder;
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_models::{CrossBispectrum, CrossSpectrum, FrequencyGrid, OffsetRule, WindExampleModel};
    use crate::srm_simulators::{draw_phases, evaluate_direct};
    use nalgebra::DMatrix;

    #[test]
    fn single_coefficient_is_a_cosine() {
        let grid = FrequencyGrid::new(1, 8, 0.25, OffsetRule::UnivariateErgodic).unwrap();
        let s = CrossSpectrum::from_fn(grid.clone(), |_, k| {
            DMatrix::from_element(1, 1, C64::new(if k == 3 { 2.0 } else { 0.0 }, 0.0))
        })
        .unwrap();
        let plan = SynthesisPlan::second_order(&s).unwrap();
        let phases = PhaseSet::from_values(grid.clone(), vec![0.4; 8]).unwrap();
        let times = SamplingPlan::fundamental(&grid);
        let rec = simulate_fft(&plan, &phases, &times).unwrap();
        let amp = 2.0 * (2.0f64 * 0.25).sqrt();
        let w = grid.frequency(0, 3);
        for (r, v) in rec.values[0].iter().enumerate() {
            let t = r as f64 * times.delta_t();
            assert!((v - amp * (w * t + 0.4).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_variate_channel_offsets() {
        let grid = FrequencyGrid::new(2, 8, 0.25, OffsetRule::MultivariateDoubleIndex).unwrap();
        let model = WindExampleModel::default();
        let s = CrossSpectrum::from_model(grid.clone(), |w| {
            let full = model.cross_spectrum(w);
            full.view((0, 0), (2, 2)).into_owned()
        })
        .unwrap();
        let b = CrossBispectrum::from_model(grid.clone(), |_, _| {
            crate::spectral_models::Tensor3::from_fn(2, |_, _, _| C64::new(0.2, 0.0))
        });
        let plan = SynthesisPlan::third_order(&s, &b).unwrap();
        let phases = draw_phases(3, 0, &grid);
        let ch = assemble_coefficients(&plan, &phases, 16).unwrap();
        let offsets: Vec<Ratio> = ch.iter().map(|c| c.offset).collect();
        let n = 8;
        let expect = vec![
            Ratio::new(1, 4) + Ratio::new(1, n),
            Ratio::new(2, 4) + Ratio::new(2, n),
            Ratio::new(2, 4) + Ratio::new(1, n),
            Ratio::new(3, 4) + Ratio::new(2, n),
            Ratio::new(4, 4) + Ratio::new(2, n),
        ];
        let mut sorted = expect.clone();
        sorted.sort_by(|a, b| a.to_f64().total_cmp(&b.to_f64()));
        assert_eq!(offsets, sorted);
        let total: usize = ch.iter().map(|c| c.term_count).sum();
        assert_eq!(total, plan.components().len());
        let times = SamplingPlan::fundamental(&grid);
        let direct = evaluate_direct(&plan, &phases, &times).unwrap();
        let fast = synthesize_fft(&ch, &plan, &phases, &times).unwrap();
        assert!(direct.max_abs_difference(&fast) < 1e-10 * direct.rms());
    }

    #[test]
    fn overflow_is_reported() {
        let grid = FrequencyGrid::new(1, 8, 0.25, OffsetRule::UnivariateErgodic).unwrap();
        let s = CrossSpectrum::from_fn(grid.clone(), |_, _| DMatrix::from_element(1, 1, C64::new(1.0, 0.0))).unwrap();
        let plan = SynthesisPlan::second_order(&s).unwrap();
        let phases = draw_phases(1, 0, &grid);
        assert!(matches!(
            assemble_coefficients(&plan, &phases, 4),
            Err(Error::CoefficientOverflow { .. })
        ));
    }
}
