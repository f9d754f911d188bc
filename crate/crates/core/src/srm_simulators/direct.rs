use rayon::prelude::*;

use super::{check_phases, PhaseSet, SampleRecord, SamplingPlan, SynthesisPlan};
use crate::error::{Error, Result};
use crate::C64;

const CHUNK: usize = 4096;

/// Complex weights `amplitude * e^{i phase}` per component and variate.
pub(crate) fn phased_weights(plan: &SynthesisPlan, phases: &PhaseSet) -> Vec<Vec<C64>> {
    plan.components()
        .iter()
        .map(|c| {
            let rot = C64::from_polar(1.0, c.signature.evaluate(phases.values()));
            c.amplitude.iter().map(|z| z * rot).collect()
        })
        .collect()
}

pub(crate) fn check_alias(plan: &SynthesisPlan, times: &SamplingPlan) -> Result<()> {
    let q = plan.grid().period_blocks();
    let top = plan.max_frequency_index();
    if top >= times.period_samples() as u64 {
        return Err(Error::CoefficientOverflow { index: (top / q) as usize, block_len: times.block_len() });
    }
    Ok(())
}

/// Sums every component at every sample of the plan, exactly reducing phases modulo the period.
pub fn evaluate_direct(plan: &SynthesisPlan, phases: &PhaseSet, times: &SamplingPlan) -> Result<SampleRecord> {
    check_phases(plan.grid(), phases)?;
    check_alias(plan, times)?;
    let m = plan.grid().variates();
    let period = times.period_samples() as u64;
    let table: Vec<C64> = (0..period)
        .map(|r| C64::from_polar(1.0, std::f64::consts::TAU * r as f64 / period as f64))
        .collect();
    let weights = phased_weights(plan, phases);
    let samples = times.samples();
    let starts: Vec<usize> = (0..samples).step_by(CHUNK).collect();
    let chunks: Vec<Vec<Vec<f64>>> = starts
        .par_iter()
        .map(|&r0| {
            let len = CHUNK.min(samples - r0);
            let mut out = vec![vec![0.0; len]; m];
            for (c, w) in plan.components().iter().zip(&weights) {
                let step = c.frequency_index % period;
                let mut idx = ((c.frequency_index as u128 * r0 as u128) % period as u128) as u64;
                // `r` walks every output column at once.
                #[allow(clippy::needless_range_loop)]
                for r in 0..len {
                    let e = table[idx as usize];
                    for (a, wa) in w.iter().enumerate() {
                        out[a][r] += wa.re * e.re - wa.im * e.im;
                    }
                    idx += step;
                    if idx >= period {
                        idx -= period;
                    }
                }
            }
            out
        })
        .collect();
    let mut values = vec![Vec::with_capacity(samples); m];
    for chunk in chunks {
        for (a, v) in chunk.into_iter().enumerate() {
            values[a].extend(v);
        }
    }
    Ok(SampleRecord {
        values,
        delta_t: times.delta_t(),
        method: plan.method(),
        seed: phases.seed(),
        realization: phases.realization(),
        period_samples: Some(times.period_samples()),
    })
}

/// Direct sum at selected sample indices only; `values[a][s]` follows `indices[s]`.
pub fn evaluate_direct_at(
    plan: &SynthesisPlan,
    phases: &PhaseSet,
    times: &SamplingPlan,
    indices: &[u64],
) -> Result<Vec<Vec<f64>>> {
    check_phases(plan.grid(), phases)?;
    check_alias(plan, times)?;
    let m = plan.grid().variates();
    let period = times.period_samples() as u128;
    let weights = phased_weights(plan, phases);
    let cols: Vec<Vec<f64>> = indices
        .par_iter()
        .map(|&r| {
            let mut acc = vec![0.0; m];
            for (c, w) in plan.components().iter().zip(&weights) {
                let idx = (c.frequency_index as u128 * r as u128) % period;
                let e = C64::from_polar(1.0, std::f64::consts::TAU * idx as f64 / period as f64);
                for (a, wa) in w.iter().enumerate() {
                    acc[a] += wa.re * e.re - wa.im * e.im;
                }
            }
            acc
        })
        .collect();
    Ok((0..m).map(|a| cols.iter().map(|c| c[a]).collect()).collect())
}
