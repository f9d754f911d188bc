//! Exact ensemble moments of a simulator's term set.
//!
//! Components with distinct phase signatures are uncorrelated, so second
//! moments collect one term per component. Third moments collect the
//! interaction terms together with the two linear terms whose phases they
//! carry, over every placement of the three factors.

use std::collections::HashMap;

use crate::spectral_models::{CrossBispectrum, CrossSpectrum, PairIndex};
use crate::srm_simulators::{Component, ComponentKind, PhaseSignature, SynthesisPlan};
use crate::C64;

fn angular_frequency(plan: &SynthesisPlan, c: &Component) -> f64 {
    let g = plan.grid();
    c.frequency_index as f64 * g.delta_omega() / g.period_blocks() as f64
}

/// `E[f_a(t) f_b(t + tau)]` for the plan's term set.
pub fn discrete_target_second(plan: &SynthesisPlan, a: usize, b: usize, tau: f64) -> f64 {
    plan.components()
        .iter()
        .map(|c| {
            let nu = angular_frequency(plan, c);
            0.5 * (c.amplitude[a] * c.amplitude[b].conj() * C64::from_polar(1.0, -nu * tau)).re
        })
        .sum()
}

/// `E[f_a(t) f_b(t + tau1) f_c(t + tau2)]` for the plan's term set.
pub fn discrete_target_third(plan: &SynthesisPlan, a: usize, b: usize, c: usize, tau1: f64, tau2: f64) -> f64 {
    let comps = plan.components();
    let linear: HashMap<usize, &Component> = comps
        .iter()
        .filter_map(|c| match c.signature {
            PhaseSignature::Single(i) => Some((i, c)),
            _ => None,
        })
        .collect();
    let vars = [a, b, c];
    let lags = [0.0, tau1, tau2];
    let mut total = 0.0;
    for inter in comps {
        let PhaseSignature::Sum(x, y) = inter.signature else { continue };
        let (Some(lx), Some(ly)) = (linear.get(&x), linear.get(&y)) else { continue };
        let nu = angular_frequency(plan, inter);
        let (nx, ny) = (angular_frequency(plan, lx), angular_frequency(plan, ly));
        for slot in 0..3 {
            let (s1, s2) = ((slot + 1) % 3, (slot + 2) % 3);
            let head = inter.amplitude[vars[slot]] * C64::from_polar(1.0, nu * lags[slot]);
            let mut assignments = vec![(lx, nx, ly, ny)];
            if x != y {
                assignments.push((ly, ny, lx, nx));
            }
            for (u, nu_u, v, nu_v) in assignments {
                let tail = u.amplitude[vars[s1]].conj()
                    * C64::from_polar(1.0, -nu_u * lags[s1])
                    * v.amplitude[vars[s2]].conj()
                    * C64::from_polar(1.0, -nu_v * lags[s2]);
                total += 0.25 * (head * tail).re;
            }
        }
    }
    total
}

/// Exact temporal `<f_a(r) f_b(r + lag)>` of one realization over the full period,
/// including cross terms of components that share a frequency.
pub fn phase_resolved_second(
    plan: &SynthesisPlan,
    phases: &crate::srm_simulators::PhaseSet,
    times: &crate::srm_simulators::SamplingPlan,
    a: usize,
    b: usize,
    lag: usize,
) -> f64 {
    let period = times.period_samples() as u64;
    let comps = plan.components();
    let weights: Vec<(C64, C64, u64)> = comps
        .iter()
        .map(|c| {
            let rot = C64::from_polar(1.0, c.signature.evaluate(phases.values()));
            (c.amplitude[a] * rot, c.amplitude[b] * rot, c.frequency_index % period)
        })
        .collect();
    let mut by_residue: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, w) in weights.iter().enumerate() {
        by_residue.entry(w.2).or_default().push(i);
    }
    let lag_phase = |n: u64| {
        let idx = (n as u128 * lag as u128 % period as u128) as f64;
        C64::from_polar(1.0, std::f64::consts::TAU * idx / period as f64)
    };
    let mut total = 0.0;
    for (wa, _, n) in &weights {
        for &d in &by_residue[n] {
            let (_, wb, nd) = weights[d];
            total += 0.5 * (wa * wb.conj() * lag_phase(nd).conj()).re;
        }
        if let Some(group) = by_residue.get(&((period - n) % period)) {
            for &d in group {
                let (_, wb, nd) = weights[d];
                total += 0.5 * (wa * wb * lag_phase(nd)).re;
            }
        }
    }
    total
}

/// Channel-averaged Riemann sum `2 dw sum Re[S_ab e^{i w tau}]` of the target spectrum.
pub fn nominal_target_second(s: &CrossSpectrum, a: usize, b: usize, tau: f64) -> f64 {
    let g = s.grid();
    let mut acc = 0.0;
    for (c, k, m) in s.iter() {
        acc += (m[(a, b)] * C64::from_polar(1.0, g.frequency(c, k) * tau)).re;
    }
    2.0 * g.delta_omega() * acc / g.channels() as f64
}

/// Channel-averaged `6 dw^2 sum Re[conj(B_abc) e^{i(w1 tau1 + w2 tau2)}]` over ordered pairs
/// `i, j >= 1`, `i + j < N`. Exact only at zero lag.
pub fn nominal_target_third(bs: &CrossBispectrum, a: usize, b: usize, c: usize, tau1: f64, tau2: f64) -> f64 {
    let g = bs.grid();
    let n = g.bins();
    let ch = g.channels();
    let mut acc = 0.0;
    for i in 1..n {
        for j in 1..n - i {
            for p in 0..ch {
                for q in 0..ch {
                    let pair = PairIndex::new(p, i, q, j);
                    let v = bs.at(pair).get(a, b, c);
                    let phase = g.frequency(p, i) * tau1 + g.frequency(q, j) * tau2;
                    acc += (v.conj() * C64::from_polar(1.0, phase)).re;
                }
            }
        }
    }
    6.0 * g.delta_omega().powi(2) * acc / (ch * ch) as f64
}

/// Interaction pairs of the plan, for reporting.
pub fn interaction_pairs_of(plan: &SynthesisPlan) -> Vec<PairIndex> {
    plan.components()
        .iter()
        .filter_map(|c| match c.kind {
            ComponentKind::Interaction(p) => Some(p),
            _ => None,
        })
        .collect()
}
