//! Frequency coincidences that break the temporal/ensemble identity.
//!
//! A temporal average over the period keeps every product of components whose
//! signed frequencies sum to zero modulo the sampling rate. When the signed
//! phase signatures do not cancel as well, the temporal value depends on the
//! phases while the ensemble value does not.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::srm_simulators::SynthesisPlan;

/// Component indices with their sign in the frequency combination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Resonance {
    pub terms: Vec<(usize, i8)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ResonanceSummary {
    pub first_order: usize,
    pub second_order: usize,
    pub third_order: usize,
    /// True when a search stopped at its limit.
    pub truncated: bool,
}

impl ResonanceSummary {
    pub fn is_free(&self) -> bool {
        self.first_order == 0 && self.second_order == 0 && self.third_order == 0
    }
}

fn cancels(plan: &SynthesisPlan, terms: &[(usize, i8)]) -> bool {
    let mut acc: BTreeMap<usize, i32> = BTreeMap::new();
    for &(c, s) in terms {
        for (idx, coef) in plan.components()[c].signature.coefficients() {
            *acc.entry(idx).or_default() += coef * s as i32;
        }
    }
    acc.values().all(|&v| v == 0)
}

fn residues(plan: &SynthesisPlan, period: u64) -> HashMap<u64, Vec<usize>> {
    let mut map: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, c) in plan.components().iter().enumerate() {
        map.entry(c.frequency_index % period).or_default().push(i);
    }
    map
}

pub fn first_order_resonances(plan: &SynthesisPlan, period: u64) -> Vec<Resonance> {
    plan.components()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.frequency_index % period == 0)
        .map(|(i, _)| Resonance { terms: vec![(i, 1)] })
        .collect()
}

pub fn second_order_resonances(plan: &SynthesisPlan, period: u64, limit: usize) -> Vec<Resonance> {
    let map = residues(plan, period);
    let mut out = Vec::new();
    for group in map.values() {
        for (x, &c) in group.iter().enumerate() {
            for &d in &group[x + 1..] {
                if !cancels(plan, &[(c, 1), (d, -1)]) {
                    out.push(Resonance { terms: vec![(c, 1), (d, -1)] });
                    if out.len() >= limit {
                        return out;
                    }
                }
            }
        }
    }
    for (i, c) in plan.components().iter().enumerate() {
        let need = (period - c.frequency_index % period) % period;
        if let Some(group) = map.get(&need) {
            for &d in group.iter().filter(|&&d| d >= i) {
                out.push(Resonance { terms: vec![(i, 1), (d, 1)] });
                if out.len() >= limit {
                    return out;
                }
            }
        }
    }
    out
}

pub fn third_order_resonances(plan: &SynthesisPlan, period: u64, limit: usize) -> Vec<Resonance> {
    let map = residues(plan, period);
    let comps = plan.components();
    let n: Vec<u64> = comps.iter().map(|c| c.frequency_index % period).collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for c1 in 0..comps.len() {
        for c2 in c1..comps.len() {
            for s2 in [1i8, -1] {
                let partial = if s2 > 0 { (n[c1] + n[c2]) % period } else { (n[c1] + period - n[c2]) % period };
                for s3 in [1i8, -1] {
                    // s3 * n3 = -partial (mod period)
                    let need = if s3 > 0 { (period - partial) % period } else { partial };
                    let Some(group) = map.get(&need) else { continue };
                    for &c3 in group.iter().filter(|&&c3| c3 >= c2) {
                        let terms = [(c1, 1i8), (c2, s2), (c3, s3)];
                        if cancels(plan, &terms) {
                            continue;
                        }
                        let mut key = terms.to_vec();
                        key.sort();
                        let flipped: Vec<(usize, i8)> = key.iter().map(|&(c, s)| (c, -s)).collect();
                        if seen.contains(&flipped) || !seen.insert(key.clone()) {
                            continue;
                        }
                        out.push(Resonance { terms: key });
                        if out.len() >= limit {
                            return out;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Counts of resonances up to third order, each search capped at `limit`.
pub fn analyze_resonances(plan: &SynthesisPlan, period: u64, limit: usize) -> ResonanceSummary {
    let first = first_order_resonances(plan, period).len();
    let second = second_order_resonances(plan, period, limit).len();
    let third = third_order_resonances(plan, period, limit).len();
    ResonanceSummary {
        first_order: first,
        second_order: second,
        third_order: third,
        truncated: second >= limit || third >= limit,
    }
}
