//! Single-record checks of the temporal-average identities.

use super::report::{MomentReport, ReportMetadata, Tolerance};
use super::resonance::{analyze_resonances, ResonanceSummary};
use super::targets::{discrete_target_second, discrete_target_third, phase_resolved_second};
use super::temporal::{temporal_cross_correlation, temporal_mean, temporal_third_moment};
use crate::error::Result;
use crate::srm_simulators::{PhaseSet, SampleRecord, SamplingPlan, SynthesisPlan};

/// Lags in samples and tolerances for [`ergodic_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicChecks {
    pub lags: Vec<usize>,
    pub lag_pairs: Vec<(usize, usize)>,
    /// Mean bound as a multiple of the record RMS.
    pub mean: f64,
    pub second: f64,
    pub third: f64,
    /// Relative errors use `max(|target|, floor * RMS^order)` as denominator.
    pub floor: f64,
    /// Cap on resonances collected per order.
    pub resonance_limit: usize,
}

impl Default for ErgodicChecks {
    fn default() -> Self {
        ErgodicChecks {
            lags: vec![0, 7, 31],
            lag_pairs: vec![(0, 0), (3, 11), (17, 5)],
            mean: 1e-10,
            second: 1e-8,
            third: 1e-6,
            floor: 1e-3,
            resonance_limit: 64,
        }
    }
}

fn count(n: usize, truncated: bool) -> String {
    if truncated {
        format!("at least {n}")
    } else {
        n.to_string()
    }
}

/// Compares temporal averages of one full-period record with the discrete targets.
///
/// Rows of an order at which the term set has frequency coincidences are marked
/// informational, since the identity does not hold there for a single record.
/// Second-order rows then get a gated companion against the phase-resolved average.
pub fn ergodic_report(
    plan: &SynthesisPlan,
    phases: &PhaseSet,
    times: &SamplingPlan,
    record: &SampleRecord,
    checks: &ErgodicChecks,
) -> Result<(MomentReport, ResonanceSummary)> {
    let m = record.variates();
    let rms = record.rms();
    let dt = times.delta_t();
    let res = analyze_resonances(plan, times.period_samples() as u64, checks.resonance_limit);
    let mut report = MomentReport::new(ReportMetadata {
        title: "ergodic identities over one fundamental period".into(),
        method: plan.method().to_string(),
        seeds: vec![phases.seed()],
        realizations: 1,
        record_len: record.len(),
        delta_t: record.delta_t,
    });

    for a in 0..m {
        let v = temporal_mean(record, a)?.ergodic()?;
        let row = report.push(format!("<f{}>", a + 1), v, 0.0, Tolerance::Absolute { absolute: checks.mean * rms }, res.first_order > 0);
        if res.first_order > 0 {
            row.note = Some(format!("{} zero-frequency components", res.first_order));
        }
    }

    let second_tol = Tolerance::Relative { relative: checks.second, floor: checks.floor * rms * rms };
    let resonant2 = res.second_order > 0;
    for a in 0..m {
        for b in 0..m {
            for &lag in &checks.lags {
                let v = temporal_cross_correlation(record, a, b, lag)?.ergodic()?;
                let label = format!("<f{} f{}(+{lag})>", a + 1, b + 1);
                let row = report.push(label.clone(), v, discrete_target_second(plan, a, b, lag as f64 * dt), second_tol, resonant2);
                if resonant2 {
                    row.note = Some(format!("{} coincident pairs", count(res.second_order, res.truncated)));
                    let exact = phase_resolved_second(plan, phases, times, a, b, lag);
                    report.push(format!("{label} phase-resolved"), v, exact, second_tol, false);
                }
            }
        }
    }

    let third_tol = Tolerance::Relative { relative: checks.third, floor: checks.floor * rms.powi(3) };
    let resonant3 = res.third_order > 0;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for &(l1, l2) in &checks.lag_pairs {
                    let v = temporal_third_moment(record, a, b, c, l1, l2)?.ergodic()?;
                    let target = discrete_target_third(plan, a, b, c, l1 as f64 * dt, l2 as f64 * dt);
                    let label = format!("<f{} f{}(+{l1}) f{}(+{l2})>", a + 1, b + 1, c + 1);
                    let row = report.push(label, v, target, third_tol, resonant3);
                    if resonant3 {
                        row.note = Some(format!("{} coincident triples", count(res.third_order, res.truncated)));
                    }
                }
            }
        }
    }
    Ok((report, res))
}
