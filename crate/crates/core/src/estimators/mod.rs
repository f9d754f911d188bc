//! Temporal and ensemble moments, exact discrete targets and verification reports.

mod ergodic;
mod report;
mod resonance;
mod targets;
mod temporal;

pub use ergodic::{ergodic_report, ErgodicChecks};
pub use report::{
    ensemble_moments, ensemble_statistics, EnsembleStatistic, MomentLabel, MomentReport, MomentRow, MomentSpec,
    ReportMetadata, Tolerance,
};
pub use resonance::{
    analyze_resonances, first_order_resonances, second_order_resonances, third_order_resonances, Resonance,
    ResonanceSummary,
};
pub use targets::{
    discrete_target_second, discrete_target_third, interaction_pairs_of, nominal_target_second, nominal_target_third,
    phase_resolved_second,
};
pub use temporal::{temporal_cross_correlation, temporal_mean, temporal_product, temporal_third_moment, TemporalEstimate};

use crate::srm_simulators::SynthesisPlan;

/// Lag-zero target of a product moment: zero for means, otherwise the discrete target.
pub fn discrete_target(plan: &SynthesisPlan, label: &MomentLabel) -> f64 {
    match label.variates() {
        [_] => 0.0,
        [a, b] => discrete_target_second(plan, *a, *b, 0.0),
        [a, b, c] => discrete_target_third(plan, *a, *b, *c, 0.0, 0.0),
        _ => f64::NAN,
    }
}
