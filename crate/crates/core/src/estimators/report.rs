use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::temporal::temporal_product;
use crate::error::{Error, Result};
use crate::srm_simulators::SampleRecord;

/// Product moment of variates, written like `f1f2^2` (variates counted from one).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MomentLabel {
    variates: Vec<usize>,
}

impl MomentLabel {
    /// Zero-based variate indices in written order.
    pub fn new(variates: Vec<usize>) -> Self {
        MomentLabel { variates }
    }

    pub fn variates(&self) -> &[usize] {
        &self.variates
    }

    pub fn order(&self) -> usize {
        self.variates.len()
    }

    /// `E[f1 f2^2]` style text.
    pub fn expectation(&self) -> String {
        format!("E[{}]", self.factors().join(" "))
    }

    fn factors(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.variates.len() {
            let v = self.variates[i];
            let mut run = 1;
            while i + run < self.variates.len() && self.variates[i + run] == v {
                run += 1;
            }
            out.push(if run == 1 { format!("f{}", v + 1) } else { format!("f{}^{run}", v + 1) });
            i += run;
        }
        out
    }
}

impl fmt::Display for MomentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.factors().concat())
    }
}

impl FromStr for MomentLabel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let cleaned: String = text
            .trim()
            .trim_start_matches("E[")
            .trim_end_matches(']')
            .replace("(t)", "")
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '*')
            .collect();
        let bad = || Error::InvalidParameter(format!("cannot parse moment label {text:?}"));
        let mut variates = Vec::new();
        let mut chars = cleaned.chars().peekable();
        while let Some(c) = chars.next() {
            if c != 'f' {
                return Err(bad());
            }
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let index: usize = digits.parse().map_err(|_| bad())?;
            if index == 0 {
                return Err(bad());
            }
            let mut power = 1;
            if chars.peek() == Some(&'^') {
                chars.next();
                let mut p = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    p.push(*d);
                    chars.next();
                }
                power = p.parse().map_err(|_| bad())?;
            }
            variates.extend(std::iter::repeat_n(index - 1, power));
        }
        if variates.is_empty() {
            return Err(bad());
        }
        Ok(MomentLabel { variates })
    }
}

impl Serialize for MomentLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MomentLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Tolerance {
    /// `|x - t| / max(|t|, floor) <= relative`.
    Relative { relative: f64, floor: f64 },
    Absolute { absolute: f64 },
    /// `|x - t| <= max(relative |t|, absolute)`.
    Either { relative: f64, absolute: f64 },
}

impl Tolerance {
    pub fn relative(relative: f64) -> Self {
        Tolerance::Relative { relative, floor: f64::MIN_POSITIVE }
    }

    /// `(error, tolerance)` in the units the row reports.
    pub fn evaluate(&self, simulated: f64, target: f64) -> (f64, f64) {
        let d = (simulated - target).abs();
        match *self {
            Tolerance::Relative { relative, floor } => (d / target.abs().max(floor), relative),
            Tolerance::Absolute { absolute } => (d, absolute),
            Tolerance::Either { relative, absolute } => (d, (relative * target.abs()).max(absolute)),
        }
    }

    pub fn is_relative(&self) -> bool {
        matches!(self, Tolerance::Relative { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub label: String,
    pub simulated: f64,
    pub target: f64,
    pub error: f64,
    pub relative_error: bool,
    pub tolerance: f64,
    pub pass: bool,
    /// Shown for comparison only; excluded from the report verdict.
    pub informational: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub title: String,
    pub method: String,
    pub seeds: Vec<u64>,
    pub realizations: usize,
    pub record_len: usize,
    pub delta_t: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<MomentRow>,
}

impl MomentReport {
    pub fn new(metadata: ReportMetadata) -> Self {
        MomentReport { metadata, rows: Vec::new() }
    }

    pub fn push(
        &mut self,
        label: impl Into<String>,
        simulated: f64,
        target: f64,
        tolerance: Tolerance,
        informational: bool,
    ) -> &mut MomentRow {
        let (error, tol) = tolerance.evaluate(simulated, target);
        self.rows.push(MomentRow {
            label: label.into(),
            simulated,
            target,
            error,
            relative_error: tolerance.is_relative(),
            tolerance: tol,
            pass: error <= tol,
            informational,
            note: None,
        });
        self.rows.last_mut().expect("row just pushed")
    }

    /// True when every gated row passes.
    pub fn pass(&self) -> bool {
        self.rows.iter().filter(|r| !r.informational).all(|r| r.pass)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{}\nmethod {}  realizations {}  samples {}  dt {:.6}\n",
            self.metadata.title,
            self.metadata.method,
            self.metadata.realizations,
            self.metadata.record_len,
            self.metadata.delta_t
        );
        out.push_str(&format!(
            "{:<28} {:>14} {:>14} {:>11} {:>11}  {}\n",
            "moment", "simulated", "target", "error", "tolerance", "status"
        ));
        for r in &self.rows {
            let status = match (r.pass, r.informational) {
                (true, false) => "pass",
                (false, false) => "FAIL",
                (true, true) => "info",
                (false, true) => "info (outside tolerance)",
            };
            out.push_str(&format!(
                "{:<28} {:>14.6} {:>14.6} {:>11.3e} {:>11.3e}  {}{}\n",
                r.label,
                r.simulated,
                r.target,
                r.error,
                r.tolerance,
                status,
                r.note.as_ref().map(|n| format!("  [{n}]")).unwrap_or_default()
            ));
        }
        out.push_str(if self.pass() { "verdict: pass\n" } else { "verdict: FAIL\n" });
        out
    }
}

/// One requested ensemble row.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSpec {
    pub label: MomentLabel,
    pub target: f64,
    pub tolerance: Tolerance,
    pub informational: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleStatistic {
    pub label: MomentLabel,
    pub mean: f64,
    /// Standard error from the spread of per-realization temporal averages.
    pub standard_error: f64,
}

impl EnsembleStatistic {
    /// Mean and standard error of per-realization values.
    pub fn from_values(label: MomentLabel, values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        EnsembleStatistic { label, mean, standard_error: (var / n).sqrt() }
    }
}

fn check_homogeneous(records: &[SampleRecord]) -> Result<()> {
    let first = records.first().ok_or_else(|| Error::InvalidEnsemble("no records".into()))?;
    for r in records {
        if r.variates() != first.variates()
            || r.len() != first.len()
            || r.delta_t != first.delta_t
            || r.method != first.method
        {
            return Err(Error::InvalidEnsemble(format!(
                "record {} differs in shape, time step or method from record {}",
                r.realization, first.realization
            )));
        }
    }
    Ok(())
}

/// Lag-zero product moments averaged over time and realizations.
pub fn ensemble_statistics(records: &[SampleRecord], labels: &[MomentLabel]) -> Result<Vec<EnsembleStatistic>> {
    check_homogeneous(records)?;
    labels
        .iter()
        .map(|label| {
            let per: Vec<f64> =
                records.iter().map(|r| temporal_product(r, label.variates())).collect::<Result<_>>()?;
            Ok(EnsembleStatistic::from_values(label.clone(), &per))
        })
        .collect()
}

pub fn ensemble_moments(records: &[SampleRecord], specs: &[MomentSpec]) -> Result<MomentReport> {
    let labels: Vec<MomentLabel> = specs.iter().map(|s| s.label.clone()).collect();
    let stats = ensemble_statistics(records, &labels)?;
    let first = &records[0];
    let mut report = MomentReport::new(ReportMetadata {
        title: "ensemble moments".into(),
        method: first.method.to_string(),
        seeds: {
            let mut s: Vec<u64> = records.iter().map(|r| r.seed).collect();
            s.dedup();
            s
        },
        realizations: records.len(),
        record_len: first.len(),
        delta_t: first.delta_t,
    });
    for (spec, stat) in specs.iter().zip(stats) {
        report.push(spec.label.expectation(), stat.mean, spec.target, spec.tolerance, spec.informational);
    }
    Ok(report)
}
