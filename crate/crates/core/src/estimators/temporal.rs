use crate::error::{Error, Result};
use crate::srm_simulators::SampleRecord;

/// Temporal average, flagged when the record does not span one fundamental period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemporalEstimate {
    pub value: f64,
    pub full_period: bool,
}

impl TemporalEstimate {
    /// The value, or a non-ergodic-record error for partial records.
    pub fn ergodic(self) -> Result<f64> {
        if self.full_period {
            Ok(self.value)
        } else {
            Err(Error::InvalidEnsemble("record does not cover one fundamental period".into()))
        }
    }
}

fn check(record: &SampleRecord, variates: &[usize], lags: &[usize]) -> Result<()> {
    if record.is_empty() {
        return Err(Error::InvalidParameter("empty record".into()));
    }
    if let Some(a) = variates.iter().find(|&&a| a >= record.variates()) {
        return Err(Error::InvalidParameter(format!("variate {a} out of range")));
    }
    if let Some(l) = lags.iter().find(|&&l| l >= record.len()) {
        return Err(Error::InvalidParameter(format!("lag {l} not below record length {}", record.len())));
    }
    Ok(())
}

pub fn temporal_mean(record: &SampleRecord, a: usize) -> Result<TemporalEstimate> {
    check(record, &[a], &[])?;
    let x = record.series(a);
    Ok(TemporalEstimate { value: x.iter().sum::<f64>() / x.len() as f64, full_period: record.covers_period() })
}

/// `<f_a(t) f_b(t + lag)>`, circular on full-period records and truncated otherwise.
pub fn temporal_cross_correlation(record: &SampleRecord, a: usize, b: usize, lag: usize) -> Result<TemporalEstimate> {
    check(record, &[a, b], &[lag])?;
    let (x, y) = (record.series(a), record.series(b));
    let n = x.len();
    let full = record.covers_period();
    let value = if full {
        (0..n).map(|r| x[r] * y[(r + lag) % n]).sum::<f64>() / n as f64
    } else {
        (0..n - lag).map(|r| x[r] * y[r + lag]).sum::<f64>() / (n - lag) as f64
    };
    Ok(TemporalEstimate { value, full_period: full })
}

/// `<f_a(t) f_b(t + lag1) f_c(t + lag2)>`.
pub fn temporal_third_moment(
    record: &SampleRecord,
    a: usize,
    b: usize,
    c: usize,
    lag1: usize,
    lag2: usize,
) -> Result<TemporalEstimate> {
    check(record, &[a, b, c], &[lag1, lag2])?;
    let (x, y, z) = (record.series(a), record.series(b), record.series(c));
    let n = x.len();
    let full = record.covers_period();
    let value = if full {
        (0..n).map(|r| x[r] * y[(r + lag1) % n] * z[(r + lag2) % n]).sum::<f64>() / n as f64
    } else {
        let span = n - lag1.max(lag2);
        (0..span).map(|r| x[r] * y[r + lag1] * z[r + lag2]).sum::<f64>() / span as f64
    };
    Ok(TemporalEstimate { value, full_period: full })
}

/// Mean of a lag-zero product over one record.
pub fn temporal_product(record: &SampleRecord, variates: &[usize]) -> Result<f64> {
    check(record, variates, &[])?;
    let n = record.len();
    let mut acc = 0.0;
    for r in 0..n {
        acc += variates.iter().map(|&a| record.values[a][r]).product::<f64>();
    }
    Ok(acc / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::srm_simulators::Method;

    fn record(values: Vec<Vec<f64>>, full: bool) -> SampleRecord {
        let n = values[0].len();
        SampleRecord {
            values,
            delta_t: 1.0,
            method: Method::SecondOrder,
            seed: 0,
            realization: 0,
            period_samples: full.then_some(n),
        }
    }

    fn cosine(n: usize, k: usize, amp: f64, phase: f64) -> Vec<f64> {
        (0..n).map(|r| amp * (std::f64::consts::TAU * (k * r) as f64 / n as f64 + phase).cos()).collect()
    }

    #[test]
    fn constant_mean() {
        let r = record(vec![vec![2.5; 10]], true);
        assert_eq!(temporal_mean(&r, 0).unwrap().value, 2.5);
    }

    #[test]
    fn cosine_moments() {
        let x = cosine(64, 3, 1.7, 0.3);
        let r = record(vec![x.clone(), x], true);
        assert!(temporal_mean(&r, 0).unwrap().value.abs() < 1e-12 * 1.7);
        let c = temporal_cross_correlation(&r, 0, 1, 0).unwrap();
        assert!((c.value - 1.7 * 1.7 / 2.0).abs() < 1e-12);
        let t = temporal_third_moment(&r, 0, 1, 0, 5, 9).unwrap();
        assert!(t.value.abs() < 1e-12);
    }

    #[test]
    fn partial_record_is_flagged() {
        let r = record(vec![cosine(64, 3, 1.0, 0.0)], false);
        let c = temporal_cross_correlation(&r, 0, 0, 4).unwrap();
        assert!(!c.full_period);
        assert!(c.ergodic().is_err());
    }

    #[test]
    fn lag_must_fit() {
        let r = record(vec![vec![1.0; 4]], true);
        assert!(temporal_cross_correlation(&r, 0, 0, 4).is_err());
        assert!(temporal_mean(&r, 1).is_err());
    }
}
