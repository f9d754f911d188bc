//! Multi-indexed frequency grids.
//!
//! Channel `l` (zero based here) samples the target at `(k + offset_l) * delta_omega`.
//! Offsets are exact rationals so that the fundamental period and integer
//! frequency indices can be computed without rounding.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetRule {
    /// Single channel shifted by `1/N`.
    UnivariateErgodic,
    /// `l/(2m) + 1/N`, used by the third-order multivariate method.
    MultivariateDoubleIndex,
    /// `l/m`, the classic second-order double indexing.
    SecondOrderClassic,
}

/// Non-negative rational number in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = num.gcd(&den);
        Ratio { num: num / g, den: den / g }
    }

    pub fn numer(self) -> u64 {
        self.num
    }

    pub fn denom(self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Value scaled by `scale`; `scale` must be a multiple of the denominator.
    pub fn scaled(self, scale: u64) -> u64 {
        debug_assert_eq!(scale % self.den, 0);
        self.num * (scale / self.den)
    }
}

impl std::ops::Add for Ratio {
    type Output = Ratio;
    fn add(self, rhs: Ratio) -> Ratio {
        let den = self.den.lcm(&rhs.den);
        Ratio::new(self.num * (den / self.den) + rhs.num * (den / rhs.den), den)
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    variates: usize,
    bins: usize,
    delta_omega: f64,
    rule: OffsetRule,
}

impl FrequencyGrid {
    pub fn new(variates: usize, bins: usize, delta_omega: f64, rule: OffsetRule) -> Result<Self> {
        if variates == 0 {
            return Err(Error::InvalidParameter("number of variates must be positive".into()));
        }
        if bins == 0 {
            return Err(Error::InvalidParameter("number of frequency bins must be positive".into()));
        }
        if !(delta_omega.is_finite() && delta_omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequency step must be finite and positive, got {delta_omega}"
            )));
        }
        if rule == OffsetRule::UnivariateErgodic && variates != 1 {
            return Err(Error::InvalidParameter(format!(
                "univariate offset rule needs exactly one variate, got {variates}"
            )));
        }
        Ok(FrequencyGrid { variates, bins, delta_omega, rule })
    }

    /// Grid with `delta_omega = cutoff / bins`.
    pub fn from_cutoff(variates: usize, bins: usize, cutoff: f64, rule: OffsetRule) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("number of frequency bins must be positive".into()));
        }
        Self::new(variates, bins, cutoff / bins as f64, rule)
    }

    pub fn variates(&self) -> usize {
        self.variates
    }

    /// Number of frequency channels. Equal to the number of variates.
    pub fn channels(&self) -> usize {
        self.variates
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn rule(&self) -> OffsetRule {
        self.rule
    }

    pub fn cutoff(&self) -> f64 {
        self.delta_omega * self.bins as f64
    }

    /// Offset of `channel` in units of `delta_omega`.
    pub fn offset(&self, channel: usize) -> Ratio {
        assert!(channel < self.variates, "channel {channel} out of range");
        let l = channel as u64 + 1;
        let m = self.variates as u64;
        let n = self.bins as u64;
        match self.rule {
            OffsetRule::UnivariateErgodic => Ratio::new(1, n),
            OffsetRule::MultivariateDoubleIndex => Ratio::new(l, 2 * m) + Ratio::new(1, n),
            OffsetRule::SecondOrderClassic => Ratio::new(l, m),
        }
    }

    pub fn frequency(&self, channel: usize, bin: usize) -> f64 {
        (bin as f64 + self.offset(channel).to_f64()) * self.delta_omega
    }

    /// Least common multiple of the channel offset denominators.
    ///
    /// Every grid frequency is an integer multiple of `delta_omega / period_blocks`.
    pub fn period_blocks(&self) -> u64 {
        (0..self.variates).fold(1u64, |acc, c| acc.lcm(&self.offset(c).denom()))
    }

    /// Frequency of `(channel, bin)` in units of `delta_omega / period_blocks`.
    pub fn frequency_index(&self, channel: usize, bin: usize) -> u64 {
        let q = self.period_blocks();
        bin as u64 * q + self.offset(channel).scaled(q)
    }

    /// Offset numerator in units of `delta_omega / period_blocks`.
    pub fn offset_index(&self, channel: usize) -> u64 {
        self.offset(channel).scaled(self.period_blocks())
    }

    /// Flat index of `(channel, bin)` in channel-major order.
    pub fn flat(&self, channel: usize, bin: usize) -> usize {
        channel * self.bins + bin
    }

    pub fn len(&self) -> usize {
        self.variates * self.bins
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
