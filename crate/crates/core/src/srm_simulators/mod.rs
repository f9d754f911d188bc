//! Direct cosine-sum simulators, phase generation and time sampling.

mod direct;
mod plan;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_models::{CrossBispectrum, CrossSpectrum, FrequencyGrid};

pub use direct::{evaluate_direct, evaluate_direct_at};
pub use plan::{Component, ComponentKind, PhaseSignature, SynthesisPlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "second")]
    SecondOrder,
    #[serde(rename = "third-uv")]
    ThirdOrderUnivariate,
    #[serde(rename = "third-mv")]
    ThirdOrderMultivariate,
    #[serde(rename = "third-mv-fft")]
    ThirdOrderMultivariateFft,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::SecondOrder,
        Method::ThirdOrderUnivariate,
        Method::ThirdOrderMultivariate,
        Method::ThirdOrderMultivariateFft,
    ];

    pub fn tag(self) -> u8 {
        match self {
            Method::SecondOrder => 0,
            Method::ThirdOrderUnivariate => 1,
            Method::ThirdOrderMultivariate => 2,
            Method::ThirdOrderMultivariateFft => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::SecondOrder => "second",
            Method::ThirdOrderUnivariate => "third-uv",
            Method::ThirdOrderMultivariate => "third-mv",
            Method::ThirdOrderMultivariateFft => "third-mv-fft",
        }
    }

    pub fn is_third_order(self) -> bool {
        self != Method::SecondOrder
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// Random phases, one per `(channel, bin)`, in channel-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSet {
    grid: FrequencyGrid,
    values: Vec<f64>,
    seed: u64,
    realization: u32,
}

impl PhaseSet {
    /// Phases supplied by the caller, e.g. all zero for tests.
    pub fn from_values(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} phases supplied for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        Ok(PhaseSet { grid, values, seed: 0, realization: 0 })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, channel: usize, bin: usize) -> f64 {
        self.values[self.grid.flat(channel, bin)]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn realization(&self) -> u32 {
        self.realization
    }

    /// Adds `shift` to every phase of one channel.
    pub fn shifted_channel(&self, channel: usize, shift: f64) -> PhaseSet {
        let mut out = self.clone();
        for k in 0..self.grid.bins() {
            let i = self.grid.flat(channel, k);
            out.values[i] = (out.values[i] + shift).rem_euclid(std::f64::consts::TAU);
        }
        out
    }
}

/// Uniform phases from a ChaCha stream keyed by `(seed, realization)`.
pub fn draw_phases(seed: u64, realization: u32, grid: &FrequencyGrid) -> PhaseSet {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(realization as u64);
    let values = (0..grid.len()).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    PhaseSet { grid: grid.clone(), values, seed, realization }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Period {
    /// Number of base periods `2 pi / delta_omega` in one fundamental period.
    pub blocks: u64,
    pub seconds: f64,
}

pub fn fundamental_period(grid: &FrequencyGrid) -> Period {
    let blocks = grid.period_blocks();
    Period { blocks, seconds: std::f64::consts::TAU * blocks as f64 / grid.delta_omega() }
}

/// Sample times `t_r = r * delta_t` with `delta_t = 2 pi / (block_len * delta_omega)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingPlan {
    block_len: usize,
    blocks: u64,
    period_blocks: u64,
    delta_omega: f64,
}

impl SamplingPlan {
    /// One fundamental period with `block_len = 2N`.
    pub fn fundamental(grid: &FrequencyGrid) -> Self {
        let q = grid.period_blocks();
        SamplingPlan { block_len: 2 * grid.bins(), blocks: q, period_blocks: q, delta_omega: grid.delta_omega() }
    }

    /// `block_len` must be `2N` times a power of two.
    pub fn new(grid: &FrequencyGrid, block_len: usize, blocks: u64) -> Result<Self> {
        let base = 2 * grid.bins();
        if block_len < base || !block_len.is_multiple_of(base) || !(block_len / base).is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "block length {block_len} must be {base} times a power of two"
            )));
        }
        if blocks == 0 {
            return Err(Error::InvalidParameter("at least one block is required".into()));
        }
        Ok(SamplingPlan {
            block_len,
            blocks,
            period_blocks: grid.period_blocks(),
            delta_omega: grid.delta_omega(),
        })
    }

    /// Whole fundamental period at a given block length.
    pub fn full_period(grid: &FrequencyGrid, block_len: usize) -> Result<Self> {
        Self::new(grid, block_len, grid.period_blocks())
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    pub fn samples(&self) -> usize {
        self.block_len * self.blocks as usize
    }

    /// Samples in one fundamental period.
    pub fn period_samples(&self) -> usize {
        self.block_len * self.period_blocks as usize
    }

    pub fn delta_t(&self) -> f64 {
        std::f64::consts::TAU / (self.block_len as f64 * self.delta_omega)
    }

    pub fn covers_period(&self) -> bool {
        self.blocks == self.period_blocks
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    /// `values[a][r]`: variate `a` at time `r * delta_t`.
    pub values: Vec<Vec<f64>>,
    pub delta_t: f64,
    pub method: Method,
    pub seed: u64,
    pub realization: u32,
    /// Length of the fundamental period in samples, when known.
    pub period_samples: Option<usize>,
}

impl SampleRecord {
    pub fn variates(&self) -> usize {
        self.values.len()
    }

    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn series(&self, a: usize) -> &[f64] {
        &self.values[a]
    }

    pub fn t0_covered(&self) -> f64 {
        self.len() as f64 * self.delta_t
    }

    /// True when the record spans exactly one fundamental period.
    pub fn covers_period(&self) -> bool {
        self.period_samples == Some(self.len())
    }

    pub fn rms(&self) -> f64 {
        let n = (self.len() * self.variates()).max(1) as f64;
        (self.values.iter().flatten().map(|v| v * v).sum::<f64>() / n).sqrt()
    }

    pub fn max_abs_difference(&self, other: &SampleRecord) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_phases(grid: &FrequencyGrid, phases: &PhaseSet) -> Result<()> {
    if phases.grid() != grid {
        return Err(Error::Dimension("phase set was drawn for a different grid".into()));
    }
    Ok(())
}

/// Second-order sum over the grid's channels and bins.
pub fn simulate_2nd_order_mv(s: &CrossSpectrum, phases: &PhaseSet, times: &SamplingPlan) -> Result<SampleRecord> {
    check_phases(s.grid(), phases)?;
    evaluate_direct(&SynthesisPlan::second_order(s)?, phases, times)
}

pub fn simulate_3rd_order_uv(
    s: &CrossSpectrum,
    b: &CrossBispectrum,
    phases: &PhaseSet,
    times: &SamplingPlan,
) -> Result<SampleRecord> {
    check_phases(s.grid(), phases)?;
    evaluate_direct(&SynthesisPlan::third_order_univariate(s, b)?, phases, times)
}

pub fn simulate_3rd_order_mv(
    s: &CrossSpectrum,
    b: &CrossBispectrum,
    phases: &PhaseSet,
    times: &SamplingPlan,
) -> Result<SampleRecord> {
    check_phases(s.grid(), phases)?;
    evaluate_direct(&SynthesisPlan::third_order(s, b)?, phases, times)
}
