//! Line-spectrum targets: energy on a few bins only.
//!
//! With a well-chosen support the synthesized term set has no frequency
//! coincidences, which makes temporal averages match ensemble targets exactly.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::containers::{CrossBispectrum, CrossSpectrum, PairIndex, Tensor3};
use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct LineTargets {
    /// Bins carrying second-order energy.
    pub spectrum_bins: Vec<usize>,
    pub level: f64,
    /// Correlation magnitude between neighbouring variates, below one.
    pub correlation: f64,
    /// Cross-spectral phase per variate index step.
    pub phase_step: f64,
    /// Relative change of the level per channel.
    pub channel_tilt: f64,
    /// Bin pairs `(i, j)` with `i >= j >= 1` carrying bispectrum.
    pub bispectrum_bins: Vec<(usize, usize)>,
    pub bispectrum_level: f64,
    /// Channel pairs `(p, q)` whose index sum appears here get no bispectrum.
    pub excluded_channel_sums: Vec<usize>,
}

impl LineTargets {
    /// Grids and supports whose term sets have no frequency coincidences up to
    /// third order, for one, two or three variates.
    pub fn resonance_free(variates: usize) -> Result<(FrequencyGrid, LineTargets)> {
        use super::grid::OffsetRule;
        let base = LineTargets {
            spectrum_bins: vec![1, 2, 4, 8],
            level: 1.0,
            correlation: 0.5,
            phase_step: 0.4,
            channel_tilt: 0.05,
            bispectrum_bins: vec![(2, 2), (4, 4)],
            bispectrum_level: 0.2,
            excluded_channel_sums: vec![],
        };
        match variates {
            1 => Ok((
                FrequencyGrid::new(1, 16, 0.25, OffsetRule::UnivariateErgodic)?,
                LineTargets {
                    spectrum_bins: vec![1, 2, 5, 7],
                    bispectrum_bins: vec![(1, 1), (5, 2)],
                    ..base
                },
            )),
            2 => Ok((FrequencyGrid::new(2, 16, 0.25, OffsetRule::MultivariateDoubleIndex)?, base)),
            3 => Ok((
                FrequencyGrid::new(3, 12, 0.25, OffsetRule::MultivariateDoubleIndex)?,
                // Channel pairs with index sums 0 and 2 land on frequencies of other terms.
                LineTargets { excluded_channel_sums: vec![0, 2], ..base },
            )),
            m => Err(Error::Unsupported(format!("no resonance-free preset for {m} variates"))),
        }
    }

    fn spectrum_at(&self, m: usize, channel: usize, bin: usize) -> DMatrix<C64> {
        let scale = self.level * (1.0 + self.channel_tilt * channel as f64) / (1.0 + 0.1 * bin as f64);
        let weights: Vec<f64> = (0..m).map(|a| (scale * (1.0 + 0.15 * a as f64)).sqrt()).collect();
        DMatrix::from_fn(m, m, |a, b| {
            let d = a as f64 - b as f64;
            let rho = self.correlation.powi((a as i64 - b as i64).unsigned_abs() as i32);
            C64::from_polar(weights[a] * weights[b] * rho, self.phase_step * d)
        })
    }

    fn tensor(&self, m: usize, real: bool, tag: f64) -> Tensor3 {
        Tensor3::from_fn(m, |a, l, n| {
            let mag = self.bispectrum_level * (1.0 + 0.1 * (a + l + n) as f64);
            let diagonal = a == l && l == n;
            if real || diagonal {
                C64::new(mag, 0.0)
            } else {
                C64::from_polar(mag, 0.3 * (l as f64 - n as f64) + 0.2 * a as f64 + tag)
            }
        })
    }

    pub fn build(&self, grid: &FrequencyGrid) -> Result<(CrossSpectrum, CrossBispectrum)> {
        let n = grid.bins();
        let m = grid.variates();
        if let Some(&k) = self.spectrum_bins.iter().find(|&&k| k >= n) {
            return Err(Error::InvalidParameter(format!("spectrum bin {k} outside {n} bins")));
        }
        if !(0.0..1.0).contains(&self.correlation.abs()) {
            return Err(Error::InvalidParameter("correlation magnitude must be below one".into()));
        }
        let s = CrossSpectrum::from_fn(grid.clone(), |c, k| {
            if self.spectrum_bins.contains(&k) {
                self.spectrum_at(m, c, k)
            } else {
                DMatrix::zeros(m, m)
            }
        })?;
        let mut entries = BTreeMap::new();
        for &(i, j) in &self.bispectrum_bins {
            if !(i >= j && j >= 1 && i + j < n) {
                return Err(Error::InvalidParameter(format!(
                    "bispectrum bins ({i}, {j}) must satisfy i >= j >= 1 and i + j < {n}"
                )));
            }
            for p in 0..m {
                for q in 0..m {
                    if (i == j && p < q) || self.excluded_channel_sums.contains(&(p + q)) {
                        continue;
                    }
                    let key = PairIndex::new(p, i, q, j);
                    let t = self.tensor(m, key == key.swapped(), (i * 7 + j * 3 + p + 2 * q) as f64 * 0.1);
                    entries.insert(key.swapped(), t.conj());
                    entries.insert(key, t);
                }
            }
        }
        Ok((s, CrossBispectrum::sparse(grid.clone(), entries)?))
    }
}
