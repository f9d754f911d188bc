use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::C64;

/// Hermitian m×m spectral matrix sampled at every `(channel, bin)` of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossSpectrum {
    grid: FrequencyGrid,
    values: Vec<DMatrix<C64>>,
}

impl CrossSpectrum {
    pub fn zeros(grid: FrequencyGrid) -> Self {
        let m = grid.variates();
        let values = vec![DMatrix::zeros(m, m); grid.len()];
        CrossSpectrum { grid, values }
    }

    /// Evaluates `model(omega)` at every multi-indexed grid frequency.
    pub fn from_model(grid: FrequencyGrid, model: impl Fn(f64) -> DMatrix<C64>) -> Result<Self> {
        Self::from_fn(grid.clone(), |c, k| model(grid.frequency(c, k)))
    }

    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(usize, usize) -> DMatrix<C64>) -> Result<Self> {
        let m = grid.variates();
        let mut values = Vec::with_capacity(grid.len());
        for c in 0..grid.channels() {
            for k in 0..grid.bins() {
                let v = f(c, k);
                if v.shape() != (m, m) {
                    return Err(Error::Dimension(format!(
                        "spectral matrix at channel {c} bin {k} is {:?}, expected {m}x{m}",
                        v.shape()
                    )));
                }
                values.push(v);
            }
        }
        Ok(CrossSpectrum { grid, values })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn at(&self, channel: usize, bin: usize) -> &DMatrix<C64> {
        &self.values[self.grid.flat(channel, bin)]
    }

    pub fn at_mut(&mut self, channel: usize, bin: usize) -> &mut DMatrix<C64> {
        let i = self.grid.flat(channel, bin);
        &mut self.values[i]
    }

    /// `(channel, bin, matrix)` in channel-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &DMatrix<C64>)> {
        let n = self.grid.bins();
        self.values.iter().enumerate().map(move |(i, v)| (i / n, i % n, v))
    }
}

/// Complex m×m×m tensor indexed `(a, l, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    m: usize,
    data: Vec<C64>,
}

impl Tensor3 {
    pub fn zeros(m: usize) -> Self {
        Tensor3 { m, data: vec![C64::new(0.0, 0.0); m * m * m] }
    }

    pub fn from_fn(m: usize, f: impl Fn(usize, usize, usize) -> C64) -> Self {
        let mut t = Self::zeros(m);
        for a in 0..m {
            for l in 0..m {
                for n in 0..m {
                    t.set(a, l, n, f(a, l, n));
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, a: usize, l: usize, n: usize) -> C64 {
        self.data[(a * self.m + l) * self.m + n]
    }

    pub fn set(&mut self, a: usize, l: usize, n: usize, v: C64) {
        let m = self.m;
        self.data[(a * m + l) * m + n] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        Tensor3 { m: self.m, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Frequency pair `(omega_{p,i}, omega_{q,j})` on a multi-indexed grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIndex {
    pub p: usize,
    pub i: usize,
    pub q: usize,
    pub j: usize,
}

impl PairIndex {
    pub fn new(p: usize, i: usize, q: usize, j: usize) -> Self {
        PairIndex { p, i, q, j }
    }

    pub fn swapped(self) -> Self {
        PairIndex { p: self.q, i: self.j, q: self.p, j: self.i }
    }
}

impl fmt::Display for PairIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}, {}), ({}, {}))", self.p, self.i, self.q, self.j)
    }
}

pub type BispectrumModel = Arc<dyn Fn(f64, f64) -> Tensor3 + Send + Sync>;

/// Storage for bispectrum values. Dense tabulation is avoided because it grows as `m^5 N^2`.
#[derive(Clone)]
pub enum BispectrumSource {
    Zero,
    Sparse(BTreeMap<PairIndex, Tensor3>),
    Model(BispectrumModel),
}

impl fmt::Debug for BispectrumSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BispectrumSource::Zero => write!(f, "Zero"),
            BispectrumSource::Sparse(map) => write!(f, "Sparse({} pairs)", map.len()),
            BispectrumSource::Model(_) => write!(f, "Model"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CrossBispectrum {
    grid: FrequencyGrid,
    source: BispectrumSource,
}

impl CrossBispectrum {
    pub fn zero(grid: FrequencyGrid) -> Self {
        CrossBispectrum { grid, source: BispectrumSource::Zero }
    }

    pub fn sparse(grid: FrequencyGrid, entries: BTreeMap<PairIndex, Tensor3>) -> Result<Self> {
        let m = grid.variates();
        for (key, t) in &entries {
            if key.p >= m || key.q >= m || key.i >= grid.bins() || key.j >= grid.bins() {
                return Err(Error::Dimension(format!("bispectrum entry {key} outside the grid")));
            }
            if t.dim() != m {
                return Err(Error::Dimension(format!(
                    "bispectrum entry {key} has dimension {}, expected {m}",
                    t.dim()
                )));
            }
        }
        Ok(CrossBispectrum { grid, source: BispectrumSource::Sparse(entries) })
    }

    /// Bispectrum given as a function of two frequencies, evaluated on demand.
    pub fn from_model(
        grid: FrequencyGrid,
        model: impl Fn(f64, f64) -> Tensor3 + Send + Sync + 'static,
    ) -> Self {
        CrossBispectrum { grid, source: BispectrumSource::Model(Arc::new(model)) }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn source(&self) -> &BispectrumSource {
        &self.source
    }

    pub fn is_identically_zero(&self) -> bool {
        match &self.source {
            BispectrumSource::Zero => true,
            BispectrumSource::Sparse(map) => map.values().all(Tensor3::is_zero),
            BispectrumSource::Model(_) => false,
        }
    }

    /// Tensor at the frequency pair `(omega_{p,i}, omega_{q,j})`.
    pub fn at(&self, pair: PairIndex) -> Tensor3 {
        let m = self.grid.variates();
        match &self.source {
            BispectrumSource::Zero => Tensor3::zeros(m),
            BispectrumSource::Sparse(map) => map.get(&pair).cloned().unwrap_or_else(|| Tensor3::zeros(m)),
            BispectrumSource::Model(f) => {
                let t = f(self.grid.frequency(pair.p, pair.i), self.grid.frequency(pair.q, pair.j));
                assert_eq!(t.dim(), m, "bispectrum model returned wrong tensor dimension");
                t
            }
        }
    }

    /// Pairs that may be nonzero. `None` means every pair must be evaluated.
    pub fn support(&self) -> Option<Vec<PairIndex>> {
        match &self.source {
            BispectrumSource::Zero => Some(Vec::new()),
            BispectrumSource::Sparse(map) => Some(map.keys().copied().collect()),
            BispectrumSource::Model(_) => None,
        }
    }
}
