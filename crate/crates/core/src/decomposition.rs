//! Per-bin factorization `S = H H^*` and the inverse factor `G = H^-1`.
//!
//! Columns of `H` are eigenvectors scaled by the square roots of their
//! eigenvalues. Column order follows the dominant diagonal of the eigenvector
//! matrix, so a diagonal spectrum factors into a diagonal `H`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{BinRef, Error, Result};
use crate::spectral_models::{hermitian_deviation, trace_re, CrossBispectrum, CrossSpectrum, FrequencyGrid, PairIndex};
use crate::C64;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const CLIP_TOLERANCE: f64 = 1e-12;
const ZERO_TRACE: f64 = 1e-300;
const SINGULAR_RATIO: f64 = 1e-12;
const PERMUTATION_LIMIT: usize = 8;

/// Argument of `z` in `(-pi, pi]`.
pub fn phase_angle(z: C64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(m), &mut vec![false; m], &mut out);
    out
}

/// For each output column, the eigenpair placed there.
fn column_order(vectors: &DMatrix<C64>, values: &[f64]) -> Vec<usize> {
    let m = values.len();
    let mut descending: Vec<usize> = (0..m).collect();
    descending.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    if m > PERMUTATION_LIMIT {
        return descending;
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in permutations(m) {
        let score: f64 = (0..m).map(|j| vectors[(j, perm[j])].norm_sqr()).sum();
        let better = match &best {
            None => true,
            Some((s, b)) => {
                if score > s + 1e-12 {
                    true
                } else if score < s - 1e-12 {
                    false
                } else {
                    let lhs: Vec<f64> = perm.iter().map(|&p| values[p]).collect();
                    let rhs: Vec<f64> = b.iter().map(|&p| values[p]).collect();
                    lhs.iter().zip(&rhs).find(|(x, y)| x != y).is_some_and(|(x, y)| x > y)
                }
            }
        };
        if better {
            best = Some((score, perm));
        }
    }
    best.map(|(_, p)| p).unwrap_or(descending)
}

/// Factor of one Hermitian PSD matrix. `None` marks an all-zero bin.
pub fn factor_matrix(s: &DMatrix<C64>, at: BinRef) -> Result<Option<DMatrix<C64>>> {
    let m = s.nrows();
    if s.ncols() != m {
        return Err(Error::Dimension(format!("spectral matrix at {at} is not square")));
    }
    if s.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidParameter(format!("non-finite spectral matrix at {at}")));
    }
    let norm = s.norm();
    let deviation = hermitian_deviation(s);
    if deviation > HERMITIAN_TOLERANCE * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitian { at, deviation });
    }
    let trace = trace_re(s);
    if norm <= ZERO_TRACE {
        return Ok(None);
    }
    let sym = (s + s.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    for v in &mut values {
        if *v < 0.0 {
            if *v < -CLIP_TOLERANCE * trace.max(0.0) {
                return Err(Error::NotPsd { at, eigenvalue: *v });
            }
            *v = 0.0;
        }
    }
    if trace < ZERO_TRACE {
        return Ok(None);
    }
    let order = column_order(&eig.eigenvectors, &values);
    let mut h = DMatrix::zeros(m, m);
    for (j, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let reference = if col[j].norm() > 1e-14 {
            col[j]
        } else {
            col.iter().copied().find(|z| z.norm() > 1e-14).unwrap_or(C64::new(1.0, 0.0))
        };
        let rotate = reference.conj() / reference.norm();
        let scale = values[src].sqrt();
        for r in 0..m {
            h[(r, j)] = col[r] * rotate * scale;
        }
    }
    Ok(Some(h))
}

/// Inverse of one factor, rejecting near-singular matrices.
pub fn invert_matrix(h: &DMatrix<C64>, at: BinRef) -> Result<DMatrix<C64>> {
    let sv = h.singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    // Written so that a NaN singular value also counts as singular.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(smallest > SINGULAR_RATIO * largest) {
        return Err(Error::SingularFactor { at, condition: largest / smallest });
    }
    h.clone().lu().try_inverse().ok_or(Error::SingularFactor { at, condition: f64::INFINITY })
}

#[derive(Clone, Debug)]
pub struct SpectralFactor {
    grid: FrequencyGrid,
    factors: Vec<Option<DMatrix<C64>>>,
}

impl SpectralFactor {
    pub(crate) fn from_parts(grid: FrequencyGrid, factors: Vec<Option<DMatrix<C64>>>) -> Self {
        SpectralFactor { grid, factors }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// `None` for bins whose spectral matrix is zero.
    pub fn at(&self, channel: usize, bin: usize) -> Option<&DMatrix<C64>> {
        self.factors[self.grid.flat(channel, bin)].as_ref()
    }

    pub fn magnitude(&self, channel: usize, bin: usize, row: usize, col: usize) -> f64 {
        self.at(channel, bin).map_or(0.0, |h| h[(row, col)].norm())
    }

    pub fn phase(&self, channel: usize, bin: usize, row: usize, col: usize) -> f64 {
        self.at(channel, bin).map_or(0.0, |h| phase_angle(h[(row, col)]))
    }
}

pub fn factor_spectrum(s: &CrossSpectrum) -> Result<SpectralFactor> {
    let mut factors = Vec::with_capacity(s.grid().len());
    for (channel, bin, mat) in s.iter() {
        factors.push(factor_matrix(mat, BinRef { channel, bin })?);
    }
    Ok(SpectralFactor { grid: s.grid().clone(), factors })
}

#[derive(Clone, Debug)]
pub struct InverseFactor {
    grid: FrequencyGrid,
    inverses: Vec<Option<DMatrix<C64>>>,
}

impl InverseFactor {
    pub(crate) fn from_parts(grid: FrequencyGrid, inverses: Vec<Option<DMatrix<C64>>>) -> Self {
        InverseFactor { grid, inverses }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn at(&self, channel: usize, bin: usize) -> Option<&DMatrix<C64>> {
        self.inverses[self.grid.flat(channel, bin)].as_ref()
    }

    pub fn magnitude(&self, channel: usize, bin: usize, row: usize, col: usize) -> f64 {
        self.at(channel, bin).map_or(0.0, |g| g[(row, col)].norm())
    }

    pub fn phase(&self, channel: usize, bin: usize, row: usize, col: usize) -> f64 {
        self.at(channel, bin).map_or(0.0, |g| phase_angle(g[(row, col)]))
    }
}

/// Inverts every nonzero bin. Zero bins stay undefined.
pub fn invert_factor(f: &SpectralFactor) -> Result<InverseFactor> {
    let g = &f.grid;
    let mut inverses = Vec::with_capacity(g.len());
    for channel in 0..g.channels() {
        for bin in 0..g.bins() {
            inverses.push(match f.at(channel, bin) {
                Some(h) => Some(invert_matrix(h, BinRef { channel, bin })?),
                None => None,
            });
        }
    }
    Ok(InverseFactor { grid: g.clone(), inverses })
}

/// Phase of `B_aln` at the frequency pair.
pub fn biphase(b: &CrossBispectrum, a: usize, l: usize, n: usize, pair: PairIndex) -> f64 {
    phase_angle(b.at(pair).get(a, l, n))
}
