//! Removal of wave-interaction energy from the target spectrum.
//!
//! Interaction terms of the third-order sum carry second-order energy. The
//! linear terms must be built from the remaining "pure" part so that the total
//! still matches the target. The recursion runs upward in frequency because
//! bin `k` is fed by bin pairs `(i, j)` with `i + j = k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::decomposition::{factor_matrix, invert_matrix, InverseFactor, SpectralFactor};
use crate::error::{BinRef, Error, Result};
use crate::spectral_models::{CrossBispectrum, CrossSpectrum, FrequencyGrid, PairIndex, Tensor3};
use crate::C64;

/// Weight applied to the interaction energy in the recursion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionWeight {
    /// `S_p = S - dw * I`. Keeps the simulated variance equal to the target.
    #[default]
    DeltaOmega,
    /// `S_p = S - dw^2 * I`, the literal display form.
    DeltaOmegaSquared,
}

impl InteractionWeight {
    pub fn factor(self, delta_omega: f64) -> f64 {
        match self {
            InteractionWeight::DeltaOmega => delta_omega,
            InteractionWeight::DeltaOmegaSquared => delta_omega * delta_omega,
        }
    }
}

/// One interaction term: a frequency pair and its transfer vector over variates.
#[derive(Clone, Debug, PartialEq)]
pub struct Interaction {
    pub pair: PairIndex,
    /// `T_a = sum_{l,n} conj(B_aln) G_pl(w_pi) G_qn(w_qj)`.
    pub transfer: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct PureSpectrum {
    pub pure: CrossSpectrum,
    pub interaction: CrossSpectrum,
    pub factor: SpectralFactor,
    pub inverse: InverseFactor,
    pub interactions: Vec<Interaction>,
    pub weight: InteractionWeight,
}

/// Whether `pair` belongs to the interaction index set of the grid.
pub fn in_interaction_set(grid: &FrequencyGrid, pair: PairIndex) -> bool {
    pair.i >= pair.j && pair.j >= 1 && pair.i + pair.j < grid.bins() && (pair.i > pair.j || pair.p >= pair.q)
}

/// Index-set pairs carrying a nonzero bispectrum, ordered by the fed bin `i + j`.
pub fn interaction_pairs(b: &CrossBispectrum) -> Vec<(PairIndex, Tensor3)> {
    let grid = b.grid();
    let candidates: Vec<PairIndex> = match b.support() {
        Some(keys) => keys.into_iter().filter(|k| in_interaction_set(grid, *k)).collect(),
        None => {
            let mut all = Vec::new();
            for i in 1..grid.bins() {
                for j in 1..=i.min(grid.bins() - 1 - i) {
                    for p in 0..grid.channels() {
                        for q in 0..grid.channels() {
                            let pair = PairIndex::new(p, i, q, j);
                            if in_interaction_set(grid, pair) {
                                all.push(pair);
                            }
                        }
                    }
                }
            }
            all
        }
    };
    let mut out: Vec<(PairIndex, Tensor3)> = candidates
        .into_iter()
        .map(|pair| (pair, b.at(pair)))
        .filter(|(_, t)| !t.is_zero())
        .collect();
    out.sort_by_key(|(p, _)| (p.i + p.j, *p));
    out
}

fn check_grids(s: &CrossSpectrum, b: &CrossBispectrum) -> Result<()> {
    if s.grid() != b.grid() {
        return Err(Error::Dimension("spectrum and bispectrum are sampled on different grids".into()));
    }
    Ok(())
}

fn partition(s: &CrossSpectrum, pure: &CrossSpectrum) -> CrossSpectrum {
    let mut interaction = s.clone();
    for (c, k, v) in pure.iter() {
        *interaction.at_mut(c, k) = s.at(c, k) - v;
    }
    interaction
}

/// Scalar recursion for a single variate.
pub fn compute_pure_univariate(s: &CrossSpectrum, b: &CrossBispectrum) -> Result<PureSpectrum> {
    compute_pure_univariate_with(s, b, InteractionWeight::default())
}

pub fn compute_pure_univariate_with(
    s: &CrossSpectrum,
    b: &CrossBispectrum,
    weight: InteractionWeight,
) -> Result<PureSpectrum> {
    check_grids(s, b)?;
    let grid = s.grid().clone();
    if grid.variates() != 1 {
        return Err(Error::Dimension(format!(
            "univariate recursion needs one variate, grid has {}",
            grid.variates()
        )));
    }
    let w = weight.factor(grid.delta_omega());
    let n = grid.bins();
    let target: Vec<f64> = (0..n).map(|k| s.at(0, k)[(0, 0)].re).collect();
    let pairs = interaction_pairs(b);
    let mut pure = vec![0.0; n];
    let mut transfers = Vec::with_capacity(pairs.len());
    let mut next = 0;
    for k in 0..n {
        let mut demand = 0.0;
        while next < pairs.len() && pairs[next].0.i + pairs[next].0.j == k {
            let (pair, t) = &pairs[next];
            let denom = pure[pair.i] * pure[pair.j];
            if denom <= 0.0 {
                let bin = if pure[pair.i] <= 0.0 { pair.i } else { pair.j };
                return Err(Error::InfeasibleBispectrum { at: BinRef { channel: 0, bin }, deficit: 0.0 });
            }
            let bij = t.get(0, 0, 0);
            demand += bij.norm_sqr() / denom;
            transfers.push(Interaction { pair: *pair, transfer: vec![bij.conj() / denom.sqrt()] });
            next += 1;
        }
        let value = target[k] - w * demand;
        if value < -1e-12 * target[k].abs() || (value < 0.0 && target[k] <= 0.0) {
            return Err(Error::InfeasibleBispectrum { at: BinRef { channel: 0, bin: k }, deficit: -value });
        }
        pure[k] = value.max(0.0);
    }
    let pure_s = CrossSpectrum::from_fn(grid.clone(), |_, k| DMatrix::from_element(1, 1, C64::new(pure[k], 0.0)))?;
    let factors = (0..n)
        .map(|k| (pure[k] > 0.0).then(|| DMatrix::from_element(1, 1, C64::new(pure[k].sqrt(), 0.0))))
        .collect();
    let inverses = (0..n)
        .map(|k| (pure[k] > 0.0).then(|| DMatrix::from_element(1, 1, C64::new(1.0 / pure[k].sqrt(), 0.0))))
        .collect();
    Ok(PureSpectrum {
        interaction: partition(s, &pure_s),
        pure: pure_s,
        factor: SpectralFactor::from_parts(grid.clone(), factors),
        inverse: InverseFactor::from_parts(grid, inverses),
        interactions: transfers,
        weight,
    })
}

pub fn compute_pure_multivariate(s: &CrossSpectrum, b: &CrossBispectrum) -> Result<PureSpectrum> {
    compute_pure_multivariate_with(s, b, InteractionWeight::default())
}

enum Inverse {
    Zero,
    Singular,
    Ready(DMatrix<C64>),
}

/// Transfer vector of one frequency pair given the inverse factors at both frequencies.
pub fn transfer_vector(t: &Tensor3, g_alpha: &DMatrix<C64>, g_beta: &DMatrix<C64>, p: usize, q: usize) -> Vec<C64> {
    let m = t.dim();
    (0..m)
        .map(|a| {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..m {
                let gl = g_alpha[(p, l)];
                for n in 0..m {
                    acc += t.get(a, l, n).conj() * gl * g_beta[(q, n)];
                }
            }
            acc
        })
        .collect()
}

pub fn compute_pure_multivariate_with(
    s: &CrossSpectrum,
    b: &CrossBispectrum,
    weight: InteractionWeight,
) -> Result<PureSpectrum> {
    check_grids(s, b)?;
    let grid = s.grid().clone();
    let (m, n, channels) = (grid.variates(), grid.bins(), grid.channels());
    let w = weight.factor(grid.delta_omega());
    let pairs = interaction_pairs(b);
    let mut pure = CrossSpectrum::zeros(grid.clone());
    let mut factors: Vec<Option<DMatrix<C64>>> = vec![None; grid.len()];
    let mut inverses: Vec<Inverse> = (0..grid.len()).map(|_| Inverse::Zero).collect();
    let mut transfers = Vec::with_capacity(pairs.len());
    let mut next = 0;
    for k in 0..n {
        let mut demand = DMatrix::<C64>::zeros(m, m);
        while next < pairs.len() && pairs[next].0.i + pairs[next].0.j == k {
            let (pair, t) = &pairs[next];
            let lookup = |c: usize, bin: usize| match &inverses[grid.flat(c, bin)] {
                Inverse::Ready(g) => Ok(g),
                _ => Err(Error::SingularPureSpectrum { at: BinRef { channel: c, bin } }),
            };
            let ga = lookup(pair.p, pair.i)?;
            let gb = lookup(pair.q, pair.j)?;
            let tv = transfer_vector(t, ga, gb, pair.p, pair.q);
            for a in 0..m {
                for c in 0..m {
                    demand[(a, c)] += tv[a].conj() * tv[c];
                }
            }
            transfers.push(Interaction { pair: *pair, transfer: tv });
            next += 1;
        }
        for c in 0..channels {
            let at = BinRef { channel: c, bin: k };
            let sp = s.at(c, k) - demand.scale(w);
            let h = factor_matrix(&sp, at).map_err(|e| match e {
                Error::NotPsd { eigenvalue, .. } => Error::InfeasibleBispectrum { at, deficit: -eigenvalue },
                other => other,
            })?;
            let flat = grid.flat(c, k);
            inverses[flat] = match &h {
                None => Inverse::Zero,
                Some(h) => match invert_matrix(h, at) {
                    Ok(g) => Inverse::Ready(g),
                    Err(_) => Inverse::Singular,
                },
            };
            factors[flat] = h;
            *pure.at_mut(c, k) = sp;
        }
    }
    let inverse = inverses
        .into_iter()
        .map(|v| match v {
            Inverse::Ready(g) => Some(g),
            _ => None,
        })
        .collect();
    Ok(PureSpectrum {
        interaction: partition(s, &pure),
        pure,
        factor: SpectralFactor::from_parts(grid.clone(), factors),
        inverse: InverseFactor::from_parts(grid, inverse),
        interactions: transfers,
        weight,
    })
}
