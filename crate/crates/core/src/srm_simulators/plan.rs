use crate::decomposition::{factor_spectrum, SpectralFactor};
use crate::error::{Error, Result};
use crate::pure_spectrum::{
    compute_pure_multivariate_with, compute_pure_univariate_with, interaction_pairs, InteractionWeight, PureSpectrum,
};
use crate::spectral_models::{CrossBispectrum, CrossSpectrum, FrequencyGrid, PairIndex};
use crate::C64;

use super::Method;

/// Random phase carried by a component, as indices into a `PhaseSet`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseSignature {
    Single(usize),
    /// `phi[first] + phi[second]` with `first <= second`.
    Sum(usize, usize),
}

impl PhaseSignature {
    pub fn sum(a: usize, b: usize) -> Self {
        PhaseSignature::Sum(a.min(b), a.max(b))
    }

    pub fn evaluate(self, phases: &[f64]) -> f64 {
        match self {
            PhaseSignature::Single(a) => phases[a],
            PhaseSignature::Sum(a, b) => phases[a] + phases[b],
        }
    }

    /// `(phase index, coefficient)` with merged duplicates.
    pub fn coefficients(self) -> Vec<(usize, i32)> {
        match self {
            PhaseSignature::Single(a) => vec![(a, 1)],
            PhaseSignature::Sum(a, b) if a == b => vec![(a, 2)],
            PhaseSignature::Sum(a, b) => vec![(a, 1), (b, 1)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentKind {
    Linear { channel: usize, bin: usize },
    Interaction(PairIndex),
}

/// One complex exponential of the sum: `f_a += Re[amplitude[a] e^{i(nu t + phase)}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub kind: ComponentKind,
    /// Frequency in units of `delta_omega / period_blocks`.
    pub frequency_index: u64,
    pub signature: PhaseSignature,
    pub amplitude: Vec<C64>,
}

impl Component {
    /// Offset index of the FFT channel and the integer bin it occupies.
    pub fn channel_slot(&self, grid: &FrequencyGrid) -> (u64, usize) {
        match self.kind {
            ComponentKind::Linear { channel, bin } => (grid.offset_index(channel), bin),
            ComponentKind::Interaction(p) => (grid.offset_index(p.p) + grid.offset_index(p.q), p.i + p.j),
        }
    }
}

/// The full term set of one simulator on one grid.
#[derive(Clone, Debug)]
pub struct SynthesisPlan {
    grid: FrequencyGrid,
    method: Method,
    components: Vec<Component>,
    pure: Option<PureSpectrum>,
}

fn linear_components(factor: &SpectralFactor, out: &mut Vec<Component>) {
    let grid = factor.grid();
    let scale = 2.0 * grid.delta_omega().sqrt();
    for channel in 0..grid.channels() {
        for bin in 0..grid.bins() {
            let Some(h) = factor.at(channel, bin) else { continue };
            let amplitude: Vec<C64> = (0..grid.variates()).map(|a| h[(a, channel)].conj() * scale).collect();
            if amplitude.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            out.push(Component {
                kind: ComponentKind::Linear { channel, bin },
                frequency_index: grid.frequency_index(channel, bin),
                signature: PhaseSignature::Single(grid.flat(channel, bin)),
                amplitude,
            });
        }
    }
}

fn interaction_component(grid: &FrequencyGrid, pair: PairIndex, amplitude: Vec<C64>) -> Component {
    Component {
        kind: ComponentKind::Interaction(pair),
        frequency_index: grid.frequency_index(pair.p, pair.i) + grid.frequency_index(pair.q, pair.j),
        signature: PhaseSignature::sum(grid.flat(pair.p, pair.i), grid.flat(pair.q, pair.j)),
        amplitude,
    }
}

impl SynthesisPlan {
    /// Linear terms from the factor of `s`.
    pub fn second_order(s: &CrossSpectrum) -> Result<Self> {
        let mut components = Vec::new();
        linear_components(&factor_spectrum(s)?, &mut components);
        Ok(SynthesisPlan { grid: s.grid().clone(), method: Method::SecondOrder, components, pure: None })
    }

    pub fn third_order(s: &CrossSpectrum, b: &CrossBispectrum) -> Result<Self> {
        Self::third_order_with(s, b, InteractionWeight::default())
    }

    /// Linear terms from the pure spectrum plus one term per interacting pair.
    pub fn third_order_with(s: &CrossSpectrum, b: &CrossBispectrum, weight: InteractionWeight) -> Result<Self> {
        let pure = compute_pure_multivariate_with(s, b, weight)?;
        let grid = s.grid().clone();
        let mut components = Vec::new();
        linear_components(&pure.factor, &mut components);
        let scale = 2.0 * grid.delta_omega();
        for it in &pure.interactions {
            let amplitude: Vec<C64> = it.transfer.iter().map(|t| t * scale).collect();
            if amplitude.iter().any(|z| z.norm() > 0.0) {
                components.push(interaction_component(&grid, it.pair, amplitude));
            }
        }
        Ok(SynthesisPlan { grid, method: Method::ThirdOrderMultivariate, components, pure: Some(pure) })
    }

    /// Scalar form for one variate: amplitudes `2 sqrt(S_p dw)` and `2 |B| dw / sqrt(S_p S_p)`.
    pub fn third_order_univariate(s: &CrossSpectrum, b: &CrossBispectrum) -> Result<Self> {
        Self::third_order_univariate_with(s, b, InteractionWeight::default())
    }

    pub fn third_order_univariate_with(s: &CrossSpectrum, b: &CrossBispectrum, weight: InteractionWeight) -> Result<Self> {
        let grid = s.grid().clone();
        if grid.variates() != 1 {
            return Err(Error::Unsupported(format!(
                "univariate third-order method needs one variate, grid has {}",
                grid.variates()
            )));
        }
        let pure = compute_pure_univariate_with(s, b, weight)?;
        let dw = grid.delta_omega();
        let sp: Vec<f64> = (0..grid.bins()).map(|k| pure.pure.at(0, k)[(0, 0)].re).collect();
        let mut components = Vec::new();
        for (k, &v) in sp.iter().enumerate() {
            if v > 0.0 {
                components.push(Component {
                    kind: ComponentKind::Linear { channel: 0, bin: k },
                    frequency_index: grid.frequency_index(0, k),
                    signature: PhaseSignature::Single(k),
                    amplitude: vec![C64::new(2.0 * (v * dw).sqrt(), 0.0)],
                });
            }
        }
        for (pair, t) in interaction_pairs(b) {
            let bij = t.get(0, 0, 0);
            let magnitude = 2.0 * bij.norm() * dw / (sp[pair.i] * sp[pair.j]).sqrt();
            let biphase = crate::decomposition::phase_angle(bij);
            components.push(interaction_component(&grid, pair, vec![C64::from_polar(magnitude, -biphase)]));
        }
        Ok(SynthesisPlan { grid, method: Method::ThirdOrderUnivariate, components, pure: Some(pure) })
    }

    /// Same term set under a different method tag, e.g. for FFT records.
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn pure_spectrum(&self) -> Option<&PureSpectrum> {
        self.pure.as_ref()
    }

    pub fn linear_count(&self) -> usize {
        self.components.iter().filter(|c| matches!(c.kind, ComponentKind::Linear { .. })).count()
    }

    pub fn interaction_count(&self) -> usize {
        self.components.len() - self.linear_count()
    }

    /// Largest component frequency index.
    pub fn max_frequency_index(&self) -> u64 {
        self.components.iter().map(|c| c.frequency_index).max().unwrap_or(0)
    }
}
