//! Target second- and third-order spectral inputs.

mod containers;
mod grid;
mod lines;
mod validate;
mod wind;

pub use containers::{BispectrumModel, BispectrumSource, CrossBispectrum, CrossSpectrum, PairIndex, Tensor3};
pub use grid::{FrequencyGrid, OffsetRule, Ratio};
pub use lines::LineTargets;
pub use validate::{validate_bispectrum, validate_spectrum, ValidationReport, Violation, PSD_TOLERANCE};
pub use wind::{build_example_targets, build_kaimal_psd, build_targets_from, davenport_coherence, WindExampleModel};

pub(crate) use validate::{hermitian_deviation, trace_re};
