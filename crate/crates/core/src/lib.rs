//! Simulation of non-Gaussian stationary vector processes that match target
//! spectra and bispectra, with ergodic sample functions.

pub mod decomposition;
pub mod error;
pub mod estimators;
pub mod fft_engine;
pub mod pure_spectrum;
pub mod spectral_models;
pub mod srm_simulators;

pub use error::{BinRef, Error, Result};

pub type C64 = num_complex::Complex<f64>;
