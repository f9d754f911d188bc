use std::fmt;

use nalgebra::DMatrix;

use super::containers::{BispectrumSource, CrossBispectrum, CrossSpectrum, PairIndex, Tensor3};
use crate::error::BinRef;
use crate::C64;

/// Relative tolerance on negative eigenvalues, scaled by the bin trace.
pub const PSD_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonFinite { at: BinRef },
    NonHermitian { at: BinRef, deviation: f64 },
    ComplexDiagonal { at: BinRef, index: usize, imaginary: f64 },
    NegativeDiagonal { at: BinRef, index: usize, value: f64 },
    NotPsd { at: BinRef, eigenvalue: f64 },
    NonFiniteBispectrum { pair: PairIndex },
    /// `B_aaa` differs between the two frequency orderings.
    DiagonalAsymmetry { pair: PairIndex, index: usize, deviation: f64 },
    /// `B_aln(w1, w2)` is not the conjugate of `B_aln(w2, w1)`.
    ConjugateAsymmetry { pair: PairIndex, component: (usize, usize, usize), deviation: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { at } => write!(f, "non-finite entry at {at}"),
            Violation::NonHermitian { at, deviation } => {
                write!(f, "not Hermitian at {at} (deviation {deviation:e})")
            }
            Violation::ComplexDiagonal { at, index, imaginary } => {
                write!(f, "diagonal {index} not real at {at} (imaginary part {imaginary:e})")
            }
            Violation::NegativeDiagonal { at, index, value } => {
                write!(f, "diagonal {index} negative at {at} ({value:e})")
            }
            Violation::NotPsd { at, eigenvalue } => {
                write!(f, "not positive semidefinite at {at} (eigenvalue {eigenvalue:e})")
            }
            Violation::NonFiniteBispectrum { pair } => write!(f, "non-finite bispectrum at {pair}"),
            Violation::DiagonalAsymmetry { pair, index, deviation } => {
                write!(f, "B[{index},{index},{index}] not symmetric at {pair} (deviation {deviation:e})")
            }
            Violation::ConjugateAsymmetry { pair, component, deviation } => write!(
                f,
                "B[{},{},{}] not conjugate symmetric at {pair} (deviation {deviation:e})",
                component.0, component.1, component.2
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Smallest eigenvalue of the Hermitian part of `s`.
pub(crate) fn min_eigenvalue(s: &DMatrix<C64>) -> f64 {
    let h = (s + s.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn hermitian_deviation(s: &DMatrix<C64>) -> f64 {
    (s - s.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn trace_re(s: &DMatrix<C64>) -> f64 {
    (0..s.nrows()).map(|i| s[(i, i)].re).sum()
}

pub fn validate_spectrum(s: &CrossSpectrum) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (channel, bin, mat) in s.iter() {
        let at = BinRef { channel, bin };
        if mat.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            report.violations.push(Violation::NonFinite { at });
            continue;
        }
        let scale = mat.norm().max(f64::MIN_POSITIVE);
        let deviation = hermitian_deviation(mat);
        if deviation > SYMMETRY_TOLERANCE * scale {
            report.violations.push(Violation::NonHermitian { at, deviation });
        }
        for i in 0..mat.nrows() {
            let d = mat[(i, i)];
            if d.im.abs() > SYMMETRY_TOLERANCE * scale {
                report.violations.push(Violation::ComplexDiagonal { at, index: i, imaginary: d.im });
            }
            if d.re < -PSD_TOLERANCE * scale {
                report.violations.push(Violation::NegativeDiagonal { at, index: i, value: d.re });
            }
        }
        let eig = min_eigenvalue(mat);
        if eig < -PSD_TOLERANCE * trace_re(mat).max(0.0) {
            report.violations.push(Violation::NotPsd { at, eigenvalue: eig });
        }
    }
    report
}

fn compare_pair(report: &mut ValidationReport, pair: PairIndex, x: &Tensor3, y: &Tensor3) {
    if !x.is_finite() {
        report.violations.push(Violation::NonFiniteBispectrum { pair });
        return;
    }
    let m = x.dim();
    for a in 0..m {
        for l in 0..m {
            for n in 0..m {
                let u = x.get(a, l, n);
                let v = y.get(a, l, n);
                let scale = u.norm().max(v.norm()).max(f64::MIN_POSITIVE);
                if a == l && l == n {
                    let deviation = (u - v).norm();
                    if deviation > SYMMETRY_TOLERANCE * scale {
                        report.violations.push(Violation::DiagonalAsymmetry { pair, index: a, deviation });
                    }
                }
                let deviation = (u - v.conj()).norm();
                if deviation > SYMMETRY_TOLERANCE * scale {
                    report.violations.push(Violation::ConjugateAsymmetry {
                        pair,
                        component: (a, l, n),
                        deviation,
                    });
                }
            }
        }
    }
}

pub fn validate_bispectrum(b: &CrossBispectrum) -> ValidationReport {
    let mut report = ValidationReport::default();
    let keys: Vec<PairIndex> = match b.source() {
        BispectrumSource::Zero => return report,
        BispectrumSource::Sparse(map) => {
            let mut keys: Vec<PairIndex> = map.keys().flat_map(|k| [*k, k.swapped()]).collect();
            keys.sort();
            keys.dedup();
            keys
        }
        BispectrumSource::Model(_) => {
            let g = b.grid();
            let mut keys = Vec::new();
            for p in 0..g.channels() {
                for i in 0..g.bins() {
                    for q in 0..g.channels() {
                        for j in 0..g.bins() {
                            keys.push(PairIndex::new(p, i, q, j));
                        }
                    }
                }
            }
            keys
        }
    };
    for key in keys {
        // Each unordered pair once; the self-paired case checks reality.
        if (key.q, key.j) < (key.p, key.i) {
            continue;
        }
        let x = b.at(key);
        let y = b.at(key.swapped());
        compare_pair(&mut report, key, &x, &y);
        if key.swapped() != key && !y.is_finite() {
            report.violations.push(Violation::NonFiniteBispectrum { pair: key.swapped() });
        }
    }
    report
}
