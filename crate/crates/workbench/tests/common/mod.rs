#![allow(dead_code)]

use std::path::{Path, PathBuf};

use srm_core::spectral_models::LineTargets;
use srm_workbench::tabulated::{write_bispectrum, write_spectrum};

/// Writes the resonance-free preset for `m` variates as CSV tables plus a config
/// that points at them, and returns the config path.
pub fn tabulated_config(dir: &Path, m: usize, method: &str, extra: &str) -> PathBuf {
    let (grid, lines) = LineTargets::resonance_free(m).unwrap();
    let (s, b) = lines.build(&grid).unwrap();
    write_spectrum(&dir.join("spectrum.csv"), &s).unwrap();
    write_bispectrum(&dir.join("bispectrum.csv"), &b).unwrap();
    let rule = if m == 1 { "univariate-ergodic" } else { "multivariate-double-index" };
    let text = format!(
        "schema_version = 1\nmethod = \"{method}\"\nseed = 5\nrealizations = 3\n{extra}\n\
         [grid]\nvariates = {m}\nbins = {}\ndelta_omega = {}\noffset_rule = \"{rule}\"\n\
         [targets]\nsource = \"tabulated\"\nspectrum = \"spectrum.csv\"\nbispectrum = \"bispectrum.csv\"\n\
         [output]\ndir = \"out\"\n",
        grid.bins(),
        grid.delta_omega()
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}
