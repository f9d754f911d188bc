//! Spectra and bispectra read from CSV tables.
//!
//! Spectrum rows are `channel,k,re11,im11,re12,im12,...` over the m×m matrix in
//! row-major order, one row per grid point. Bispectrum rows are sparse:
//! `p,i,q,j,` then m³ re/im pairs in `(a,l,n)` order. An entry whose swapped
//! partner `(q,j,p,i)` is absent gets the conjugate tensor there. All indices
//! count from zero, and the first line of each file is a header.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use srm_core::spectral_models::{
    validate_bispectrum, validate_spectrum, CrossBispectrum, CrossSpectrum, FrequencyGrid, PairIndex, Tensor3,
};
use srm_core::C64;

use crate::error::{Result, WorkbenchError};

fn table_err(path: &Path, message: impl Into<String>) -> WorkbenchError {
    WorkbenchError::Table { path: path.to_path_buf(), message: message.into() }
}

fn rows(path: &Path) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => WorkbenchError::io(path, source),
        other => table_err(path, format!("{other:?}")),
    })?;
    rdr.records()
        .enumerate()
        .map(|(i, r)| r.map(|r| (i + 2, r)).map_err(|e| table_err(path, e.to_string())))
        .collect()
}

fn parse_index(path: &Path, line: usize, row: &csv::StringRecord, col: usize) -> Result<usize> {
    let f = &row[col];
    f.parse().map_err(|_| table_err(path, format!("line {line}: column {}: bad index {f:?}", col + 1)))
}

fn parse_complex(path: &Path, line: usize, row: &csv::StringRecord, start: usize, count: usize) -> Result<Vec<C64>> {
    (0..count)
        .map(|k| {
            let parse = |c: usize| -> Result<f64> {
                let f = &row[c];
                f.parse().map_err(|_| table_err(path, format!("line {line}: column {}: bad number {f:?}", c + 1)))
            };
            Ok(C64::new(parse(start + 2 * k)?, parse(start + 2 * k + 1)?))
        })
        .collect()
}

pub fn read_spectrum(path: &Path, grid: &FrequencyGrid) -> Result<CrossSpectrum> {
    let m = grid.variates();
    let width = 2 + 2 * m * m;
    let mut cells: Vec<Option<DMatrix<C64>>> = vec![None; grid.len()];
    for (line, row) in rows(path)? {
        if row.len() != width {
            return Err(table_err(path, format!("line {line}: expected {width} columns, found {}", row.len())));
        }
        let (c, k) = (parse_index(path, line, &row, 0)?, parse_index(path, line, &row, 1)?);
        if c >= grid.channels() || k >= grid.bins() {
            return Err(table_err(path, format!("line {line}: channel {c} bin {k} is outside the grid")));
        }
        let slot = &mut cells[grid.flat(c, k)];
        if slot.is_some() {
            return Err(table_err(path, format!("line {line}: channel {c} bin {k} appears twice")));
        }
        *slot = Some(DMatrix::from_row_slice(m, m, &parse_complex(path, line, &row, 2, m * m)?));
    }
    if let Some(i) = cells.iter().position(Option::is_none) {
        let n = grid.bins();
        return Err(table_err(path, format!("no row for channel {} bin {}", i / n, i % n)));
    }
    let s = CrossSpectrum::from_fn(grid.clone(), |c, k| cells[grid.flat(c, k)].clone().expect("all cells present"))?;
    let report = validate_spectrum(&s);
    if let Some(v) = report.violations.first() {
        return Err(table_err(path, format!("invalid spectrum: {v}")));
    }
    Ok(s)
}

pub fn read_bispectrum(path: &Path, grid: &FrequencyGrid) -> Result<CrossBispectrum> {
    let m = grid.variates();
    let width = 4 + 2 * m * m * m;
    let mut given: BTreeMap<PairIndex, Tensor3> = BTreeMap::new();
    for (line, row) in rows(path)? {
        if row.len() != width {
            return Err(table_err(path, format!("line {line}: expected {width} columns, found {}", row.len())));
        }
        let idx: Vec<usize> = (0..4).map(|c| parse_index(path, line, &row, c)).collect::<Result<_>>()?;
        let key = PairIndex::new(idx[0], idx[1], idx[2], idx[3]);
        if key.p >= m || key.q >= m || key.i >= grid.bins() || key.j >= grid.bins() {
            return Err(table_err(path, format!("line {line}: pair {key} is outside the grid")));
        }
        let values = parse_complex(path, line, &row, 4, m * m * m)?;
        let t = Tensor3::from_fn(m, |a, l, n| values[(a * m + l) * m + n]);
        if given.insert(key, t).is_some() {
            return Err(table_err(path, format!("line {line}: pair {key} appears twice")));
        }
    }
    let mut entries = given.clone();
    for (key, t) in &given {
        entries.entry(key.swapped()).or_insert_with(|| t.conj());
    }
    let b = CrossBispectrum::sparse(grid.clone(), entries)?;
    let report = validate_bispectrum(&b);
    if let Some(v) = report.violations.first() {
        return Err(table_err(path, format!("invalid bispectrum: {v}")));
    }
    Ok(b)
}

pub fn write_spectrum(path: &Path, s: &CrossSpectrum) -> Result<()> {
    let m = s.grid().variates();
    let mut header = vec!["channel".to_string(), "k".to_string()];
    for a in 1..=m {
        for b in 1..=m {
            header.push(format!("re{a}{b}"));
            header.push(format!("im{a}{b}"));
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| table_err(path, e.to_string()))?;
    w.write_record(&header).map_err(|e| table_err(path, e.to_string()))?;
    for (c, k, mat) in s.iter() {
        let mut row = vec![c.to_string(), k.to_string()];
        for a in 0..m {
            for b in 0..m {
                row.push(format!("{:e}", mat[(a, b)].re));
                row.push(format!("{:e}", mat[(a, b)].im));
            }
        }
        w.write_record(&row).map_err(|e| table_err(path, e.to_string()))?;
    }
    w.flush().map_err(|e| WorkbenchError::io(path, e))
}

/// Writes every stored entry of a sparse bispectrum.
pub fn write_bispectrum(path: &Path, b: &CrossBispectrum) -> Result<()> {
    let m = b.grid().variates();
    let keys = b.support().ok_or_else(|| table_err(path, "a model bispectrum has no finite table"))?;
    let mut header: Vec<String> = ["p", "i", "q", "j"].iter().map(|s| s.to_string()).collect();
    for a in 1..=m {
        for l in 1..=m {
            for n in 1..=m {
                header.push(format!("re{a}{l}{n}"));
                header.push(format!("im{a}{l}{n}"));
            }
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| table_err(path, e.to_string()))?;
    w.write_record(&header).map_err(|e| table_err(path, e.to_string()))?;
    for key in keys {
        let t = b.at(key);
        let mut row = vec![key.p.to_string(), key.i.to_string(), key.q.to_string(), key.j.to_string()];
        for a in 0..m {
            for l in 0..m {
                for n in 0..m {
                    row.push(format!("{:e}", t.get(a, l, n).re));
                    row.push(format!("{:e}", t.get(a, l, n).im));
                }
            }
        }
        w.write_record(&row).map_err(|e| table_err(path, e.to_string()))?;
    }
    w.flush().map_err(|e| WorkbenchError::io(path, e))
}
