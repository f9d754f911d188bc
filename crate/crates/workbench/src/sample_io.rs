//! Sample files.
//!
//! Binary layout, little endian:
//!
//! | bytes | field |
//! |------:|-------|
//! | 4 | magic `SRM3` |
//! | 4 | format version (u32) |
//! | 4 | variates (u32) |
//! | 4 | samples per variate (u32) |
//! | 8 | time step (f64) |
//! | 1 | method tag (u8) |
//! | 8 | seed (u64) |
//! | 4 | realization (u32) |
//!
//! followed by `variates * samples` f64 values, variate-major.
//! Files are written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use srm_core::srm_simulators::{Method, SampleRecord};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"SRM3";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 37;

#[derive(Debug, Error)]
pub enum SampleFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a sample file (bad magic)")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported format version {version}")]
    UnsupportedVersion { path: PathBuf, version: u32 },
    #[error("{path}: unknown method tag {tag}")]
    UnknownMethod { path: PathBuf, tag: u8 },
    #[error("{path}: truncated, expected {expected} bytes, found {found}")]
    Truncated { path: PathBuf, expected: usize, found: usize },
    #[error("{path}: {extra} bytes after the payload")]
    TrailingBytes { path: PathBuf, extra: usize },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SampleFileError + '_ {
    move |source| SampleFileError::Io { path: path.to_path_buf(), source }
}

pub fn encode(record: &SampleRecord) -> Vec<u8> {
    let (m, n) = (record.variates(), record.len());
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m * n);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&record.delta_t.to_le_bytes());
    out.push(record.method.tag());
    out.extend_from_slice(&record.seed.to_le_bytes());
    out.extend_from_slice(&record.realization.to_le_bytes());
    for series in &record.values {
        for v in series {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn le<const K: usize>(bytes: &[u8], at: usize) -> [u8; K] {
    bytes[at..at + K].try_into().expect("slice length")
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<SampleRecord, SampleFileError> {
    let path = path.to_path_buf();
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(SampleFileError::BadMagic { path });
    }
    if bytes.len() < HEADER_LEN {
        return Err(SampleFileError::Truncated { path, expected: HEADER_LEN, found: bytes.len() });
    }
    let version = u32::from_le_bytes(le(bytes, 4));
    if version != FORMAT_VERSION {
        return Err(SampleFileError::UnsupportedVersion { path, version });
    }
    let m = u32::from_le_bytes(le(bytes, 8)) as usize;
    let n = u32::from_le_bytes(le(bytes, 12)) as usize;
    let delta_t = f64::from_le_bytes(le(bytes, 16));
    let tag = bytes[24];
    let method = Method::from_tag(tag).ok_or(SampleFileError::UnknownMethod { path: path.clone(), tag })?;
    let seed = u64::from_le_bytes(le(bytes, 25));
    let realization = u32::from_le_bytes(le(bytes, 33));
    let expected = HEADER_LEN + 8 * m * n;
    if bytes.len() < expected {
        return Err(SampleFileError::Truncated { path, expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(SampleFileError::TrailingBytes { path, extra: bytes.len() - expected });
    }
    let values = (0..m)
        .map(|a| (0..n).map(|r| f64::from_le_bytes(le(bytes, HEADER_LEN + 8 * (a * n + r)))).collect())
        .collect();
    Ok(SampleRecord { values, delta_t, method, seed, realization, period_samples: None })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SampleFileError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    // Temporary files are created owner-only; results are ordinary files.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644)).map_err(io_err(path))?;
    }
    tmp.persist(path).map_err(|e| SampleFileError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

pub fn write_samples(path: &Path, record: &SampleRecord) -> Result<(), SampleFileError> {
    write_atomic(path, &encode(record))
}

pub fn read_samples(path: &Path) -> Result<SampleRecord, SampleFileError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode(&bytes, path)
}

/// CSV with a `t,f1,...,fm` header and 17 significant digits per value.
pub fn encode_csv(record: &SampleRecord) -> Result<Vec<u8>, SampleFileError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| SampleFileError::Csv { path: PathBuf::new(), message: e.to_string() };
    let mut header = vec!["t".to_string()];
    header.extend((1..=record.variates()).map(|a| format!("f{a}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in 0..record.len() {
        let mut row = vec![format!("{:.16e}", r as f64 * record.delta_t)];
        row.extend(record.values.iter().map(|s| format!("{:.16e}", s[r])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| SampleFileError::Csv { path: PathBuf::new(), message: e.to_string() })
}

pub fn write_csv(path: &Path, record: &SampleRecord) -> Result<(), SampleFileError> {
    let bytes = encode_csv(record).map_err(|e| match e {
        SampleFileError::Csv { message, .. } => SampleFileError::Csv { path: path.to_path_buf(), message },
        other => other,
    })?;
    write_atomic(path, &bytes)
}

/// Reads the value columns of a CSV sample file, `values[a][r]`.
pub fn read_csv_values(path: &Path) -> Result<Vec<Vec<f64>>, SampleFileError> {
    let bad = |message: String| SampleFileError::Csv { path: path.to_path_buf(), message };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let m = rdr.headers().map_err(|e| bad(e.to_string()))?.len().saturating_sub(1);
    let mut values = vec![Vec::new(); m];
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        for (a, series) in values.iter_mut().enumerate() {
            let field = row.get(a + 1).ok_or_else(|| bad(format!("row {} has too few columns", line + 2)))?;
            series.push(field.parse().map_err(|_| bad(format!("row {}: cannot parse {field:?}", line + 2)))?);
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> SampleRecord {
        SampleRecord {
            values: vec![vec![1.0, -2.5, std::f64::consts::PI], vec![0.1, 1e-300, -0.0]],
            delta_t: std::f64::consts::FRAC_PI_2,
            method: Method::ThirdOrderMultivariateFft,
            seed: u64::MAX - 3,
            realization: 17,
            period_samples: None,
        }
    }

    #[test]
    fn header_is_37_bytes() {
        let bytes = encode(&record());
        assert_eq!(bytes.len(), HEADER_LEN + 6 * 8);
        assert_eq!(&bytes[..4], b"SRM3");
        assert_eq!(bytes[24], 3);
    }

    #[test]
    fn decode_inverts_encode() {
        let r = record();
        let back = decode(&encode(&r), Path::new("x")).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.values[1][2].to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn corrupt_headers() {
        let mut bytes = encode(&record());
        bytes[4] = 9;
        assert!(matches!(decode(&bytes, Path::new("x")), Err(SampleFileError::UnsupportedVersion { version: 9, .. })));
        let mut bytes = encode(&record());
        bytes[24] = 42;
        assert!(matches!(decode(&bytes, Path::new("x")), Err(SampleFileError::UnknownMethod { tag: 42, .. })));
        let mut bytes = encode(&record());
        bytes.push(0);
        assert!(matches!(decode(&bytes, Path::new("x")), Err(SampleFileError::TrailingBytes { extra: 1, .. })));
        assert!(matches!(decode(&bytes[..20], Path::new("x")), Err(SampleFileError::Truncated { .. })));
    }
}
