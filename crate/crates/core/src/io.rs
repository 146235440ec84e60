//! File formats: JSON documents and the binary eigenvector container.
//!
//! An eigenvector file is one JSON header line followed by the raw payload:
//! `count` columns of `dimension` complex numbers, each stored as two
//! little-endian `f64` (real, imaginary). The header carries the SHA-256 of
//! the payload.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::ModelSpec;

pub const SCHEMA: u32 = 1;
const LAYOUT: &str = "column_major_complex_f64_le";

fn io_err(context: String) -> impl FnOnce(std::io::Error) -> Error {
    move |source| Error::Io { context, source }
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        context: format!("parsing {}", path.display()),
        source,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string<S: Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        context: "serializing".into(),
        source,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    write_bytes(path, to_json_string(value)?.as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(io_err(format!("writing {}", path.display())))
}

/// Parse and validate a model description.
pub fn load_model(path: &Path) -> Result<ModelSpec<f64>> {
    let spec: ModelSpec<f64> = read_json(path)?;
    spec.validate()?;
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct VectorHeader {
    schema: u32,
    dimension: usize,
    count: usize,
    layout: String,
    checksum: String,
}

fn checksum(payload: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(payload)))
}

/// Serialize eigenvector columns into the container format.
pub fn encode_eigenvectors(vectors: &[Vec<Complex64>]) -> Result<Vec<u8>> {
    let dimension = vectors.first().map_or(0, Vec::len);
    if let Some(bad) = vectors.iter().find(|v| v.len() != dimension) {
        return Err(Error::Dimension { expected: dimension, got: bad.len() });
    }
    let mut payload = Vec::with_capacity(16 * dimension * vectors.len());
    for z in vectors.iter().flatten() {
        payload.extend_from_slice(&z.re.to_le_bytes());
        payload.extend_from_slice(&z.im.to_le_bytes());
    }
    let header = VectorHeader {
        schema: SCHEMA,
        dimension,
        count: vectors.len(),
        layout: LAYOUT.into(),
        checksum: checksum(&payload),
    };
    let mut out = serde_json::to_vec(&header).map_err(|source| Error::Json {
        context: "serializing eigenvector header".into(),
        source,
    })?;
    out.push(b'\n');
    out.extend_from_slice(&payload);
    Ok(out)
}

pub fn decode_eigenvectors(bytes: &[u8]) -> Result<Vec<Vec<Complex64>>> {
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Corrupt("missing header line".into()))?;
    let header: VectorHeader = serde_json::from_slice(&bytes[..split])
        .map_err(|e| Error::Corrupt(format!("unreadable header: {e}")))?;
    if header.schema != SCHEMA || header.layout != LAYOUT {
        return Err(Error::Corrupt(format!(
            "unsupported schema {} / layout {}",
            header.schema, header.layout
        )));
    }
    let payload = &bytes[split + 1..];
    let expected = header
        .dimension
        .checked_mul(header.count)
        .and_then(|x| x.checked_mul(16))
        .ok_or_else(|| Error::Corrupt("header sizes overflow".into()))?;
    if payload.len() != expected {
        return Err(Error::Corrupt(format!("payload has {} bytes, header implies {expected}", payload.len())));
    }
    if checksum(payload) != header.checksum {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8-byte chunk"));
    let values: Vec<Complex64> = payload.chunks_exact(16).map(|c| Complex64::new(f(&c[..8]), f(&c[8..]))).collect();
    if header.dimension == 0 {
        return Ok(vec![Vec::new(); header.count]);
    }
    Ok(values.chunks(header.dimension).map(<[Complex64]>::to_vec).collect())
}

pub fn write_eigenvectors(path: &Path, vectors: &[Vec<Complex64>]) -> Result<()> {
    let bytes = encode_eigenvectors(vectors)?;
    let mut f = fs::File::create(path).map_err(io_err(format!("creating {}", path.display())))?;
    f.write_all(&bytes).map_err(io_err(format!("writing {}", path.display())))
}

pub fn read_eigenvectors(path: &Path) -> Result<Vec<Vec<Complex64>>> {
    let bytes = fs::read(path).map_err(io_err(format!("reading {}", path.display())))?;
    decode_eigenvectors(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Vec<Complex64>> {
        vec![
            vec![Complex64::new(1.0, -0.0), Complex64::new(f64::MIN_POSITIVE, 3.5)],
            vec![Complex64::new(-2.25, 1e300), Complex64::new(0.1, 0.2)],
        ]
    }

    #[test]
    fn eigenvector_round_trip() {
        let v = sample();
        let bytes = encode_eigenvectors(&v).unwrap();
        let back = decode_eigenvectors(&bytes).unwrap();
        assert_eq!(v.len(), back.len());
        for (a, b) in v.iter().flatten().zip(back.iter().flatten()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.bin");
        write_eigenvectors(&path, &v).unwrap();
        assert_eq!(read_eigenvectors(&path).unwrap(), v);
    }

    #[test]
    fn corruption_detected() {
        let mut bytes = encode_eigenvectors(&sample()).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        assert!(matches!(decode_eigenvectors(&bytes), Err(Error::Corrupt(_))));
        let short = &encode_eigenvectors(&sample()).unwrap()[..40];
        assert!(decode_eigenvectors(short).is_err());
        assert!(matches!(
            encode_eigenvectors(&[vec![Complex64::new(0.0, 0.0)], vec![]]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn model_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        fs::write(&path, r#"{"family":"hn","t":1.0,"gamma":0.5,"sites":8,"boundary":"obc"}"#).unwrap();
        let m = load_model(&path).unwrap();
        assert_eq!(m.sites(), 8);
        fs::write(&path, r#"{"family":"hn","t":1.0}"#).unwrap();
        assert!(matches!(load_model(&path), Err(Error::Json { .. })));
        assert!(matches!(load_model(&dir.path().join("none.json")), Err(Error::Io { .. })));
    }
}
