//! GridFunction on disk.
//!
//! Binary layout (little endian): `b"OPWGRID1"`, u8 dim, u8 channels, u16 domain tag
//! (0 cube, 1 gaussian), u32 resolution, u64 payload length in bytes, then the f64
//! values. The JSON descriptor is the serde form of [`GridFunction`].

use std::io::{Read, Write};
use std::path::Path;

use super::{Domain, GridFunction};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"OPWGRID1";
pub const HEADER_LEN: usize = 24;

pub fn to_bytes(f: &GridFunction) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * f.values().len());
    out.extend_from_slice(MAGIC);
    out.push(f.dim() as u8);
    out.push(f.channels() as u8);
    out.extend_from_slice(&f.domain().tag().to_le_bytes());
    out.extend_from_slice(&(f.resolution() as u32).to_le_bytes());
    out.extend_from_slice(&((8 * f.values().len()) as u64).to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<GridFunction> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Corrupt(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Corrupt("bad magic".into()));
    }
    let dim = bytes[8] as usize;
    let channels = bytes[9] as usize;
    let domain = Domain::from_tag(u16::from_le_bytes([bytes[10], bytes[11]]))?;
    let resolution = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let payload = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != payload || payload % 8 != 0 {
        return Err(Error::Corrupt(format!("payload length {} does not match header {payload}", body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    GridFunction::new(dim, resolution, channels, domain, values)
}

pub fn write(path: &Path, f: &GridFunction) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&to_bytes(f))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<GridFunction> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

pub fn to_json(f: &GridFunction) -> Result<String> {
    Ok(serde_json::to_string(f)?)
}

/// Parse a JSON descriptor, re-running every shape and finiteness check.
pub fn from_json(text: &str) -> Result<GridFunction> {
    let raw: GridFunction = serde_json::from_str(text)?;
    GridFunction::new(raw.dim(), raw.resolution(), raw.channels(), raw.domain(), raw.into_values())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let f = GridFunction::from_fn(2, 8, Domain::Gaussian, |x| x[0] - x[1] * 0.5).unwrap();
        let bytes = to_bytes(&f);
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 64);
        assert_eq!(from_bytes(&bytes).unwrap(), f);
        assert!(from_bytes(&bytes[..bytes.len() - 3]).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let f = GridFunction::from_fn(1, 4, Domain::Cube, |x| x[0]).unwrap();
        let text = to_json(&f).unwrap();
        assert_eq!(from_json(&text).unwrap(), f);
        let bad = r#"{"dim":1,"resolution":4,"channels":1,"domain":"cube","values":[1,2,3]}"#;
        assert!(from_json(bad).is_err());
    }
}
