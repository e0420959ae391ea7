//! Parameter files.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 7 | magic `OPWFNO1` |
//! | 1 | format version (1) |
//! | 32 | `d, d_in, d_out, d_c, kappa, depth, resolution, activation` as u32 |
//! | 8 | bound B as f64 |
//! | 8 | parameter count as u64 |
//! | 8·count | parameters as f64, canonical order |
//! | 4 | CRC32 of everything above |

use std::path::Path;

use super::activation::Activation;
use super::config::FnoConfig;
use super::params::FnoParams;
use crate::{Error, Result};

const MAGIC: &[u8; 7] = b"OPWFNO1";
const VERSION: u8 = 1;
const HEADER: usize = 7 + 1 + 32 + 8 + 8;

pub fn to_bytes(params: &FnoParams) -> Vec<u8> {
    let c = params.config();
    let mut out = Vec::with_capacity(HEADER + 8 * params.data().len() + 4);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    for v in [c.d, c.d_in, c.d_out, c.d_c, c.kappa, c.depth, c.resolution] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&c.activation.code().to_le_bytes());
    out.extend_from_slice(&c.bound.to_le_bytes());
    out.extend_from_slice(&(params.data().len() as u64).to_le_bytes());
    for v in params.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

pub fn from_bytes(bytes: &[u8]) -> Result<FnoParams> {
    if bytes.len() < HEADER + 4 {
        return Err(Error::Corrupt(format!("stream of {} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..7] != MAGIC {
        return Err(Error::Corrupt("bad magic".into()));
    }
    if bytes[7] != VERSION {
        return Err(Error::Corrupt(format!("unsupported version {}", bytes[7])));
    }
    let count = u64::from_le_bytes(bytes[HEADER - 8..HEADER].try_into().unwrap()) as usize;
    let expect = count.checked_mul(8).and_then(|p| p.checked_add(HEADER + 4));
    if expect != Some(bytes.len()) {
        return Err(Error::Corrupt(format!("stream length {} does not match {count} parameters", bytes.len())));
    }
    let body = &bytes[..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }
    let f = |i: usize| u32_at(bytes, 8 + 4 * i) as usize;
    let activation = Activation::from_code(u32_at(bytes, 8 + 28))
        .ok_or_else(|| Error::Corrupt("unknown activation code".into()))?;
    let bound = f64::from_le_bytes(bytes[40..48].try_into().unwrap());
    let config = FnoConfig {
        d: f(0),
        d_in: f(1),
        d_out: f(2),
        d_c: f(3),
        kappa: f(4),
        depth: f(5),
        resolution: f(6),
        activation,
        bound,
    };
    let data = body[HEADER..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    FnoParams::from_vec(config, data).map_err(|e| Error::Corrupt(e.to_string()))
}

/// Load and insist on a given architecture.
pub fn from_bytes_for(bytes: &[u8], expected: &FnoConfig) -> Result<FnoParams> {
    let p = from_bytes(bytes)?;
    if p.config() != expected {
        return Err(Error::Shape(format!("stored architecture {:?} differs from {:?}", p.config(), expected)));
    }
    Ok(p)
}

pub fn write(params: &FnoParams, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_bytes(params))?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<FnoParams> {
    from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn round_trip_and_errors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let p = FnoParams::random(FnoConfig::tiny(2, 2, 2, 16), 1.0, &mut rng).unwrap();
        let b = to_bytes(&p);
        let q = from_bytes(&b).unwrap();
        assert_eq!(to_bytes(&q), b);
        assert!(matches!(from_bytes(&b[..b.len() - 3]), Err(Error::Corrupt(_))));
        let mut flip = b.clone();
        flip[60] ^= 1;
        assert!(matches!(from_bytes(&flip), Err(Error::Corrupt(_))));
        let other = FnoConfig::tiny(3, 2, 2, 16);
        assert!(matches!(from_bytes_for(&b, &other), Err(Error::Shape(_))));
    }
}
