//! Binary tensor container:
//!
//! | bytes | field |
//! |---|---|
//! | 4 | magic `MDNN` |
//! | 1 | version `1` |
//! | 1 | dtype `1` (f64) |
//! | 1 | rank |
//! | 4·rank | dims, u32 LE |
//! | 8·∏dims | payload, f64 LE, row-major |

use std::path::Path;

use crate::tensor::Tensor;
use crate::{Error, Result, Scalar};

pub const MAGIC: &[u8; 4] = b"MDNN";
pub const VERSION: u8 = 1;
pub const DTYPE_F64: u8 = 1;

pub fn encode_container<T: Scalar>(t: &Tensor<T>) -> Result<Vec<u8>> {
    if t.rank() > usize::from(u8::MAX) {
        return Err(Error::Format(format!("rank {} exceeds 255", t.rank())));
    }
    let mut out = Vec::with_capacity(7 + 4 * t.rank() + 8 * t.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, DTYPE_F64, t.rank() as u8]);
    for &d in t.shape() {
        let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} exceeds u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in t.data() {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    Ok(out)
}

pub fn decode_container<T: Scalar>(bytes: &[u8]) -> Result<Tensor<T>> {
    if bytes.len() < 7 {
        return Err(Error::Format(format!("container header truncated ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?} (expected \"MDNN\")", String::from_utf8_lossy(&bytes[..4]))));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported container version {}", bytes[4])));
    }
    if bytes[5] != DTYPE_F64 {
        return Err(Error::Format(format!("unsupported dtype {}", bytes[5])));
    }
    let rank = usize::from(bytes[6]);
    let header = 7 + 4 * rank;
    if bytes.len() < header {
        return Err(Error::Format(format!("container dims truncated: rank {rank}, {} bytes", bytes.len())));
    }
    let shape: Vec<usize> = bytes[7..header]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    if shape.contains(&0) {
        return Err(Error::Format(format!("zero dimension in {shape:?}")));
    }
    let n = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format(format!("shape {shape:?} overflows")))?;
    let expected = n
        .checked_mul(8)
        .and_then(|p| p.checked_add(header))
        .ok_or_else(|| Error::Format(format!("shape {shape:?} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "payload length {} does not match shape {shape:?} (expected {})",
            bytes.len() - header,
            expected - header
        )));
    }
    let data = bytes[header..]
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    Tensor::new(shape, data)
}

pub fn write_container<T: Scalar>(path: impl AsRef<Path>, t: &Tensor<T>) -> Result<()> {
    std::fs::write(path, encode_container(t)?)?;
    Ok(())
}

pub fn read_container<T: Scalar>(path: impl AsRef<Path>) -> Result<Tensor<T>> {
    decode_container(&std::fs::read(path)?)
}
