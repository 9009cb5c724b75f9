//! Flat binary matrix files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `b"CAMX"`               |
//! | 4      | 4    | dtype code ([`DTypeCode`])    |
//! | 8      | 8    | rows                          |
//! | 16     | 8    | cols                          |
//! | 24     | ...  | `rows*cols` elements, row-major |

use super::MatrixBuffer;
use crate::error::{Error, Result};
use crate::scalar::{DTypeCode, Element};
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"CAMX";
const HEADER_LEN: usize = 24;

pub fn encode<T: Element>(m: &MatrixBuffer<T>) -> Vec<u8> {
    let width = (T::DTYPE.width_bits() / 8) as usize;
    let mut out = Vec::with_capacity(HEADER_LEN + m.data().len() * width);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(T::DTYPE as u32).to_le_bytes());
    out.extend_from_slice(&m.rows().to_le_bytes());
    out.extend_from_slice(&m.cols().to_le_bytes());
    for &v in m.data() {
        v.write_le(&mut out);
    }
    out
}

/// Element type recorded in a file header.
pub fn peek_dtype(bytes: &[u8]) -> Result<DTypeCode> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::MatrixFile(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[0..4] != MAGIC {
        return Err(Error::MatrixFile("bad magic".into()));
    }
    let code = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    DTypeCode::from_u32(code).ok_or_else(|| Error::MatrixFile(format!("unknown dtype code {code}")))
}

pub fn decode<T: Element>(bytes: &[u8]) -> Result<MatrixBuffer<T>> {
    let code = peek_dtype(bytes)?;
    if code != T::DTYPE {
        return Err(Error::MatrixFile(format!("file holds {code:?}, expected {:?}", T::DTYPE)));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let cols = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let width = (code.width_bits() / 8) as usize;
    let count = rows
        .checked_mul(cols)
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| Error::MatrixFile(format!("{rows}x{cols} is too large")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != count * width {
        return Err(Error::MatrixFile(format!(
            "{rows}x{cols} {code:?} needs {} payload bytes, found {}",
            count * width,
            body.len()
        )));
    }
    let data = body.chunks_exact(width).map(T::read_le).collect();
    MatrixBuffer::new(rows, cols, data)
}

pub fn write<T: Element>(path: &Path, m: &MatrixBuffer<T>) -> Result<()> {
    std::fs::write(path, encode(m)).map_err(|e| Error::MatrixFile(format!("{}: {e}", path.display())))
}

pub fn read<T: Element>(path: &Path) -> Result<MatrixBuffer<T>> {
    let bytes = std::fs::read(path).map_err(|e| Error::MatrixFile(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use half::f16;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let m = MatrixBuffer::new(1, 2, vec![0x0102u16, 0x0304]).unwrap();
        let bytes = encode(&m);
        assert_eq!(&bytes[..4], b"CAMX");
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert_eq!(&bytes[8..16], &1u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &2u64.to_le_bytes());
        assert_eq!(&bytes[24..], &[0x02, 0x01, 0x04, 0x03]);
    }

    #[test]
    fn rejects_wrong_type_and_truncation() {
        let bytes = encode(&MatrixBuffer::<f32>::random(2, 2, 1));
        assert!(decode::<f64>(&bytes).is_err());
        assert!(decode::<f32>(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode::<f32>(&bad).is_err());
        assert_eq!(peek_dtype(&bytes).unwrap(), DTypeCode::F32);
    }

    proptest! {
        #[test]
        fn round_trip(rows in 0u64..6, cols in 0u64..6, seed in any::<u64>()) {
            let a = MatrixBuffer::<u32>::random(rows, cols, seed);
            prop_assert_eq!(decode::<u32>(&encode(&a)).unwrap(), a);
            let h = MatrixBuffer::<f16>::random(rows, cols, seed);
            prop_assert_eq!(decode::<f16>(&encode(&h)).unwrap(), h);
        }
    }
}
