//! File formats.
//!
//! `T3B` is a flat little-endian binary tensor: the magic bytes `T3B1`, then
//! `n1`, `n2`, `n3` as `u32`, then `n1 * n2 * n3` `f64` values in
//! [`Tensor3`] layout order (slice-major, column-major within a slice).
//!
//! Label files hold one 1-based integer per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

pub const T3B_MAGIC: &[u8; 4] = b"T3B1";
const HEADER_LEN: usize = 4 + 3 * 4;

/// Serializes `t` as T3B bytes.
pub fn encode_t3b(t: &Tensor3) -> Vec<u8> {
    let (n1, n2, n3) = t.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * t.len());
    out.extend_from_slice(T3B_MAGIC);
    for n in [n1, n2, n3] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in t.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses T3B bytes. Rejects a wrong magic, truncated or oversized payloads
/// and non-finite values.
pub fn decode_t3b(bytes: &[u8]) -> Result<Tensor3> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "T3B: {} bytes is shorter than the 16-byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != T3B_MAGIC {
        return Err(Error::Format(format!("T3B: bad magic {:?}", &bytes[..4])));
    }
    let dim = |i: usize| {
        let o = 4 + 4 * i;
        u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize
    };
    let (n1, n2, n3) = (dim(0), dim(1), dim(2));
    let count = n1
        .checked_mul(n2)
        .and_then(|v| v.checked_mul(n3))
        .ok_or_else(|| Error::Format("T3B: dimension product overflows".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != count * 8 {
        return Err(Error::Format(format!(
            "T3B: {n1}x{n2}x{n3} needs {} payload bytes, found {}",
            count * 8,
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Tensor3::new((n1, n2, n3), data)
}

pub fn write_t3b(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, &encode_t3b(t))
}

pub fn read_t3b(path: impl AsRef<Path>) -> Result<Tensor3> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_t3b(&bytes)
}

/// Parses labels, one integer per line; blank lines are skipped.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.trim()
                .parse::<usize>()
                .map_err(|e| Error::Format(format!("label line {}: {e}", n + 1)))
        })
        .collect()
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text)
}

pub fn format_labels(labels: &[usize]) -> String {
    let mut s = String::with_capacity(labels.len() * 3);
    for l in labels {
        s.push_str(&l.to_string());
        s.push('\n');
    }
    s
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    write_atomic(path.as_ref(), format_labels(labels).as_bytes())
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_tensor;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_bit_exact() {
        let t = Tensor3::new((1, 2, 1), vec![1.0, -2.5]).unwrap();
        let bytes = encode_t3b(&t);
        let mut expect = b"T3B1".to_vec();
        expect.extend_from_slice(&[1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0]);
        expect.extend_from_slice(&1.0f64.to_le_bytes());
        expect.extend_from_slice(&(-2.5f64).to_le_bytes());
        assert_eq!(bytes, expect);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let mut bytes = encode_t3b(&random_tensor((2, 2, 2), 1));
        assert!(decode_t3b(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_t3b(&bytes[..10]).is_err());
        bytes[3] = b'2';
        assert!(matches!(decode_t3b(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn labels_parse() {
        assert_eq!(parse_labels("1\n2\n\n3\n").unwrap(), vec![1, 2, 3]);
        assert!(parse_labels("1\nx\n").is_err());
        assert_eq!(format_labels(&[3, 1]), "3\n1\n");
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.t3b");
        let t = random_tensor((3, 2, 4), 9);
        write_t3b(&p, &t).unwrap();
        assert_eq!(read_t3b(&p).unwrap(), t);
        assert!(matches!(read_t3b(dir.path().join("missing")), Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn t3b_roundtrip(n1 in 1usize..5, n2 in 1usize..5, n3 in 1usize..4, seed in any::<u64>()) {
            let t = random_tensor((n1, n2, n3), seed);
            prop_assert_eq!(decode_t3b(&encode_t3b(&t)).unwrap(), t);
        }
    }
}
