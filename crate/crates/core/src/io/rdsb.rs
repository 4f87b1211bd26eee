//! RDSB binary feature matrices.
//!
//! ```text
//! "RDSB" | 0x01 | n: u32 LE | d: u32 LE | n·d × f64 LE (row-major)
//!        | 0x00                          (no labels)
//!        | 0x01 | n × u32 LE             (labels)
//! ```

use crate::error::{Error, Result};
use crate::kernel::Dataset;

pub const MAGIC: &[u8; 4] = b"RDSB";
pub const VERSION: u8 = 0x01;
const HEADER_LEN: usize = 13;

pub fn encode(dataset: &Dataset) -> Vec<u8> {
    let n = dataset.n();
    let labels = dataset.labels();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * dataset.features().len() + 1 + labels.map_or(0, |_| 4 * n));
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(dataset.d() as u32).to_le_bytes());
    for v in dataset.features() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    match labels {
        None => out.push(0x00),
        Some(labels) => {
            out.push(0x01);
            for l in labels {
                out.extend_from_slice(&l.to_le_bytes());
            }
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Parse {
                offset: self.pos as u64,
                message: format!("truncated file while reading {what}"),
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Dataset> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4, "magic")? != MAGIC {
        return Err(Error::Parse {
            offset: 0,
            message: "bad magic (expected \"RDSB\")".into(),
        });
    }
    let version = cur.take(1, "version")?[0];
    if version != VERSION {
        return Err(Error::Parse {
            offset: 4,
            message: format!("unsupported version {version}"),
        });
    }
    let n = cur.u32("n")? as usize;
    let d = cur.u32("d")? as usize;
    let count = n
        .checked_mul(d)
        .filter(|c| c.checked_mul(8).is_some())
        .ok_or_else(|| Error::Parse {
            offset: 5,
            message: "n·d overflows".into(),
        })?;
    let body = cur.take(8 * count, "feature values")?;
    let mut features = Vec::with_capacity(count);
    for (k, chunk) in body.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(Error::NonFinite { row: k / d, col: k % d });
        }
        features.push(v);
    }
    let flag_at = cur.pos;
    let labels = match cur.take(1, "label flag")?[0] {
        0x00 => None,
        0x01 => {
            let raw = cur.take(4 * n, "labels")?;
            Some(
                raw.chunks_exact(4)
                    .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect(),
            )
        }
        other => {
            return Err(Error::Parse {
                offset: flag_at as u64,
                message: format!("invalid label flag 0x{other:02x}"),
            })
        }
    };
    if cur.pos != bytes.len() {
        return Err(Error::Parse {
            offset: cur.pos as u64,
            message: format!("{} trailing bytes", bytes.len() - cur.pos),
        });
    }
    Dataset::new(features, n, d, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_is_22_bytes() {
        let ds = Dataset::new(vec![0.0], 1, 1, None).unwrap();
        let bytes = encode(&ds);
        assert_eq!(bytes.len(), 22);
        assert_eq!(&bytes[..5], b"RDSB\x01");
        assert_eq!(&bytes[5..13], &[1, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(bytes[21], 0);
        assert_eq!(decode(&bytes).unwrap(), ds);
    }

    #[test]
    fn labels_block() {
        let ds = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 2, 2, Some(vec![7, 9])).unwrap();
        let bytes = encode(&ds);
        assert_eq!(bytes.len(), 13 + 32 + 1 + 8);
        assert_eq!(decode(&bytes).unwrap(), ds);
    }

    #[test]
    fn malformed() {
        let good = encode(&Dataset::new(vec![0.5, 1.5], 1, 2, None).unwrap());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(decode(&good[..20]), Err(Error::Parse { offset: 13, .. })));
        let mut nan = good.clone();
        nan[13..21].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode(&nan), Err(Error::NonFinite { row: 0, col: 0 })));
        let mut flag = good.clone();
        *flag.last_mut().unwrap() = 7;
        assert!(matches!(decode(&flag), Err(Error::Parse { offset: 29, .. })));
        let mut extra = good;
        extra.push(0);
        assert!(decode(&extra).is_err());
    }
}
