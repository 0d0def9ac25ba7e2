//! Binary shard files: a fixed 29-byte little-endian header followed by
//! `ℓ` field elements as `u64` LE.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::construction::Family;

pub const MAGIC: &[u8; 4] = b"MSR1";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 29;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShardError {
    #[error("shard is {0} bytes, shorter than its header")]
    Truncated(usize),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported shard format version {0}")]
    Version(u16),
    #[error("unknown family tag {0}")]
    FamilyTag(u8),
    #[error("header declares {expected} elements, body holds {got} bytes")]
    Length { expected: u64, got: usize },
    #[error("element {index} = {value} is not below the modulus {prime}")]
    OutOfRange { index: usize, value: u64, prime: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub version: u16,
    pub node: u16,
    pub n: u16,
    pub k: u16,
    pub family: Family,
    pub ell: u64,
    pub prime: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shard {
    pub header: ShardHeader,
    pub values: Vec<u64>,
}

impl Shard {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&h.version.to_le_bytes());
        out.extend_from_slice(&h.node.to_le_bytes());
        out.extend_from_slice(&h.n.to_le_bytes());
        out.extend_from_slice(&h.k.to_le_bytes());
        out.push(h.family.tag());
        out.extend_from_slice(&h.ell.to_le_bytes());
        out.extend_from_slice(&h.prime.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ShardError> {
        if bytes.len() < HEADER_LEN {
            return Err(ShardError::Truncated(bytes.len()));
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
        if &magic != MAGIC {
            return Err(ShardError::BadMagic(magic));
        }
        let version = u16_at(4);
        if version != FORMAT_VERSION {
            return Err(ShardError::Version(version));
        }
        let family = Family::from_tag(bytes[12]).ok_or(ShardError::FamilyTag(bytes[12]))?;
        let header = ShardHeader {
            version,
            node: u16_at(6),
            n: u16_at(8),
            k: u16_at(10),
            family,
            ell: u64_at(13),
            prime: u64_at(21),
        };
        let body = &bytes[HEADER_LEN..];
        if (body.len() as u64) != header.ell.saturating_mul(8) {
            return Err(ShardError::Length {
                expected: header.ell,
                got: body.len(),
            });
        }
        let values: Vec<u64> = body
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v >= header.prime) {
            return Err(ShardError::OutOfRange {
                index,
                value,
                prime: header.prime,
            });
        }
        Ok(Self { header, values })
    }
}

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    {
        let mut f = fs::File::create(tmp)?;
        f.write_all(bytes)?;
        f.sync_data()?;
    }
    fs::rename(tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Shard {
        Shard {
            header: ShardHeader {
                version: FORMAT_VERSION,
                node: 3,
                n: 6,
                k: 2,
                family: Family::C3,
                ell: 4,
                prime: 13,
            },
            values: vec![0, 5, 12, 7],
        }
    }

    #[test]
    fn layout_is_bit_exact() {
        let bytes = sample().to_bytes();
        assert_eq!(bytes.len(), HEADER_LEN + 32);
        assert_eq!(&bytes[..4], b"MSR1");
        assert_eq!(&bytes[4..13], &[1, 0, 3, 0, 6, 0, 2, 0, 3]);
        assert_eq!(&bytes[13..21], &4u64.to_le_bytes());
        assert_eq!(&bytes[21..29], &13u64.to_le_bytes());
        assert_eq!(&bytes[37..45], &5u64.to_le_bytes());
        assert_eq!(Shard::from_bytes(&bytes).unwrap(), sample());
    }

    #[test]
    fn rejects_damage() {
        let good = sample().to_bytes();
        assert_eq!(Shard::from_bytes(&good[..10]), Err(ShardError::Truncated(10)));
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(Shard::from_bytes(&bad), Err(ShardError::BadMagic(_))));
        let mut bad = good.clone();
        bad[4] = 9;
        assert_eq!(Shard::from_bytes(&bad), Err(ShardError::Version(9)));
        let mut bad = good.clone();
        bad[12] = 0;
        assert_eq!(Shard::from_bytes(&bad), Err(ShardError::FamilyTag(0)));
        assert!(matches!(Shard::from_bytes(&good[..good.len() - 1]), Err(ShardError::Length { .. })));
        let mut bad = good.clone();
        bad[29] = 13;
        assert!(matches!(Shard::from_bytes(&bad), Err(ShardError::OutOfRange { index: 0, .. })));
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.shard");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
