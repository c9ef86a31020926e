//! Binary ordinate cache and remote table acquisition.
//!
//! Cache layout, all little-endian:
//!
//! ```text
//! "ZGC1" | u64 count | count × f64 | u32 CRC-32 of the f64 block
//! ```

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::zeros::{parse_str, OrdinateTable, TextFormat};

pub const MAGIC: &[u8; 4] = b"ZGC1";

/// Environment variable naming the default remote table.
pub const DATA_URL_ENV: &str = "ZETAGAPS_DATA_URL";
/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "ZETAGAPS_CACHE_DIR";

pub fn encode(ordinates: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 8 + 8 * ordinates.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(ordinates.len() as u64).to_le_bytes());
    let start = out.len();
    for x in ordinates {
        out.extend_from_slice(&x.to_le_bytes());
    }
    let crc = crc32fast::hash(&out[start..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(Error::Integrity("missing ZGC1 magic".into()));
    }
    let count = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let expected = count
        .checked_mul(8)
        .and_then(|n| n.checked_add(16))
        .ok_or_else(|| Error::Integrity(format!("implausible count {count}")))?;
    if bytes.len() as u64 != expected {
        return Err(Error::Integrity(format!(
            "cache holds {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let payload = &bytes[12..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let actual = crc32fast::hash(payload);
    if stored != actual {
        return Err(Error::Integrity(format!(
            "checksum mismatch: stored {stored:08x}, computed {actual:08x}"
        )));
    }
    Ok(payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Writes `ordinates` to `path` through a temporary file and an atomic rename.
pub fn write_cache(path: &Path, ordinates: &[f64]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&encode(ordinates))?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<Vec<f64>> {
    decode(&std::fs::read(path)?)
}

/// Cache file used for `url` inside `cache_dir`.
pub fn cache_path(url: &str, cache_dir: &Path) -> PathBuf {
    let digest = Sha256::digest(url.as_bytes());
    cache_dir.join(format!("{}.zgc", hex::encode(&digest[..12])))
}

/// Returns the table at `url`, serving it from `cache_dir` when a cached copy
/// exists and downloading (then caching) it otherwise.
pub fn fetch_remote(url: &str, cache_dir: &Path, format: TextFormat) -> Result<OrdinateTable> {
    let path = cache_path(url, cache_dir);
    if path.exists() {
        log::debug!("serving {url} from {}", path.display());
        let ords = read_cache(&path)?;
        return OrdinateTable::from_ordinates(ords, url, 17);
    }
    let text = download(url)?;
    let table = parse_str(&text, format, url)?;
    write_cache(&path, table.ordinates())?;
    log::info!(
        "cached {} ordinates from {url} at {}",
        table.len(),
        path.display()
    );
    Ok(table)
}

fn download(url: &str) -> Result<String> {
    if let Some(local) = url.strip_prefix("file://") {
        return std::fs::read_to_string(local).map_err(|e| Error::Fetch(format!("{url}: {e}")));
    }
    if !(url.starts_with("http://") || url.starts_with("https://")) {
        return Err(Error::Fetch(format!("unsupported URL scheme: {url}")));
    }
    let response = ureq::get(url)
        .timeout(Duration::from_secs(60))
        .call()
        .map_err(|e| Error::Fetch(format!("{url}: {e}")))?;
    let mut body = String::new();
    response
        .into_reader()
        .read_to_string(&mut body)
        .map_err(|e| Error::Fetch(format!("{url}: {e}")))?;
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_bit_exact() {
        let bytes = encode(&[1.5, 2.0]);
        assert_eq!(&bytes[..4], b"ZGC1");
        assert_eq!(&bytes[4..12], &2u64.to_le_bytes());
        assert_eq!(&bytes[12..20], &1.5f64.to_le_bytes());
        assert_eq!(&bytes[20..28], &2.0f64.to_le_bytes());
        let crc = crc32fast::hash(&bytes[12..28]);
        assert_eq!(&bytes[28..32], &crc.to_le_bytes());
        assert_eq!(bytes.len(), 32);
    }

    #[test]
    fn bad_magic_is_integrity_error() {
        let mut bytes = encode(&[14.0]);
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Integrity(_))));
    }

    #[test]
    fn flipped_payload_bit_is_detected() {
        let mut bytes = encode(&[14.0, 21.0, 25.0]);
        bytes[15] ^= 0x01;
        assert!(matches!(decode(&bytes), Err(Error::Integrity(_))));
    }

    #[test]
    fn truncated_cache_is_detected() {
        let bytes = encode(&[14.0, 21.0]);
        assert!(matches!(
            decode(&bytes[..bytes.len() - 1]),
            Err(Error::Integrity(_))
        ));
        assert!(matches!(decode(&bytes[..8]), Err(Error::Integrity(_))));
    }

    #[test]
    fn text_to_cache_to_table_is_bit_identical() {
        let text = include_str!("../tests/data/first_30.txt");
        let parsed = parse_str(text, TextFormat::Plain, "t").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.zgc");
        write_cache(&p, parsed.ordinates()).unwrap();
        let back = read_cache(&p).unwrap();
        let a: Vec<u64> = parsed.ordinates().iter().map(|x| x.to_bits()).collect();
        let b: Vec<u64> = back.iter().map(|x| x.to_bits()).collect();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn round_trip(xs in proptest::collection::vec(proptest::num::f64::ANY, 0..64)) {
            let back = decode(&encode(&xs)).unwrap();
            let a: Vec<u64> = xs.iter().map(|x| x.to_bits()).collect();
            let b: Vec<u64> = back.iter().map(|x| x.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }
}
