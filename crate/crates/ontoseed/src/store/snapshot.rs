//! Versioned binary persistence for [`HierStore`].
//!
//! Layout: magic, format version, filter fingerprint, then the primary
//! tables (filter, counts, intern table, upward adjacency, extra triples,
//! labels) and a trailing SHA-256 over everything before it. Inverse
//! adjacency and the label index are rebuilt on load.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{hex, EntityId, HierStore, IngestCounts, IngestFilter, LabelKind};

const MAGIC: &[u8; 8] = b"ONTOSEED";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot io: {0}")]
    Io(#[from] io::Error),
    #[error("not a store snapshot (bad magic bytes)")]
    BadMagic,
    #[error("snapshot format version {found} unsupported (this build reads {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("snapshot checksum mismatch: file is corrupt")]
    ChecksumMismatch,
    #[error("snapshot was built with filter fingerprint {snapshot}, expected {expected}")]
    FingerprintMismatch { snapshot: String, expected: String },
    #[error("snapshot corrupt: {0}")]
    Corrupt(String),
}

pub fn save_snapshot(store: &HierStore, path: &Path) -> Result<(), SnapshotError> {
    let file = File::create(path)?;
    let mut w = HashingWriter {
        inner: BufWriter::new(file),
        hasher: Sha256::new(),
    };
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    write_bytes(&mut w, store.filter().fingerprint().as_bytes())?;
    write_bytes(
        &mut w,
        &serde_json::to_vec(store.filter()).map_err(|e| SnapshotError::Corrupt(e.to_string()))?,
    )?;
    write_bytes(
        &mut w,
        &serde_json::to_vec(store.counts()).map_err(|e| SnapshotError::Corrupt(e.to_string()))?,
    )?;
    let (iris, up_sub, up_inst, extra, labels) = store.primary_tables();
    w.write_all(&(iris.len() as u64).to_le_bytes())?;
    for iri in iris {
        write_bytes(&mut w, iri.as_bytes())?;
    }
    for table in [up_sub, up_inst] {
        for row in table {
            w.write_all(&(row.len() as u32).to_le_bytes())?;
            for id in row {
                w.write_all(&id.0.to_le_bytes())?;
            }
        }
    }
    for row in extra {
        w.write_all(&(row.len() as u32).to_le_bytes())?;
        for (p, o) in row {
            w.write_all(&p.0.to_le_bytes())?;
            w.write_all(&o.0.to_le_bytes())?;
        }
    }
    for row in labels {
        w.write_all(&(row.len() as u32).to_le_bytes())?;
        for (kind, label) in row {
            w.write_all(&[match kind {
                LabelKind::Representative => 0u8,
                LabelKind::Alias => 1u8,
            }])?;
            write_bytes(&mut w, label.as_bytes())?;
        }
    }
    let digest = w.hasher.finalize();
    let mut inner = w.inner;
    inner.write_all(&digest)?;
    inner.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<HierStore, SnapshotError> {
    load_snapshot_inner(path, None)
}

/// Strict load: refuses a snapshot whose filter fingerprint differs from
/// `expected`, reporting both.
pub fn load_snapshot_strict(path: &Path, expected: &str) -> Result<HierStore, SnapshotError> {
    load_snapshot_inner(path, Some(expected))
}

fn load_snapshot_inner(path: &Path, expected: Option<&str>) -> Result<HierStore, SnapshotError> {
    let file = File::open(path)?;
    let mut r = HashingReader {
        inner: BufReader::new(file),
        hasher: Sha256::new(),
    };
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let found = read_u32(&mut r)?;
    if found != FORMAT_VERSION {
        return Err(SnapshotError::VersionMismatch {
            found,
            supported: FORMAT_VERSION,
        });
    }
    let fingerprint = String::from_utf8(read_bytes(&mut r)?)
        .map_err(|_| SnapshotError::Corrupt("fingerprint not utf-8".into()))?;
    if let Some(expected) = expected {
        if fingerprint != expected {
            return Err(SnapshotError::FingerprintMismatch {
                snapshot: fingerprint,
                expected: expected.to_owned(),
            });
        }
    }
    let filter: IngestFilter = serde_json::from_slice(&read_bytes(&mut r)?)
        .map_err(|e| SnapshotError::Corrupt(format!("filter: {e}")))?;
    let counts: IngestCounts = serde_json::from_slice(&read_bytes(&mut r)?)
        .map_err(|e| SnapshotError::Corrupt(format!("counts: {e}")))?;
    let n = read_u64(&mut r)? as usize;
    if n > u32::MAX as usize {
        return Err(SnapshotError::Corrupt("entity count overflow".into()));
    }
    let mut iris = Vec::with_capacity(n);
    for _ in 0..n {
        iris.push(
            String::from_utf8(read_bytes(&mut r)?)
                .map_err(|_| SnapshotError::Corrupt("iri not utf-8".into()))?,
        );
    }
    let read_table = |r: &mut HashingReader<BufReader<File>>| -> Result<Vec<Vec<EntityId>>, SnapshotError> {
        let mut table = Vec::with_capacity(n);
        for _ in 0..n {
            let len = read_u32(r)? as usize;
            if len > n {
                return Err(SnapshotError::Corrupt("adjacency row too long".into()));
            }
            let mut row = Vec::with_capacity(len);
            for _ in 0..len {
                let id = read_u32(r)?;
                if id as usize >= n {
                    return Err(SnapshotError::Corrupt("entity id out of range".into()));
                }
                row.push(EntityId(id));
            }
            table.push(row);
        }
        Ok(table)
    };
    let up_sub = read_table(&mut r)?;
    let up_inst = read_table(&mut r)?;
    let mut extra = Vec::with_capacity(n);
    for _ in 0..n {
        let len = read_u32(&mut r)? as usize;
        let mut row = Vec::with_capacity(len.min(1024));
        for _ in 0..len {
            let p = read_u32(&mut r)?;
            let o = read_u32(&mut r)?;
            if p as usize >= n || o as usize >= n {
                return Err(SnapshotError::Corrupt("entity id out of range".into()));
            }
            row.push((EntityId(p), EntityId(o)));
        }
        extra.push(row);
    }
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let len = read_u32(&mut r)? as usize;
        let mut row = Vec::with_capacity(len.min(1024));
        for _ in 0..len {
            let mut kind = [0u8; 1];
            r.read_exact(&mut kind)?;
            let kind = match kind[0] {
                0 => LabelKind::Representative,
                1 => LabelKind::Alias,
                other => {
                    return Err(SnapshotError::Corrupt(format!("label kind {other}")));
                }
            };
            let label = String::from_utf8(read_bytes(&mut r)?)
                .map_err(|_| SnapshotError::Corrupt("label not utf-8".into()))?;
            row.push((kind, label));
        }
        labels.push(row);
    }
    let HashingReader { mut inner, hasher } = r;
    let computed = hasher.finalize();
    let mut stored = [0u8; 32];
    inner.read_exact(&mut stored)?;
    if stored != computed[..] {
        return Err(SnapshotError::ChecksumMismatch);
    }
    // trailing garbage also counts as corruption
    let mut probe = [0u8; 1];
    if inner.read(&mut probe)? != 0 {
        return Err(SnapshotError::Corrupt(format!(
            "trailing bytes after checksum ({})",
            hex(&stored)
        )));
    }
    Ok(HierStore::assemble(
        filter, iris, up_sub, up_inst, extra, labels, counts,
    ))
}

struct HashingWriter<W: Write> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

struct HashingReader<R: Read> {
    inner: R,
    hasher: Sha256,
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

fn write_bytes<W: Write>(w: &mut W, bytes: &[u8]) -> Result<(), SnapshotError> {
    w.write_all(&(bytes.len() as u32).to_le_bytes())?;
    w.write_all(bytes)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, SnapshotError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, SnapshotError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_bytes<R: Read>(r: &mut R) -> Result<Vec<u8>, SnapshotError> {
    let len = read_u32(r)? as usize;
    if len > (1 << 30) {
        return Err(SnapshotError::Corrupt("oversized field".into()));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(buf)
}
