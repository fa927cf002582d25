//! Versioned little-endian binary archives with a CRC-64 over everything but
//! the optional timestamp.
//!
//! Layout: magic (8) · version u32 · kind u32 · flags u32 · timestamp u64 ·
//! kind-specific header · payload · checksum u64.

use std::fs;
use std::path::Path;

use crc::{Crc, CRC_64_XZ};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{CoefficientField, Domain, TimeGrid};
use crate::spectral::{EigenDecomposition, Origin};

pub const ARCHIVE_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"SGLABARC";
const CRC: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);
const FLAG_ORIGIN: u32 = 1;
/// Bytes before the kind-specific header.
const PREAMBLE: usize = 8 + 4 + 4 + 4 + 8;
const TIMESTAMP_AT: usize = 20;
/// Eigen header: n, trusted, spacing, half_width, points, m, mu.
const EIGEN_HEADER: usize = 8 + 8 + 8 + 8 + 8 + 4 + 4;
/// Field header: T, modes, domain.
const FIELD_HEADER: usize = 8 + 8 + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchiveKind {
    Eigen = 1,
    Field = 2,
}

/// Decoded preamble and header of an eigendecomposition archive.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveHeader {
    pub version: u32,
    pub kind: ArchiveKind,
    pub origin: Option<Origin>,
    pub dim: usize,
    pub trusted_count: usize,
    pub spacing: f64,
    /// Seconds since the epoch (nonzero); not covered by the checksum.
    pub timestamp: Option<u64>,
    pub checksum: u64,
}

struct Writer {
    bytes: Vec<u8>,
}

impl Writer {
    fn new(kind: ArchiveKind, flags: u32, timestamp: Option<u64>) -> Self {
        let mut w = Writer { bytes: Vec::new() };
        w.bytes.extend_from_slice(MAGIC);
        w.u32(ARCHIVE_VERSION);
        w.u32(kind as u32);
        w.u32(flags);
        // Zero means absent, so presence does not touch checksummed bytes.
        w.u64(timestamp.unwrap_or(0));
        w
    }

    fn u32(&mut self, v: u32) {
        self.bytes.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.bytes.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.bytes.extend_from_slice(&v.to_le_bytes());
    }

    fn finish(mut self) -> Vec<u8> {
        let sum = checksum(&self.bytes);
        self.u64(sum);
        self.bytes
    }
}

fn checksum(body: &[u8]) -> u64 {
    let mut digest = CRC.digest();
    digest.update(&body[..TIMESTAMP_AT]);
    digest.update(&body[TIMESTAMP_AT + 8..]);
    digest.finalize()
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Truncated(format!("needed {n} bytes at offset {}, file has {}", self.at, self.bytes.len()))
        })?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Format(format!("size {v} does not fit this platform")))
    }
}

/// Checks magic, version and kind; returns the flags and timestamp.
fn preamble(r: &mut Reader, expected: ArchiveKind) -> Result<(u32, Option<u64>)> {
    if r.bytes.is_empty() {
        return Err(Error::Truncated("empty file".into()));
    }
    let magic = r.take(MAGIC.len())?;
    if magic != MAGIC {
        return Err(Error::Format("not an sglab archive (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != ARCHIVE_VERSION {
        return Err(Error::Version {
            found: version,
            expected: ARCHIVE_VERSION,
        });
    }
    let kind = r.u32()?;
    if kind != expected as u32 {
        return Err(Error::Format(format!("archive kind {kind}, expected {}", expected as u32)));
    }
    let flags = r.u32()?;
    let stamp = r.u64()?;
    Ok((flags, (stamp != 0).then_some(stamp)))
}

/// Verifies the exact length and the trailing checksum.
fn verify(bytes: &[u8], body_len: usize) -> Result<u64> {
    let total = body_len
        .checked_add(8)
        .ok_or_else(|| Error::Format("declared size overflows".into()))?;
    if bytes.len() < total {
        return Err(Error::Truncated(format!("expected {total} bytes, found {}", bytes.len())));
    }
    if bytes.len() > total {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - total)));
    }
    let stored = u64::from_le_bytes(bytes[body_len..].try_into().expect("8 bytes"));
    let computed = checksum(&bytes[..body_len]);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    Ok(stored)
}

fn sized(count: usize, width: usize) -> Result<usize> {
    count
        .checked_mul(width)
        .ok_or_else(|| Error::Format(format!("declared count {count} overflows")))
}

pub fn encode_eig(eig: &EigenDecomposition, timestamp: Option<u64>) -> Vec<u8> {
    let origin = eig.origin();
    let mut w = Writer::new(
        ArchiveKind::Eigen,
        if origin.is_some() { FLAG_ORIGIN } else { 0 },
        timestamp,
    );
    let o = origin.unwrap_or(Origin {
        half_width: 0.0,
        points: 0,
        m: 0,
        mu: 0,
    });
    w.u64(eig.dim() as u64);
    w.u64(eig.trusted_count() as u64);
    w.f64(eig.spacing());
    w.f64(o.half_width);
    w.u64(o.points as u64);
    w.u32(o.m);
    w.u32(o.mu);
    eig.eigenvalues().iter().for_each(|&v| w.f64(v));
    eig.vectors().iter().for_each(|&v| w.f64(v));
    w.finish()
}

fn decode_eig_header(bytes: &[u8]) -> Result<(ArchiveHeader, usize)> {
    let mut r = Reader { bytes, at: 0 };
    let (flags, timestamp) = preamble(&mut r, ArchiveKind::Eigen)?;
    let dim = r.usize()?;
    let trusted_count = r.usize()?;
    let spacing = r.f64()?;
    let half_width = r.f64()?;
    let points = r.usize()?;
    let m = r.u32()?;
    let mu = r.u32()?;
    debug_assert_eq!(r.at, PREAMBLE + EIGEN_HEADER);
    let payload = sized(dim, 8)?
        .checked_add(sized(sized(dim, dim)?, 8)?)
        .ok_or_else(|| Error::Format("declared size overflows".into()))?;
    let body = r.at + payload;
    let checksum = verify(bytes, body)?;
    let origin = (flags & FLAG_ORIGIN != 0).then_some(Origin {
        half_width,
        points,
        m,
        mu,
    });
    Ok((
        ArchiveHeader {
            version: ARCHIVE_VERSION,
            kind: ArchiveKind::Eigen,
            origin,
            dim,
            trusted_count,
            spacing,
            timestamp,
            checksum,
        },
        r.at,
    ))
}

pub fn decode_eig(bytes: &[u8]) -> Result<EigenDecomposition> {
    let (header, start) = decode_eig_header(bytes)?;
    let mut r = Reader { bytes, at: start };
    let n = header.dim;
    let eigenvalues = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let vectors = (0..n * n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    EigenDecomposition::from_parts(eigenvalues, vectors, header.spacing, header.trusted_count, header.origin)
        .map_err(|e| Error::Format(e.to_string()))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn save_eig(eig: &EigenDecomposition, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &encode_eig(eig, None))
}

/// Same bytes as [`save_eig`] apart from the timestamp field.
pub fn save_eig_stamped(eig: &EigenDecomposition, timestamp: u64, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &encode_eig(eig, Some(timestamp)))
}

pub fn load_eig(path: impl AsRef<Path>) -> Result<EigenDecomposition> {
    decode_eig(&read(path.as_ref())?)
}

pub fn read_header(path: impl AsRef<Path>) -> Result<ArchiveHeader> {
    decode_eig_header(&read(path.as_ref())?).map(|(h, _)| h)
}

pub fn encode_field(field: &CoefficientField) -> Vec<u8> {
    let mut w = Writer::new(ArchiveKind::Field, 0, None);
    w.u64(field.grid().points() as u64);
    w.u64(field.modes() as u64);
    w.u32(match field.domain() {
        Domain::Time => 0,
        Domain::Frequency => 1,
    });
    for v in field.data() {
        w.f64(v.re);
        w.f64(v.im);
    }
    w.finish()
}

pub fn decode_field(bytes: &[u8]) -> Result<CoefficientField> {
    let mut r = Reader { bytes, at: 0 };
    preamble(&mut r, ArchiveKind::Field)?;
    let points = r.usize()?;
    let modes = r.usize()?;
    let domain = match r.u32()? {
        0 => Domain::Time,
        1 => Domain::Frequency,
        other => return Err(Error::Format(format!("unknown domain tag {other}"))),
    };
    debug_assert_eq!(r.at, PREAMBLE + FIELD_HEADER);
    verify(bytes, r.at + sized(sized(modes, points)?, 16)?)?;
    let grid = TimeGrid::new(points).map_err(|e| Error::Format(e.to_string()))?;
    let rows = (0..modes)
        .map(|_| {
            (0..points)
                .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientField::from_rows(grid, domain, rows).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_field(field: &CoefficientField, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &encode_field(field))
}

pub fn load_field(path: impl AsRef<Path>) -> Result<CoefficientField> {
    decode_field(&read(path.as_ref())?)
}
