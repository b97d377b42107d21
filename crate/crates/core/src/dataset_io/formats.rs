//! Binary depth formats.
//!
//! Biwi run-length format, all integers little-endian:
//!
//! ```text
//! i32 width, i32 height
//! repeat until width*height pixels are covered:
//!     i32 empty_count            (pixels of value 0)
//!     i32 full_count
//!     full_count x i16 depth_mm
//! ```
//!
//! Portable raw format: `u32 width, u32 height`, then `width*height` `u16`
//! depths in millimeters, row-major, 0 = missing.

use std::path::Path;

use crate::depth_prep::DepthMap;
use crate::error::DatasetError;

/// Little-endian reader that reports the byte offset of every failure.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N], DatasetError> {
        let end = self.pos + N;
        let chunk = self.bytes.get(self.pos..end).ok_or_else(|| DatasetError::Format {
            offset: self.pos as u64,
            reason: format!("truncated file while reading {what}"),
        })?;
        self.pos = end;
        Ok(chunk.try_into().expect("slice length checked"))
    }

    fn i32(&mut self, what: &str) -> Result<i32, DatasetError> {
        self.take::<4>(what).map(i32::from_le_bytes)
    }

    fn u32(&mut self, what: &str) -> Result<u32, DatasetError> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn u16(&mut self, what: &str) -> Result<u16, DatasetError> {
        self.take::<2>(what).map(u16::from_le_bytes)
    }

    fn error(&self, offset: usize, reason: impl Into<String>) -> DatasetError {
        DatasetError::Format {
            offset: offset as u64,
            reason: reason.into(),
        }
    }
}

fn checked_dims(width: i64, height: i64, offset: usize) -> Result<(usize, usize), DatasetError> {
    if width <= 0 || height <= 0 || width * height > (1 << 28) {
        return Err(DatasetError::Format {
            offset: offset as u64,
            reason: format!("invalid dimensions {width}x{height}"),
        });
    }
    Ok((width as usize, height as usize))
}

pub fn decode_biwi_depth(bytes: &[u8]) -> Result<DepthMap, DatasetError> {
    let mut cur = Cursor::new(bytes);
    let width = cur.i32("width")?;
    let height = cur.i32("height")?;
    let (width, height) = checked_dims(width.into(), height.into(), 0)?;
    let total = width * height;
    let mut mm = vec![0u16; total];
    let mut p = 0usize;
    while p < total {
        let at = cur.pos;
        let empty = cur.i32("empty run length")?;
        if empty < 0 || p + empty as usize > total {
            return Err(cur.error(at, format!("empty run of {empty} overflows {total} pixels")));
        }
        p += empty as usize;
        let at = cur.pos;
        let full = cur.i32("filled run length")?;
        if full < 0 || p + full as usize > total {
            return Err(cur.error(at, format!("filled run of {full} overflows {total} pixels")));
        }
        for slot in &mut mm[p..p + full as usize] {
            let v = cur.take::<2>("depth value").map(i16::from_le_bytes)?;
            *slot = v.max(0) as u16;
        }
        p += full as usize;
    }
    if cur.pos != bytes.len() {
        return Err(cur.error(cur.pos, "trailing bytes after the last run"));
    }
    Ok(DepthMap::from_millimeters(width, height, &mm).expect("dimensions validated"))
}

/// Encodes with maximal runs. Depths above `i16::MAX` are not representable
/// in this format and saturate.
pub fn encode_biwi_depth(depth: &DepthMap) -> Vec<u8> {
    let mm = depth.to_millimeters();
    let mut out = Vec::with_capacity(8 + mm.len() * 2);
    out.extend_from_slice(&(depth.width() as i32).to_le_bytes());
    out.extend_from_slice(&(depth.height() as i32).to_le_bytes());
    let mut p = 0;
    while p < mm.len() {
        let empty = mm[p..].iter().take_while(|&&v| v == 0).count();
        p += empty;
        let full = mm[p..].iter().take_while(|&&v| v != 0).count();
        out.extend_from_slice(&(empty as i32).to_le_bytes());
        out.extend_from_slice(&(full as i32).to_le_bytes());
        for &v in &mm[p..p + full] {
            out.extend_from_slice(&(v.min(i16::MAX as u16) as i16).to_le_bytes());
        }
        p += full;
    }
    out
}

pub fn decode_raw_depth(bytes: &[u8]) -> Result<DepthMap, DatasetError> {
    let mut cur = Cursor::new(bytes);
    let width = cur.u32("width")?;
    let height = cur.u32("height")?;
    let (width, height) = checked_dims(width.into(), height.into(), 0)?;
    let expected = 8 + width * height * 2;
    if bytes.len() != expected {
        return Err(cur.error(
            bytes.len().min(expected),
            format!("expected {expected} bytes for {width}x{height}, found {}", bytes.len()),
        ));
    }
    let mm = (0..width * height)
        .map(|_| cur.u16("depth value"))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DepthMap::from_millimeters(width, height, &mm).expect("dimensions validated"))
}

pub fn encode_raw_depth(depth: &DepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + depth.data().len() * 2);
    out.extend_from_slice(&(depth.width() as u32).to_le_bytes());
    out.extend_from_slice(&(depth.height() as u32).to_le_bytes());
    for v in depth.to_millimeters() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn load_biwi_depth(path: impl AsRef<Path>) -> Result<DepthMap, DatasetError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| DatasetError::io(path, e))?;
    decode_biwi_depth(&bytes)
}

pub fn load_raw_depth(path: impl AsRef<Path>) -> Result<DepthMap, DatasetError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| DatasetError::io(path, e))?;
    decode_raw_depth(&bytes)
}
