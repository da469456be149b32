//! UEMF binary field files.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size          | content                         |
//! |--------|---------------|---------------------------------|
//! | 0      | 4             | magic `UEMF`                    |
//! | 4      | 4             | u32 version, currently 1        |
//! | 8      | 4             | u32 height                     |
//! | 12     | 4             | u32 width                      |
//! | 16     | 4             | u32 channel count, currently 3  |
//! | 20     | 12 * H * W    | f32 planes: flow_y, flow_x, prob |
//!
//! Each plane is row-major. Writing then reading reproduces a finite field
//! bit-exactly; readers reject non-finite payloads up front so downstream
//! code never sees NaN.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::flow::FlowField;

pub const MAGIC: [u8; 4] = *b"UEMF";
pub const VERSION: u32 = 1;
pub const CHANNELS: u32 = 3;

#[derive(Debug, Error)]
pub enum UemfError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}, expected {MAGIC:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}, expected {VERSION}")]
    BadVersion(u32),
    #[error("unsupported channel count {0}, expected {CHANNELS}")]
    BadChannelCount(u32),
    #[error("non-finite value in channel {channel} at index {index}")]
    NonFinite { channel: usize, index: usize },
    #[error("field dimensions {height}x{width} overflow the format")]
    DimsOverflow { height: usize, width: usize },
}

/// Writes a field to a stream.
pub fn write_uemf<W: Write>(field: &FlowField, mut out: W) -> Result<(), UemfError> {
    let height = u32::try_from(field.height())
        .map_err(|_| UemfError::DimsOverflow { height: field.height(), width: field.width() })?;
    let width = u32::try_from(field.width())
        .map_err(|_| UemfError::DimsOverflow { height: field.height(), width: field.width() })?;
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&height.to_le_bytes())?;
    out.write_all(&width.to_le_bytes())?;
    out.write_all(&CHANNELS.to_le_bytes())?;
    for plane in [field.flow_y(), field.flow_x(), field.prob()] {
        let mut bytes = Vec::with_capacity(plane.len() * 4);
        for &v in plane {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&bytes)?;
    }
    Ok(())
}

/// Reads a field from a stream, validating header and finiteness.
pub fn read_uemf<R: Read>(mut input: R) -> Result<FlowField, UemfError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(UemfError::BadMagic(magic));
    }
    let mut word = [0u8; 4];
    let mut read_u32 = |input: &mut R| -> Result<u32, UemfError> {
        input.read_exact(&mut word)?;
        Ok(u32::from_le_bytes(word))
    };
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(UemfError::BadVersion(version));
    }
    let height = read_u32(&mut input)? as usize;
    let width = read_u32(&mut input)? as usize;
    let channels = read_u32(&mut input)?;
    if channels != CHANNELS {
        return Err(UemfError::BadChannelCount(channels));
    }
    let n = height * width;
    let mut planes: Vec<Vec<f32>> = Vec::with_capacity(3);
    let mut bytes = vec![0u8; n * 4];
    for channel in 0..3 {
        input.read_exact(&mut bytes)?;
        let plane: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if let Some(index) = plane.iter().position(|v| !v.is_finite()) {
            return Err(UemfError::NonFinite { channel, index });
        }
        planes.push(plane);
    }
    let prob = planes.pop().expect("three planes");
    let flow_x = planes.pop().expect("three planes");
    let flow_y = planes.pop().expect("three planes");
    Ok(FlowField::from_parts(height, width, flow_y, flow_x, prob))
}

/// Writes a field to a file.
pub fn save_uemf(field: &FlowField, path: &Path) -> Result<(), UemfError> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    write_uemf(field, &mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Reads a field from a file.
pub fn load_uemf(path: &Path) -> Result<FlowField, UemfError> {
    let file = std::fs::File::open(path)?;
    read_uemf(std::io::BufReader::new(file))
}

/// Serialized size in bytes of a `height x width` field.
pub fn encoded_size(height: usize, width: usize) -> usize {
    20 + 12 * height * width
}
