//! Label map file I/O.
//!
//! Maps with ids up to 65535 are stored as 16-bit grayscale PNG, one id per
//! pixel. Maps with larger ids fall back to an RLE JSON document:
//!
//! ```json
//! {"height": H, "width": W, "instances": [{"id": k, "runs": [[start, len], ...]}, ...]}
//! ```
//!
//! Loading dispatches on the file extension. PNG values are taken verbatim:
//! an 8-bit PNG widens value-preserving (42 stays 42), never rescaled.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labelmap::InstanceLabelMap;
use crate::rle::{decode_rle, encode_rle, RleError, RleMask};

/// Largest instance id representable in the PNG encoding.
pub const PNG_MAX_ID: u32 = u16::MAX as u32;

#[derive(Debug, Error)]
pub enum LabelIoError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Rle(#[from] RleError),
    #[error("{path}: unsupported pixel format, expected 8- or 16-bit grayscale")]
    UnsupportedPixelFormat { path: PathBuf },
    #[error("{path}: unsupported extension, expected .png or .json")]
    UnsupportedExtension { path: PathBuf },
    #[error("id {id} exceeds 16-bit PNG range")]
    IdOverflow { id: u32 },
}

/// RLE JSON document schema.
#[derive(Debug, Serialize, Deserialize)]
struct RleDocument {
    height: usize,
    width: usize,
    instances: Vec<RleMask>,
}

/// Saves a map under `dir/stem`, choosing PNG when every id fits 16 bits and
/// RLE JSON otherwise. Returns the path written.
pub fn save_label_map(map: &InstanceLabelMap, dir: &Path, stem: &str) -> Result<PathBuf, LabelIoError> {
    if map.max_id() <= PNG_MAX_ID {
        let path = dir.join(format!("{stem}.png"));
        save_label_png(map, &path)?;
        Ok(path)
    } else {
        let path = dir.join(format!("{stem}.json"));
        save_label_json(map, &path)?;
        Ok(path)
    }
}

/// Saves a map as 16-bit grayscale PNG.
pub fn save_label_png(map: &InstanceLabelMap, path: &Path) -> Result<(), LabelIoError> {
    let pixels: Vec<u16> = map
        .labels()
        .iter()
        .map(|&v| {
            if v > PNG_MAX_ID {
                Err(LabelIoError::IdOverflow { id: v })
            } else {
                Ok(v as u16)
            }
        })
        .collect::<Result<_, _>>()?;
    let buf =
        image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(map.width() as u32, map.height() as u32, pixels)
            .expect("pixel buffer matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| LabelIoError::Image { path: path.to_path_buf(), source })
}

/// Saves a map as an RLE JSON document.
pub fn save_label_json(map: &InstanceLabelMap, path: &Path) -> Result<(), LabelIoError> {
    let doc = RleDocument {
        height: map.height(),
        width: map.width(),
        instances: encode_rle(map),
    };
    let file = File::create(path).map_err(|source| LabelIoError::Io { path: path.to_path_buf(), source })?;
    serde_json::to_writer(BufWriter::new(file), &doc)
        .map_err(|source| LabelIoError::Json { path: path.to_path_buf(), source })
}

/// Loads a label map from a `.png` or `.json` file.
pub fn load_label_map(path: &Path) -> Result<InstanceLabelMap, LabelIoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("png") => load_label_png(path),
        Some("json") => load_label_json(path),
        _ => Err(LabelIoError::UnsupportedExtension { path: path.to_path_buf() }),
    }
}

fn load_label_png(path: &Path) -> Result<InstanceLabelMap, LabelIoError> {
    let img = image::open(path).map_err(|source| LabelIoError::Image { path: path.to_path_buf(), source })?;
    let (h, w) = (img.height() as usize, img.width() as usize);
    let labels: Vec<u32> = match img {
        image::DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        image::DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        _ => return Err(LabelIoError::UnsupportedPixelFormat { path: path.to_path_buf() }),
    };
    Ok(InstanceLabelMap::from_vec(h, w, labels))
}

fn load_label_json(path: &Path) -> Result<InstanceLabelMap, LabelIoError> {
    let file = File::open(path).map_err(|source| LabelIoError::Io { path: path.to_path_buf(), source })?;
    let doc: RleDocument = serde_json::from_reader(BufReader::new(file))
        .map_err(|source| LabelIoError::Json { path: path.to_path_buf(), source })?;
    Ok(decode_rle(&doc.instances, doc.height, doc.width)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_map() -> InstanceLabelMap {
        InstanceLabelMap::from_vec(3, 4, vec![0, 1, 1, 0, 2, 2, 0, 300, 2, 0, 300, 300])
    }

    #[test]
    fn png_round_trip_preserves_ids() {
        let dir = tempfile::tempdir().unwrap();
        let map = sample_map();
        let path = save_label_map(&map, dir.path(), "m").unwrap();
        assert_eq!(path.extension().unwrap(), "png");
        assert_eq!(load_label_map(&path).unwrap(), map);
    }

    #[test]
    fn large_ids_fall_back_to_json() {
        let dir = tempfile::tempdir().unwrap();
        let map = InstanceLabelMap::from_vec(2, 2, vec![0, 70_000, 70_000, 3]);
        let path = save_label_map(&map, dir.path(), "m").unwrap();
        assert_eq!(path.extension().unwrap(), "json");
        assert_eq!(load_label_map(&path).unwrap(), map);
    }

    #[test]
    fn json_document_matches_schema() {
        let dir = tempfile::tempdir().unwrap();
        let map = InstanceLabelMap::from_vec(1, 3, vec![5, 0, 5]);
        let path = dir.path().join("m.json");
        save_label_json(&map, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, r#"{"height":1,"width":3,"instances":[{"id":5,"runs":[[0,1],[2,1]]}]}"#);
    }

    #[test]
    fn eight_bit_png_widens_without_rescaling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let buf = image::ImageBuffer::<image::Luma<u8>, Vec<u8>>::from_raw(2, 1, vec![0, 42]).unwrap();
        buf.save_with_format(&path, image::ImageFormat::Png).unwrap();
        let map = load_label_map(&path).unwrap();
        assert_eq!(map.labels(), &[0, 42]);
    }

    #[test]
    fn save_is_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let map = sample_map();
        let p1 = dir.path().join("a.png");
        let p2 = dir.path().join("b.png");
        save_label_png(&map, &p1).unwrap();
        save_label_png(&map, &p2).unwrap();
        assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
    }

    #[test]
    fn rejects_unknown_extension() {
        let err = load_label_map(Path::new("x.bmp")).unwrap_err();
        assert!(matches!(err, LabelIoError::UnsupportedExtension { .. }));
    }

    #[test]
    fn png_save_rejects_oversized_ids() {
        let dir = tempfile::tempdir().unwrap();
        let map = InstanceLabelMap::from_vec(1, 1, vec![65_536]);
        let err = save_label_png(&map, &dir.path().join("m.png")).unwrap_err();
        assert!(matches!(err, LabelIoError::IdOverflow { id: 65_536 }));
    }
}
