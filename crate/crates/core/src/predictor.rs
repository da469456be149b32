//! Field sources: one interface over oracle targets, degraded oracles, and
//! externally produced field files.
//!
//! The decoder consumes a [`FlowField`](crate::flow::FlowField) and does not
//! care where it came from. A [`FieldSource`] names the provenance: exact
//! targets computed from a label map, those targets with calibrated noise, or
//! a field file exported by an external predictor. Anything that can write
//! the field format can stand in for a trained network.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::flow::{compute_flow_targets, perturb_field, FlowField};
use crate::labelio::{load_label_map, LabelIoError};
use crate::uemf::{load_uemf, save_uemf, UemfError};

/// Where a flow field comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    /// Exact targets computed from a ground-truth label map.
    Oracle { labels: PathBuf },
    /// Oracle targets with Gaussian flow noise and logit-space prob noise.
    NoisyOracle { labels: PathBuf, sigma: f64, seed: u64 },
    /// A field file written by [`save_fields`] or an external predictor.
    File { path: PathBuf },
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("field input {0} does not exist")]
    FileNotFound(PathBuf),
    #[error("noise sigma must be finite and non-negative, got {0}")]
    InvalidSigma(f64),
    #[error(
        "field dimensions {actual_height}x{actual_width} do not match expected {expected_height}x{expected_width}"
    )]
    DimsMismatch {
        expected_height: usize,
        expected_width: usize,
        actual_height: usize,
        actual_width: usize,
    },
    #[error(transparent)]
    Labels(#[from] LabelIoError),
    #[error(transparent)]
    Format(#[from] UemfError),
}

/// Materializes the field a source describes, verifying dimensions when the
/// caller knows what to expect.
pub fn resolve_fields(
    source: &FieldSource,
    expected_dims: Option<(usize, usize)>,
) -> Result<FlowField, FieldError> {
    let field = match source {
        FieldSource::Oracle { labels } => oracle_field(labels)?,
        FieldSource::NoisyOracle { labels, sigma, seed } => {
            if !sigma.is_finite() || *sigma < 0.0 {
                return Err(FieldError::InvalidSigma(*sigma));
            }
            perturb_field(&oracle_field(labels)?, *sigma, *seed)
        }
        FieldSource::File { path } => {
            if !path.exists() {
                return Err(FieldError::FileNotFound(path.clone()));
            }
            load_uemf(path)?
        }
    };
    if let Some((h, w)) = expected_dims {
        if field.height() != h || field.width() != w {
            return Err(FieldError::DimsMismatch {
                expected_height: h,
                expected_width: w,
                actual_height: field.height(),
                actual_width: field.width(),
            });
        }
    }
    Ok(field)
}

/// Writes a field to the on-disk format [`resolve_fields`] reads back.
pub fn save_fields(field: &FlowField, path: &Path) -> Result<(), FieldError> {
    save_uemf(field, path).map_err(FieldError::from)
}

fn oracle_field(labels: &Path) -> Result<FlowField, FieldError> {
    if !labels.exists() {
        return Err(FieldError::FileNotFound(labels.to_path_buf()));
    }
    let map = load_label_map(labels)?;
    Ok(compute_flow_targets(&map))
}
