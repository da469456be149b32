//! Flow fields: supervision targets and the flow-following decoder.
//!
//! A [`FlowField`] carries three planes over the image grid: the vertical and
//! horizontal components of a center-pointing unit vector field, and a
//! foreground probability. [`compute_flow_targets`] builds the field a
//! predictor is trained against; [`follow_flows`] recovers instances from any
//! such field by integrating pixel trajectories and clustering their sinks.

mod cluster;
mod decode;
mod perturb;
mod targets;

pub use cluster::cluster_sinks;
pub use decode::follow_flows;
pub use perturb::perturb_field;
pub use targets::{compute_flow_targets, instance_center};

use thiserror::Error;

/// Three-plane field over an image grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    height: usize,
    width: usize,
    flow_y: Vec<f32>,
    flow_x: Vec<f32>,
    prob: Vec<f32>,
}

impl FlowField {
    /// Creates an all-zero field.
    pub fn new(height: usize, width: usize) -> Self {
        let n = height * width;
        Self { height, width, flow_y: vec![0.0; n], flow_x: vec![0.0; n], prob: vec![0.0; n] }
    }

    /// Wraps existing planes.
    ///
    /// # Panics
    /// Panics if any plane length differs from `height * width`.
    pub fn from_parts(height: usize, width: usize, flow_y: Vec<f32>, flow_x: Vec<f32>, prob: Vec<f32>) -> Self {
        let n = height * width;
        assert_eq!(flow_y.len(), n, "flow_y plane length mismatch");
        assert_eq!(flow_x.len(), n, "flow_x plane length mismatch");
        assert_eq!(prob.len(), n, "prob plane length mismatch");
        Self { height, width, flow_y, flow_x, prob }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn flow_y(&self) -> &[f32] {
        &self.flow_y
    }

    pub fn flow_x(&self) -> &[f32] {
        &self.flow_x
    }

    pub fn prob(&self) -> &[f32] {
        &self.prob
    }

    pub fn flow_y_mut(&mut self) -> &mut [f32] {
        &mut self.flow_y
    }

    pub fn flow_x_mut(&mut self) -> &mut [f32] {
        &mut self.flow_x
    }

    pub fn prob_mut(&mut self) -> &mut [f32] {
        &mut self.prob
    }

    #[inline]
    pub(crate) fn idx(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    /// Flow vector at an integer pixel.
    #[inline]
    pub fn flow_at(&self, row: usize, col: usize) -> (f32, f32) {
        let i = self.idx(row, col);
        (self.flow_y[i], self.flow_x[i])
    }

    /// Foreground probability at an integer pixel.
    #[inline]
    pub fn prob_at(&self, row: usize, col: usize) -> f32 {
        self.prob[self.idx(row, col)]
    }

    /// Bilinear flow sample at a continuous position, border-clamped.
    ///
    /// Positions outside `[0, H-1] x [0, W-1]` sample the nearest border
    /// pixel; interior samples interpolate the four surrounding pixels.
    pub fn sample_flow(&self, y: f32, x: f32) -> (f32, f32) {
        let y = y.clamp(0.0, (self.height - 1) as f32);
        let x = x.clamp(0.0, (self.width - 1) as f32);
        let y0 = y.floor() as usize;
        let x0 = x.floor() as usize;
        let y1 = (y0 + 1).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let fy = y - y0 as f32;
        let fx = x - x0 as f32;
        let w00 = (1.0 - fy) * (1.0 - fx);
        let w01 = (1.0 - fy) * fx;
        let w10 = fy * (1.0 - fx);
        let w11 = fy * fx;
        let i00 = self.idx(y0, x0);
        let i01 = self.idx(y0, x1);
        let i10 = self.idx(y1, x0);
        let i11 = self.idx(y1, x1);
        let vy = w00 * self.flow_y[i00] + w01 * self.flow_y[i01] + w10 * self.flow_y[i10] + w11 * self.flow_y[i11];
        let vx = w00 * self.flow_x[i00] + w01 * self.flow_x[i01] + w10 * self.flow_x[i10] + w11 * self.flow_x[i11];
        (vy, vx)
    }
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("decode parameter out of range: {0}")]
    InvalidParam(&'static str),
    #[error("instance has no pixels")]
    EmptyInstance,
}

/// Decoder settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeParams {
    /// Euler integration steps per pixel.
    pub n_iter: u32,
    /// Step length in pixels per iteration.
    pub step_size: f32,
    /// Foreground threshold on the probability plane.
    pub prob_threshold: f32,
    /// Side length of the square sink histogram cells, in pixels.
    pub sink_bin: u32,
    /// Instances smaller than this many pixels are discarded.
    pub min_size: u32,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self { n_iter: 200, step_size: 1.0, prob_threshold: 0.5, sink_bin: 2, min_size: 15 }
    }
}

impl DecodeParams {
    /// Validates parameter ranges.
    pub fn validate(&self) -> Result<(), FlowError> {
        if self.n_iter == 0 {
            return Err(FlowError::InvalidParam("n_iter must be at least 1"));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(FlowError::InvalidParam("step_size must be positive"));
        }
        if !(self.prob_threshold.is_finite() && self.prob_threshold > 0.0 && self.prob_threshold < 1.0) {
            return Err(FlowError::InvalidParam("prob_threshold must be in (0, 1)"));
        }
        if self.sink_bin == 0 {
            return Err(FlowError::InvalidParam("sink_bin must be at least 1"));
        }
        Ok(())
    }
}
