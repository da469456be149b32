//! Flow-based dense instance segmentation engine.
//!
//! The crate covers the full desk-scale pipeline for field-based instance
//! segmentation of dense micrographs:
//!
//! * [`labelmap`] / [`rle`] / [`components`] / [`iou`] — label-map substrate:
//!   instance grids, run-length masks, connected components, pairwise IoU.
//! * [`flow`] — supervision-target generation (per-instance energy diffusion)
//!   and the flow-following decoder (Euler integration + sink clustering).
//! * [`metrics`] — instance matching at an IoU threshold, AP and PQ scoring,
//!   and the sparse/dense dataset split.
//! * [`synthgen`] — deterministic synthetic scene generator producing dense
//!   micrograph-like ground truth.
//! * [`predictor`] — field sources (oracle, noisy oracle, UEMF files) behind
//!   one interface, decoupling the decoder from any particular network.
//! * [`uemf`] — the bit-exact binary field file format.

pub mod components;
pub mod flow;
pub mod iou;
pub mod labelio;
pub mod labelmap;
pub mod metrics;
pub mod predictor;
pub mod rle;
pub mod rng;
pub mod synthgen;
pub mod uemf;

pub use components::{label_connected_components, Connectivity};
pub use flow::{compute_flow_targets, follow_flows, perturb_field, DecodeParams, FlowField};
pub use iou::{pairwise_iou, IouMatrix};
pub use labelmap::InstanceLabelMap;
pub use metrics::{evaluate_dataset, match_at_threshold, MatchTable, MetricsReport};
pub use predictor::{resolve_fields, save_fields, FieldSource};
pub use rle::{decode_rle, encode_rle, RleMask};
pub use synthgen::{generate_scene, sample_scene_suite, scene_statistics, SceneSpec, SceneStats};
