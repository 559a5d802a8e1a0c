//! Joint trajectory maps: colour-coded images of 3D skeleton motion.
//!
//! A skeleton sequence is optionally rotated to a new view, its per-joint
//! trajectories are projected onto the front, top and side planes, and each
//! trajectory segment is painted with a colour that encodes when it happened
//! (hue along a colormap), which body part moved (choice of colormap) and
//! how fast (HSV saturation and value). The crate also provides late score
//! fusion and a small nearest-neighbour evaluation loop over synthetic
//! actions.
//!
//! Modules:
//!
//! - [`skeleton_io`]: sequence model, file formats, validation.
//! - [`geometry`]: view rotation, view grids, plane projection.
//! - [`trajectory`]: segments and speeds.
//! - [`encoding`]: colormaps and per-segment colours.
//! - [`rasterizer`]: canvases, line drawing, rendering and PNG export.
//! - [`fusion`]: score matrices, fusion rules, prediction.
//! - [`evalkit`]: synthetic corpus, k-NN scoring, dataset export, experiments.

pub mod encoding;
pub mod evalkit;
pub mod fsutil;
pub mod fusion;
pub mod geometry;
pub mod rasterizer;
pub mod skeleton_io;
pub mod trajectory;

pub use encoding::{ColorMap, EncodingLevel, EncodingParams, Rgb};
pub use fusion::{FusionMethod, ScoreMatrix};
pub use geometry::{Plane, ViewAngles, ViewGrid};
pub use rasterizer::{JtmCanvas, RenderSettings};
pub use skeleton_io::{JointPartition, Point3, SequenceFormat, SkeletonSequence};
