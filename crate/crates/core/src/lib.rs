//! Digital chain for concrete 3D printing.
//!
//! The crate covers the software side of a printing job end to end:
//!
//! - [`geometry`]: points, meshes, polylines, planar contours and STL I/O.
//! - [`design`]: parametric generators (oscillating circle, woven layers,
//!   rectangle-to-circle twisted prism).
//! - [`slicer`]: planar mesh slicing, direct parametric slicing and the
//!   single continuous helical path.
//! - [`toolpath`]: timed machine moves, over-deposition detection, reach
//!   envelope checks, deposition rasterization, G-code and event series.
//! - [`stability`]: early-age plastic collapse and self-weight buckling on a
//!   layer-stack idealization.
//! - [`inspection`]: scan-to-CAD signed deviation, ICP alignment and heatmaps.
//! - [`pipeline`]: config file, subcommands and the artifact manifest.
//!
//! Data-parallel kernels go through [`par`], which runs on rayon when the
//! `parallel` feature is enabled and falls back to plain iterators otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod geometry;
pub mod inspection;
pub mod par;
pub mod pipeline;
pub mod slicer;
pub mod stability;
pub mod toolpath;

pub use error::{Error, Result};
pub use geometry::{Contour2, Point3, Polyline3, TriangleMesh};
