//! Shared geometric types and file formats.
//!
//! Lengths are millimetres throughout.

mod contour;
mod loft;
mod mesh;
mod point;
mod polyline;
pub mod primitives;
pub mod stl;

pub use contour::{point_segment_distance2 as point_segment_distance, segments_intersect, Contour2, Orientation};
pub use loft::loft_contours;
pub use mesh::TriangleMesh;
pub use point::{Point2, Point3};
pub use polyline::{polyline_length, Polyline3};

/// Separation below which two consecutive points count as coincident.
pub const POINT_EPS: f64 = 1e-9;

/// Vertex merge tolerance applied when loading STL.
pub const MERGE_TOL: f64 = 1e-6;

/// Mid-layer slice heights `h/2 + k·h` below `height`.
pub fn layer_centers(height: f64, layer_height: f64) -> Vec<f64> {
    let n = (height / layer_height - 0.5 - 1e-9).ceil().max(0.0) as usize;
    (0..n).map(|k| layer_height * (k as f64 + 0.5)).collect()
}
