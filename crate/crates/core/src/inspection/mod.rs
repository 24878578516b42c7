//! Scan-to-CAD comparison: nearest-surface distances, rigid alignment,
//! deviation statistics and heatmap export.

mod cloud;
mod distance;
mod icp;
mod report;

pub use cloud::{
    deviation_color, export_heatmap_ply, format_heatmap_ply, load_pointcloud, parse_ply,
    parse_xyz, PointCloud,
};
pub use distance::{signed_distance, MeshDistance, SurfacePoint};
pub use icp::{
    align_icp, align_icp_detailed, IcpOutcome, RigidTransform, DEFAULT_ICP_TOL, DEFAULT_MAX_ITERS,
};
pub use report::{
    deviation_report, deviation_report_with, DeviationReport, InspectOptions,
    DEFAULT_PASS_FRACTION,
};

use crate::geometry::{Point3, TriangleMesh};

/// Deterministic surface samples: `per_edge·(per_edge+1)/2` interior points
/// of a barycentric lattice on every triangle.
pub fn sample_surface(mesh: &TriangleMesh, per_edge: usize) -> Vec<Point3> {
    let n = per_edge.max(1);
    let mut out = Vec::new();
    for k in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.triangle(k);
        for i in 0..n {
            for j in 0..n - i {
                let (u, v) = ((i as f64 + 1.0 / 3.0) / n as f64, (j as f64 + 1.0 / 3.0) / n as f64);
                out.push(a + (b - a) * u + (c - a) * v);
            }
        }
    }
    out
}
