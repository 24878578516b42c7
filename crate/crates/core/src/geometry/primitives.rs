//! Closed reference solids with outward winding.

use std::f64::consts::TAU;

use super::{Point3, TriangleMesh};

/// Axis-aligned box spanning `lo`..`hi`.
pub fn box_mesh(lo: Point3, hi: Point3) -> TriangleMesh {
    let v = |i: usize| {
        Point3::new(
            if i & 1 == 0 { lo.x } else { hi.x },
            if i & 2 == 0 { lo.y } else { hi.y },
            if i & 4 == 0 { lo.z } else { hi.z },
        )
    };
    let vertices = (0..8).map(v).collect();
    let triangles = vec![
        [0, 2, 1], [1, 2, 3], // z = lo
        [4, 5, 6], [5, 7, 6], // z = hi
        [0, 1, 4], [1, 5, 4], // y = lo
        [2, 6, 3], [3, 6, 7], // y = hi
        [0, 4, 2], [2, 4, 6], // x = lo
        [1, 3, 5], [3, 7, 5], // x = hi
    ];
    TriangleMesh::new(vertices, triangles).expect("box is valid")
}

/// Cube `[0, side]³`.
pub fn cube(side: f64) -> TriangleMesh {
    box_mesh(Point3::ORIGIN, Point3::new(side, side, side))
}

/// Vertical cylinder on the xy-plane centred on the z axis.
pub fn cylinder(radius: f64, height: f64, segments: usize) -> TriangleMesh {
    frustum(radius, radius, height, segments)
}

/// Right circular cone, base of `radius` at z = 0 and apex at `height`.
pub fn cone(radius: f64, height: f64, segments: usize) -> TriangleMesh {
    let mut vertices: Vec<Point3> = ring(radius, 0.0, segments);
    let base_center = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, 0.0));
    let apex = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, height));
    let mut triangles = Vec::new();
    for i in 0..segments {
        let j = (i + 1) % segments;
        triangles.push([base_center, j, i]);
        triangles.push([i, j, apex]);
    }
    TriangleMesh::new(vertices, triangles).expect("cone is valid")
}

fn frustum(r0: f64, r1: f64, height: f64, segments: usize) -> TriangleMesh {
    let mut vertices = ring(r0, 0.0, segments);
    vertices.extend(ring(r1, height, segments));
    let bottom = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, 0.0));
    let top = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, height));
    let mut triangles = Vec::new();
    for i in 0..segments {
        let j = (i + 1) % segments;
        let (ui, uj) = (i + segments, j + segments);
        triangles.push([i, j, uj]);
        triangles.push([i, uj, ui]);
        triangles.push([bottom, j, i]);
        triangles.push([top, ui, uj]);
    }
    TriangleMesh::new(vertices, triangles).expect("frustum is valid")
}

fn ring(radius: f64, z: f64, segments: usize) -> Vec<Point3> {
    (0..segments)
        .map(|k| {
            let t = TAU * k as f64 / segments as f64;
            Point3::new(radius * t.cos(), radius * t.sin(), z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn solids_are_closed_with_positive_volume() {
        for m in [cube(2.0), cylinder(5.0, 3.0, 64), cone(5.0, 3.0, 64)] {
            assert!(m.is_watertight());
            assert!(m.volume() > 0.0);
        }
        let cyl = cylinder(5.0, 3.0, 720);
        assert!((cyl.volume() - PI * 25.0 * 3.0).abs() / cyl.volume() < 1e-4);
    }
}
