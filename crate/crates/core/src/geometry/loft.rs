use super::{Contour2, Orientation, Point2, TriangleMesh};
use crate::error::{Error, Result};

/// Skin a stack of equally sampled outer contours into a closed solid.
///
/// Rings sit at each contour's z; the first and last shapes are extruded to
/// `z_bottom` and `z_top`. Caps are fans about each end contour's centroid,
/// so those contours must be star-shaped with respect to it.
pub fn loft_contours(contours: &[Contour2], z_bottom: f64, z_top: f64) -> Result<TriangleMesh> {
    let first = contours
        .first()
        .ok_or_else(|| Error::InvalidGeometry("no contours to loft".into()))?;
    let n = first.len();
    for (i, c) in contours.iter().enumerate() {
        if c.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "contour {i} has {} points, expected {n}",
                c.len()
            )));
        }
        if c.orientation() != Orientation::Outer {
            return Err(Error::InvalidGeometry(format!("contour {i} is a hole")));
        }
    }
    let last = &contours[contours.len() - 1];
    if !(z_bottom <= first.z() && last.z() <= z_top && z_bottom < z_top) {
        return Err(Error::InvalidGeometry(format!(
            "loft span {z_bottom}..{z_top} does not enclose the contours"
        )));
    }

    let mut rings: Vec<(f64, &[Point2])> = Vec::new();
    if z_bottom < first.z() {
        rings.push((z_bottom, first.points()));
    }
    for c in contours {
        if let Some(&(z, _)) = rings.last() {
            if c.z() <= z {
                return Err(Error::InvalidGeometry("contour z must increase".into()));
            }
        }
        rings.push((c.z(), c.points()));
    }
    if z_top > last.z() {
        rings.push((z_top, last.points()));
    }

    let mut vertices = Vec::with_capacity(rings.len() * n + 2);
    for (z, pts) in &rings {
        vertices.extend(pts.iter().map(|p| p.at_z(*z)));
    }
    let mut triangles = Vec::new();
    for r in 0..rings.len() - 1 {
        let (a, b) = (r * n, (r + 1) * n);
        for i in 0..n {
            let j = (i + 1) % n;
            triangles.push([a + i, a + j, b + j]);
            triangles.push([a + i, b + j, b + i]);
        }
    }
    let bottom_c = first.centroid();
    let top_c = last.centroid();
    let bc = vertices.len();
    vertices.push(bottom_c.at_z(rings[0].0));
    let tc = vertices.len();
    vertices.push(top_c.at_z(rings[rings.len() - 1].0));
    let top_ring = (rings.len() - 1) * n;
    for i in 0..n {
        let j = (i + 1) % n;
        triangles.push([bc, j, i]);
        triangles.push([tc, top_ring + i, top_ring + j]);
    }
    check_fan(first.points(), bottom_c)?;
    check_fan(last.points(), top_c)?;
    TriangleMesh::new(vertices, triangles)
}

fn check_fan(points: &[Point2], c: Point2) -> Result<()> {
    let n = points.len();
    for i in 0..n {
        let (a, b) = (points[i] - c, points[(i + 1) % n] - c);
        if a.cross(b) <= 0.0 {
            return Err(Error::InvalidGeometry(
                "end contour is not star-shaped about its centroid".into(),
            ));
        }
    }
    Ok(())
}
