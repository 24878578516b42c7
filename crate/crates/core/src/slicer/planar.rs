use std::collections::BTreeMap;

use super::{Layer, LayerStack, SlicePlan};
use crate::error::{Error, Result};
use crate::geometry::{layer_centers, Contour2, Point2, TriangleMesh, POINT_EPS};
use crate::par::Exec;

/// Intersect a watertight mesh with planes at `z_min + h/2 + k·h`.
///
/// Intersection points are keyed by the mesh edge they lie on, so stitching
/// is exact on a closed manifold. Outer boundaries come out counter-clockwise
/// and holes clockwise, following the outward triangle winding.
pub fn slice_planar(mesh: &TriangleMesh, plan: &SlicePlan) -> Result<LayerStack> {
    slice_planar_with(mesh, plan, Exec::default())
}

pub fn slice_planar_with(mesh: &TriangleMesh, plan: &SlicePlan, exec: Exec) -> Result<LayerStack> {
    plan.validate()?;
    if !mesh.is_watertight() {
        return Err(Error::NotWatertight {
            boundary_edges: count_open_edges(mesh),
        });
    }
    let (lo, hi) = mesh.bounds();
    let heights: Vec<f64> = layer_centers(hi.z - lo.z, plan.layer_height)
        .into_iter()
        .map(|z| lo.z + z)
        .collect();
    let layers = exec
        .map(&heights, |&z| slice_at(mesh, z).map(|contours| Layer { z, contours }))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    LayerStack::new(plan.layer_height, layers)
}

fn count_open_edges(mesh: &TriangleMesh) -> usize {
    let mut uses: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for t in mesh.triangles() {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    uses.values().filter(|&&n| n != 2).count()
}

type EdgeKey = (usize, usize);

fn edge_point(mesh: &TriangleMesh, key: EdgeKey, z: f64) -> Point2 {
    let (a, b) = (mesh.vertices()[key.0], mesh.vertices()[key.1]);
    let t = (z - a.z) / (b.z - a.z);
    a.lerp(b, t).xy()
}

/// Contours of one plane.
pub(crate) fn slice_at(mesh: &TriangleMesh, z: f64) -> Result<Vec<Contour2>> {
    // edge where the boundary enters a triangle -> edge where it leaves
    let mut next: BTreeMap<EdgeKey, EdgeKey> = BTreeMap::new();
    for t in mesh.triangles() {
        let above = t.map(|i| mesh.vertices()[i].z >= z);
        if above[0] == above[1] && above[1] == above[2] {
            continue;
        }
        let mut down = None;
        let mut up = None;
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            let key = (a.min(b), a.max(b));
            match (above[e], above[(e + 1) % 3]) {
                (true, false) => down = Some(key),
                (false, true) => up = Some(key),
                _ => {}
            }
        }
        if let (Some(from), Some(to)) = (down, up) {
            next.insert(from, to);
        }
    }

    let mut contours = Vec::new();
    while let Some((&start, _)) = next.iter().next() {
        let mut chain = vec![start];
        let mut cur = start;
        loop {
            let Some(to) = next.remove(&cur) else {
                let end = edge_point(mesh, cur, z);
                let gap = end.distance(edge_point(mesh, start, z));
                return Err(Error::OpenChain { z, gap });
            };
            if to == start {
                break;
            }
            chain.push(to);
            cur = to;
        }
        let points = simplify(chain.iter().map(|&k| edge_point(mesh, k, z)).collect());
        if points.len() >= 3 {
            contours.push(Contour2::new(z, points)?);
        }
    }
    Ok(contours)
}

/// Drop coincident and collinear vertices of a closed ring.
fn simplify(mut pts: Vec<Point2>) -> Vec<Point2> {
    loop {
        let n = pts.len();
        if n < 3 {
            return pts;
        }
        let keep: Vec<bool> = (0..n)
            .map(|i| {
                let prev = pts[(i + n - 1) % n];
                let cur = pts[i];
                let nxt = pts[(i + 1) % n];
                if cur.distance(prev) <= POINT_EPS {
                    return false;
                }
                let scale = (cur - prev).norm() * (nxt - cur).norm();
                let cross = (cur - prev).cross(nxt - cur);
                !(cross.abs() <= 1e-12 * scale && (cur - prev).dot(nxt - cur) > 0.0)
            })
            .collect();
        if keep.iter().all(|&k| k) {
            return pts;
        }
        // remove one vertex per pass so neighbours are re-evaluated
        let i = keep.iter().position(|&k| !k).unwrap();
        pts.remove(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{primitives, Orientation, Point3};

    #[test]
    fn cube_gives_square_layers() {
        let stack = slice_planar(&primitives::cube(40.0), &SlicePlan::planar(10.0)).unwrap();
        assert_eq!(stack.len(), 4);
        for (k, l) in stack.layers().iter().enumerate() {
            assert_eq!(l.z, 5.0 + 10.0 * k as f64);
            assert_eq!(l.contours.len(), 1);
            let c = &l.contours[0];
            assert_eq!(c.len(), 4);
            assert_eq!(c.orientation(), Orientation::Outer);
            assert!((c.area() - 1600.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cylinder_layers_are_circles() {
        let stack =
            slice_planar(&primitives::cylinder(50.0, 20.0, 360), &SlicePlan::planar(2.0)).unwrap();
        assert_eq!(stack.len(), 10);
        for l in stack.layers() {
            assert_eq!(l.contours.len(), 1);
            for p in l.contours[0].points() {
                assert!((p.norm() - 50.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cone_taper() {
        let stack =
            slice_planar(&primitives::cone(30.0, 30.0, 720), &SlicePlan::planar(10.0)).unwrap();
        let mid = stack.layers().iter().find(|l| l.z == 15.0).unwrap();
        let c = &mid.contours[0];
        let rmax = c.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
        assert!((rmax - 15.0).abs() < 0.01, "{rmax}");
    }

    #[test]
    fn hollow_box_has_cw_hole() {
        // outer box minus inner box, built from two closed shells with the
        // inner one wound inward
        let outer = primitives::box_mesh(Point3::new(0., 0., 0.), Point3::new(40., 40., 20.));
        let inner = primitives::box_mesh(Point3::new(10., 10., 0.), Point3::new(30., 30., 20.));
        let mut vertices = outer.vertices().to_vec();
        let mut triangles = outer.triangles().to_vec();
        let off = vertices.len();
        vertices.extend_from_slice(inner.vertices());
        triangles.extend(inner.triangles().iter().map(|t| [t[0] + off, t[2] + off, t[1] + off]));
        let mesh = TriangleMesh::new(vertices, triangles).unwrap();
        let stack = slice_planar(&mesh, &SlicePlan::planar(5.0)).unwrap();
        for l in stack.layers() {
            assert_eq!(l.contours.len(), 2);
            let holes = l.contours.iter().filter(|c| c.orientation() == Orientation::Hole).count();
            assert_eq!(holes, 1);
        }
        assert!((stack.volume() - (1600.0 - 400.0) * 20.0).abs() < 1e-6);
    }

    #[test]
    fn open_mesh_refused() {
        let open = primitives::cube(10.0).without_triangle(0).unwrap();
        assert!(matches!(
            slice_planar(&open, &SlicePlan::planar(1.0)),
            Err(Error::NotWatertight { .. })
        ));
    }

    #[test]
    fn prismatic_volume_within_two_percent() {
        let cyl = primitives::cylinder(50.0, 20.0, 180);
        let stack = slice_planar(&cyl, &SlicePlan::planar(2.0)).unwrap();
        assert!((stack.volume() - cyl.volume()).abs() / cyl.volume() < 0.02);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let m = primitives::cone(30.0, 30.0, 200);
        let plan = SlicePlan::planar(1.0);
        assert_eq!(
            slice_planar_with(&m, &plan, Exec::Sequential).unwrap(),
            slice_planar_with(&m, &plan, Exec::Parallel).unwrap()
        );
    }
}
