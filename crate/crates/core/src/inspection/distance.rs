use std::collections::HashMap;

use crate::geometry::{Point3, TriangleMesh};

/// Part of a triangle holding the closest point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Feature {
    Vertex(usize),
    /// Edge from local vertex `k` to `k + 1`.
    Edge(usize),
    Face,
}

/// Closest point on triangle `abc` to `p`.
pub(crate) fn closest_on_triangle(p: Point3, a: Point3, b: Point3, c: Point3) -> (Point3, Feature) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, Feature::Vertex(0));
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, Feature::Vertex(1));
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, Feature::Edge(0));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, Feature::Vertex(2));
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, Feature::Edge(2));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, Feature::Edge(1));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, Feature::Face)
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    lo: Point3,
    hi: Point3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            lo: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            hi: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: Point3) {
        self.lo = Point3::new(self.lo.x.min(p.x), self.lo.y.min(p.y), self.lo.z.min(p.z));
        self.hi = Point3::new(self.hi.x.max(p.x), self.hi.y.max(p.y), self.hi.z.max(p.z));
    }

    fn union(&mut self, o: &Aabb) {
        self.grow(o.lo);
        self.grow(o.hi);
    }

    fn distance_sq(&self, p: Point3) -> f64 {
        let d = |v: f64, lo: f64, hi: f64| (lo - v).max(0.0).max(v - hi);
        let (dx, dy, dz) = (
            d(p.x, self.lo.x, self.hi.x),
            d(p.y, self.lo.y, self.hi.y),
            d(p.z, self.lo.z, self.hi.z),
        );
        dx * dx + dy * dy + dz * dz
    }
}

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    /// Leaf: triangle range in `order`. Inner: children.
    kind: NodeKind,
}

#[derive(Clone, Debug)]
enum NodeKind {
    Leaf(usize, usize),
    Inner(usize, usize),
}

const LEAF_SIZE: usize = 4;

/// Nearest-triangle queries on a fixed mesh: bounding-volume hierarchy plus
/// angle-weighted pseudo-normals for the inside/outside sign.
#[derive(Clone, Debug)]
pub struct MeshDistance {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
    face_normals: Vec<Point3>,
    edge_normals: HashMap<(usize, usize), Point3>,
    vertex_normals: Vec<Point3>,
    signed: bool,
}

/// Result of a nearest-surface query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub point: Point3,
    pub triangle: usize,
    /// Positive outside, negative inside; unsigned on open meshes.
    pub distance: f64,
}

impl MeshDistance {
    pub fn new(mesh: &TriangleMesh) -> Self {
        let vertices = mesh.vertices().to_vec();
        let triangles = mesh.triangles().to_vec();
        let n = triangles.len();
        let face_normals: Vec<Point3> = (0..n).map(|k| mesh.face_normal(k)).collect();
        let mut edge_normals: HashMap<(usize, usize), Point3> = HashMap::new();
        let mut vertex_normals = vec![Point3::new(0.0, 0.0, 0.0); vertices.len()];
        for (k, t) in triangles.iter().enumerate() {
            let nf = face_normals[k];
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                let e = edge_normals.entry((a.min(b), a.max(b))).or_insert(Point3::new(0.0, 0.0, 0.0));
                *e = *e + nf;
                let p = vertices[t[i]];
                let u = (vertices[t[(i + 1) % 3]] - p).normalized();
                let v = (vertices[t[(i + 2) % 3]] - p).normalized();
                let angle = u.dot(v).clamp(-1.0, 1.0).acos();
                vertex_normals[t[i]] = vertex_normals[t[i]] + nf * angle;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| {
                let mut b = Aabb::empty();
                for &i in t {
                    b.grow(vertices[i]);
                }
                b
            })
            .collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        build(&mut nodes, &mut order, &boxes, 0, n);
        MeshDistance {
            vertices,
            triangles,
            order,
            nodes,
            face_normals,
            edge_normals,
            vertex_normals,
            signed: mesh.is_watertight(),
        }
    }

    /// False for open meshes, whose distances carry no sign.
    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn closest(&self, p: Point3) -> SurfacePoint {
        let mut best = (f64::INFINITY, 0usize, p, Feature::Face);
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let node = &self.nodes[k];
            if node.bounds.distance_sq(p) >= best.0 {
                continue;
            }
            match node.kind {
                NodeKind::Leaf(s, e) => {
                    for &t in &self.order[s..e] {
                        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
                        let (q, f) = closest_on_triangle(p, a, b, c);
                        let d = (p - q).norm_sq();
                        if d < best.0 || (d == best.0 && t < best.1) {
                            best = (d, t, q, f);
                        }
                    }
                }
                NodeKind::Inner(l, r) => {
                    let (dl, dr) = (self.nodes[l].bounds.distance_sq(p), self.nodes[r].bounds.distance_sq(p));
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
        }
        let (d2, t, q, f) = best;
        let dist = d2.sqrt();
        let distance = if self.signed && dist > 0.0 {
            let n = self.pseudo_normal(t, f);
            if (p - q).dot(n) < 0.0 {
                -dist
            } else {
                dist
            }
        } else {
            dist
        };
        SurfacePoint {
            point: q,
            triangle: t,
            distance,
        }
    }

    pub fn signed_distance(&self, p: Point3) -> f64 {
        self.closest(p).distance
    }

    fn pseudo_normal(&self, t: usize, f: Feature) -> Point3 {
        let tri = self.triangles[t];
        match f {
            Feature::Face => self.face_normals[t],
            Feature::Vertex(i) => self.vertex_normals[tri[i]],
            Feature::Edge(i) => {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                self.edge_normals[&(a.min(b), a.max(b))]
            }
        }
    }
}

fn build(nodes: &mut Vec<Node>, order: &mut [usize], boxes: &[Aabb], start: usize, end: usize) -> usize {
    let mut bounds = Aabb::empty();
    for &t in &order[start..end] {
        bounds.union(&boxes[t]);
    }
    let id = nodes.len();
    nodes.push(Node {
        bounds,
        kind: NodeKind::Leaf(start, end),
    });
    if end - start <= LEAF_SIZE {
        return id;
    }
    let ext = bounds.hi - bounds.lo;
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    let key = |t: usize| {
        let b = &boxes[t];
        (b.lo + b.hi).to_array()[axis]
    };
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    let l = build(nodes, order, boxes, start, mid);
    let r = build(nodes, order, boxes, mid, end);
    nodes[id].kind = NodeKind::Inner(l, r);
    id
}

/// Signed distance from `point` to `mesh`: positive outside, negative
/// inside. Builds a fresh index; reuse [`MeshDistance`] for many queries.
pub fn signed_distance(point: Point3, mesh: &TriangleMesh) -> f64 {
    MeshDistance::new(mesh).signed_distance(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::{cube, cylinder};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_cube_distances() {
        let m = cube(1.0);
        assert!(signed_distance(Point3::new(0.5, 0.5, 1.0), &m).abs() < 1e-12);
        assert!((signed_distance(Point3::new(0.5, 0.5, 1.5), &m) - 0.5).abs() < 1e-12);
        assert!((signed_distance(Point3::new(0.5, 0.5, 0.5), &m) + 0.5).abs() < 1e-12);
        // beyond an edge and a corner the pseudo-normal keeps the sign
        assert!((signed_distance(Point3::new(2.0, 2.0, 0.5), &m) - 2f64.sqrt()).abs() < 1e-12);
        assert!((signed_distance(Point3::new(-1.0, -1.0, -1.0), &m) - 3f64.sqrt()).abs() < 1e-12);
        assert!(signed_distance(Point3::new(0.999, 0.999, 0.999), &m) < 0.0);
    }

    #[test]
    fn matches_brute_force() {
        let m = cylinder(20.0, 30.0, 48);
        let idx = MeshDistance::new(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let p = Point3::new(
                rng.random_range(-40.0..40.0),
                rng.random_range(-40.0..40.0),
                rng.random_range(-20.0..50.0),
            );
            let brute = (0..m.triangles().len())
                .map(|k| {
                    let [a, b, c] = m.triangle(k);
                    (p - closest_on_triangle(p, a, b, c).0).norm()
                })
                .fold(f64::INFINITY, f64::min);
            let d = idx.signed_distance(p);
            assert!((d.abs() - brute).abs() < 1e-12);
            let inside = p.x.hypot(p.y) < 20.0 * (std::f64::consts::PI / 48.0).cos() - 1e-6
                && p.z > 1e-6
                && p.z < 30.0 - 1e-6;
            if inside {
                assert!(d < 0.0);
            }
        }
    }

    #[test]
    fn open_mesh_is_unsigned() {
        let m = cube(1.0).without_triangle(0).unwrap();
        let idx = MeshDistance::new(&m);
        assert!(!idx.is_signed());
        assert!(idx.signed_distance(Point3::new(0.5, 0.5, 0.5)) > 0.0);
    }
}
