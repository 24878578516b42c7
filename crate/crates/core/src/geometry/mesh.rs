use std::collections::HashMap;

use super::{Point3, MERGE_TOL};
use crate::error::{Error, Result};

/// Smallest admissible triangle area, mm².
pub const MIN_TRIANGLE_AREA: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    watertight: bool,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite vertex {p:?}")));
        }
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::InvalidGeometry(format!(
                    "triangle {k} references a vertex out of range"
                )));
            }
            let area = tri_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(Error::InvalidGeometry(format!(
                    "triangle {k} is degenerate (area {area:e} mm²)"
                )));
            }
        }
        let watertight = boundary_edge_count(&triangles) == 0;
        Ok(TriangleMesh {
            vertices,
            triangles,
            watertight,
        })
    }

    /// Build from a triangle soup, merging vertices closer than
    /// [`MERGE_TOL`] and dropping triangles that collapse after the merge.
    pub fn from_soup(facets: &[[Point3; 3]]) -> Result<Self> {
        let mut welder = Welder::default();
        let mut triangles = Vec::with_capacity(facets.len());
        for f in facets {
            let t = [welder.add(f[0]), welder.add(f[1]), welder.add(f[2])];
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                continue;
            }
            let v = &welder.vertices;
            if tri_area(v[t[0]], v[t[1]], v[t[2]]) <= MIN_TRIANGLE_AREA {
                continue;
            }
            triangles.push(t);
        }
        TriangleMesh::new(welder.vertices, triangles)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_watertight(&self) -> bool {
        self.watertight
    }

    pub fn triangle(&self, k: usize) -> [Point3; 3] {
        let t = self.triangles[k];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Unit normal by the right-hand rule over the stored winding.
    pub fn face_normal(&self, k: usize) -> Point3 {
        let [a, b, c] = self.triangle(k);
        (b - a).cross(c - a).normalized()
    }

    pub fn bounds(&self) -> (Point3, Point3) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        (lo, hi)
    }

    /// Signed enclosed volume (positive for outward winding).
    pub fn volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|k| {
                let [a, b, c] = self.triangle(k);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|k| {
                let [a, b, c] = self.triangle(k);
                tri_area(a, b, c)
            })
            .sum()
    }

    pub fn without_triangle(&self, k: usize) -> Result<TriangleMesh> {
        let mut triangles = self.triangles.clone();
        triangles.remove(k);
        TriangleMesh::new(self.vertices.clone(), triangles)
    }

    /// Apply `f` to every vertex; connectivity is unchanged.
    pub fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> Result<TriangleMesh> {
        TriangleMesh::new(
            self.vertices.iter().map(|&p| f(p)).collect(),
            self.triangles.clone(),
        )
    }
}

pub(crate) fn tri_area(a: Point3, b: Point3, c: Point3) -> f64 {
    0.5 * (b - a).cross(c - a).norm()
}

/// Undirected edges not shared by exactly two triangles.
fn boundary_edge_count(triangles: &[[usize; 3]]) -> usize {
    let mut uses: HashMap<(usize, usize), u32> = HashMap::new();
    for t in triangles {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    uses.values().filter(|&&n| n != 2).count()
}

/// Hash-grid vertex welder with cell size equal to the merge tolerance.
#[derive(Default)]
struct Welder {
    vertices: Vec<Point3>,
    grid: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl Welder {
    fn key(p: Point3) -> (i64, i64, i64) {
        (
            (p.x / MERGE_TOL).floor() as i64,
            (p.y / MERGE_TOL).floor() as i64,
            (p.z / MERGE_TOL).floor() as i64,
        )
    }

    fn add(&mut self, p: Point3) -> usize {
        let (kx, ky, kz) = Self::key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        if let Some(&i) = ids
                            .iter()
                            .find(|&&i| self.vertices[i].distance(p) <= MERGE_TOL)
                        {
                            return i;
                        }
                    }
                }
            }
        }
        let i = self.vertices.len();
        self.vertices.push(p);
        self.grid.entry((kx, ky, kz)).or_default().push(i);
        i
    }
}
