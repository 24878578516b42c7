use super::{Point2, Point3, POINT_EPS};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Counter-clockwise: an outer boundary.
    Outer,
    /// Clockwise: a hole.
    Hole,
}

/// Closed simple polygon in the plane `z`. The closing edge is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Contour2 {
    z: f64,
    points: Vec<Point2>,
    orientation: Orientation,
}

impl Contour2 {
    /// Validates simplicity and derives the orientation from the signed area.
    pub fn new(z: f64, points: Vec<Point2>) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::InvalidGeometry(format!("non-finite contour z {z}")));
        }
        if points.len() < 3 {
            return Err(Error::InvalidGeometry(format!(
                "contour needs at least 3 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidGeometry("non-finite contour point".into()));
        }
        let n = points.len();
        for i in 0..n {
            if points[i].distance(points[(i + 1) % n]) <= POINT_EPS {
                return Err(Error::InvalidGeometry(format!(
                    "coincident consecutive contour points at index {i}"
                )));
            }
        }
        if let Some((i, j)) = first_self_intersection(&points) {
            return Err(Error::SelfIntersection(format!(
                "edges {i} and {j} cross at z = {z}"
            )));
        }
        let area = signed_area(&points);
        if area.abs() <= POINT_EPS {
            return Err(Error::InvalidGeometry("contour has zero area".into()));
        }
        let orientation = if area > 0.0 {
            Orientation::Outer
        } else {
            Orientation::Hole
        };
        Ok(Contour2 {
            z,
            points,
            orientation,
        })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let a = self.signed_area();
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Point2::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    pub fn reversed(&self) -> Contour2 {
        let mut points = self.points.clone();
        points.reverse();
        Contour2 {
            z: self.z,
            points,
            orientation: match self.orientation {
                Orientation::Outer => Orientation::Hole,
                Orientation::Hole => Orientation::Outer,
            },
        }
    }

    pub fn with_z(&self, z: f64) -> Contour2 {
        Contour2 {
            z,
            points: self.points.clone(),
            orientation: self.orientation,
        }
    }

    pub fn to_points3(&self) -> Vec<Point3> {
        self.points.iter().map(|p| p.at_z(self.z)).collect()
    }

    /// Minimum distance from `center` to any edge.
    pub fn inradius_about(&self, center: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance2(center, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Even-odd point containment.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

pub(crate) fn signed_area(points: &[Point2]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        s += points[i].cross(points[(i + 1) % n]);
    }
    0.5 * s
}

pub fn point_segment_distance2(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(a + ab * t)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, touching endpoints included.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Sweep-and-prune over edge x-extents; returns the first pair of
/// non-adjacent edges that touch or cross.
pub(crate) fn first_self_intersection(points: &[Point2]) -> Option<(usize, usize)> {
    let n = points.len();
    let edge = |i: usize| (points[i], points[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let min_x = |i: usize| {
        let (a, b) = edge(i);
        a.x.min(b.x)
    };
    order.sort_by(|&i, &j| min_x(i).total_cmp(&min_x(j)).then(i.cmp(&j)));

    let mut active: Vec<usize> = Vec::new();
    let mut hit: Option<(usize, usize)> = None;
    for &i in &order {
        let (a, b) = edge(i);
        let lo = a.x.min(b.x);
        active.retain(|&j| {
            let (c, d) = edge(j);
            c.x.max(d.x) >= lo
        });
        let (ylo, yhi) = (a.y.min(b.y), a.y.max(b.y));
        for &j in &active {
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                // neighbours share a vertex; they only conflict if they fold back
                let (c, d) = edge(j);
                let shared = if (i + 1) % n == j { b } else { a };
                let other_i = if shared == a { b } else { a };
                let other_j = if shared == c { d } else { c };
                if orient(shared, other_i, other_j) == 0.0
                    && (other_i - shared).dot(other_j - shared) > 0.0
                {
                    hit = Some((i.min(j), i.max(j)));
                }
                continue;
            }
            let (c, d) = edge(j);
            if c.y.max(d.y) < ylo || c.y.min(d.y) > yhi {
                continue;
            }
            if segments_intersect(a, b, c, d) {
                let pair = (i.min(j), i.max(j));
                hit = Some(hit.map_or(pair, |h| h.min(pair)));
            }
        }
        active.push(i);
    }
    hit
}
