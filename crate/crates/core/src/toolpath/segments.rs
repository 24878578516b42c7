use std::f64::consts::FRAC_PI_2;

use super::{PrintConfig, Toolpath};
use crate::geometry::{point_segment_distance, Point2, Point3, POINT_EPS};

#[derive(Clone, Copy, Debug)]
pub(crate) struct Seg {
    /// Index of the move in the toolpath.
    pub move_index: usize,
    pub a: Point3,
    pub b: Point3,
    pub run: usize,
    /// Arc length along the run at `a` and `b`.
    pub s0: f64,
    pub s1: f64,
}

impl Seg {
    pub fn z_mid(&self) -> f64 {
        0.5 * (self.a.z + self.b.z)
    }

    pub fn len(&self) -> f64 {
        self.s1 - self.s0
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Run {
    pub first: usize,
    pub end: usize,
    pub length: f64,
    pub closed: bool,
}

/// Extruding segments grouped into runs of uninterrupted extrusion, with the
/// pair predicates shared by collision detection and the deposition grid.
#[derive(Clone, Debug)]
pub struct ExtrudedSegments {
    pub(crate) segs: Vec<Seg>,
    pub(crate) runs: Vec<Run>,
    pub(crate) bead_width: f64,
    pub(crate) bead_height: f64,
    pub(crate) threshold: f64,
}

impl ExtrudedSegments {
    pub fn new(toolpath: &Toolpath, config: &PrintConfig) -> Self {
        let mut segs: Vec<Seg> = Vec::new();
        let mut runs: Vec<Run> = Vec::new();
        let mut prev_extruding = false;
        for (k, (a, b, m)) in toolpath.segments().enumerate() {
            if !m.extruding {
                prev_extruding = false;
                continue;
            }
            if !prev_extruding {
                runs.push(Run {
                    first: segs.len(),
                    end: segs.len(),
                    length: 0.0,
                    closed: false,
                });
            }
            let run = runs.len() - 1;
            let s0 = runs[run].length;
            let s1 = s0 + a.distance(b);
            runs[run].length = s1;
            runs[run].end = segs.len() + 1;
            segs.push(Seg {
                move_index: k,
                a,
                b,
                run,
                s0,
                s1,
            });
            prev_extruding = true;
        }
        for r in &mut runs {
            r.closed = r.end - r.first > 2
                && segs[r.first].a.distance(segs[r.end - 1].b) <= POINT_EPS;
        }
        ExtrudedSegments {
            segs,
            runs,
            bead_width: toolpath.bead_width(),
            bead_height: toolpath.bead_height(),
            threshold: config.collision_distance(),
        }
    }

    pub fn len(&self) -> usize {
        self.segs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    /// Arc-length span along which consecutive passes of one bead overlap
    /// by construction: a U-turn of centerline radius w/2.
    pub fn neighbour_span(&self) -> f64 {
        FRAC_PI_2 * self.bead_width
    }

    /// Same run and closer than [`Self::neighbour_span`] along the path.
    pub fn path_neighbours(&self, i: usize, j: usize) -> bool {
        let (p, q) = (&self.segs[i.min(j)], &self.segs[i.max(j)]);
        if p.run != q.run {
            return false;
        }
        let mut gap = (q.s0 - p.s1).max(0.0);
        let run = &self.runs[p.run];
        if run.closed {
            gap = gap.min((p.s0 + run.length - q.s1).max(0.0));
        }
        gap < self.neighbour_span()
    }

    pub fn same_layer(&self, i: usize, j: usize) -> bool {
        (self.segs[i].z_mid() - self.segs[j].z_mid()).abs() < 0.5 * self.bead_height
    }

    /// Horizontal centerline distance.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (p, q) = (&self.segs[i], &self.segs[j]);
        segment_distance2(p.a.xy(), p.b.xy(), q.a.xy(), q.b.xy())
    }

    /// Bounds on the arc-length separation `s_q - s_p` of points `p` on the
    /// earlier and `q` on the later segment of one run, or `None` for
    /// segments of different runs. Points of one bead closer than
    /// [`Self::neighbour_span`] along the path overlap by construction.
    fn window(&self, i: usize, j: usize) -> Option<(f64, f64, f64)> {
        let (p, q) = (&self.segs[i], &self.segs[j]);
        if p.run != q.run {
            return None;
        }
        let run = &self.runs[p.run];
        let span = self.neighbour_span();
        let hi = if run.closed {
            run.length - span
        } else {
            f64::INFINITY
        };
        Some((q.s0 - p.s0, span, hi))
    }

    /// Smallest horizontal distance between a point of segment `i` and a
    /// point of segment `j` that are not neighbours along one bead;
    /// infinite when no such points exist.
    pub fn exposed_distance(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        let Some((d, lo, hi)) = self.window(i, j) else {
            return self.distance(i, j);
        };
        let (p, q) = (&self.segs[i], &self.segs[j]);
        let (li, lj) = (p.len(), q.len());
        // separation along the run: d + v·lj − u·li
        let mut poly = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        poly = clip(&poly, |u, v| d + v * lj - u * li - lo);
        if hi.is_finite() {
            poly = clip(&poly, |u, v| hi - (d + v * lj - u * li));
        }
        if poly.is_empty() {
            return f64::INFINITY;
        }
        let w0 = p.a.xy() - q.a.xy();
        let di = p.b.xy() - p.a.xy();
        let dj = q.b.xy() - q.a.xy();
        let at = |u: f64, v: f64| w0 + di * u - dj * v;
        let mut best = f64::INFINITY;
        for k in 0..poly.len() {
            let (u0, v0) = poly[k];
            let (u1, v1) = poly[(k + 1) % poly.len()];
            let p0 = at(u0, v0);
            let dir = di * (u1 - u0) - dj * (v1 - v0);
            let dd = dir.dot(dir);
            let t = if dd > 0.0 {
                (-p0.dot(dir) / dd).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = best.min((p0 + dir * t).norm());
        }
        let (a, b, c) = (di.dot(di), di.dot(dj), dj.dot(dj));
        let det = b * b - a * c;
        if det.abs() > 1e-12 * a * c {
            let (r1, r2) = (-di.dot(w0), -dj.dot(w0));
            // a·u − b·v = r1, b·u − c·v = r2
            let u = (b * r2 - c * r1) / det;
            let v = (a * r2 - b * r1) / det;
            let inside = (0.0..=1.0).contains(&u)
                && (0.0..=1.0).contains(&v)
                && d + v * lj - u * li >= lo
                && d + v * lj - u * li <= hi;
            if inside {
                best = best.min(at(u, v).norm());
            }
        }
        best
    }

    /// Parameter interval on the earlier of the two segments whose points
    /// lie within the collision distance of an exposed point of the other.
    /// The exposed distance is convex along the segment, so the set is a
    /// single interval around its minimiser.
    pub(crate) fn close_interval(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        let (i, j) = (i.min(j), i.max(j));
        let (p, q) = (&self.segs[i], &self.segs[j]);
        let (li, lj) = (p.len(), q.len());
        let window = self.window(i, j);
        let v_range = |u: f64| match window {
            None => Some((0.0, 1.0)),
            Some((d, lo, hi)) => {
                let v0 = ((lo - d + u * li) / lj).max(0.0);
                let v1 = ((hi - d + u * li) / lj).min(1.0);
                (v0 <= v1).then_some((v0, v1))
            }
        };
        let (u_lo, u_hi) = match window {
            None => (0.0, 1.0),
            Some((d, lo, hi)) => {
                // v_lo(u) <= 1 and v_hi(u) >= 0
                let a = ((lj + d - lo) / li).min(1.0);
                let b = if hi.is_finite() {
                    ((d - hi) / li).max(0.0)
                } else {
                    0.0
                };
                if b > a || hi < lo {
                    return None;
                }
                (b, a)
            }
        };
        let (qa, dq) = (q.a.xy(), q.b.xy() - q.a.xy());
        let f = |u: f64| {
            let Some((v0, v1)) = v_range(u) else {
                return f64::INFINITY;
            };
            let pt = p.a.xy().lerp(p.b.xy(), u);
            point_segment_distance(pt, qa + dq * v0, qa + dq * v1)
        };
        let thr = self.threshold;
        let (mut lo, mut hi) = (u_lo, u_hi);
        for _ in 0..100 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) <= f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let umin = 0.5 * (lo + hi);
        if !(f(umin) < thr) {
            return None;
        }
        let edge = |mut inside: f64, mut outside: f64| {
            if f(outside) < thr {
                return outside;
            }
            for _ in 0..60 {
                let mid = 0.5 * (inside + outside);
                if f(mid) < thr {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            0.5 * (inside + outside)
        };
        Some((edge(umin, u_lo), edge(umin, u_hi)))
    }

    /// Two passes of the same layer whose exposed centerline points come
    /// closer than the tolerated intrusion.
    pub fn collides(&self, i: usize, j: usize) -> bool {
        i != j && self.same_layer(i, j) && self.exposed_distance(i, j) < self.threshold
    }

    /// Neighbouring segment indices along the run (cyclic for closed runs).
    pub(crate) fn adjacent(&self, i: usize) -> [Option<usize>; 2] {
        let run = &self.runs[self.segs[i].run];
        let prev = if i > run.first {
            Some(i - 1)
        } else if run.closed {
            Some(run.end - 1)
        } else {
            None
        };
        let next = if i + 1 < run.end {
            Some(i + 1)
        } else if run.closed {
            Some(run.first)
        } else {
            None
        };
        [prev, next]
    }
}

/// Clip a convex polygon to `g(u, v) >= 0` for affine `g`.
fn clip(poly: &[(f64, f64)], g: impl Fn(f64, f64) -> f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        let (ga, gb) = (g(a.0, a.1), g(b.0, b.1));
        if ga >= 0.0 {
            out.push(a);
        }
        if (ga >= 0.0) != (gb >= 0.0) {
            let t = ga / (ga - gb);
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out
}

/// Distance between two closed planar segments.
pub(crate) fn segment_distance2(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if crate::geometry::segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Distance from a segment to the axis-aligned square `[lo, hi]`.
pub(crate) fn segment_box_distance(a: Point2, b: Point2, lo: Point2, hi: Point2) -> f64 {
    let inside = |p: Point2| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    if inside(a) || inside(b) {
        return 0.0;
    }
    let corners = [
        lo,
        Point2::new(hi.x, lo.y),
        hi,
        Point2::new(lo.x, hi.y),
    ];
    let mut best = f64::INFINITY;
    for i in 0..4 {
        let (c, d) = (corners[i], corners[(i + 1) % 4]);
        best = best.min(segment_distance2(a, b, c, d));
        if best == 0.0 {
            return 0.0;
        }
    }
    best
}
