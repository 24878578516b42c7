use super::{Point3, POINT_EPS};
use crate::error::{Error, Result};

/// Ordered 3D path. A closed polyline stores each vertex once; the closing
/// segment from the last vertex back to the first is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline3 {
    points: Vec<Point3>,
    closed: bool,
}

impl Polyline3 {
    pub fn new(points: Vec<Point3>, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite point {p:?}")));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0].distance(w[1]) <= POINT_EPS {
                return Err(Error::InvalidGeometry(format!(
                    "coincident consecutive points at index {i}"
                )));
            }
        }
        if closed {
            if points.len() < 3 {
                return Err(Error::InvalidGeometry(
                    "closed polyline needs at least 3 points".into(),
                ));
            }
            if points[0].distance(points[points.len() - 1]) <= POINT_EPS {
                return Err(Error::InvalidGeometry(
                    "closed polyline must not repeat its first point".into(),
                ));
            }
        }
        Ok(Polyline3 { points, closed })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn first(&self) -> Point3 {
        self.points[0]
    }

    pub fn last(&self) -> Point3 {
        self.points[self.points.len() - 1]
    }

    /// Segments in traversal order, including the closing one.
    pub fn segments(&self) -> impl Iterator<Item = (Point3, Point3)> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    /// Split every segment longer than `max_segment` into equal pieces.
    /// Original vertices are kept, so the traced geometry is unchanged.
    pub fn resample(&self, max_segment: f64) -> Result<Polyline3> {
        if !(max_segment > 0.0) || !max_segment.is_finite() {
            return Err(Error::param(
                "max_segment",
                format!("must be positive, got {max_segment}"),
            ));
        }
        let mut out = Vec::with_capacity(self.points.len());
        let count = self.segment_count();
        for (i, (a, b)) in self.segments().enumerate() {
            let pieces = (a.distance(b) / max_segment).ceil().max(1.0) as usize;
            out.push(a);
            for k in 1..pieces {
                out.push(a.lerp(b, k as f64 / pieces as f64));
            }
            if !self.closed && i + 1 == count {
                out.push(b);
            }
        }
        Ok(Polyline3 {
            points: out,
            closed: self.closed,
        })
    }
}

pub fn polyline_length(polyline: &Polyline3) -> f64 {
    polyline.length()
}
