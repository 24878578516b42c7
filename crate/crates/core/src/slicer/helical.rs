use super::{LayerStack, SlicePlan};
use crate::error::{Error, Result};
use crate::geometry::{Contour2, Orientation, Point2, Point3, Polyline3};

/// Turn a single-perimeter layer stack into one continuous spiral.
///
/// Each layer contour is resampled to `samples_per_turn` points by arc
/// length, starting where the +x ray from its centroid leaves the contour.
/// Turn `k` lays layer `k`: z ramps by one layer height over the turn while
/// the shape blends from contour `k-1` to contour `k`. With
/// `first_layer_flat` turn 0 is printed level at the top of the first layer.
pub fn slice_helical(stack: &LayerStack, plan: &SlicePlan) -> Result<Polyline3> {
    plan.validate()?;
    let h = stack.layer_height();
    if (h - plan.layer_height).abs() > 1e-9 {
        return Err(Error::param(
            "layer_height",
            format!("stack spacing {h} differs from the plan's {}", plan.layer_height),
        ));
    }
    if stack.is_empty() {
        return Err(Error::InvalidGeometry("empty layer stack".into()));
    }
    let n = plan.samples_per_turn;
    let rings = stack
        .layers()
        .iter()
        .enumerate()
        .map(|(i, layer)| match layer.contours.as_slice() {
            [c] if c.orientation() == Orientation::Outer => Ok(resample_from_x_axis(c, n)),
            [_] => Err(Error::UnsupportedTopology {
                layer: i,
                message: "helical mode needs an outer contour".into(),
            }),
            cs => Err(Error::UnsupportedTopology {
                layer: i,
                message: format!(
                    "helical mode supports one perimeter per layer, found {} contours",
                    cs.len()
                ),
            }),
        })
        .collect::<Result<Vec<_>>>()?;

    let base = stack.layers()[0].z - 0.5 * h;
    let mut points = Vec::with_capacity(rings.len() * n + 1);
    for (k, ring) in rings.iter().enumerate() {
        let flat = k == 0 && plan.first_layer_flat;
        let prev = &rings[k.saturating_sub(1)];
        let z0 = if plan.first_layer_flat {
            base + (k.max(1)) as f64 * h
        } else {
            base + k as f64 * h
        };
        for j in 0..n {
            let f = j as f64 / n as f64;
            if flat {
                points.push(ring[j].at_z(z0));
            } else {
                points.push(prev[j].lerp(ring[j], f).at_z(z0 + f * h));
            }
        }
    }
    let last = &rings[rings.len() - 1];
    let top = base + rings.len() as f64 * h;
    points.push(last[0].at_z(top));
    Polyline3::new(dedup(points), false)
}

fn dedup(points: Vec<Point3>) -> Vec<Point3> {
    let mut out: Vec<Point3> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().is_none_or(|q| q.distance(p) > crate::geometry::POINT_EPS) {
            out.push(p);
        }
    }
    out
}

/// `n` points at equal arc-length spacing, counter-clockwise, starting on
/// the +x ray from the centroid.
pub(crate) fn resample_from_x_axis(c: &Contour2, n: usize) -> Vec<Point2> {
    let pts = c.points();
    let m = pts.len();
    let center = c.centroid();
    // farthest crossing of the +x ray
    let mut start = (0usize, 0.0f64, f64::NEG_INFINITY);
    for i in 0..m {
        let (a, b) = (pts[i], pts[(i + 1) % m]);
        let (da, db) = (a.y - center.y, b.y - center.y);
        if (da < 0.0 && db >= 0.0) || (da >= 0.0 && db < 0.0) || (da == 0.0 && db == 0.0) {
            let t = if db != da { da / (da - db) } else { 0.0 };
            let x = a.x + (b.x - a.x) * t;
            if x > center.x && x > start.2 {
                start = (i, t, x);
            }
        }
    }
    let (i0, t0, _) = start;
    // walk from the start point around the ring
    let mut walk = Vec::with_capacity(m + 2);
    walk.push(pts[i0].lerp(pts[(i0 + 1) % m], t0));
    for k in 1..=m {
        walk.push(pts[(i0 + k) % m]);
    }
    walk.push(walk[0]);
    let mut cum = vec![0.0];
    for w in walk.windows(2) {
        cum.push(cum.last().unwrap() + w[0].distance(w[1]));
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for j in 0..n {
        let s = total * j as f64 / n as f64;
        while seg + 1 < cum.len() - 1 && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        out.push(walk[seg].lerp(walk[seg + 1], t));
    }
    out
}
