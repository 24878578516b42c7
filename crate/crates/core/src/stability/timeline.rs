use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::toolpath::{EventSeries, Toolpath};

/// One printed layer. Lengths in mm, times in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerRecord {
    pub index: usize,
    /// Mean nozzle height over the layer.
    pub z: f64,
    pub t_dep: f64,
    /// Time the last bead of the layer is laid.
    pub t_end: f64,
    /// Enclosed area of the printed path.
    pub area: f64,
    pub wall_thickness: f64,
    pub perimeter: f64,
    pub height: f64,
}

impl LayerRecord {
    /// Deposited share of the layer at time `t`.
    pub fn fraction_at(&self, t: f64) -> f64 {
        if t < self.t_dep {
            0.0
        } else if t >= self.t_end {
            1.0
        } else {
            (t - self.t_dep) / (self.t_end - self.t_dep)
        }
    }

    pub fn equivalent_radius(&self) -> f64 {
        (self.area / std::f64::consts::PI).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildTimeline {
    layers: Vec<LayerRecord>,
}

impl BuildTimeline {
    pub fn new(layers: Vec<LayerRecord>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidGeometry("build timeline has no layers".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            let vals = [l.z, l.t_dep, l.t_end, l.area, l.wall_thickness, l.perimeter, l.height];
            if !vals.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidGeometry(format!("layer {k} is not finite")));
            }
            if l.index != k {
                return Err(Error::InvalidGeometry(format!("layer {k} has index {}", l.index)));
            }
            if !(l.height > 0.0) || !(l.wall_thickness > 0.0) || l.t_end < l.t_dep {
                return Err(Error::InvalidGeometry(format!("layer {k} is degenerate")));
            }
            if k > 0 && l.t_dep <= layers[k - 1].t_dep {
                return Err(Error::InvalidGeometry(format!(
                    "layer {k} does not start after layer {}",
                    k - 1
                )));
            }
        }
        Ok(BuildTimeline { layers })
    }

    /// `count` identical layers printed back to back, each taking
    /// `layer_time` seconds.
    pub fn uniform(
        count: usize,
        layer_time: f64,
        layer_height: f64,
        wall_thickness: f64,
        perimeter: f64,
        area: f64,
    ) -> Result<Self> {
        BuildTimeline::new(
            (0..count)
                .map(|i| LayerRecord {
                    index: i,
                    z: (i as f64 + 1.0) * layer_height,
                    t_dep: i as f64 * layer_time,
                    t_end: (i as f64 + 1.0) * layer_time,
                    area,
                    wall_thickness,
                    perimeter,
                    height: layer_height,
                })
                .collect(),
        )
    }

    /// Layers from the extruding rows of an event series: each segment
    /// `(row k, row k+1)` with row k extruding belongs to the layer
    /// `ceil((z_mid − z_first) / h)`, so a helical turn rising by `h`
    /// counts as one layer.
    pub fn from_event_series(
        series: &EventSeries,
        wall_thickness: f64,
        layer_height: f64,
    ) -> Result<Self> {
        let segs = series.rows().windows(2).filter(|w| w[0].extruding()).map(|w| {
            (w[0].t, w[1].t, w[0].position(), w[1].position())
        });
        from_segments(segs, wall_thickness, layer_height)
    }

    pub fn from_toolpath(toolpath: &Toolpath) -> Result<Self> {
        let times = toolpath.times();
        let segs = toolpath
            .segments()
            .enumerate()
            .filter(|(_, (_, _, m))| m.extruding)
            .map(|(k, (a, b, _))| (times[k], times[k + 1], a, b));
        from_segments(segs, toolpath.bead_width(), toolpath.bead_height())
    }

    pub fn layers(&self) -> &[LayerRecord] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.layers[0].t_dep
    }

    pub fn end_time(&self) -> f64 {
        self.layers.iter().map(|l| l.t_end).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn from_segments(
    segs: impl Iterator<Item = (f64, f64, Point3, Point3)>,
    wall_thickness: f64,
    layer_height: f64,
) -> Result<BuildTimeline> {
    if !(layer_height > 0.0) || !(wall_thickness > 0.0) {
        return Err(Error::param("layer_height", "bead size must be positive"));
    }
    struct Acc {
        t0: f64,
        t1: f64,
        zl: f64,
        len: f64,
        cross: f64,
    }
    let mut acc: Vec<Acc> = Vec::new();
    // Nozzle z is the top of the bead. A level first bead sits one layer
    // height above the base; a ramped one grows from zero at its start.
    let mut base = None;
    for (t0, t1, a, b) in segs {
        let zm = 0.5 * (a.z + b.z);
        let top = a.z.max(b.z);
        let z0 = *base.get_or_insert_with(|| {
            if (a.z - b.z).abs() < 1e-9 {
                a.z - layer_height
            } else {
                a.z.min(b.z)
            }
        });
        let idx = ((top - z0) / layer_height - 1e-4).ceil() - 1.0;
        if idx < 0.0 || (idx as usize) < acc.len().saturating_sub(1) {
            return Err(Error::InvalidGeometry(format!(
                "extrusion drops back to z = {zm} after starting a higher layer"
            )));
        }
        let idx = idx as usize;
        while acc.len() <= idx {
            acc.push(Acc {
                t0,
                t1,
                zl: 0.0,
                len: 0.0,
                cross: 0.0,
            });
        }
        let l = &mut acc[idx];
        let d = a.distance(b);
        l.t1 = t1;
        l.zl += zm * d;
        l.len += d;
        l.cross += a.x * b.y - b.x * a.y;
    }
    if acc.is_empty() {
        return Err(Error::InvalidGeometry("no extrusion to build from".into()));
    }
    let layers = acc
        .iter()
        .enumerate()
        .filter(|(_, l)| l.len > 0.0)
        .enumerate()
        .map(|(n, (_, l))| LayerRecord {
            index: n,
            z: l.zl / l.len,
            t_dep: l.t0,
            t_end: l.t1,
            area: 0.5 * l.cross.abs(),
            wall_thickness,
            perimeter: l.len,
            height: layer_height,
        })
        .collect();
    BuildTimeline::new(layers)
}
