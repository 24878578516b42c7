//! Timed machine program and the process checks run on it.

mod collision;
mod deposition;
mod events;
mod gcode;
mod segments;
mod workspace;

pub use collision::{detect_overdeposition, detect_overdeposition_with, CollisionEvent};
pub use deposition::{simulate_deposition, simulate_deposition_with, CellState, DepositionGrid, DepositionMetrics, LayerGrid};
pub use events::{
    event_series, export_event_series, format_g6, parse_event_series, read_event_series,
    EventRow, EventSeries,
};
pub use gcode::{export_gcode, format_gcode};
pub use segments::ExtrudedSegments;
pub use workspace::{check_workspace, Violation, ViolationReason, WorkspaceEnvelope};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Polyline3, POINT_EPS};
use crate::slicer::LayerStack;

/// Default allowed bead-width intrusion before two passes count as colliding.
pub const DEFAULT_OVERLAP_TOLERANCE: f64 = 0.10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrintConfig {
    /// mm/s
    pub print_speed: f64,
    /// mm/s
    pub travel_speed: f64,
    pub bead_width: f64,
    /// Equal to the layer height.
    pub bead_height: f64,
    pub overlap_tolerance: f64,
}

impl PrintConfig {
    pub fn new(print_speed: f64, travel_speed: f64, bead_width: f64, bead_height: f64) -> Self {
        PrintConfig {
            print_speed,
            travel_speed,
            bead_width,
            bead_height,
            overlap_tolerance: DEFAULT_OVERLAP_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("print_speed", self.print_speed),
            ("travel_speed", self.travel_speed),
            ("bead_width", self.bead_width),
            ("bead_height", self.bead_height),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if self.travel_speed < self.print_speed {
            return Err(Error::param(
                "travel_speed",
                "must be at least the print speed",
            ));
        }
        if !(0.0..1.0).contains(&self.overlap_tolerance) {
            return Err(Error::param("overlap_tolerance", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Volumetric flow w·h·v in mm³/s.
    pub fn flow_rate(&self) -> f64 {
        self.bead_width * self.bead_height * self.print_speed
    }

    /// Centerline separation below which two passes collide.
    pub fn collision_distance(&self) -> f64 {
        self.bead_width * (1.0 - self.overlap_tolerance)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Move {
    pub target: Point3,
    /// mm/s
    pub feed: f64,
    pub extruding: bool,
}

/// Moves from `start` with derived timestamps: `times[0] = 0` and
/// `times[k + 1] = times[k] + |move k| / feed`.
#[derive(Clone, Debug, PartialEq)]
pub struct Toolpath {
    start: Point3,
    moves: Vec<Move>,
    times: Vec<f64>,
    bead_width: f64,
    bead_height: f64,
}

impl Toolpath {
    pub fn new(start: Point3, moves: Vec<Move>, config: &PrintConfig) -> Result<Self> {
        config.validate()?;
        if moves.is_empty() {
            return Err(Error::InvalidGeometry("toolpath has no moves".into()));
        }
        if !start.is_finite() {
            return Err(Error::InvalidGeometry("non-finite start point".into()));
        }
        let mut times = Vec::with_capacity(moves.len() + 1);
        times.push(0.0);
        let mut from = start;
        for (k, m) in moves.iter().enumerate() {
            if !m.target.is_finite() || !(m.feed > 0.0) || !m.feed.is_finite() {
                return Err(Error::InvalidGeometry(format!("move {k} is not finite")));
            }
            if m.extruding && m.feed != config.print_speed {
                return Err(Error::InvalidGeometry(format!(
                    "extruding move {k} runs at {} mm/s instead of the print speed",
                    m.feed
                )));
            }
            let d = from.distance(m.target);
            if d <= POINT_EPS {
                return Err(Error::InvalidGeometry(format!("move {k} has zero length")));
            }
            times.push(times[k] + d / m.feed);
            from = m.target;
        }
        Ok(Toolpath {
            start,
            moves,
            times,
            bead_width: config.bead_width,
            bead_height: config.bead_height,
        })
    }

    pub fn start(&self) -> Point3 {
        self.start
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    /// Boundary timestamps, one more than the number of moves.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn bead_width(&self) -> f64 {
        self.bead_width
    }

    pub fn bead_height(&self) -> f64 {
        self.bead_height
    }

    pub fn total_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Position before move `k` (the start for `k = 0`).
    pub fn move_start(&self, k: usize) -> Point3 {
        if k == 0 {
            self.start
        } else {
            self.moves[k - 1].target
        }
    }

    /// `(from, to, move)` for every move.
    pub fn segments(&self) -> impl Iterator<Item = (Point3, Point3, &Move)> + '_ {
        self.moves
            .iter()
            .enumerate()
            .map(move |(k, m)| (self.move_start(k), m.target, m))
    }

    /// All vertices with their timestamps, starting with the start point.
    pub fn vertices(&self) -> impl Iterator<Item = (f64, Point3)> + '_ {
        std::iter::once(self.start)
            .chain(self.moves.iter().map(|m| m.target))
            .zip(self.times.iter().copied())
            .map(|(p, t)| (t, p))
    }

    pub fn extrusion_time(&self) -> f64 {
        self.moves
            .iter()
            .enumerate()
            .filter(|(_, m)| m.extruding)
            .map(|(k, _)| self.times[k + 1] - self.times[k])
            .sum()
    }

    pub fn travel_moves(&self) -> usize {
        self.moves.iter().filter(|m| !m.extruding).count()
    }

    pub fn extruded_length(&self) -> f64 {
        self.segments()
            .filter(|(_, _, m)| m.extruding)
            .map(|(a, b, _)| a.distance(b))
            .sum()
    }

    /// Index of the move active at time `t` (clamped to the path).
    pub fn move_at(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(self.moves.len() - 1)
    }

    /// Interpolated nozzle position at time `t`.
    pub fn position_at(&self, t: f64) -> Point3 {
        let k = self.move_at(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let f = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        self.move_start(k).lerp(self.moves[k].target, f)
    }
}

/// Closed contours of a layer stack as nozzle paths, lifted by half a bead
/// so Z is the top of the deposited bead.
pub fn paths_from_stack(stack: &LayerStack, bead_height: f64) -> Result<Vec<Polyline3>> {
    stack
        .layers()
        .iter()
        .flat_map(|l| &l.contours)
        .map(|c| {
            let z = c.z() + 0.5 * bead_height;
            Polyline3::new(c.points().iter().map(|p| p.at_z(z)).collect(), true)
        })
        .collect()
}

/// Extrude along every path in order at the print speed, joining paths with
/// travel moves. Closed paths start at their vertex nearest the nozzle
/// (ties to the lowest index) and return to it.
pub fn plan_toolpath(paths: &[Polyline3], config: &PrintConfig) -> Result<Toolpath> {
    config.validate()?;
    let first = paths
        .first()
        .ok_or_else(|| Error::InvalidGeometry("nothing to print".into()))?;
    let start = first.first();
    let mut cur = start;
    let mut moves = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        let pts = path.points();
        let offset = if path.is_closed() && i > 0 {
            nearest_index(pts, cur)
        } else {
            0
        };
        let entry = pts[offset];
        if cur.distance(entry) > POINT_EPS {
            moves.push(Move {
                target: entry,
                feed: config.travel_speed,
                extruding: false,
            });
        }
        let n = pts.len();
        let steps = if path.is_closed() { n } else { n - 1 };
        for k in 1..=steps {
            moves.push(Move {
                target: pts[(offset + k) % n],
                feed: config.print_speed,
                extruding: true,
            });
        }
        cur = moves.last().map(|m| m.target).unwrap_or(entry);
    }
    Toolpath::new(start, moves, config)
}

pub fn plan_layers(stack: &LayerStack, config: &PrintConfig) -> Result<Toolpath> {
    plan_toolpath(&paths_from_stack(stack, config.bead_height)?, config)
}

fn nearest_index(pts: &[Point3], p: Point3) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, q) in pts.iter().enumerate() {
        let d = q.distance(p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}
