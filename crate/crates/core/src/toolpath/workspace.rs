use std::fmt;

use super::Toolpath;
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Reach annulus about the robot base: horizontal distance in
/// `[r_min, r_max]`, height above the base in `[z_min, z_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkspaceEnvelope {
    pub r_min: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub base: Point3,
}

impl WorkspaceEnvelope {
    pub fn new(r_min: f64, r_max: f64, z_min: f64, z_max: f64, base: Point3) -> Result<Self> {
        let env = WorkspaceEnvelope {
            r_min,
            r_max,
            z_min,
            z_max,
            base,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0) {
            return Err(Error::param("r_min", "must be non-negative"));
        }
        if !(self.r_max > self.r_min) || !self.r_max.is_finite() {
            return Err(Error::param("r_max", "must exceed r_min"));
        }
        if !(self.z_max > self.z_min) || !self.z_min.is_finite() || !self.z_max.is_finite() {
            return Err(Error::param("z_max", "must exceed z_min"));
        }
        if !self.base.is_finite() {
            return Err(Error::param("base", "must be finite"));
        }
        Ok(())
    }

    /// Every envelope limit the point breaks.
    pub fn violations_at(&self, p: Point3) -> Vec<ViolationReason> {
        let r = (p - self.base).xy().norm();
        let z = p.z - self.base.z;
        let mut out = Vec::new();
        if r < self.r_min {
            out.push(ViolationReason::InsideRMin);
        }
        if r > self.r_max {
            out.push(ViolationReason::BeyondRMax);
        }
        if z < self.z_min {
            out.push(ViolationReason::BelowZMin);
        }
        if z > self.z_max {
            out.push(ViolationReason::AboveZMax);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationReason {
    InsideRMin,
    BeyondRMax,
    BelowZMin,
    AboveZMax,
}

impl fmt::Display for ViolationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationReason::InsideRMin => "inside r_min",
            ViolationReason::BeyondRMax => "beyond r_max",
            ViolationReason::BelowZMin => "below z_min",
            ViolationReason::AboveZMax => "above z_max",
        })
    }
}

/// A run of consecutive vertices breaking the same limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    /// Timestamp of the first offending vertex.
    pub time: f64,
    pub point: Point3,
    pub reason: ViolationReason,
    pub vertex_count: usize,
}

/// Test every toolpath vertex against the envelope, in time order.
pub fn check_workspace(toolpath: &Toolpath, envelope: &WorkspaceEnvelope) -> Vec<Violation> {
    let mut out: Vec<Violation> = Vec::new();
    let mut open: Vec<(ViolationReason, usize)> = Vec::new();
    for (t, p) in toolpath.vertices() {
        let reasons = envelope.violations_at(p);
        open.retain(|(r, _)| reasons.contains(r));
        for r in reasons {
            match open.iter().find(|(o, _)| *o == r) {
                Some(&(_, k)) => out[k].vertex_count += 1,
                None => {
                    open.push((r, out.len()));
                    out.push(Violation {
                        time: t,
                        point: p,
                        reason: r,
                        vertex_count: 1,
                    });
                }
            }
        }
    }
    out
}
