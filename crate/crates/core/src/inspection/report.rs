use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::distance::MeshDistance;
use super::icp::{align_icp_detailed, RigidTransform, DEFAULT_ICP_TOL, DEFAULT_MAX_ITERS};
use super::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;
use crate::par::Exec;

/// Share of points that must lie within tolerance for a pass.
pub const DEFAULT_PASS_FRACTION: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InspectOptions {
    /// mm
    pub tolerance: f64,
    pub align: bool,
    pub pass_fraction: f64,
    pub max_iters: usize,
    pub icp_tol: f64,
}

impl InspectOptions {
    pub fn new(tolerance: f64, align: bool) -> Self {
        InspectOptions {
            tolerance,
            align,
            pass_fraction: DEFAULT_PASS_FRACTION,
            max_iters: DEFAULT_MAX_ITERS,
            icp_tol: DEFAULT_ICP_TOL,
        }
    }
}

/// Scan-to-CAD deviation statistics. Magnitudes in mm.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    pub count: usize,
    pub mean: f64,
    pub rms: f64,
    pub max: f64,
    pub p95: f64,
    pub signed_mean: f64,
    pub fraction_within: f64,
    pub tolerance: f64,
    pub pass_fraction: f64,
    pub passed: bool,
    /// Set when the reference mesh is open and distances are unsigned.
    pub warning: Option<String>,
    /// Alignment applied to the scan before measuring.
    pub transform: Option<RigidTransform>,
    /// The (aligned) scan with its signed deviations.
    pub cloud: PointCloud,
}

impl DeviationReport {
    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "deviation report");
        let _ = writeln!(out, "points: {}", self.count);
        let _ = writeln!(out, "tolerance_mm: {}", self.tolerance);
        let _ = writeln!(out, "mean_abs_mm: {:.6}", self.mean);
        let _ = writeln!(out, "rms_mm: {:.6}", self.rms);
        let _ = writeln!(out, "max_abs_mm: {:.6}", self.max);
        let _ = writeln!(out, "p95_abs_mm: {:.6}", self.p95);
        let _ = writeln!(out, "signed_mean_mm: {:.6}", self.signed_mean);
        let _ = writeln!(out, "fraction_within: {:.6}", self.fraction_within);
        let _ = writeln!(out, "pass_fraction: {}", self.pass_fraction);
        let _ = writeln!(out, "verdict: {}", self.verdict());
        if let Some(t) = &self.transform {
            let r = &t.rotation;
            let _ = writeln!(out, "alignment_angle_deg: {:.6}", t.angle_deg());
            let _ = writeln!(
                out,
                "alignment_translation_mm: {:.6} {:.6} {:.6}",
                t.translation.x, t.translation.y, t.translation.z
            );
            for i in 0..3 {
                let _ = writeln!(
                    out,
                    "alignment_rotation_row{i}: {:.9} {:.9} {:.9}",
                    r[(i, 0)],
                    r[(i, 1)],
                    r[(i, 2)]
                );
            }
        }
        if let Some(w) = &self.warning {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    /// `x,y,z,deviation` per point.
    pub fn deviations_csv(&self) -> String {
        let mut out = String::from("x,y,z,deviation\n");
        let d = self.cloud.scalars().unwrap_or(&[]);
        for (p, v) in self.cloud.points().iter().zip(d) {
            let _ = writeln!(out, "{},{},{},{}", p.x, p.y, p.z, v);
        }
        out
    }

    pub fn write_deviations_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.deviations_csv()).map_err(|e| Error::from(e).in_file(path))
    }
}

pub fn deviation_report(
    cloud: &PointCloud,
    mesh: &TriangleMesh,
    tolerance: f64,
    align: bool,
) -> Result<DeviationReport> {
    deviation_report_with(cloud, mesh, &InspectOptions::new(tolerance, align), Exec::default())
}

/// Optionally align, then measure every point's signed distance to the
/// mesh. Statistics are taken over sorted values, so point order does not
/// matter.
pub fn deviation_report_with(
    cloud: &PointCloud,
    mesh: &TriangleMesh,
    opts: &InspectOptions,
    exec: Exec,
) -> Result<DeviationReport> {
    if !(opts.tolerance > 0.0) || !opts.tolerance.is_finite() {
        return Err(Error::param("tolerance", "must be positive"));
    }
    if !(0.0..=1.0).contains(&opts.pass_fraction) {
        return Err(Error::param("pass_fraction", "must lie in [0, 1]"));
    }
    let index = MeshDistance::new(mesh);
    let (scan, transform) = if opts.align {
        let t = align_icp_detailed(cloud, &index, opts.max_iters, opts.icp_tol)?.transform;
        (cloud.map(|p| t.apply(p)), Some(t))
    } else {
        (cloud.map(|p| p), None)
    };
    let d = exec.map(scan.points(), |&p| index.signed_distance(p));
    let n = d.len() as f64;
    let mut signed = d.clone();
    signed.sort_by(f64::total_cmp);
    let mut abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let rank = ((0.95 * n).ceil() as usize).clamp(1, abs.len());
    let within = abs.partition_point(|&v| v <= opts.tolerance);
    let fraction_within = within as f64 / n;
    Ok(DeviationReport {
        count: d.len(),
        mean: abs.iter().sum::<f64>() / n,
        rms: (abs.iter().map(|v| v * v).sum::<f64>() / n).sqrt(),
        max: abs[abs.len() - 1],
        p95: abs[rank - 1],
        signed_mean: signed.iter().sum::<f64>() / n,
        fraction_within,
        tolerance: opts.tolerance,
        pass_fraction: opts.pass_fraction,
        passed: fraction_within >= opts.pass_fraction,
        warning: (!index.is_signed())
            .then(|| "reference mesh is not watertight; deviations are unsigned".to_string()),
        transform,
        cloud: scan.with_scalars(d)?,
    })
}
