use nalgebra::{Matrix3, Rotation3, Vector3};

use super::distance::MeshDistance;
use super::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{Point3, TriangleMesh};

pub const DEFAULT_MAX_ITERS: usize = 50;
/// mm
pub const DEFAULT_ICP_TOL: f64 = 1e-6;

/// `p ↦ R·p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Rotation by `angle_deg` about `axis`, then translation.
    pub fn from_axis_angle(axis: [f64; 3], angle_deg: f64, translation: [f64; 3]) -> Self {
        let axis = nalgebra::Unit::new_normalize(Vector3::from(axis));
        RigidTransform {
            rotation: *Rotation3::from_axis_angle(&axis, angle_deg.to_radians()).matrix(),
            translation: Vector3::from(translation),
        }
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        let v = self.rotation * Vector3::new(p.x, p.y, p.z) + self.translation;
        Point3::new(v.x, v.y, v.z)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Rotation angle in degrees.
    pub fn angle_deg(&self) -> f64 {
        ((self.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos().to_degrees()
    }

    /// Orthonormal with determinant +1, both to 1e-9.
    pub fn is_proper(&self) -> bool {
        let e = self.rotation.transpose() * self.rotation - Matrix3::identity();
        e.amax() <= 1e-9 && (self.rotation.determinant() - 1.0).abs() <= 1e-9
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IcpOutcome {
    pub transform: RigidTransform,
    /// RMS point-to-surface distance before each update, then after the last.
    pub rms_history: Vec<f64>,
    pub iterations: usize,
}

fn v(p: Point3) -> Vector3<f64> {
    Vector3::new(p.x, p.y, p.z)
}

/// Fails for fewer than three points or a collinear cloud.
pub(crate) fn check_rank(points: &[Point3]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::RankDeficient(format!(
            "alignment needs at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean = points.iter().map(|&p| v(p)).sum::<Vector3<f64>>() / n;
    let mut cov = Matrix3::zeros();
    for &p in points {
        let d = v(p) - mean;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigenvalues();
    let top = eig.amax();
    let mut sorted = [eig[0], eig[1], eig[2]];
    sorted.sort_by(f64::total_cmp);
    if !(top > 0.0) || sorted[1] <= 1e-12 * top {
        return Err(Error::RankDeficient("points are collinear".into()));
    }
    Ok(())
}

/// Best rotation and translation taking `src` onto `dst` (Kabsch).
pub(crate) fn best_fit(src: &[Point3], dst: &[Point3]) -> RigidTransform {
    let n = src.len() as f64;
    let cs = src.iter().map(|&p| v(p)).sum::<Vector3<f64>>() / n;
    let cd = dst.iter().map(|&p| v(p)).sum::<Vector3<f64>>() / n;
    let mut h = Matrix3::zeros();
    for (&a, &b) in src.iter().zip(dst) {
        h += (v(a) - cs) * (v(b) - cd).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (vt.transpose() * u.transpose()).determinant().signum();
    let fix = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d));
    let r = vt.transpose() * fix * u.transpose();
    RigidTransform {
        rotation: r,
        translation: cd - r * cs,
    }
}

fn rms(a: &[Point3], b: &[Point3]) -> f64 {
    (a.iter().zip(b).map(|(&p, &q)| (p - q).norm_sq()).sum::<f64>() / a.len() as f64).sqrt()
}

/// Point-to-point ICP against the nearest surface points, using every
/// point. Stops when the RMS improves by less than `tol` or after
/// `max_iters` updates.
pub fn align_icp(
    cloud: &PointCloud,
    mesh: &TriangleMesh,
    max_iters: usize,
    tol: f64,
) -> Result<RigidTransform> {
    Ok(align_icp_detailed(cloud, &MeshDistance::new(mesh), max_iters, tol)?.transform)
}

pub fn align_icp_detailed(
    cloud: &PointCloud,
    index: &MeshDistance,
    max_iters: usize,
    tol: f64,
) -> Result<IcpOutcome> {
    check_rank(cloud.points())?;
    if !(tol >= 0.0) {
        return Err(Error::param("tol", "must be non-negative"));
    }
    let mut total = RigidTransform::identity();
    let mut current: Vec<Point3> = cloud.points().to_vec();
    let mut targets: Vec<Point3> = current.iter().map(|&p| index.closest(p).point).collect();
    let mut err = rms(&current, &targets);
    let mut history = vec![err];
    let mut iterations = 0;
    while iterations < max_iters && err > 0.0 {
        let step = best_fit(&current, &targets);
        let moved: Vec<Point3> = current.iter().map(|&p| step.apply(p)).collect();
        let next_targets: Vec<Point3> = moved.iter().map(|&p| index.closest(p).point).collect();
        let next_err = rms(&moved, &next_targets);
        if next_err > err {
            break;
        }
        iterations += 1;
        total = step.compose(&total);
        current = moved;
        targets = next_targets;
        let gain = err - next_err;
        err = next_err;
        history.push(err);
        if gain < tol {
            break;
        }
    }
    Ok(IcpOutcome {
        transform: total,
        rms_history: history,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kabsch_recovers_known_motion() {
        let src = vec![
            Point3::new(0., 0., 0.),
            Point3::new(1., 0., 0.),
            Point3::new(0., 2., 0.),
            Point3::new(0., 0., 3.),
        ];
        let t = RigidTransform::from_axis_angle([1.0, 2.0, 3.0], 33.0, [4.0, -1.0, 2.0]);
        let dst: Vec<_> = src.iter().map(|&p| t.apply(p)).collect();
        let fit = best_fit(&src, &dst);
        assert!((fit.rotation - t.rotation).amax() < 1e-12);
        assert!((fit.translation - t.translation).amax() < 1e-12);
        assert!(fit.is_proper());
        let back = t.inverse().compose(&t);
        assert!((back.rotation - Matrix3::identity()).amax() < 1e-12);
        assert!((t.angle_deg() - 33.0).abs() < 1e-9);
    }

    #[test]
    fn rank_checks() {
        let p = |x: f64| Point3::new(x, 2.0 * x, -x);
        assert!(matches!(check_rank(&[p(0.0), p(1.0)]), Err(Error::RankDeficient(_))));
        assert!(matches!(check_rank(&[p(0.0), p(1.0), p(3.0)]), Err(Error::RankDeficient(_))));
        assert!(check_rank(&[p(0.0), p(1.0), Point3::new(0., 1., 0.)]).is_ok());
    }
}
