//! Early-age stability of a printed wall on a layer-stack idealization:
//! plastic collapse under self-weight and elastic self-weight buckling.

mod material;
mod timeline;

pub use material::{
    material_at, mohr_coulomb_tau_y, unconfined_strength, MaterialModel, MaterialState, PHI_MAX,
};
pub use timeline::{BuildTimeline, LayerRecord};

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Critical load parameter `q·H³/EI` of a heavy base-clamped column.
pub const GREENHILL: f64 = 7.8373;

/// Walls are thin when their perimeter is at least this many thicknesses.
pub const WALL_SLENDERNESS: f64 = 10.0;

/// Largest change in equivalent radius per unit height between layers for
/// which the stack still counts as a vertical wall.
pub const WALL_MAX_FLARE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureMode {
    PlasticCollapse,
    ElasticBuckling,
    None,
}

impl fmt::Display for FailureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureMode::PlasticCollapse => "plastic_collapse",
            FailureMode::ElasticBuckling => "elastic_buckling",
            FailureMode::None => "none",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerUtilization {
    pub layer: usize,
    /// kPa
    pub sigma_v: f64,
    /// kPa
    pub sigma_c: f64,
    pub u: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BucklingCheck {
    Evaluated {
        /// Deposited height, m.
        height: f64,
        /// m
        h_crit: f64,
        /// Height-weighted mean modulus, kPa.
        e_eff: f64,
        u: f64,
    },
    NotEvaluated(String),
}

impl BucklingCheck {
    pub fn utilization(&self) -> Option<f64> {
        match self {
            BucklingCheck::Evaluated { u, .. } => Some(*u),
            BucklingCheck::NotEvaluated(_) => None,
        }
    }
}

/// Self-weight buckling height (m) of a wall strip of thickness `w` (m):
/// `(c·Ē·w² / (12·ρ·g))^(1/3)` with `Ē = E/(1 − ν²)` (E in kPa).
pub fn critical_height(e_kpa: f64, nu: f64, w: f64, rho: f64, g: f64) -> f64 {
    let e_bar = e_kpa * 1000.0 / (1.0 - nu * nu);
    (GREENHILL * e_bar * w * w / (12.0 * rho * g)).cbrt()
}

/// Why the stack is not a thin vertical wall, if it is not one.
pub fn wall_classification(timeline: &BuildTimeline) -> Option<String> {
    for l in timeline.layers() {
        if l.perimeter < WALL_SLENDERNESS * l.wall_thickness {
            return Some(format!(
                "layer {} perimeter {:.3} mm is under {} bead widths",
                l.index, l.perimeter, WALL_SLENDERNESS
            ));
        }
    }
    for w in timeline.layers().windows(2) {
        let dz = w[1].z - w[0].z;
        let dr = w[1].equivalent_radius() - w[0].equivalent_radius();
        if !(dz > 0.0) || dr.abs() > WALL_MAX_FLARE * dz {
            return Some(format!(
                "layers {} to {} flare by {:.3} mm over {:.3} mm height",
                w[0].index, w[1].index, dr, dz
            ));
        }
    }
    None
}

fn check_time(timeline: &BuildTimeline, t: f64) -> Result<()> {
    if !(t >= timeline.start_time()) {
        return Err(Error::Domain(format!(
            "t = {t} s precedes the first deposition at {} s",
            timeline.start_time()
        )));
    }
    Ok(())
}

/// Vertical self-weight stress at the base of every started layer against
/// its unconfined strength at its current age.
pub fn plastic_collapse_check(
    timeline: &BuildTimeline,
    model: &MaterialModel,
    t: f64,
) -> Result<Vec<LayerUtilization>> {
    check_time(timeline, t)?;
    let layers = timeline.layers();
    let started = layers.iter().take_while(|l| l.t_dep <= t).count();
    let mut out = vec![
        LayerUtilization {
            layer: 0,
            sigma_v: 0.0,
            sigma_c: 0.0,
            u: 0.0,
        };
        started
    ];
    let mut above = 0.0;
    for i in (0..started).rev() {
        let l = &layers[i];
        above += l.height * 1e-3 * l.fraction_at(t);
        let sigma_v = model.unit_weight() * above;
        let m = material_at(model, t - l.t_dep);
        let sigma_c = unconfined_strength(m.c, m.phi)?;
        let u = if sigma_c > 0.0 {
            sigma_v / sigma_c
        } else if sigma_v > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        out[i] = LayerUtilization {
            layer: i,
            sigma_v,
            sigma_c,
            u,
        };
    }
    Ok(out)
}

/// Deposited height against the self-weight buckling height of the wall.
pub fn buckling_check(
    timeline: &BuildTimeline,
    model: &MaterialModel,
    t: f64,
) -> Result<BucklingCheck> {
    check_time(timeline, t)?;
    if let Some(why) = wall_classification(timeline) {
        return Ok(BucklingCheck::NotEvaluated(why));
    }
    let (mut height, mut e_sum, mut w_sum, mut nu_sum) = (0.0, 0.0, 0.0, 0.0);
    for l in timeline.layers().iter().take_while(|l| l.t_dep <= t) {
        let dh = l.height * 1e-3 * l.fraction_at(t);
        let m = material_at(model, t - l.t_dep);
        height += dh;
        e_sum += m.e * dh;
        nu_sum += m.nu * dh;
        w_sum += l.wall_thickness * 1e-3 * dh;
    }
    if height <= 0.0 {
        return Ok(BucklingCheck::Evaluated {
            height: 0.0,
            h_crit: f64::INFINITY,
            e_eff: material_at(model, 0.0).e,
            u: 0.0,
        });
    }
    let e_eff = e_sum / height;
    let h_crit = critical_height(e_eff, nu_sum / height, w_sum / height, model.rho, model.g);
    let u = if h_crit > 0.0 { height / h_crit } else { f64::INFINITY };
    Ok(BucklingCheck::Evaluated {
        height,
        h_crit,
        e_eff,
        u,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UtilizationSample {
    pub t: f64,
    pub layer: usize,
    pub u_plastic: f64,
    /// None when the geometry is not a wall.
    pub u_buckling: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub failed: bool,
    pub mode: FailureMode,
    pub failure_time: Option<f64>,
    /// 1-based ordinal of the layer being printed at failure.
    pub failure_layer: Option<usize>,
    /// Index of the layer whose strength was exceeded (plastic collapse).
    pub critical_layer: Option<usize>,
    pub max_u_plastic: f64,
    pub max_u_buckling: Option<f64>,
    /// Reason buckling was skipped, if it was.
    pub buckling_note: Option<String>,
    pub time_step: f64,
    pub layers: usize,
    pub history: Vec<UtilizationSample>,
}

impl StabilityReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "stability report");
        let _ = writeln!(out, "layers: {}", self.layers);
        let _ = writeln!(out, "time_step_s: {}", self.time_step);
        let _ = writeln!(out, "failed: {}", self.failed);
        let _ = writeln!(out, "failure_mode: {}", self.mode);
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "failure_time_s: {}", opt(self.failure_time.map(|t| format!("{t:.3}"))));
        let _ = writeln!(out, "failure_layer: {}", opt(self.failure_layer.map(|l| l.to_string())));
        let _ = writeln!(out, "critical_layer: {}", opt(self.critical_layer.map(|l| l.to_string())));
        let _ = writeln!(out, "max_U_plastic: {:.6}", self.max_u_plastic);
        match (&self.max_u_buckling, &self.buckling_note) {
            (Some(u), _) => {
                let _ = writeln!(out, "max_U_buckling: {u:.6}");
            }
            (None, note) => {
                let _ = writeln!(out, "max_U_buckling: not-evaluated");
                if let Some(n) = note {
                    let _ = writeln!(out, "buckling_note: {n}");
                }
            }
        }
        out
    }

    /// `t,layer,U_plastic,U_buckling`, buckling empty when not evaluated.
    pub fn utilization_csv(&self) -> String {
        let mut out = String::from("t,layer,U_plastic,U_buckling\n");
        for s in &self.history {
            let ub = s.u_buckling.map(|u| format!("{u:.6}")).unwrap_or_default();
            let _ = writeln!(out, "{:.6},{},{:.6},{}", s.t, s.layer, s.u_plastic, ub);
        }
        out
    }
}

/// March from the first deposition to the end of the build with steps of
/// at most `time_step`, also stopping at every layer start and end, and
/// stop at the first time either utilization reaches 1. Simultaneous
/// failures are reported as plastic collapse.
pub fn run_stability(
    timeline: &BuildTimeline,
    model: &MaterialModel,
    time_step: f64,
) -> Result<StabilityReport> {
    model.validate()?;
    if !(time_step > 0.0) || !time_step.is_finite() {
        return Err(Error::param("time_step", "must be positive"));
    }
    let t0 = timeline.start_time();
    let t_end = timeline.end_time();
    let mut events: Vec<f64> = timeline
        .layers()
        .iter()
        .flat_map(|l| [l.t_dep, l.t_end])
        .collect();
    events.sort_by(f64::total_cmp);
    events.dedup();

    let note = wall_classification(timeline);
    let mut report = StabilityReport {
        failed: false,
        mode: FailureMode::None,
        failure_time: None,
        failure_layer: None,
        critical_layer: None,
        max_u_plastic: 0.0,
        max_u_buckling: note.is_none().then_some(0.0),
        buckling_note: note,
        time_step,
        layers: timeline.len(),
        history: Vec::new(),
    };

    let mut t = t0;
    let mut next_event = 0;
    loop {
        let plastic = plastic_collapse_check(timeline, model, t)?;
        let buckling = buckling_check(timeline, model, t)?.utilization();
        let mut worst = (0.0, 0);
        for p in &plastic {
            report.history.push(UtilizationSample {
                t,
                layer: p.layer,
                u_plastic: p.u,
                u_buckling: buckling,
            });
            if p.u > worst.0 {
                worst = (p.u, p.layer);
            }
        }
        report.max_u_plastic = report.max_u_plastic.max(worst.0);
        if let (Some(m), Some(b)) = (report.max_u_buckling.as_mut(), buckling) {
            *m = m.max(b);
        }
        let in_progress = plastic.len();
        let mode = if worst.0 >= 1.0 {
            Some(FailureMode::PlasticCollapse)
        } else if buckling.is_some_and(|b| b >= 1.0) {
            Some(FailureMode::ElasticBuckling)
        } else {
            None
        };
        if let Some(mode) = mode {
            report.failed = true;
            report.mode = mode;
            report.failure_time = Some(t);
            report.failure_layer = Some(in_progress);
            report.critical_layer = (mode == FailureMode::PlasticCollapse).then_some(worst.1);
            break;
        }
        if t >= t_end {
            break;
        }
        while next_event < events.len() && events[next_event] <= t {
            next_event += 1;
        }
        let mut next = t + time_step;
        if next_event < events.len() && events[next_event] < next {
            next = events[next_event];
        }
        t = next.min(t_end);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn wall(n: usize, layer_time: f64, w: f64) -> BuildTimeline {
        let r: f64 = 500.0;
        BuildTimeline::uniform(n, layer_time, 10.0, w, std::f64::consts::TAU * r, std::f64::consts::PI * r * r)
            .unwrap()
    }

    fn constant(c0: f64, e0: f64) -> MaterialModel {
        MaterialModel {
            c0,
            phi0: 20.0,
            e0,
            nu: 0.0,
            rho: 2100.0,
            ..Default::default()
        }
    }

    #[test]
    fn single_layer_base_stress() {
        let tl = wall(1, 30.0, 40.0);
        let u = plastic_collapse_check(&tl, &constant(3.0, 1e9), 30.0).unwrap();
        assert_eq!(u.len(), 1);
        assert_relative_eq!(u[0].sigma_v, 0.20601, epsilon = 1e-9);
        assert!(plastic_collapse_check(&tl, &constant(3.0, 1e9), -1.0).is_err());
    }

    #[test]
    fn worked_critical_height() {
        let h = critical_height(100.0, 0.0, 0.04, 2100.0, 9.81);
        assert_relative_eq!(h, 0.171819, epsilon = 1e-6);
        assert_relative_eq!(critical_height(200.0, 0.0, 0.04, 2100.0, 9.81) / h, 2f64.cbrt(), epsilon = 1e-12);
        assert_relative_eq!(
            critical_height(100.0, 0.0, 0.08, 2100.0, 9.81) / h,
            2f64.powf(2.0 / 3.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn worked_collapse_time() {
        let r = run_stability(&wall(60, 30.0, 40.0), &constant(3.0, 1e9), 0.1).unwrap();
        assert_eq!(r.mode, FailureMode::PlasticCollapse);
        let t = r.failure_time.unwrap();
        let sc = unconfined_strength(3.0, 20.0).unwrap() * 1000.0;
        let closed = sc / (2100.0 * 9.81 * 0.01 / 30.0);
        assert!(t >= closed && t - closed <= 0.1 + 1e-9, "{t} vs {closed}");
        assert_eq!(r.failure_layer, Some(42));
        assert_eq!(r.critical_layer, Some(0));
    }

    #[test]
    fn strong_material_never_fails() {
        let r = run_stability(&wall(20, 30.0, 40.0), &constant(1e9, 1e12), 1.0).unwrap();
        assert!(!r.failed);
        assert_eq!(r.mode, FailureMode::None);
        assert!(r.to_text().contains("failure_mode: none"));
    }

    #[test]
    fn soft_slender_wall_buckles_first() {
        let r = run_stability(&wall(40, 30.0, 40.0), &constant(30.0, 100.0), 1.0).unwrap();
        assert_eq!(r.mode, FailureMode::ElasticBuckling);
        // 0.1718 m of 10 mm layers trips in the 18th layer
        assert_eq!(r.failure_layer, Some(18));
        assert!(r.max_u_plastic < 1.0);
    }

    #[test]
    fn dome_is_not_evaluated() {
        let layers = (0..10)
            .map(|i| {
                let z = 10.0 * (i as f64 + 1.0);
                let r = (100.0f64 * 100.0 - z * z).max(1.0).sqrt();
                LayerRecord {
                    index: i,
                    z,
                    t_dep: 30.0 * i as f64,
                    t_end: 30.0 * (i as f64 + 1.0),
                    area: std::f64::consts::PI * r * r,
                    wall_thickness: 10.0,
                    perimeter: std::f64::consts::TAU * r,
                    height: 10.0,
                }
            })
            .collect();
        let tl = BuildTimeline::new(layers).unwrap();
        assert!(matches!(
            buckling_check(&tl, &constant(3.0, 100.0), 100.0).unwrap(),
            BucklingCheck::NotEvaluated(_)
        ));
        let r = run_stability(&tl, &constant(30.0, 100.0), 5.0).unwrap();
        assert!(r.max_u_buckling.is_none());
        assert!(r.to_text().contains("not-evaluated"));
        assert!(r.utilization_csv().lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn history_and_csv() {
        let r = run_stability(&wall(3, 10.0, 40.0), &constant(30.0, 1e6), 4.0).unwrap();
        let csv = r.utilization_csv();
        assert!(csv.starts_with("t,layer,U_plastic,U_buckling\n"));
        // steps 0,4,8,10,14,18,20,24,28,30 with 1,1,1,2,2,2,3,3,3,3 layers
        assert_eq!(r.history.len(), 21);
        assert!(r.history.iter().all(|s| s.u_plastic >= 0.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        let tl = wall(3, 10.0, 40.0);
        assert!(run_stability(&tl, &constant(3.0, 100.0), 0.0).is_err());
        let bad = MaterialModel { rho: -1.0, ..constant(3.0, 100.0) };
        assert!(run_stability(&tl, &bad, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn common_scaling_leaves_utilization_unchanged(k in 0.1..10.0f64, c_rate in 0.0..0.02f64, e_rate in 0.0..1.0f64) {
            let tl = wall(30, 20.0, 40.0);
            let m = MaterialModel { c0: 2.0, c_rate, phi0: 15.0, e0: 80.0, e_rate, nu: 0.2, rho: 2000.0, ..Default::default() };
            let s = MaterialModel { c0: m.c0 * k, c_rate: m.c_rate * k, e0: m.e0 * k, e_rate: m.e_rate * k, rho: m.rho * k, ..m };
            for t in [5.0, 123.0, 599.0] {
                let a = plastic_collapse_check(&tl, &m, t).unwrap();
                let b = plastic_collapse_check(&tl, &s, t).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    proptest::prop_assert!((x.u - y.u).abs() <= 1e-9 * x.u.max(1.0));
                }
                let ua = buckling_check(&tl, &m, t).unwrap().utilization().unwrap();
                let ub = buckling_check(&tl, &s, t).unwrap().utilization().unwrap();
                proptest::prop_assert!((ua - ub).abs() <= 1e-9 * ua.max(1.0));
            }
            let ra = run_stability(&tl, &m, 2.0).unwrap();
            let rb = run_stability(&tl, &s, 2.0).unwrap();
            proptest::prop_assert_eq!(ra.mode, rb.mode);
            proptest::prop_assert_eq!(ra.failure_time, rb.failure_time);
        }

        #[test]
        fn faster_printing_never_fails_later(tl_s in 5.0..60.0f64, c_rate in 0.0..0.02f64, e_rate in 0.0..0.5f64) {
            let m = MaterialModel { c0: 1.5, c_rate, phi0: 20.0, e0: 60.0, e_rate, nu: 0.0, rho: 2100.0, ..Default::default() };
            let slow = run_stability(&wall(80, tl_s, 40.0), &m, 0.5).unwrap();
            let fast = run_stability(&wall(80, 0.5 * tl_s, 40.0), &m, 0.5).unwrap();
            let end = |r: &StabilityReport| r.failure_time.unwrap_or(f64::INFINITY);
            proptest::prop_assert!(end(&fast) <= end(&slow));
        }
    }
}
