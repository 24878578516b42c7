use std::fmt::Write as _;
use std::path::Path;

use super::{PrintConfig, Toolpath};
use crate::error::{Error, Result};

fn coord(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

fn feed(mm_per_s: f64) -> String {
    let s = format!("{:.4}", mm_per_s * 60.0);
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// G-code for the toolpath. E is the cumulative extruded volume in cm³.
pub fn format_gcode(toolpath: &Toolpath, config: &PrintConfig) -> String {
    let (w, h) = (toolpath.bead_width(), toolpath.bead_height());
    let mut out = String::new();
    let _ = writeln!(out, "; printchain");
    let _ = writeln!(out, "; bead_width {w} mm");
    let _ = writeln!(out, "; bead_height {h} mm");
    let _ = writeln!(out, "; flow_rate {} mm3/s", w * h * config.print_speed);
    let _ = writeln!(out, "; E = cumulative extruded volume in cm3 (w*h*length/1000)");
    let s = toolpath.start();
    let _ = writeln!(
        out,
        "G0 X{} Y{} Z{} F{}",
        coord(s.x),
        coord(s.y),
        coord(s.z),
        feed(config.travel_speed)
    );
    let mut volume = 0.0;
    for (a, b, m) in toolpath.segments() {
        let xyz = format!("X{} Y{} Z{}", coord(b.x), coord(b.y), coord(b.z));
        if m.extruding {
            volume += w * h * a.distance(b) / 1000.0;
            let _ = writeln!(out, "G1 {xyz} F{} E{volume:.5}", feed(m.feed));
        } else {
            let _ = writeln!(out, "G0 {xyz} F{}", feed(m.feed));
        }
    }
    out
}

pub fn export_gcode(toolpath: &Toolpath, config: &PrintConfig, path: &Path) -> Result<()> {
    std::fs::write(path, format_gcode(toolpath, config)).map_err(|e| Error::from(e).in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point3, Polyline3};
    use crate::toolpath::plan_toolpath;

    fn cfg() -> PrintConfig {
        PrintConfig::new(50.0, 100.0, 10.0, 10.0)
    }

    fn line(y: f64) -> Polyline3 {
        Polyline3::new(vec![Point3::new(0., y, 10.), Point3::new(100., y, 10.)], false).unwrap()
    }

    #[test]
    fn straight_bead_extrudes_ten_cm3() {
        let g = format_gcode(&plan_toolpath(&[line(0.0)], &cfg()).unwrap(), &cfg());
        assert!(g.starts_with("; printchain\n"));
        assert!(g.contains("; flow_rate 5000 mm3/s"));
        let last = g.lines().last().unwrap();
        assert_eq!(last, "G1 X100.0000 Y0.0000 Z10.0000 F3000 E10.00000");
    }

    #[test]
    fn travel_has_no_e_word() {
        let tp = plan_toolpath(&[line(0.0), line(50.0)], &cfg()).unwrap();
        let g = format_gcode(&tp, &cfg());
        let travels: Vec<_> = g.lines().filter(|l| l.starts_with("G0")).collect();
        assert_eq!(travels.len(), 2);
        assert!(travels.iter().all(|l| !l.contains('E') && l.contains("F6000")));
        let es: Vec<f64> = g
            .lines()
            .filter(|l| l.starts_with("G1"))
            .filter_map(|l| l.split(" E").nth(1))
            .map(|e| e.parse().unwrap())
            .collect();
        assert!(es.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(es.last(), Some(&20.0));
    }

    #[test]
    fn export_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let tp = plan_toolpath(&[line(0.0), line(-30.0)], &cfg()).unwrap();
        let (a, b) = (dir.path().join("a.gcode"), dir.path().join("b.gcode"));
        export_gcode(&tp, &cfg(), &a).unwrap();
        export_gcode(&tp.clone(), &cfg(), &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        assert!(export_gcode(&tp, &cfg(), &dir.path().join("no/such/dir.gcode")).is_err());
    }
}
