//! The chain as file-handoff stages: generate, slice, toolpath, stability
//! and inspect, plus `run` which chains the first four and writes a
//! manifest of every artifact with its SHA-256.

pub mod config;

pub use config::{DesignSpec, InspectSection, PipelineConfig, PrintSection};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use sha2::{Digest, Sha256};

use crate::design::{circle_contour, oscillating_contour};
use crate::error::{Error, Result};
use crate::geometry::stl::{load_stl, save_stl};
use crate::geometry::{loft_contours, Contour2};
use crate::inspection::{deviation_report_with, export_heatmap_ply, load_pointcloud, InspectOptions};
use crate::par::Exec;
use crate::slicer::io::{format_contour_xy, parse_layers, parse_polyline, write_layers, write_polyline};
use crate::slicer::{slice_helical, slice_parametric, slice_planar_with, SliceMode, SlicePlan};
use crate::stability::{run_stability, BuildTimeline};
use crate::toolpath::{
    check_workspace, detect_overdeposition_with, export_event_series, export_gcode,
    paths_from_stack, plan_toolpath, read_event_series, simulate_deposition_with,
};

pub const DESIGN_STL: &str = "design.stl";
pub const LAYERS_DIR: &str = "layers";
pub const LAYERS_CSV: &str = "layers.csv";
pub const HELIX_CSV: &str = "helix.csv";
pub const GCODE: &str = "toolpath.gcode";
pub const EVENTS_CSV: &str = "events.csv";
pub const TOOLPATH_REPORT: &str = "toolpath_report.txt";
pub const STABILITY_REPORT: &str = "stability_report.txt";
pub const UTILIZATION_CSV: &str = "utilization.csv";
pub const DEVIATION_REPORT: &str = "deviation_report.txt";
pub const DEVIATIONS_CSV: &str = "deviations.csv";
pub const HEATMAP_PLY: &str = "heatmap.ply";
pub const MANIFEST: &str = "manifest.txt";

/// Process exit status for an error: 3 for I/O and file-format problems,
/// 2 for invalid input.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_io_or_parse() {
        3
    } else {
        2
    }
}

#[derive(Clone, Debug)]
pub struct Context {
    pub out_dir: PathBuf,
    /// Pass the toolpath stage despite collisions or reach violations.
    pub force: bool,
    pub exec: Exec,
}

impl Context {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Context {
            out_dir: out_dir.into(),
            force: false,
            exec: Exec::default(),
        }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out_dir.join(rel)
    }

    fn prepare(&self) -> Result<()> {
        fs::create_dir_all(&self.out_dir).map_err(|e| Error::from(e).in_file(&self.out_dir))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageOutcome {
    pub stage: &'static str,
    /// False when the stage ran but its analysis failed (exit status 1).
    pub passed: bool,
    /// Written files, relative to the output directory.
    pub artifacts: Vec<String>,
    pub summary: String,
}

fn write(ctx: &Context, rel: &str, bytes: impl AsRef<[u8]>) -> Result<String> {
    let p = ctx.path(rel);
    fs::write(&p, bytes).map_err(|e| Error::from(e).in_file(&p))?;
    Ok(rel.to_string())
}

/// Contours of the configured parametric design at height `z`.
type ContourFn<'a> = Box<dyn Fn(f64) -> Result<Vec<Contour2>> + 'a>;

fn design_contours<'a>(spec: &'a DesignSpec, plan: &SlicePlan) -> Result<ContourFn<'a>> {
    Ok(match spec {
        DesignSpec::OscillatingCircle { params, .. } => {
            Box::new(move |z| Ok(vec![oscillating_contour(params, z)?]))
        }
        DesignSpec::Woven { .. } => {
            let weave = config::weave_params(spec)?;
            let h = plan.layer_height;
            Box::new(move |z| {
                let i = (z / h - 0.5).round().max(0.0) as usize;
                Ok(vec![weave.layer(i, z)?])
            })
        }
        DesignSpec::TwistedPrism(t) => Box::new(move |z| Ok(vec![t.section(z)?])),
        DesignSpec::Cylinder { radius, samples, .. } => {
            Box::new(move |z| Ok(vec![circle_contour(*radius, *samples, z)?]))
        }
        DesignSpec::Stl(_) => unreachable!("mesh designs have no parametric contours"),
    })
}

/// Write `design.stl` and, for parametric designs, one `x,y` CSV per layer.
pub fn cmd_generate(cfg: &PipelineConfig, ctx: &Context) -> Result<StageOutcome> {
    let spec = cfg.design()?;
    let plan = cfg.slice()?;
    ctx.prepare()?;
    let mut artifacts = Vec::new();
    let mut summary = format!("design: {}\n", spec.kind());
    let height = match spec {
        DesignSpec::Stl(path) => {
            let mesh = load_stl(path)?;
            save_stl(&mesh, ctx.path(DESIGN_STL))?;
            artifacts.push(DESIGN_STL.to_string());
            let _ = writeln!(summary, "triangles: {}", mesh.triangles().len());
            let _ = writeln!(summary, "watertight: {}", mesh.is_watertight());
            return Ok(StageOutcome {
                stage: "generate",
                passed: true,
                artifacts,
                summary,
            });
        }
        DesignSpec::OscillatingCircle { height, .. }
        | DesignSpec::Woven { height, .. }
        | DesignSpec::Cylinder { height, .. } => *height,
        DesignSpec::TwistedPrism(t) => t.height,
    };
    let f = design_contours(spec, plan)?;
    let stack = slice_parametric(&f, height, plan).map_err(in_design)?;
    let contours: Vec<Contour2> = stack
        .layers()
        .iter()
        .flat_map(|l| l.contours.iter().cloned())
        .collect();
    let mesh = loft_contours(&contours, 0.0, height)?;
    save_stl(&mesh, ctx.path(DESIGN_STL))?;
    artifacts.push(DESIGN_STL.to_string());
    let dir = ctx.path(LAYERS_DIR);
    fs::create_dir_all(&dir).map_err(|e| Error::from(e).in_file(&dir))?;
    for (i, c) in contours.iter().enumerate() {
        artifacts.push(write(ctx, &format!("{LAYERS_DIR}/layer_{i:04}.csv"), format_contour_xy(c))?);
    }
    let _ = writeln!(summary, "layers: {}", contours.len());
    let _ = writeln!(summary, "height_mm: {height}");
    let _ = writeln!(summary, "first_layer_perimeter_mm: {:.4}", contours[0].perimeter());
    let _ = writeln!(summary, "volume_mm3: {:.4}", mesh.volume());
    info!("generated {} layers", contours.len());
    Ok(StageOutcome {
        stage: "generate",
        passed: true,
        artifacts,
        summary,
    })
}

fn in_design(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, message } if !name.contains('.') => Error::InvalidParameter {
            name: format!("design.{name}"),
            message,
        },
        other => other,
    }
}

/// Slice an STL (default `design.stl`) into `layers.csv` or `helix.csv`.
pub fn cmd_slice(cfg: &PipelineConfig, ctx: &Context, input: Option<&Path>) -> Result<StageOutcome> {
    let plan = cfg.slice()?;
    ctx.prepare()?;
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| ctx.path(DESIGN_STL));
    let mesh = load_stl(&input)?;
    let stack = slice_planar_with(&mesh, plan, ctx.exec)?;
    let mut summary = format!("layers: {}\n", stack.len());
    let artifact = match plan.mode {
        SliceMode::Planar => {
            write_layers(&stack, ctx.path(LAYERS_CSV))?;
            LAYERS_CSV
        }
        SliceMode::Helical => {
            let helix = slice_helical(&stack, plan)?;
            let _ = writeln!(summary, "helix_points: {}", helix.points().len());
            let _ = writeln!(summary, "helix_length_mm: {:.4}", helix.length());
            write_polyline(&helix, ctx.path(HELIX_CSV))?;
            HELIX_CSV
        }
    };
    info!("sliced {} into {artifact}", input.display());
    Ok(StageOutcome {
        stage: "slice",
        passed: true,
        artifacts: vec![artifact.to_string()],
        summary,
    })
}

/// Plan the toolpath from a helix (`x,y,z`) or layer (`layer,contour,z,x,y`)
/// file, run the process checks and export G-code and the event series.
pub fn cmd_toolpath(cfg: &PipelineConfig, ctx: &Context, input: Option<&Path>) -> Result<StageOutcome> {
    let print = cfg.print()?;
    let pc = &print.config;
    ctx.prepare()?;
    let input = match input {
        Some(p) => p.to_path_buf(),
        None => match cfg.slice.map(|s| s.mode) {
            Some(SliceMode::Planar) => ctx.path(LAYERS_CSV),
            _ => ctx.path(HELIX_CSV),
        },
    };
    let text = fs::read_to_string(&input).map_err(|e| Error::from(e).in_file(&input))?;
    let paths = if is_helix_file(&text) {
        vec![parse_polyline(&text).map_err(|e| e.in_file(&input))?]
    } else {
        let stack = parse_layers(&text).map_err(|e| e.in_file(&input))?;
        paths_from_stack(&stack, pc.bead_height)?
    };
    let tp = plan_toolpath(&paths, pc)?;
    let collisions = detect_overdeposition_with(&tp, pc, ctx.exec);
    let violations = print
        .workspace
        .map(|w| check_workspace(&tp, &w))
        .unwrap_or_default();
    let grid = simulate_deposition_with(&tp, pc, print.cell_size, ctx.exec)?;
    export_gcode(&tp, pc, &ctx.path(GCODE))?;
    let series = export_event_series(&tp, print.event_interval, &ctx.path(EVENTS_CSV))?;

    let mut r = String::new();
    let _ = writeln!(r, "toolpath report");
    let _ = writeln!(r, "moves: {}", tp.moves().len());
    let _ = writeln!(r, "travel_moves: {}", tp.travel_moves());
    let _ = writeln!(r, "extruded_length_mm: {:.4}", tp.extruded_length());
    let _ = writeln!(r, "total_time_s: {:.4}", tp.total_time());
    let _ = writeln!(r, "extrusion_time_s: {:.4}", tp.extrusion_time());
    let _ = writeln!(r, "flow_rate_mm3_s: {}", pc.flow_rate());
    let _ = writeln!(r, "event_rows: {}", series.len());
    let _ = writeln!(r, "collisions: {}", collisions.len());
    for c in &collisions {
        let _ = writeln!(
            r,
            "collision z={:.4} moves={}/{} min_distance_mm={:.4} overlap_length_mm={:.4} pairs={}",
            c.layer_z, c.segments.0, c.segments.1, c.min_distance, c.overlap_length, c.pair_count
        );
    }
    match &print.workspace {
        None => {
            let _ = writeln!(r, "workspace: not checked");
        }
        Some(_) => {
            let _ = writeln!(r, "workspace_violations: {}", violations.len());
        }
    }
    for v in &violations {
        let _ = writeln!(
            r,
            "violation t={:.4} point=({:.4}, {:.4}, {:.4}) reason={} vertices={}",
            v.time, v.point.x, v.point.y, v.point.z, v.reason, v.vertex_count
        );
    }
    r.push_str(&grid.report());
    let clean = collisions.is_empty() && violations.is_empty();
    if !clean && ctx.force {
        let _ = writeln!(r, "status: forced past failed checks");
    } else {
        let _ = writeln!(r, "status: {}", if clean { "pass" } else { "fail" });
    }
    write(ctx, TOOLPATH_REPORT, &r)?;

    let mut summary = format!(
        "total_time_s: {:.4}\ncollisions: {}\nworkspace_violations: {}\n",
        tp.total_time(),
        collisions.len(),
        violations.len()
    );
    if let Some(v) = violations.first() {
        let _ = writeln!(summary, "first_violation_t: {:.4} ({})", v.time, v.reason);
    }
    Ok(StageOutcome {
        stage: "toolpath",
        passed: clean || ctx.force,
        artifacts: vec![GCODE.into(), EVENTS_CSV.into(), TOOLPATH_REPORT.into()],
        summary,
    })
}

fn is_helix_file(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.split(',').count() == 3)
}

/// Early-age stability of the build described by an event series.
pub fn cmd_stability(cfg: &PipelineConfig, ctx: &Context, input: Option<&Path>) -> Result<StageOutcome> {
    let print = cfg.print()?;
    let model = cfg.material()?;
    ctx.prepare()?;
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| ctx.path(EVENTS_CSV));
    let series = read_event_series(&input)?;
    let timeline =
        BuildTimeline::from_event_series(&series, print.config.bead_width, print.config.bead_height)?;
    let report = run_stability(&timeline, model, cfg.time_step)?;
    let text = report.to_text();
    let artifacts = vec![
        write(ctx, STABILITY_REPORT, &text)?,
        write(ctx, UTILIZATION_CSV, report.utilization_csv())?,
    ];
    Ok(StageOutcome {
        stage: "stability",
        passed: !report.failed,
        artifacts,
        summary: text,
    })
}

/// Compare a scan against the reference mesh (default `design.stl`).
pub fn cmd_inspect(
    cfg: &PipelineConfig,
    ctx: &Context,
    scan: Option<&Path>,
    reference: Option<&Path>,
) -> Result<StageOutcome> {
    let ins = &cfg.inspect;
    let scan = scan
        .map(Path::to_path_buf)
        .or_else(|| ins.scan.clone())
        .ok_or_else(|| Error::param("inspect.scan", "no scan file given"))?;
    let reference = reference
        .map(Path::to_path_buf)
        .or_else(|| ins.reference.clone())
        .unwrap_or_else(|| ctx.path(DESIGN_STL));
    ctx.prepare()?;
    let mesh = load_stl(&reference)?;
    let cloud = load_pointcloud(&scan)?;
    let opts = InspectOptions {
        tolerance: ins.tolerance,
        align: ins.align,
        pass_fraction: ins.pass_fraction,
        max_iters: ins.max_iters,
        icp_tol: ins.icp_tol,
    };
    let report = deviation_report_with(&cloud, &mesh, &opts, ctx.exec)?;
    let text = report.to_text();
    let mut artifacts = vec![write(ctx, DEVIATION_REPORT, &text)?];
    report.write_deviations_csv(&ctx.path(DEVIATIONS_CSV))?;
    artifacts.push(DEVIATIONS_CSV.into());
    export_heatmap_ply(&report.cloud, ins.tolerance, &ctx.path(HEATMAP_PLY))?;
    artifacts.push(HEATMAP_PLY.into());
    Ok(StageOutcome {
        stage: "inspect",
        passed: report.passed,
        artifacts,
        summary: text,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum StageStatus {
    Ok,
    Failed,
    Error(String),
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub stages: Vec<(&'static str, StageStatus)>,
    pub outcomes: Vec<StageOutcome>,
    pub manifest: String,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|(_, s)| *s == StageStatus::Ok)
    }
}

const RUN_STAGES: [&str; 4] = ["generate", "slice", "toolpath", "stability"];

/// generate → slice → toolpath → stability, stopping at the first stage
/// that fails or errors. The manifest is written in every case; an error is
/// returned after it.
pub fn cmd_run(cfg: &PipelineConfig, ctx: &Context) -> Result<RunOutcome> {
    cfg.design()?;
    cfg.slice()?;
    cfg.print()?;
    cfg.material()?;
    ctx.prepare()?;
    let mut stages: Vec<(&'static str, StageStatus)> =
        RUN_STAGES.iter().map(|&s| (s, StageStatus::Skipped)).collect();
    let mut outcomes = Vec::new();
    let mut error = None;
    for (k, name) in RUN_STAGES.iter().enumerate() {
        let result = match k {
            0 => cmd_generate(cfg, ctx),
            1 => cmd_slice(cfg, ctx, None),
            2 => cmd_toolpath(cfg, ctx, None),
            _ => cmd_stability(cfg, ctx, None),
        };
        match result {
            Ok(o) => {
                let passed = o.passed;
                stages[k].1 = if passed { StageStatus::Ok } else { StageStatus::Failed };
                outcomes.push(o);
                if !passed {
                    break;
                }
            }
            Err(e) => {
                stages[k].1 = StageStatus::Error(e.to_string());
                error = Some(Error::Stage {
                    stage: name.to_string(),
                    source: Box::new(e),
                });
                break;
            }
        }
    }
    let manifest = format_manifest(cfg, ctx, &stages, &outcomes)?;
    write(ctx, MANIFEST, &manifest)?;
    if let Some(e) = error {
        return Err(e);
    }
    Ok(RunOutcome {
        stages,
        outcomes,
        manifest,
    })
}

fn format_manifest(
    cfg: &PipelineConfig,
    ctx: &Context,
    stages: &[(&'static str, StageStatus)],
    outcomes: &[StageOutcome],
) -> Result<String> {
    let mut m = String::from("printchain manifest\n");
    let _ = writeln!(m, "config_sha256 {}", cfg.digest);
    for (k, (name, status)) in stages.iter().enumerate() {
        let s = match status {
            StageStatus::Ok => "ok".to_string(),
            StageStatus::Failed => "failed".to_string(),
            StageStatus::Skipped => "skipped".to_string(),
            StageStatus::Error(e) => format!("error {}", e.replace('\n', " ")),
        };
        let _ = writeln!(m, "stage {} {name} {s}", k + 1);
    }
    for o in outcomes {
        for a in &o.artifacts {
            let p = ctx.path(a);
            let bytes = fs::read(&p).map_err(|e| Error::from(e).in_file(&p))?;
            let _ = writeln!(m, "artifact {} sha256 {}", a, hex::encode(Sha256::digest(&bytes)));
        }
    }
    Ok(m)
}
