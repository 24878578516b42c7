//! Declarative pipeline configuration (TOML).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::design::{OscillationParams, TwistParams, WeaveParams};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::slicer::{SliceMode, SlicePlan};
use crate::stability::MaterialModel;
use crate::toolpath::{PrintConfig, WorkspaceEnvelope, DEFAULT_OVERLAP_TOLERANCE};

const DEFAULT_SAMPLES: usize = 360;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    design: Option<RawDesign>,
    slice: Option<RawSlice>,
    print: Option<RawPrint>,
    material: Option<RawMaterial>,
    stability: Option<RawStability>,
    inspect: Option<RawInspect>,
    io: Option<RawIo>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    kind: Option<String>,
    height: Option<f64>,
    samples: Option<usize>,
    #[serde(rename = "R_c")]
    r_c: Option<f64>,
    a: Option<f64>,
    n: Option<u32>,
    radius: Option<f64>,
    base_radius: Option<f64>,
    amplitude: Option<f64>,
    frequency: Option<u32>,
    layer_phase_shift: Option<f64>,
    rect_width: Option<f64>,
    rect_depth: Option<f64>,
    circle_radius: Option<f64>,
    total_twist: Option<f64>,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlice {
    layer_height: Option<f64>,
    mode: Option<String>,
    samples_per_turn: Option<usize>,
    first_layer_flat: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrint {
    print_speed: Option<f64>,
    travel_speed: Option<f64>,
    bead_width: Option<f64>,
    bead_height: Option<f64>,
    overlap_tolerance: Option<f64>,
    event_interval: Option<f64>,
    cell_size: Option<f64>,
    workspace: Option<RawWorkspace>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorkspace {
    r_min: Option<f64>,
    r_max: Option<f64>,
    z_min: Option<f64>,
    z_max: Option<f64>,
    base: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    #[serde(rename = "C0")]
    c0: Option<f64>,
    #[serde(rename = "C_rate")]
    c_rate: Option<f64>,
    phi0: Option<f64>,
    phi_rate: Option<f64>,
    #[serde(rename = "E0")]
    e0: Option<f64>,
    #[serde(rename = "E_rate")]
    e_rate: Option<f64>,
    nu: Option<f64>,
    nu_rate: Option<f64>,
    rho: Option<f64>,
    psi: Option<f64>,
    g: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStability {
    time_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInspect {
    tolerance: Option<f64>,
    align: Option<bool>,
    pass_fraction: Option<f64>,
    max_iters: Option<usize>,
    icp_tol: Option<f64>,
    scan: Option<PathBuf>,
    reference: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIo {
    out_dir: Option<PathBuf>,
}

/// Geometry source of the chain.
#[derive(Clone, Debug, PartialEq)]
pub enum DesignSpec {
    OscillatingCircle {
        params: OscillationParams,
        height: f64,
    },
    Woven {
        base_radius: f64,
        samples: usize,
        amplitude: f64,
        frequency: u32,
        layer_phase_shift: f64,
        height: f64,
    },
    TwistedPrism(TwistParams),
    Cylinder {
        radius: f64,
        samples: usize,
        height: f64,
    },
    Stl(PathBuf),
}

impl DesignSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            DesignSpec::OscillatingCircle { .. } => "oscillating_circle",
            DesignSpec::Woven { .. } => "woven",
            DesignSpec::TwistedPrism(_) => "twisted_prism",
            DesignSpec::Cylinder { .. } => "cylinder",
            DesignSpec::Stl(_) => "stl",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrintSection {
    pub config: PrintConfig,
    pub workspace: Option<WorkspaceEnvelope>,
    /// s
    pub event_interval: f64,
    /// mm
    pub cell_size: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InspectSection {
    pub tolerance: f64,
    pub align: bool,
    pub pass_fraction: f64,
    pub max_iters: usize,
    pub icp_tol: f64,
    pub scan: Option<PathBuf>,
    pub reference: Option<PathBuf>,
}

/// Validated configuration. Sections absent from the file are `None`; each
/// stage demands the sections it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub design: Option<DesignSpec>,
    pub slice: Option<SlicePlan>,
    pub print: Option<PrintSection>,
    pub material: Option<MaterialModel>,
    pub time_step: f64,
    pub inspect: InspectSection,
    pub out_dir: PathBuf,
    /// SHA-256 of the config text.
    pub digest: String,
}

fn need<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::param(key, "missing required key"))
}

fn within<T>(section: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidParameter { name, message } if !name.contains('.') => Error::InvalidParameter {
            name: format!("{section}.{name}"),
            message,
        },
        other => other,
    })
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Parse { .. } => e.in_file(path),
            other => other,
        })
    }

    /// Parse and validate; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let value: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let offset = e.span().map(|s| s.start).unwrap_or(0);
            Error::parse(offset, e.message().to_string())
        })?;
        let raw: RawConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::param("config", e.message().to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let design = raw
            .design
            .map(|d| within("design", design_spec(d, &resolve)))
            .transpose()?;
        let slice = raw
            .slice
            .map(|s| within("slice", slice_plan(s)))
            .transpose()?;
        let print = raw
            .print
            .map(|p| within("print", print_section(p, slice.as_ref())))
            .transpose()?;
        let material = raw
            .material
            .map(|m| within("material", material_model(m)))
            .transpose()?;
        let stab = raw.stability.unwrap_or_default();
        let time_step = stab.time_step.unwrap_or(1.0);
        if !(time_step > 0.0) || !time_step.is_finite() {
            return Err(Error::param("stability.time_step", "must be positive"));
        }
        let ins = raw.inspect.unwrap_or_default();
        let inspect = InspectSection {
            tolerance: ins.tolerance.unwrap_or(1.0),
            align: ins.align.unwrap_or(false),
            pass_fraction: ins.pass_fraction.unwrap_or(crate::inspection::DEFAULT_PASS_FRACTION),
            max_iters: ins.max_iters.unwrap_or(crate::inspection::DEFAULT_MAX_ITERS),
            icp_tol: ins.icp_tol.unwrap_or(crate::inspection::DEFAULT_ICP_TOL),
            scan: ins.scan.map(resolve),
            reference: ins.reference.map(resolve),
        };
        if !(inspect.tolerance > 0.0) {
            return Err(Error::param("inspect.tolerance", "must be positive"));
        }
        if !(0.0..=1.0).contains(&inspect.pass_fraction) {
            return Err(Error::param("inspect.pass_fraction", "must lie in [0, 1]"));
        }
        if !(inspect.icp_tol >= 0.0) {
            return Err(Error::param("inspect.icp_tol", "must be non-negative"));
        }
        let out_dir = resolve(raw.io.and_then(|io| io.out_dir).unwrap_or_else(|| "out".into()));

        use sha2::Digest;
        let digest = hex::encode(sha2::Sha256::digest(text.as_bytes()));
        Ok(PipelineConfig {
            design,
            slice,
            print,
            material,
            time_step,
            inspect,
            out_dir,
            digest,
        })
    }

    pub fn design(&self) -> Result<&DesignSpec> {
        self.design.as_ref().ok_or_else(|| missing("design"))
    }

    pub fn slice(&self) -> Result<&SlicePlan> {
        self.slice.as_ref().ok_or_else(|| missing("slice"))
    }

    pub fn print(&self) -> Result<&PrintSection> {
        self.print.as_ref().ok_or_else(|| missing("print"))
    }

    pub fn material(&self) -> Result<&MaterialModel> {
        self.material.as_ref().ok_or_else(|| missing("material"))
    }
}

fn missing(section: &str) -> Error {
    Error::param(section, "section is missing from the config")
}

fn design_spec(d: RawDesign, resolve: &dyn Fn(PathBuf) -> PathBuf) -> Result<DesignSpec> {
    let kind = need(d.kind.clone(), "kind")?;
    let samples = d.samples.unwrap_or(DEFAULT_SAMPLES);
    let height = || {
        let h = need(d.height, "height")?;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::param("height", "must be positive"));
        }
        Ok(h)
    };
    let spec = match kind.as_str() {
        "oscillating_circle" => {
            let params = OscillationParams {
                base_radius: need(d.r_c, "R_c")?,
                amplitude: need(d.a, "a")?,
                frequency: need(d.n, "n")?,
                samples,
            };
            params.validate()?;
            DesignSpec::OscillatingCircle {
                params,
                height: height()?,
            }
        }
        "woven" => {
            let spec = DesignSpec::Woven {
                base_radius: need(d.base_radius, "base_radius")?,
                samples,
                amplitude: need(d.amplitude, "amplitude")?,
                frequency: need(d.frequency, "frequency")?,
                layer_phase_shift: d.layer_phase_shift.unwrap_or(PI),
                height: height()?,
            };
            weave_params(&spec)?.validate()?;
            spec
        }
        "twisted_prism" => {
            let params = TwistParams {
                rect_width: need(d.rect_width, "rect_width")?,
                rect_depth: need(d.rect_depth, "rect_depth")?,
                circle_radius: need(d.circle_radius, "circle_radius")?,
                height: height()?,
                total_twist_deg: d.total_twist.unwrap_or(0.0),
                samples,
            };
            params.validate()?;
            DesignSpec::TwistedPrism(params)
        }
        "cylinder" => {
            let radius = need(d.radius, "radius")?;
            if !(radius > 0.0) {
                return Err(Error::param("radius", "must be positive"));
            }
            if samples < 3 {
                return Err(Error::param("samples", "need at least 3"));
            }
            DesignSpec::Cylinder {
                radius,
                samples,
                height: height()?,
            }
        }
        "stl" => DesignSpec::Stl(resolve(need(d.path, "path")?)),
        other => {
            return Err(Error::param(
                "kind",
                format!(
                    "unknown design kind {other:?} (oscillating_circle, woven, twisted_prism, cylinder, stl)"
                ),
            ))
        }
    };
    Ok(spec)
}

/// Weave over a circular base contour.
pub(crate) fn weave_params(spec: &DesignSpec) -> Result<WeaveParams> {
    match *spec {
        DesignSpec::Woven {
            base_radius,
            samples,
            amplitude,
            frequency,
            layer_phase_shift,
            ..
        } => Ok(WeaveParams {
            base: within("design", crate::design::circle_contour(base_radius, samples, 0.0))?,
            amplitude,
            frequency,
            layer_phase_shift,
        }),
        _ => Err(Error::param("design.kind", "not a woven design")),
    }
}

fn slice_plan(s: RawSlice) -> Result<SlicePlan> {
    let mode = match s.mode.as_deref().unwrap_or("planar") {
        "planar" => SliceMode::Planar,
        "helical" => SliceMode::Helical,
        other => return Err(Error::param("mode", format!("unknown mode {other:?} (planar, helical)"))),
    };
    let plan = SlicePlan {
        layer_height: need(s.layer_height, "layer_height")?,
        mode,
        samples_per_turn: s.samples_per_turn.unwrap_or(DEFAULT_SAMPLES),
        first_layer_flat: s.first_layer_flat.unwrap_or(true),
    };
    plan.validate()?;
    Ok(plan)
}

fn print_section(p: RawPrint, slice: Option<&SlicePlan>) -> Result<PrintSection> {
    let bead_height = match (p.bead_height, slice) {
        (Some(h), _) => h,
        (None, Some(s)) => s.layer_height,
        (None, None) => need(None, "bead_height")?,
    };
    if let Some(s) = slice {
        if (s.layer_height - bead_height).abs() > 1e-9 {
            return Err(Error::param(
                "bead_height",
                format!("must equal slice.layer_height = {}", s.layer_height),
            ));
        }
    }
    let config = PrintConfig {
        print_speed: need(p.print_speed, "print_speed")?,
        travel_speed: need(p.travel_speed, "travel_speed")?,
        bead_width: need(p.bead_width, "bead_width")?,
        bead_height,
        overlap_tolerance: p.overlap_tolerance.unwrap_or(DEFAULT_OVERLAP_TOLERANCE),
    };
    config.validate()?;
    let event_interval = p.event_interval.unwrap_or(1.0);
    if !(event_interval > 0.0) || !event_interval.is_finite() {
        return Err(Error::param("event_interval", "must be positive"));
    }
    let cell_size = p.cell_size.unwrap_or(config.bead_width / 8.0);
    if !(cell_size > 0.0) || cell_size > config.bead_width / 4.0 {
        return Err(Error::param("cell_size", "must lie in (0, bead_width/4]"));
    }
    let workspace = p
        .workspace
        .map(|w| {
            let b = w.base.unwrap_or([0.0; 3]);
            within(
                "print.workspace",
                WorkspaceEnvelope::new(
                    w.r_min.unwrap_or(0.0),
                    need(w.r_max, "r_max")?,
                    need(w.z_min, "z_min")?,
                    need(w.z_max, "z_max")?,
                    Point3::new(b[0], b[1], b[2]),
                ),
            )
        })
        .transpose()?;
    Ok(PrintSection {
        config,
        workspace,
        event_interval,
        cell_size,
    })
}

fn material_model(m: RawMaterial) -> Result<MaterialModel> {
    let model = MaterialModel {
        c0: need(m.c0, "C0")?,
        c_rate: m.c_rate.unwrap_or(0.0),
        phi0: need(m.phi0, "phi0")?,
        phi_rate: m.phi_rate.unwrap_or(0.0),
        e0: need(m.e0, "E0")?,
        e_rate: m.e_rate.unwrap_or(0.0),
        nu: m.nu.unwrap_or(0.0),
        nu_rate: m.nu_rate.unwrap_or(0.0),
        rho: need(m.rho, "rho")?,
        psi: m.psi.unwrap_or(0.0),
        g: m.g.unwrap_or(9.81),
    };
    model.validate()?;
    Ok(model)
}
