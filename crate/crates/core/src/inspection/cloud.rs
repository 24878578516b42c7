use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Scan points, optionally with one scalar per point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    scalars: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGeometry("point cloud is empty".into()));
        }
        if let Some(k) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("point {k} is not finite")));
        }
        Ok(PointCloud {
            points,
            scalars: None,
        })
    }

    pub fn with_scalars(mut self, scalars: Vec<f64>) -> Result<Self> {
        if scalars.len() != self.points.len() {
            return Err(Error::InvalidGeometry(format!(
                "{} scalars for {} points",
                scalars.len(),
                self.points.len()
            )));
        }
        self.scalars = Some(scalars);
        Ok(self)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn scalars(&self) -> Option<&[f64]> {
        self.scalars.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points mapped through `f`; scalars are dropped.
    pub fn map(&self, f: impl Fn(Point3) -> Point3) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|&p| f(p)).collect(),
            scalars: None,
        }
    }
}

/// ASCII PLY (by `.ply` extension or `ply` magic) or whitespace XYZ text.
pub fn load_pointcloud(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    let is_ply = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ply"))
        || text.starts_with("ply");
    if is_ply {
        parse_ply(&text)
    } else {
        parse_xyz(&text)
    }
    .map_err(|e| e.in_file(path))
}

/// One point per line from the first three fields; `#` starts a comment.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let here = offset;
        offset += line.len();
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let f: Vec<&str> = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if f.len() < 3 {
            return Err(Error::parse(here, format!("expected x y z, found {} fields", f.len())));
        }
        points.push(parse_point(&f[..3], here)?);
    }
    if points.is_empty() {
        return Err(Error::parse(0, "no points"));
    }
    PointCloud::new(points)
}

fn parse_point(f: &[&str], offset: usize) -> Result<Point3> {
    let mut c = [0.0; 3];
    for (slot, s) in c.iter_mut().zip(f) {
        *slot = s
            .parse()
            .map_err(|_| Error::parse(offset, format!("coordinate {s:?} is not a number")))?;
    }
    Point3::finite(c[0], c[1], c[2]).map_err(|_| Error::parse(offset, "non-finite coordinate"))
}

struct Element {
    name: String,
    count: usize,
    /// Scalar property names; None marks a list property.
    props: Vec<Option<String>>,
}

const FLOAT_TYPES: [&str; 4] = ["float", "double", "float32", "float64"];
const SCALAR_TYPES: [&str; 16] = [
    "char", "uchar", "short", "ushort", "int", "uint", "float", "double", "int8", "uint8",
    "int16", "uint16", "int32", "uint32", "float32", "float64",
];

pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.split_inclusive('\n').scan(0usize, |off, l| {
        let here = *off;
        *off += l.len();
        Some((here, l.trim()))
    });
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(Error::parse(0, "missing ply magic")),
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut format_ok = false;
    let mut xyz_float = [false; 3];
    let mut end = None;
    for (here, line) in lines.by_ref() {
        let w: Vec<&str> = line.split_whitespace().collect();
        match w.first().copied() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                if w.get(1) != Some(&"ascii") {
                    return Err(Error::parse(here, "only ascii PLY is supported"));
                }
                format_ok = true;
            }
            Some("element") => {
                if w.len() != 3 {
                    return Err(Error::parse(here, "malformed element line"));
                }
                let count = w[2]
                    .parse()
                    .map_err(|_| Error::parse(here, format!("bad element count {:?}", w[2])))?;
                elements.push(Element {
                    name: w[1].to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(here, "property before any element"))?;
                if w.get(1) == Some(&"list") {
                    if w.len() != 5 {
                        return Err(Error::parse(here, "malformed list property"));
                    }
                    el.props.push(None);
                } else {
                    if w.len() != 3 || !SCALAR_TYPES.contains(&w[1]) {
                        return Err(Error::parse(here, "malformed property line"));
                    }
                    if el.name == "vertex" {
                        if let Some(i) = ["x", "y", "z"].iter().position(|n| *n == w[2]) {
                            xyz_float[i] = FLOAT_TYPES.contains(&w[1]);
                        }
                    }
                    el.props.push(Some(w[2].to_string()));
                }
            }
            Some("end_header") => {
                end = Some(here);
                break;
            }
            Some(other) => {
                return Err(Error::parse(here, format!("unexpected header keyword {other:?}")));
            }
        }
    }
    let Some(header_end) = end else {
        return Err(Error::parse(text.len(), "missing end_header"));
    };
    if !format_ok {
        return Err(Error::parse(header_end, "missing format line"));
    }
    let vertex = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::parse(header_end, "no vertex element"))?;
    let col = |n: &str| {
        elements[vertex]
            .props
            .iter()
            .position(|p| p.as_deref() == Some(n))
    };
    let (Some(ix), Some(iy), Some(iz)) = (col("x"), col("y"), col("z")) else {
        return Err(Error::parse(header_end, "vertex element lacks x, y, z"));
    };
    if !xyz_float.iter().all(|&f| f) {
        return Err(Error::parse(header_end, "vertex x, y, z must be float properties"));
    }
    if elements[vertex].props.iter().any(Option::is_none) {
        return Err(Error::parse(header_end, "list properties on vertices are not supported"));
    }
    let iq = col("quality");

    let mut data = lines.filter(|(_, l)| !l.is_empty());
    let mut points = Vec::new();
    let mut quality = Vec::new();
    let mut last = header_end;
    for (k, el) in elements.iter().enumerate() {
        for found in 0..el.count {
            let Some((here, line)) = data.next() else {
                return Err(Error::parse(
                    text.len(),
                    format!("element {} expected {} rows, found {found}", el.name, el.count),
                ));
            };
            last = here;
            if k != vertex {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != el.props.len() {
                return Err(Error::parse(
                    here,
                    format!("vertex row has {} values, expected {}", f.len(), el.props.len()),
                ));
            }
            points.push(parse_point(&[f[ix], f[iy], f[iz]], here)?);
            if let Some(q) = iq {
                quality.push(
                    f[q].parse::<f64>()
                        .map_err(|_| Error::parse(here, format!("bad quality {:?}", f[q])))?,
                );
            }
        }
    }
    if let Some((here, _)) = data.next() {
        return Err(Error::parse(
            here,
            format!(
                "expected {} vertices, found extra data after row {last}",
                elements[vertex].count
            ),
        ));
    }
    let cloud = PointCloud::new(points)?;
    if iq.is_some() {
        cloud.with_scalars(quality)
    } else {
        Ok(cloud)
    }
}

/// Red for positive, blue for negative, white at zero; saturated at
/// `±tolerance`.
pub fn deviation_color(d: f64, tolerance: f64) -> [u8; 3] {
    let s = if tolerance > 0.0 {
        (d / tolerance).clamp(-1.0, 1.0)
    } else {
        d.signum()
    };
    let fade = |v: f64| (255.0 * (1.0 - v.abs())).round() as u8;
    if s >= 0.0 {
        [255, fade(s), fade(s)]
    } else {
        [fade(s), fade(s), 255]
    }
}

pub fn format_heatmap_ply(cloud: &PointCloud, tolerance: f64) -> Result<String> {
    let q = cloud
        .scalars()
        .ok_or_else(|| Error::InvalidGeometry("point cloud has no deviations".into()))?;
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\ncomment printchain deviation heatmap\n");
    let _ = writeln!(out, "comment tolerance {tolerance} mm");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str(
        "property float x\nproperty float y\nproperty float z\nproperty float quality\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
    );
    for (p, &d) in cloud.points().iter().zip(q) {
        let [r, g, b] = deviation_color(d, tolerance);
        let _ = writeln!(out, "{} {} {} {} {r} {g} {b}", p.x, p.y, p.z, d);
    }
    Ok(out)
}

pub fn export_heatmap_ply(cloud: &PointCloud, tolerance: f64, path: &Path) -> Result<()> {
    fs::write(path, format_heatmap_ply(cloud, tolerance)?).map_err(|e| Error::from(e).in_file(path))
}
