//! Plain-text handoff formats for sliced geometry.
//!
//! Layer stacks: a `# layer_height <h>` line, then one `layer,contour,z,x,y`
//! row per vertex. Paths: one `x,y,z` row per vertex. Numbers use the
//! shortest round-trip representation so files reload bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Layer, LayerStack};
use crate::error::{Error, Result};
use crate::geometry::{Contour2, Point2, Point3, Polyline3};

pub fn format_layers(stack: &LayerStack) -> String {
    let mut s = format!("# layer_height {}\n", stack.layer_height());
    for (i, l) in stack.layers().iter().enumerate() {
        for (j, c) in l.contours.iter().enumerate() {
            for p in c.points() {
                writeln!(s, "{i},{j},{},{},{}", l.z, p.x, p.y).unwrap();
            }
        }
    }
    s
}

pub fn write_layers(stack: &LayerStack, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), format_layers(stack)).map_err(|e| Error::from(e).in_file(path.as_ref()))
}

/// One contour as `x,y` rows.
pub fn format_contour_xy(c: &Contour2) -> String {
    let mut s = String::new();
    for p in c.points() {
        writeln!(s, "{},{}", p.x, p.y).unwrap();
    }
    s
}

pub fn format_polyline(path: &Polyline3) -> String {
    let mut s = String::new();
    for p in path.points() {
        writeln!(s, "{},{},{}", p.x, p.y, p.z).unwrap();
    }
    s
}

pub fn write_polyline(path: &Polyline3, file: impl AsRef<Path>) -> Result<()> {
    fs::write(file.as_ref(), format_polyline(path)).map_err(|e| Error::from(e).in_file(file.as_ref()))
}

fn fields(line: &str, offset: usize, expected: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    if parts.len() != expected {
        return Err(Error::parse(
            offset,
            format!("expected {expected} fields, found {}", parts.len()),
        ));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(offset, format!("invalid number `{p}`")))
        })
        .collect()
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').map(move |raw| {
        let start = offset;
        offset += raw.len();
        (start, raw.trim())
    })
}

pub fn parse_layers(text: &str) -> Result<LayerStack> {
    let mut layer_height = None;
    let mut rows: Vec<(usize, usize, f64, Point2)> = Vec::new();
    for (off, line) in lines(text) {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("layer_height") {
                let v = it.next().and_then(|v| v.parse::<f64>().ok());
                layer_height = Some(v.ok_or_else(|| Error::parse(off, "bad layer_height"))?);
            }
            continue;
        }
        let f = fields(line, off, 5)?;
        if f[0] < 0.0 || f[1] < 0.0 || f[0].fract() != 0.0 || f[1].fract() != 0.0 {
            return Err(Error::parse(off, "layer and contour indices must be non-negative integers"));
        }
        rows.push((f[0] as usize, f[1] as usize, f[2], Point2::new(f[3], f[4])));
    }
    let h = layer_height.ok_or_else(|| Error::parse(0, "missing `# layer_height` line"))?;
    let mut layers: Vec<Layer> = Vec::new();
    let mut current: Option<(usize, usize, f64, Vec<Point2>)> = None;
    let flush = |layers: &mut Vec<Layer>, cur: (usize, usize, f64, Vec<Point2>)| -> Result<()> {
        let (li, _, z, pts) = cur;
        let c = Contour2::new(z, pts)?;
        if li < layers.len() {
            layers[li].contours.push(c);
        } else if li == layers.len() {
            layers.push(Layer { z, contours: vec![c] });
        } else {
            return Err(Error::parse(0, format!("layer {li} out of order")));
        }
        Ok(())
    };
    for (li, ci, z, p) in rows {
        match &mut current {
            Some((l, c, _, pts)) if *l == li && *c == ci => pts.push(p),
            _ => {
                if let Some(cur) = current.take() {
                    flush(&mut layers, cur)?;
                }
                current = Some((li, ci, z, vec![p]));
            }
        }
    }
    if let Some(cur) = current.take() {
        flush(&mut layers, cur)?;
    }
    LayerStack::new(h, layers)
}

pub fn read_layers(path: impl AsRef<Path>) -> Result<LayerStack> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_layers(&text).map_err(|e| e.in_file(path))
}

pub fn parse_polyline(text: &str) -> Result<Polyline3> {
    let mut pts = Vec::new();
    for (off, line) in lines(text) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f = fields(line, off, 3)?;
        pts.push(Point3::new(f[0], f[1], f[2]));
    }
    Polyline3::new(pts, false)
}

pub fn read_polyline(path: impl AsRef<Path>) -> Result<Polyline3> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_polyline(&text).map_err(|e| e.in_file(path))
}
