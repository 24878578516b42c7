use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::Toolpath;
use crate::error::{Error, Result};
use crate::geometry::Point3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// 1 while extruding, 0 during travel.
    pub state: u8,
}

impl EventRow {
    pub fn position(&self) -> Point3 {
        Point3::new(self.x, self.y, self.z)
    }

    pub fn extruding(&self) -> bool {
        self.state == 1
    }
}

/// Time-stamped nozzle states, strictly increasing in time.
#[derive(Clone, Debug, PartialEq)]
pub struct EventSeries {
    rows: Vec<EventRow>,
    /// Marks rows taken at move boundaries; they win when rounding merges
    /// two rows in the text form.
    boundary: Vec<bool>,
}

impl EventSeries {
    pub fn new(rows: Vec<EventRow>) -> Result<Self> {
        for (k, r) in rows.iter().enumerate() {
            if ![r.t, r.x, r.y, r.z].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidGeometry(format!("event row {k} is not finite")));
            }
            if r.state > 1 {
                return Err(Error::InvalidGeometry(format!("event row {k} has state {}", r.state)));
            }
            if k > 0 && r.t <= rows[k - 1].t {
                return Err(Error::InvalidGeometry(format!(
                    "event row {k} does not advance in time"
                )));
            }
        }
        let boundary = vec![false; rows.len()];
        Ok(EventSeries { rows, boundary })
    }

    pub fn rows(&self) -> &[EventRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV `time,x,y,z,state` with `%.6g` fields. Rows whose rounded times
    /// coincide are merged, keeping a move-boundary row over a sample.
    pub fn to_csv(&self) -> String {
        let mut kept: Vec<(String, usize)> = Vec::with_capacity(self.rows.len());
        for (k, r) in self.rows.iter().enumerate() {
            let t = format_g6(r.t);
            match kept.last_mut() {
                Some((prev, j)) if *prev == t => {
                    if self.boundary[k] && !self.boundary[*j] {
                        *j = k;
                    }
                }
                _ => kept.push((t, k)),
            }
        }
        let mut out = String::new();
        for (t, k) in kept {
            let r = &self.rows[k];
            let _ = writeln!(
                out,
                "{t},{},{},{},{}",
                format_g6(r.x),
                format_g6(r.y),
                format_g6(r.z),
                r.state
            );
        }
        out
    }
}

/// Rows at `0, Δ, 2Δ, …` and at every move boundary. Each row carries the
/// state of the move starting there; the last row that of the final move.
pub fn event_series(toolpath: &Toolpath, sample_interval: f64) -> Result<EventSeries> {
    if !(sample_interval > 0.0) || !sample_interval.is_finite() {
        return Err(Error::param("sample_interval", "must be positive"));
    }
    let times = toolpath.times();
    let total = toolpath.total_time();
    let near = |t: f64, b: f64| (t - b).abs() <= 1e-9 * t.abs().max(1.0);
    let mut stamps: Vec<(f64, bool)> = times.iter().map(|&t| (t, true)).collect();
    let mut k = 1u64;
    loop {
        let t = k as f64 * sample_interval;
        if t >= total || near(t, total) {
            break;
        }
        let i = times.partition_point(|&b| b < t);
        let clash = (i < times.len() && near(t, times[i])) || (i > 0 && near(t, times[i - 1]));
        if !clash {
            stamps.push((t, false));
        }
        k += 1;
    }
    stamps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let moves = toolpath.moves();
    let (rows, boundary) = stamps
        .into_iter()
        .map(|(t, b)| {
            let m = toolpath.move_at(t);
            let p = toolpath.position_at(t);
            let row = EventRow {
                t,
                x: p.x,
                y: p.y,
                z: p.z,
                state: moves[m].extruding as u8,
            };
            (row, b)
        })
        .unzip();
    Ok(EventSeries { rows, boundary })
}

pub fn export_event_series(
    toolpath: &Toolpath,
    sample_interval: f64,
    path: &Path,
) -> Result<EventSeries> {
    let series = event_series(toolpath, sample_interval)?;
    fs::write(path, series.to_csv()).map_err(|e| Error::from(e).in_file(path))?;
    Ok(series)
}

pub fn parse_event_series(text: &str) -> Result<EventSeries> {
    let mut rows = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let here = offset;
        offset += line.len();
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                here,
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .parse()
                .map_err(|_| Error::parse(here, format!("bad number {f:?}")))?;
        }
        let state = match fields[4] {
            "0" => 0,
            "1" => 1,
            s => return Err(Error::parse(here, format!("bad state {s:?}"))),
        };
        if let Some(prev) = rows.last() {
            let prev: &EventRow = prev;
            if v[0] <= prev.t {
                return Err(Error::parse(here, "time does not increase"));
            }
        }
        rows.push(EventRow {
            t: v[0],
            x: v[1],
            y: v[2],
            z: v[3],
            state,
        });
    }
    EventSeries::new(rows)
}

pub fn read_event_series(path: &Path) -> Result<EventSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_event_series(&text).map_err(|e| e.in_file(path))
}

/// C `%.6g`.
pub fn format_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..6).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
