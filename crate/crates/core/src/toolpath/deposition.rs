use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::segments::{segment_box_distance, ExtrudedSegments};
use super::{PrintConfig, Toolpath};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::par::Exec;

/// Deposition state of one covered cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CellState {
    /// Number of distinct passes over the cell. Consecutive segments of one
    /// bead count once.
    pub count: u32,
    pub over_deposited: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DepositionMetrics {
    pub covered_cells: usize,
    /// Cells in the grid footprint.
    pub total_cells: usize,
    pub coverage_fraction: f64,
    pub max_count: u32,
    pub over_deposited_cells: usize,
    /// Over-deposited share of the covered cells.
    pub over_deposited_fraction: f64,
}

impl DepositionMetrics {
    fn from_cells<'a>(cells: impl Iterator<Item = &'a CellState>, total_cells: usize) -> Self {
        let mut m = DepositionMetrics {
            total_cells,
            ..Default::default()
        };
        for c in cells {
            m.covered_cells += 1;
            m.max_count = m.max_count.max(c.count);
            m.over_deposited_cells += c.over_deposited as usize;
        }
        m.coverage_fraction = ratio(m.covered_cells, m.total_cells);
        m.over_deposited_fraction = ratio(m.over_deposited_cells, m.covered_cells);
        m
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Covered cells of one layer, keyed by (column, row) in the shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrid {
    pub index: usize,
    pub z: f64,
    pub cells: BTreeMap<(usize, usize), CellState>,
    pub metrics: DepositionMetrics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepositionGrid {
    pub cell_size: f64,
    /// Lower-left corner of cell (0, 0).
    pub origin: Point2,
    pub columns: usize,
    pub rows: usize,
    pub layers: Vec<LayerGrid>,
    pub metrics: DepositionMetrics,
}

impl DepositionGrid {
    pub fn cell_center(&self, col: usize, row: usize) -> Point2 {
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * self.cell_size,
            self.origin.y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn cell_at(&self, layer: usize, p: Point2) -> Option<CellState> {
        let c = ((p.x - self.origin.x) / self.cell_size).floor();
        let r = ((p.y - self.origin.y) / self.cell_size).floor();
        if c < 0.0 || r < 0.0 {
            return None;
        }
        self.layers
            .get(layer)?
            .cells
            .get(&(c as usize, r as usize))
            .copied()
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, label: &str, m: &DepositionMetrics| {
            let _ = writeln!(
                out,
                "{label} covered={} coverage={:.6} max_count={} over_deposited={} over_fraction={:.6}",
                m.covered_cells,
                m.coverage_fraction,
                m.max_count,
                m.over_deposited_cells,
                m.over_deposited_fraction
            );
        };
        let _ = writeln!(
            out,
            "deposition grid: cell {} mm, {} x {} cells, {} layers",
            self.cell_size,
            self.columns,
            self.rows,
            self.layers.len()
        );
        line(&mut out, "global", &self.metrics);
        for l in &self.layers {
            line(&mut out, &format!("layer {} z={:.4}", l.index, l.z), &l.metrics);
        }
        out
    }
}

pub fn simulate_deposition(
    toolpath: &Toolpath,
    config: &PrintConfig,
    cell_size: f64,
) -> Result<DepositionGrid> {
    simulate_deposition_with(toolpath, config, cell_size, Exec::default())
}

/// Rasterize every extruding segment's stadium footprint (width w) into the
/// grid of its layer. A cell is touched when the centerline passes within
/// w/2 of any part of it. A cell is over-deposited when two passes touching
/// it collide in the sense of [`super::detect_overdeposition`].
pub fn simulate_deposition_with(
    toolpath: &Toolpath,
    config: &PrintConfig,
    cell_size: f64,
    exec: Exec,
) -> Result<DepositionGrid> {
    let w = toolpath.bead_width();
    if !(cell_size > 0.0) || cell_size > 0.25 * w + 1e-12 {
        return Err(Error::param(
            "cell_size",
            format!("must lie in (0, w/4 = {}]", 0.25 * w),
        ));
    }
    let segs = ExtrudedSegments::new(toolpath, config);
    if segs.is_empty() {
        return Ok(DepositionGrid {
            cell_size,
            origin: Point2::new(0.0, 0.0),
            columns: 0,
            rows: 0,
            layers: Vec::new(),
            metrics: DepositionMetrics::default(),
        });
    }
    let half = 0.5 * w;
    let (mut lo, mut hi) = (
        Point2::new(f64::INFINITY, f64::INFINITY),
        Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for s in &segs.segs {
        for p in [s.a, s.b] {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    let origin = Point2::new(lo.x - half, lo.y - half);
    let columns = (((hi.x + half) - origin.x) / cell_size).ceil().max(1.0) as usize;
    let rows = (((hi.y + half) - origin.y) / cell_size).ceil().max(1.0) as usize;

    let h = segs.bead_height;
    let z0 = segs
        .segs
        .iter()
        .map(|s| s.z_mid())
        .fold(f64::INFINITY, f64::min);
    let bin = |z: f64| ((z - z0) / h).round() as usize;

    let touched: Vec<Vec<(usize, usize)>> = exec.map_range(segs.len(), |i| {
        let s = &segs.segs[i];
        let (a, b) = (s.a.xy(), s.b.xy());
        let span = |u: f64, v: f64, o: f64, n: usize| {
            let first = ((u.min(v) - half - o) / cell_size).floor().max(0.0) as usize;
            let last = (((u.max(v) + half - o) / cell_size).floor().max(0.0) as usize).min(n - 1);
            first..=last
        };
        let mut out = Vec::new();
        for c in span(a.x, b.x, origin.x, columns) {
            for r in span(a.y, b.y, origin.y, rows) {
                let clo = Point2::new(
                    origin.x + c as f64 * cell_size,
                    origin.y + r as f64 * cell_size,
                );
                let chi = Point2::new(clo.x + cell_size, clo.y + cell_size);
                if segment_box_distance(a, b, clo, chi) < half {
                    out.push((c, r));
                }
            }
        }
        out
    });

    let mut bins: BTreeMap<usize, HashMap<(usize, usize), Vec<usize>>> = BTreeMap::new();
    for (i, cells) in touched.iter().enumerate() {
        let layer = bins.entry(bin(segs.segs[i].z_mid())).or_default();
        for &cell in cells {
            layer.entry(cell).or_default().push(i);
        }
    }

    let keys: Vec<usize> = bins.keys().copied().collect();
    let layers: Vec<LayerGrid> = exec.map(&keys, |&k| {
        let here = &bins[&k];
        let mut cells = BTreeMap::new();
        for (&cell, ids) in here {
            let count = pass_count(&segs, ids);
            let mut others: Vec<usize> = Vec::new();
            for nb in [k.checked_sub(1), Some(k), Some(k + 1)].into_iter().flatten() {
                if let Some(v) = bins.get(&nb).and_then(|m| m.get(&cell)) {
                    others.extend(v);
                }
            }
            let over = ids
                .iter()
                .any(|&i| others.iter().any(|&j| segs.collides(i, j)));
            cells.insert(
                cell,
                CellState {
                    count,
                    over_deposited: over,
                },
            );
        }
        let metrics = DepositionMetrics::from_cells(cells.values(), columns * rows);
        LayerGrid {
            index: 0,
            z: z0 + k as f64 * h,
            cells,
            metrics,
        }
    });
    let mut layers = layers;
    for (n, l) in layers.iter_mut().enumerate() {
        l.index = n;
    }
    let metrics = DepositionMetrics::from_cells(
        layers.iter().flat_map(|l| l.cells.values()),
        columns * rows * layers.len(),
    );
    Ok(DepositionGrid {
        cell_size,
        origin,
        columns,
        rows,
        layers,
        metrics,
    })
}

/// Segments merged under the path-neighbour relation; one group per pass.
fn pass_count(segs: &ExtrudedSegments, ids: &[usize]) -> u32 {
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for a in 0..ids.len() {
        for b in a + 1..ids.len() {
            if segs.path_neighbours(ids[a], ids[b]) {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    (0..ids.len()).filter(|&x| root(&mut parent, x) == x).count() as u32
}
