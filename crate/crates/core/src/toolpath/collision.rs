use std::collections::{BTreeMap, HashMap, HashSet};

use super::segments::ExtrudedSegments;
use super::{PrintConfig, Toolpath};
use crate::par::Exec;

/// One over-deposition site: a connected cluster of colliding segment pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionEvent {
    /// Height of the earlier pass at the closest pair.
    pub layer_z: f64,
    /// Move indices of the closest colliding pair, earlier move first.
    pub segments: (usize, usize),
    pub min_distance: f64,
    /// Centerline length of the earlier passes lying inside the collision
    /// distance of the later ones.
    pub overlap_length: f64,
    pub pair_count: usize,
}

/// Same-layer footprint overlaps between passes that are not neighbours
/// along one bead. See [`ExtrudedSegments::collides`] for the pair rule.
pub fn detect_overdeposition(toolpath: &Toolpath, config: &PrintConfig) -> Vec<CollisionEvent> {
    detect_overdeposition_with(toolpath, config, Exec::default())
}

pub fn detect_overdeposition_with(
    toolpath: &Toolpath,
    config: &PrintConfig,
    exec: Exec,
) -> Vec<CollisionEvent> {
    let segs = ExtrudedSegments::new(toolpath, config);
    let pairs = colliding_pairs(&segs, exec);
    cluster(&segs, &pairs)
}

pub(crate) fn colliding_pairs(segs: &ExtrudedSegments, exec: Exec) -> Vec<(usize, usize)> {
    if segs.is_empty() {
        return Vec::new();
    }
    let cell = segs.bead_width;
    let pad = 0.5 * segs.threshold;
    let span = |i: usize| {
        let s = &segs.segs[i];
        let (x0, x1) = (s.a.x.min(s.b.x) - pad, s.a.x.max(s.b.x) + pad);
        let (y0, y1) = (s.a.y.min(s.b.y) - pad, s.a.y.max(s.b.y) + pad);
        (
            (x0 / cell).floor() as i64,
            (x1 / cell).floor() as i64,
            (y0 / cell).floor() as i64,
            (y1 / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..segs.len() {
        let (x0, x1, y0, y1) = span(i);
        for ix in x0..=x1 {
            for iy in y0..=y1 {
                grid.entry((ix, iy)).or_default().push(i);
            }
        }
    }
    let per_segment = exec.map_range(segs.len(), |i| {
        let (x0, x1, y0, y1) = span(i);
        let mut cands: Vec<usize> = Vec::new();
        for ix in x0..=x1 {
            for iy in y0..=y1 {
                if let Some(ids) = grid.get(&(ix, iy)) {
                    cands.extend(ids.iter().copied().filter(|&j| j > i));
                }
            }
        }
        cands.sort_unstable();
        cands.dedup();
        cands
            .into_iter()
            .filter(|&j| segs.collides(i, j))
            .map(|j| (i, j))
            .collect::<Vec<_>>()
    });
    per_segment.into_iter().flatten().collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn cluster(segs: &ExtrudedSegments, pairs: &[(usize, usize)]) -> Vec<CollisionEvent> {
    let index: HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut parent: Vec<usize> = (0..pairs.len()).collect();
    let around = |i: usize| {
        let [p, n] = segs.adjacent(i);
        [Some(i), p, n]
    };
    for (k, &(i, j)) in pairs.iter().enumerate() {
        for ni in around(i).into_iter().flatten() {
            for nj in around(j).into_iter().flatten() {
                let key = (ni.min(nj), ni.max(nj));
                if let Some(&other) = index.get(&key) {
                    let (a, b) = (find(&mut parent, k), find(&mut parent, other));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..pairs.len() {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(k);
    }
    groups
        .into_values()
        .map(|members| {
            let mut best = (f64::INFINITY, (0, 0));
            for &k in &members {
                let (i, j) = pairs[k];
                let d = segs.exposed_distance(i, j);
                if d < best.0 {
                    best = (d, (i, j));
                }
            }
            let (i, j) = best.1;
            CollisionEvent {
                layer_z: segs.segs[i].z_mid(),
                segments: (segs.segs[i].move_index, segs.segs[j].move_index),
                min_distance: best.0,
                overlap_length: overlap_length(segs, members.iter().map(|&k| pairs[k])),
                pair_count: members.len(),
            }
        })
        .collect()
}

/// Union, per earlier segment, of the sub-intervals within the collision
/// distance of its partners.
fn overlap_length(
    segs: &ExtrudedSegments,
    pairs: impl Iterator<Item = (usize, usize)>,
) -> f64 {
    let mut per_seg: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for (i, j) in pairs {
        if !seen.insert((i, j)) {
            continue;
        }
        if let Some(iv) = segs.close_interval(i, j) {
            per_seg.entry(i).or_default().push(iv);
        }
    }
    per_seg
        .into_iter()
        .map(|(i, mut ivs)| {
            ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut covered = 0.0;
            let mut cur: Option<(f64, f64)> = None;
            for (a, b) in ivs {
                cur = match cur {
                    Some((c0, c1)) if a <= c1 => Some((c0, c1.max(b))),
                    Some((c0, c1)) => {
                        covered += c1 - c0;
                        Some((a, b))
                    }
                    None => Some((a, b)),
                };
            }
            if let Some((c0, c1)) = cur {
                covered += c1 - c0;
            }
            covered * segs.segs[i].len()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point3, Polyline3};
    use crate::toolpath::{plan_toolpath, Move};
    use std::f64::consts::TAU;

    fn cfg() -> PrintConfig {
        PrintConfig::new(50.0, 100.0, 10.0, 10.0)
    }

    fn line(a: (f64, f64), b: (f64, f64)) -> Polyline3 {
        Polyline3::new(
            vec![Point3::new(a.0, a.1, 10.0), Point3::new(b.0, b.1, 10.0)],
            false,
        )
        .unwrap()
    }

    #[test]
    fn parallel_lines_two_widths_apart_are_clean() {
        let tp = plan_toolpath(&[line((0., 0.), (100., 0.)), line((0., 20.), (100., 20.))], &cfg())
            .unwrap();
        assert!(detect_overdeposition(&tp, &cfg()).is_empty());
    }

    #[test]
    fn retraced_segment_is_one_event_of_full_length() {
        let tp = plan_toolpath(&[line((0., 0.), (100., 0.)), line((0., 0.), (100., 0.))], &cfg())
            .unwrap();
        let ev = detect_overdeposition(&tp, &cfg());
        assert_eq!(ev.len(), 1);
        assert!((ev[0].overlap_length - 100.0).abs() < 1e-6);
        assert_eq!(ev[0].min_distance, 0.0);
    }

    #[test]
    fn different_layers_never_collide() {
        let upper = Polyline3::new(
            vec![Point3::new(0., 0., 20.0), Point3::new(100., 0., 20.0)],
            false,
        )
        .unwrap();
        let tp = plan_toolpath(&[line((0., 0.), (100., 0.)), upper], &cfg()).unwrap();
        assert!(detect_overdeposition(&tp, &cfg()).is_empty());
    }

    #[test]
    fn finely_sampled_circle_is_clean() {
        let pts = (0..720)
            .map(|k| {
                let t = TAU * k as f64 / 720.0;
                Point3::new(100.0 * t.cos(), 100.0 * t.sin(), 10.0)
            })
            .collect();
        let tp = plan_toolpath(&[Polyline3::new(pts, true).unwrap()], &cfg()).unwrap();
        assert!(detect_overdeposition(&tp, &cfg()).is_empty());
    }

    #[test]
    fn hairpin_tighter_than_a_bead_collides() {
        // legs 5 mm apart with a 5 mm cap: the return leg lands on the first
        let c = cfg();
        let tp = crate::toolpath::Toolpath::new(
            Point3::new(0., 0., 10.),
            vec![
                Move { target: Point3::new(100., 0., 10.), feed: 50.0, extruding: true },
                Move { target: Point3::new(100., 5., 10.), feed: 50.0, extruding: true },
                Move { target: Point3::new(0., 5., 10.), feed: 50.0, extruding: true },
            ],
            &c,
        )
        .unwrap();
        let ev = detect_overdeposition(&tp, &c);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].segments, (0, 2));
    }

    fn figure_eight(n: usize) -> Toolpath {
        let pts = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                Point3::new(100.0 * t.sin(), 60.0 * (2.0 * t).sin(), 10.0)
            })
            .collect();
        plan_toolpath(&[Polyline3::new(pts, true).unwrap()], &cfg()).unwrap()
    }

    #[test]
    fn figure_eight_crosses_once() {
        for n in [64, 360, 1000] {
            let ev = detect_overdeposition(&figure_eight(n), &cfg());
            assert_eq!(ev.len(), 1, "n = {n}");
            assert!(ev[0].min_distance < 1e-9);
            let (a, b) = ev[0].segments;
            let tp = figure_eight(n);
            let mid = |k: usize| tp.move_start(k).lerp(tp.moves()[k].target, 0.5);
            assert!(mid(a).xy().norm() < 10.0 && mid(b).xy().norm() < 10.0);
        }
    }

    #[test]
    fn events_imply_over_deposited_cells() {
        let tp = figure_eight(360);
        let g = crate::toolpath::simulate_deposition(&tp, &cfg(), 1.25).unwrap();
        let ev = detect_overdeposition(&tp, &cfg());
        assert!(g.metrics.over_deposited_cells > 0);
        assert!(g.layers.iter().all(|l| {
            l.cells.values().all(|c| !c.over_deposited)
                || ev.iter().any(|e| (e.layer_z - l.z).abs() < 5.0)
        }));
    }

    #[test]
    fn strategies_agree() {
        let pts: Vec<_> = (0..400)
            .map(|k| {
                let t = TAU * k as f64 / 400.0;
                Point3::new(100.0 * t.cos(), 50.0 * (2.0 * t).sin(), 10.0)
            })
            .collect();
        let tp = plan_toolpath(&[Polyline3::new(pts, true).unwrap()], &cfg()).unwrap();
        assert_eq!(
            detect_overdeposition_with(&tp, &cfg(), Exec::Sequential),
            detect_overdeposition_with(&tp, &cfg(), Exec::Parallel)
        );
    }
}
