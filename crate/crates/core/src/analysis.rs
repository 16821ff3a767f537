//! Voronoi density, mean speed and fundamental diagrams.

use crate::error::{Error, Result};
use crate::floorfield::GridField;
use crate::geometry::{Point, Rect};
use crate::ingest::TrajectorySet;
use crate::scenario::Scenario;
use rayon::prelude::*;
use std::fmt::Write as _;

pub const DEFAULT_VORONOI_CELL: f64 = 0.05;
/// How far the Voronoi grid reaches beyond a measurement area.
pub const REGION_MARGIN: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySpeedPoint {
    pub frame: i64,
    pub area_id: usize,
    pub density: f64,
    pub speed: f64,
}

/// Fine grid on which Voronoi cells are rasterized. Cells whose center is
/// not walkable belong to nobody.
#[derive(Debug, Clone)]
pub struct VoronoiGrid {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    walkable: Vec<bool>,
}

impl VoronoiGrid {
    /// Every cell of `region` is walkable.
    pub fn rect(region: Rect, h: f64) -> Result<Self> {
        Self::masked(region, h, |_| true)
    }

    /// Cells of `region` restricted to the scenario's walkable space.
    pub fn for_scenario(scenario: &Scenario, region: Rect, h: f64) -> Result<Self> {
        Self::masked(region, h, |p| scenario.is_walkable(p))
    }

    /// Grid around a measurement area, extended by [`REGION_MARGIN`].
    pub fn around(scenario: &Scenario, area: Rect, h: f64) -> Result<Self> {
        Self::for_scenario(scenario, area.expand(REGION_MARGIN), h)
    }

    fn masked(region: Rect, h: f64, walkable: impl Fn(Point) -> bool) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::validation("Voronoi cell size must be positive"));
        }
        let nx = ((region.width() / h) - 1e-9).ceil().max(1.0) as usize;
        let ny = ((region.height() / h) - 1e-9).ceil().max(1.0) as usize;
        let mut g = VoronoiGrid {
            x0: region.min.x,
            y0: region.min.y,
            h,
            nx,
            ny,
            walkable: Vec::with_capacity(nx * ny),
        };
        for j in 0..ny {
            for i in 0..nx {
                let c = g.center(i, j);
                g.walkable.push(walkable(c));
            }
        }
        Ok(g)
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.x0 + (i as f64 + 0.5) * self.h,
            self.y0 + (j as f64 + 0.5) * self.h,
        )
    }

    /// Nearest pedestrian of each walkable cell.
    pub fn owners(&self, positions: &[Point]) -> Vec<Option<usize>> {
        let buckets = Buckets::new(positions, 1.0);
        (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .map(|(i, j)| {
                if self.walkable[j * self.nx + i] {
                    buckets.nearest(self.center(i, j))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Voronoi cell area of every pedestrian.
    fn cell_areas(&self, owners: &[Option<usize>], n: usize) -> Vec<f64> {
        let mut counts = vec![0usize; n];
        for o in owners.iter().flatten() {
            counts[*o] += 1;
        }
        counts.iter().map(|&c| c as f64 * self.h * self.h).collect()
    }

    /// Mean of `1/|V|` over the cells of `area`.
    pub fn density(&self, positions: &[Point], area: &Rect) -> Result<f64> {
        if positions.is_empty() {
            return Err(Error::validation("undefined density: no pedestrians"));
        }
        let owners = self.owners(positions);
        let areas = self.cell_areas(&owners, positions.len());
        let cell = self.h * self.h;
        let mut sum = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if let Some(o) = owners[j * self.nx + i] {
                    if area.contains(self.center(i, j)) {
                        sum += cell / areas[o];
                    }
                }
            }
        }
        Ok(sum / area.area())
    }

    /// Per-cell Voronoi density `1/|V_owner|`; zero where nobody owns the cell.
    pub fn density_field(&self, positions: &[Point]) -> GridField {
        let mut f = GridField::new(self.x0, self.y0, self.h, self.nx, self.ny, 0.0);
        if positions.is_empty() {
            return f;
        }
        let owners = self.owners(positions);
        let areas = self.cell_areas(&owners, positions.len());
        for (v, o) in f.values.iter_mut().zip(&owners) {
            if let Some(o) = o {
                *v = 1.0 / areas[*o];
            }
        }
        f
    }
}

/// Pedestrians hashed on a coarse grid for nearest-neighbor queries.
struct Buckets<'a> {
    pts: &'a [Point],
    origin: Point,
    s: f64,
    nx: i64,
    ny: i64,
    cells: Vec<Vec<usize>>,
}

impl<'a> Buckets<'a> {
    fn new(pts: &'a [Point], s: f64) -> Self {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if pts.is_empty() {
            lo = Point::default();
            hi = Point::default();
        }
        let nx = ((hi.x - lo.x) / s).floor() as i64 + 1;
        let ny = ((hi.y - lo.y) / s).floor() as i64 + 1;
        let mut cells = vec![Vec::new(); (nx * ny) as usize];
        let mut b = Buckets {
            pts,
            origin: lo,
            s,
            nx,
            ny,
            cells: Vec::new(),
        };
        for (k, p) in pts.iter().enumerate() {
            let (i, j) = b.cell(*p);
            cells[(j * nx + i) as usize].push(k);
        }
        b.cells = cells;
        b
    }

    fn cell(&self, p: Point) -> (i64, i64) {
        let i = ((p.x - self.origin.x) / self.s).floor() as i64;
        let j = ((p.y - self.origin.y) / self.s).floor() as i64;
        (i, j)
    }

    /// Nearest point; ties go to the lowest index.
    fn nearest(&self, q: Point) -> Option<usize> {
        if self.pts.is_empty() {
            return None;
        }
        let (ci, cj) = self.cell(q);
        let mut best: Option<(f64, usize)> = None;
        let max_ring = self.nx.max(self.ny) + (ci.abs().max(cj.abs()));
        for ring in 0..=max_ring {
            for j in (cj - ring)..=(cj + ring) {
                for i in (ci - ring)..=(ci + ring) {
                    if (i - ci).abs() != ring && (j - cj).abs() != ring {
                        continue;
                    }
                    if i < 0 || j < 0 || i >= self.nx || j >= self.ny {
                        continue;
                    }
                    for &k in &self.cells[(j * self.nx + i) as usize] {
                        let d = self.pts[k].dist2(q);
                        let better = match best {
                            None => true,
                            Some((bd, bk)) => d < bd || (d == bd && k < bk),
                        };
                        if better {
                            best = Some((d, k));
                        }
                    }
                }
            }
            // Anything in rings further out is at least `ring * s` away.
            if let Some((bd, _)) = best {
                let bound = ring as f64 * self.s;
                if bd < bound * bound {
                    break;
                }
            }
        }
        best.map(|(_, k)| k)
    }
}

fn in_area(set: &TrajectorySet, frame: i64, area: &Rect) -> Vec<u64> {
    set.pedestrians
        .iter()
        .filter(|(_, t)| t.position_at(frame).is_some_and(|p| area.contains(p)))
        .map(|(id, _)| *id)
        .collect()
}

/// Mean speed of the pedestrians inside `area` at `frame`, by central
/// differences over one frame (one-sided at trajectory ends).
pub fn mean_speed(set: &TrajectorySet, frame: i64, area: &Rect) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for id in in_area(set, frame, area) {
        let t = &set.pedestrians[&id];
        let here = t.position_at(frame)?;
        let prev = t.position_at(frame - 1);
        let next = t.position_at(frame + 1);
        let v = match (prev, next) {
            (Some(a), Some(b)) => a.dist(b) * set.fps / 2.0,
            (None, Some(b)) => here.dist(b) * set.fps,
            (Some(a), None) => a.dist(here) * set.fps,
            (None, None) => continue,
        };
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn positions_at(set: &TrajectorySet, frame: i64) -> Vec<Point> {
    set.pedestrians
        .values()
        .filter_map(|t| t.position_at(frame))
        .collect()
}

/// Density and speed in `area` for every frame where both are defined.
pub fn fundamental_diagram(
    set: &TrajectorySet,
    grid: &VoronoiGrid,
    area: &Rect,
    area_id: usize,
) -> Vec<DensitySpeedPoint> {
    let Some((f0, f1)) = set.frame_range() else {
        return Vec::new();
    };
    let frames: Vec<i64> = (f0..=f1).collect();
    frames
        .par_iter()
        .filter_map(|&frame| {
            let speed = mean_speed(set, frame, area)?;
            let density = grid.density(&positions_at(set, frame), area).ok()?;
            Some(DensitySpeedPoint {
                frame,
                area_id,
                density,
                speed,
            })
        })
        .collect()
}

pub fn fd_to_csv(points: &[DensitySpeedPoint]) -> String {
    let mut out = String::from("frame,area_id,density,speed\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.frame, p.area_id, p.density, p.speed);
    }
    out
}

#[derive(Debug, Clone)]
pub struct AverageMap {
    pub field: GridField,
    /// Frames with at least one pedestrian; zero means the map is all zeros.
    pub frames: usize,
}

/// Per-cell Voronoi density averaged over the frames with pedestrians.
pub fn average_voronoi_map(set: &TrajectorySet, grid: &VoronoiGrid) -> AverageMap {
    let mut acc = GridField::new(grid.x0, grid.y0, grid.h, grid.nx, grid.ny, 0.0);
    let mut frames = 0usize;
    if let Some((f0, f1)) = set.frame_range() {
        for frame in f0..=f1 {
            let pos = positions_at(set, frame);
            if pos.is_empty() {
                continue;
            }
            let f = grid.density_field(&pos);
            for (a, v) in acc.values.iter_mut().zip(&f.values) {
                *a += v;
            }
            frames += 1;
        }
    }
    if frames > 0 {
        for a in &mut acc.values {
            *a /= frames as f64;
        }
    }
    AverageMap { field: acc, frames }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

/// Spearman rank correlation with average ranks for ties; `None` when
/// fewer than two points or either variable is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    pearson(&ranks(a), &ranks(b))
}
