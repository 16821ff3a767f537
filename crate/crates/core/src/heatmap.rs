//! Density heatmaps over the observation area and dataset curation.

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::ingest::{Origin, Source, TrajectorySet};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

pub const DEFAULT_SIGMA: f64 = 0.7;
pub const DEFAULT_CELL: f64 = 0.1;
pub const DATASET_FORMAT: &str = "heatmap-dataset v1";
const DUPLICATE_TOL: f64 = 1e-12;

/// Grid layout shared by every sample of a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub area: Rect,
}

impl GridMeta {
    /// Cells of size `h` tiling `area`; a partial last cell is rounded.
    pub fn for_area(area: Rect, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::validation("cell size must be positive"));
        }
        let nx = (area.width() / h).round() as usize;
        let ny = (area.height() / h).round() as usize;
        if nx == 0 || ny == 0 {
            return Err(Error::validation(format!(
                "observation area {}x{} m has no cells of size {h}",
                area.width(),
                area.height()
            )));
        }
        Ok(GridMeta { nx, ny, h, area })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.area.min.x + (i as f64 + 0.5) * self.h,
            self.area.min.y + (j as f64 + 0.5) * self.h,
        )
    }

    /// Same feature layout; the area may sit elsewhere.
    pub fn compatible(&self, o: &GridMeta) -> bool {
        self.nx == o.nx
            && self.ny == o.ny
            && (self.h - o.h).abs() < 1e-12
            && (self.area.width() - o.area.width()).abs() < 1e-9
            && (self.area.height() - o.area.height()).abs() < 1e-9
    }

    /// Compatible and at the same place.
    pub fn same_grid(&self, o: &GridMeta) -> bool {
        self.compatible(o) && self.area.min.dist(o.area.min) < 1e-9
    }

    /// `# heatmap-dataset v1 nx=.. ny=.. h=.. area=x0,y0,w,h`
    pub fn header(&self) -> String {
        format!(
            "# {DATASET_FORMAT} nx={} ny={} h={} area={},{},{},{}",
            self.nx,
            self.ny,
            self.h,
            self.area.min.x,
            self.area.min.y,
            self.area.width(),
            self.area.height()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapSample {
    pub run_name: String,
    pub frame: i64,
    pub source: Source,
    pub n_left: u32,
    pub n_right: u32,
    /// Row-major, `ny` rows of `nx` cells, row 0 at the lowest y.
    pub values: Vec<f64>,
}

impl HeatmapSample {
    pub fn frac_left(&self) -> f64 {
        self.n_left as f64 / (self.n_left + self.n_right) as f64
    }

    pub fn frac_right(&self) -> f64 {
        self.n_right as f64 / (self.n_left + self.n_right) as f64
    }

    pub fn is_equal_split(&self) -> bool {
        self.n_left == self.n_right
    }

    /// Label as a reduced fraction `(left, right)`.
    pub fn reduced_label(&self) -> (u32, u32) {
        let g = gcd(self.n_left, self.n_right).max(1);
        (self.n_left / g, self.n_right / g)
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: GridMeta,
    pub samples: Vec<HeatmapSample>,
}

impl Dataset {
    pub fn new(meta: GridMeta) -> Self {
        Dataset {
            meta,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Appends another dataset built on the same grid.
    pub fn extend(&mut self, other: Dataset) -> Result<()> {
        if !self.meta.same_grid(&other.meta) {
            return Err(Error::validation(format!(
                "inconsistent grid: `{}` vs `{}`",
                self.meta.header(),
                other.meta.header()
            )));
        }
        self.samples.extend(other.samples);
        Ok(())
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            meta: self.meta,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = self.meta.header();
        out.push('\n');
        for s in &self.samples {
            if s.run_name.contains([',', '\n', '\r']) {
                return Err(Error::validation(format!(
                    "run name {:?} may not contain commas or line breaks",
                    s.run_name
                )));
            }
            let _ = write!(
                out,
                "{},{},{},{},{}",
                s.run_name,
                s.frame,
                s.source.tag(),
                s.n_left,
                s.n_right
            );
            for v in &s.values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Dataset> {
        let mut lines = reader.lines().enumerate();
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty dataset file"))?;
        let first = first.map_err(|e| Error::parse(1, e.to_string()))?;
        let meta = parse_header(&first)?;
        let mut ds = Dataset::new(meta);
        for (idx, line) in lines {
            let ln = idx + 1;
            let line = line.map_err(|e| Error::parse(ln, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            ds.samples.push(parse_row(&line, ln, meta.len())?);
        }
        Ok(ds)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Dataset> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Dataset::parse(std::io::BufReader::new(f)).map_err(|e| e.in_file(path))
    }
}

impl GridMeta {
    pub fn from_header(line: &str) -> Result<GridMeta> {
        parse_header(line)
    }
}

fn parse_header(line: &str) -> Result<GridMeta> {
    let bad = |m: &str| Error::parse(1, format!("bad dataset header: {m}"));
    let rest = line
        .strip_prefix("# ")
        .and_then(|r| r.strip_prefix(DATASET_FORMAT))
        .ok_or_else(|| bad(&format!("expected `# {DATASET_FORMAT} ...`")))?;
    let (mut nx, mut ny, mut h, mut area) = (None, None, None, None);
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| bad(tok))?;
        match k {
            "nx" => nx = v.parse::<usize>().ok(),
            "ny" => ny = v.parse::<usize>().ok(),
            "h" => h = v.parse::<f64>().ok(),
            "area" => {
                let p: Vec<f64> = v
                    .split(',')
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(tok))?;
                if p.len() != 4 {
                    return Err(bad(tok));
                }
                area = Some(Rect::from_origin_size(p[0], p[1], p[2], p[3]));
            }
            _ => return Err(bad(&format!("unknown key `{k}`"))),
        }
    }
    match (nx, ny, h, area) {
        (Some(nx), Some(ny), Some(h), Some(area)) => Ok(GridMeta { nx, ny, h, area }),
        _ => Err(bad("missing nx, ny, h or area")),
    }
}

fn parse_row(line: &str, ln: usize, cells: usize) -> Result<HeatmapSample> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 5 + cells {
        return Err(Error::parse(
            ln,
            format!("expected {} fields, found {}", 5 + cells, f.len()),
        ));
    }
    let num = |i: usize, what: &str| Error::parse(ln, format!("bad {what} `{}`", f[i]));
    let frame = f[1].parse().map_err(|_| num(1, "frame"))?;
    let source = Source::from_tag(f[2]).ok_or_else(|| num(2, "source"))?;
    let n_left: u32 = f[3].parse().map_err(|_| num(3, "n_left"))?;
    let n_right: u32 = f[4].parse().map_err(|_| num(4, "n_right"))?;
    if n_left + n_right == 0 {
        return Err(Error::parse(ln, "label has no pedestrians"));
    }
    let mut values = Vec::with_capacity(cells);
    for i in 5..f.len() {
        let v: f64 = f[i].parse().map_err(|_| num(i, "cell value"))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(num(i, "cell value"));
        }
        values.push(v);
    }
    Ok(HeatmapSample {
        run_name: f[0].to_string(),
        frame,
        source,
        n_left,
        n_right,
        values,
    })
}

/// Positions recorded at `frame`, as stored.
pub fn frame_positions(set: &TrajectorySet, frame: i64) -> Vec<(Point, Origin)> {
    set.pedestrians
        .values()
        .filter_map(|t| t.position_at(frame).map(|p| (p, t.origin)))
        .collect()
}

/// Truncated Gaussian kernel density at the cell centers of `meta`.
pub fn gaussian_heatmap(positions: &[Point], meta: &GridMeta, sigma: f64) -> Vec<f64> {
    let mut v = vec![0.0; meta.len()];
    let cut = 3.0 * sigma;
    let norm = 1.0 / (2.0 * PI * sigma * sigma);
    let reach = meta.area.expand(cut);
    let hh = meta.h;
    for &p in positions.iter().filter(|p| reach.contains(**p)) {
        let lo = |c: f64, o: f64, n: usize| (((c - cut - o) / hh - 0.5).ceil().max(0.0) as usize).min(n);
        let hi = |c: f64, o: f64, n: usize| {
            let k = ((c + cut - o) / hh - 0.5).floor();
            if k < 0.0 {
                0
            } else {
                (k as usize + 1).min(n)
            }
        };
        let (i0, i1) = (lo(p.x, meta.area.min.x, meta.nx), hi(p.x, meta.area.min.x, meta.nx));
        let (j0, j1) = (lo(p.y, meta.area.min.y, meta.ny), hi(p.y, meta.area.min.y, meta.ny));
        for j in j0..j1 {
            for i in i0..i1 {
                let d2 = meta.center(i, j).dist2(p);
                if d2 <= cut * cut {
                    v[j * meta.nx + i] += norm * (-d2 / (2.0 * sigma * sigma)).exp();
                }
            }
        }
    }
    v
}

/// Origin counts `(n_left, n_right)` inside `area`; `None` if nobody with a
/// known origin is there.
pub fn label_frame(positions: &[(Point, Origin)], area: &Rect) -> Option<(u32, u32)> {
    let (mut l, mut r) = (0u32, 0u32);
    for (p, o) in positions {
        if area.contains(*p) {
            match o {
                Origin::Left => l += 1,
                Origin::Right => r += 1,
                Origin::Unknown => {}
            }
        }
    }
    (l + r > 0).then_some((l, r))
}

/// One sample per labeled frame, taking every `stride`-th recorded frame
/// counted from the first one.
pub fn build_dataset(
    sets: &[TrajectorySet],
    meta: GridMeta,
    sigma: f64,
    stride: usize,
) -> Result<Dataset> {
    if !(sigma > 0.0) {
        return Err(Error::validation("sigma must be positive"));
    }
    if stride == 0 {
        return Err(Error::validation("frame stride must be at least 1"));
    }
    let mut ds = Dataset::new(meta);
    for set in sets {
        let Some((f0, f1)) = set.frame_range() else {
            continue;
        };
        let frames: Vec<i64> = (f0..=f1).step_by(stride).collect();
        let samples: Vec<HeatmapSample> = frames
            .par_iter()
            .filter_map(|&frame| {
                let pos = frame_positions(set, frame);
                let (n_left, n_right) = label_frame(&pos, &meta.area)?;
                let pts: Vec<Point> = pos.iter().map(|(p, _)| *p).collect();
                Some(HeatmapSample {
                    run_name: set.name.clone(),
                    frame,
                    source: set.source,
                    n_left,
                    n_right,
                    values: gaussian_heatmap(&pts, &meta, sigma),
                })
            })
            .collect();
        ds.samples.extend(samples);
    }
    Ok(ds)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Drops samples whose grid matches the previous retained sample of the
/// same run.
pub fn dedup_consecutive(ds: &Dataset) -> Dataset {
    let mut last: HashMap<&str, usize> = HashMap::new();
    let mut keep = Vec::new();
    for (i, s) in ds.samples.iter().enumerate() {
        let dup = last
            .get(s.run_name.as_str())
            .is_some_and(|&k| linf(&ds.samples[k].values, &s.values) <= DUPLICATE_TOL);
        if !dup {
            last.insert(&s.run_name, i);
            keep.push(i);
        }
    }
    ds.subset(&keep)
}

/// Largest count among labels other than the equal split.
pub fn default_equal_cap(ds: &Dataset) -> usize {
    distribution_report(ds)
        .into_iter()
        .filter(|r| r.label.0 != r.label.1)
        .map(|r| r.count)
        .max()
        .unwrap_or(0)
}

/// Thins the (0.5, 0.5) samples to `min(cap, n_equal)`, spread evenly over
/// their original order. Other samples are untouched.
pub fn rebalance_equal(ds: &Dataset, cap: usize) -> Dataset {
    let n = ds.samples.iter().filter(|s| s.is_equal_split()).count();
    if n <= cap {
        return ds.clone();
    }
    let mut seen = 0usize;
    let keep: Vec<usize> = ds
        .samples
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            if !s.is_equal_split() {
                return true;
            }
            let i = seen;
            seen += 1;
            (i + 1) * cap / n > i * cap / n
        })
        .map(|(i, _)| i)
        .collect();
    ds.subset(&keep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    /// Reduced fraction `(left, right)`.
    pub label: (u32, u32),
    pub frac_left: f64,
    pub frac_right: f64,
    pub count: usize,
}

/// Sample counts per label, ascending in the left fraction.
pub fn distribution_report(ds: &Dataset) -> Vec<DistributionRow> {
    let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
    for s in &ds.samples {
        *counts.entry(s.reduced_label()).or_default() += 1;
    }
    let mut rows: Vec<DistributionRow> = counts
        .into_iter()
        .map(|(label, count)| {
            let t = (label.0 + label.1) as f64;
            DistributionRow {
                label,
                frac_left: label.0 as f64 / t,
                frac_right: label.1 as f64 / t,
                count,
            }
        })
        .collect();
    rows.sort_by(|a, b| cmp_fraction(a.label, b.label));
    rows
}

fn cmp_fraction(a: (u32, u32), b: (u32, u32)) -> Ordering {
    let lhs = a.0 as u64 * (b.0 + b.1) as u64;
    let rhs = b.0 as u64 * (a.0 + a.1) as u64;
    lhs.cmp(&rhs)
}

/// Text table of [`distribution_report`].
pub fn format_distribution(rows: &[DistributionRow]) -> String {
    let mut out = String::from("frac_left  frac_right  count\n");
    for r in rows {
        let _ = writeln!(out, "{:.6}   {:.6}    {}", r.frac_left, r.frac_right, r.count);
    }
    let total: usize = rows.iter().map(|r| r.count).sum();
    let _ = writeln!(out, "total                  {total}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Track;
    use proptest::prelude::*;

    fn meta() -> GridMeta {
        GridMeta::for_area(Rect::new(-1.2, 3.0, 1.2, 5.0), 0.1).unwrap()
    }

    fn sample(run: &str, frame: i64, l: u32, r: u32, v: f64) -> HeatmapSample {
        HeatmapSample {
            run_name: run.into(),
            frame,
            source: Source::Simulated,
            n_left: l,
            n_right: r,
            values: vec![v; 4],
        }
    }

    fn small(samples: Vec<HeatmapSample>) -> Dataset {
        Dataset {
            meta: GridMeta::for_area(Rect::new(0.0, 0.0, 0.2, 0.2), 0.1).unwrap(),
            samples,
        }
    }

    #[test]
    fn grid_sizes() {
        let a1 = GridMeta::for_area(Rect::new(-1.2, 4.0, 1.2, 5.0), 0.1).unwrap();
        assert_eq!((a1.nx, a1.ny, a1.len()), (24, 10, 240));
        assert_eq!(meta().len(), 480);
    }

    #[test]
    fn kernel_peak_and_empty() {
        let m = meta();
        assert!(gaussian_heatmap(&[], &m, 0.7).iter().all(|&v| v == 0.0));
        let c = m.center(5, 7);
        let v = gaussian_heatmap(&[c], &m, 0.7);
        let peak = 1.0 / (2.0 * PI * 0.49);
        assert!((v[7 * m.nx + 5] - peak).abs() < 1e-15);
        assert!(v.iter().all(|&x| x <= peak + 1e-15));
    }

    #[test]
    fn kernel_truncation() {
        let m = meta();
        // Just beyond 3 sigma of the lower-left corner cell.
        let p = Point::new(-1.15 - 2.15, 3.05);
        let v = gaussian_heatmap(&[p], &m, 0.7);
        assert_eq!(v[0], 0.0);
        let far = Point::new(10.0, 10.0);
        assert!(gaussian_heatmap(&[far], &m, 0.7).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mirror_symmetry() {
        let m = meta();
        let v = gaussian_heatmap(&[Point::new(-0.37, 3.8), Point::new(0.37, 3.8)], &m, 0.7);
        for j in 0..m.ny {
            for i in 0..m.nx {
                let a = v[j * m.nx + i];
                let b = v[j * m.nx + (m.nx - 1 - i)];
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn labels() {
        let area = Rect::new(0.0, 0.0, 1.0, 1.0);
        let inside = Point::new(0.5, 0.5);
        let outside = Point::new(3.0, 0.5);
        assert_eq!(label_frame(&[], &area), None);
        assert_eq!(
            label_frame(
                &[
                    (inside, Origin::Left),
                    (inside, Origin::Left),
                    (inside, Origin::Right),
                    (outside, Origin::Right),
                    (inside, Origin::Unknown)
                ],
                &area
            ),
            Some((2, 1))
        );
        let s = sample("r", 0, 2, 1, 0.0);
        assert!((s.frac_left() - 0.666667).abs() < 1e-6);
        assert_eq!(s.frac_left() + s.frac_right(), 1.0);
        assert_eq!(label_frame(&[(outside, Origin::Left)], &area), None);
    }

    fn toy_set(frames: std::ops::Range<i64>) -> TrajectorySet {
        let mut set = TrajectorySet::new("toy", 16.0, Source::Simulated);
        set.pedestrians.insert(
            1,
            Track {
                origin: Origin::Left,
                samples: frames.map(|f| (f, Point::new(0.0, 4.0 + 0.01 * f as f64))).collect(),
            },
        );
        set
    }

    #[test]
    fn frame_positions_counts() {
        let mut set = toy_set(5..8);
        set.pedestrians.insert(
            2,
            Track {
                origin: Origin::Right,
                samples: vec![(6, Point::new(0.1, 4.0))],
            },
        );
        assert!(frame_positions(&set, 2).is_empty());
        assert_eq!(frame_positions(&set, 5), vec![(Point::new(0.0, 4.05), Origin::Left)]);
        assert_eq!(frame_positions(&set, 6).len(), 2);
    }

    #[test]
    fn dataset_enumeration() {
        let set = toy_set(5..8);
        let ds = build_dataset(&[set], meta(), 0.7, 1).unwrap();
        let frames: Vec<i64> = ds.samples.iter().map(|s| s.frame).collect();
        assert_eq!(frames, vec![5, 6, 7]);
        let ds = build_dataset(&[toy_set(0..10)], meta(), 0.7, 2).unwrap();
        assert_eq!(ds.len(), 5);
        assert!(build_dataset(&[], meta(), 0.7, 1).unwrap().is_empty());
    }

    #[test]
    fn extend_checks_grid() {
        let mut a = Dataset::new(meta());
        let b = Dataset::new(GridMeta::for_area(Rect::new(-1.2, 4.0, 1.2, 5.0), 0.1).unwrap());
        assert!(a.extend(b).is_err());
        assert!(a.extend(Dataset::new(meta())).is_ok());
    }

    #[test]
    fn dedup_rules() {
        let ds = small(vec![
            sample("r", 0, 1, 1, 1.0),
            sample("r", 1, 1, 1, 1.0),
            sample("r", 2, 1, 1, 2.0),
            sample("r", 3, 1, 1, 1.0),
        ]);
        let d = dedup_consecutive(&ds);
        let frames: Vec<i64> = d.samples.iter().map(|s| s.frame).collect();
        assert_eq!(frames, vec![0, 2, 3]);
        assert_eq!(dedup_consecutive(&d), d);
        // First sample of another run always survives.
        let ds = small(vec![sample("a", 0, 1, 0, 1.0), sample("b", 0, 1, 0, 1.0)]);
        assert_eq!(dedup_consecutive(&ds).len(), 2);
    }

    #[test]
    fn rebalance_counts() {
        let mut v: Vec<HeatmapSample> = (0..1759).map(|i| sample("r", i, 3, 3, i as f64)).collect();
        v.extend((0..931).map(|i| sample("r", 5000 + i, 1, 0, 0.0)));
        let ds = small(v);
        assert_eq!(default_equal_cap(&ds), 931);
        let r = rebalance_equal(&ds, 887);
        assert_eq!(r.samples.iter().filter(|s| s.is_equal_split()).count(), 887);
        assert_eq!(r.samples.iter().filter(|s| !s.is_equal_split()).count(), 931);
        assert!(r.samples.windows(2).all(|w| w[0].frame < w[1].frame));
        assert_eq!(rebalance_equal(&ds, 5000), ds);
        assert_eq!(
            rebalance_equal(&ds, 0).samples.iter().filter(|s| s.is_equal_split()).count(),
            0
        );
    }

    #[test]
    fn report_grouping() {
        let ds = small(vec![
            sample("r", 0, 1, 0, 0.0),
            sample("r", 1, 1, 1, 0.0),
            sample("r", 2, 2, 2, 0.0),
        ]);
        let rows = distribution_report(&ds);
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].frac_left, rows[0].frac_right, rows[0].count), (0.5, 0.5, 2));
        assert_eq!((rows[1].frac_left, rows[1].frac_right, rows[1].count), (1.0, 0.0, 1));
        assert!(distribution_report(&small(vec![])).is_empty());
    }

    #[test]
    fn header_is_parsed_back() {
        let m = GridMeta::for_area(Rect::new(-1.2, 4.0, 1.2, 5.0), 0.1).unwrap();
        assert_eq!(m.header(), "# heatmap-dataset v1 nx=24 ny=10 h=0.1 area=-1.2,4,2.4,1");
        let back = parse_header(&m.header()).unwrap();
        assert_eq!((back.nx, back.ny, back.h), (24, 10, 0.1));
        assert!(back.compatible(&m));
    }

    #[test]
    fn bad_rows() {
        let text = "# heatmap-dataset v1 nx=2 ny=2 h=0.1 area=0,0,0.2,0.2\nr,0,sim,1,0,1,2,3\n";
        let err = Dataset::parse(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let text = "# heatmap-dataset v1 nx=2 ny=2 h=0.1 area=0,0,0.2,0.2\nr,0,sim,1,0,1,2,3,x\n";
        assert!(Dataset::parse(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn mass_never_exceeds_count(pts in prop::collection::vec((-4.0..4.0f64, 1.0..8.0f64), 0..20)) {
            let m = meta();
            let p: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
            let v = gaussian_heatmap(&p, &m, 0.7);
            let mass: f64 = v.iter().sum::<f64>() * m.h * m.h;
            prop_assert!(mass <= p.len() as f64 + 1e-9);
        }

        #[test]
        fn translation_invariance(pts in prop::collection::vec((-2.0..2.0f64, 2.0..6.0f64), 1..10),
                                  dx in -5.0..5.0f64, dy in -5.0..5.0f64) {
            let m = meta();
            let mut moved = m;
            moved.area = m.area.translate(Point::new(dx, dy));
            let p: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
            let q: Vec<Point> = p.iter().map(|&a| a + Point::new(dx, dy)).collect();
            let a = gaussian_heatmap(&p, &m, 0.7);
            let b = gaussian_heatmap(&q, &moved, 0.7);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn dataset_text_round_trip(vals in prop::collection::vec((0u32..5, 1u32..5, prop::collection::vec(0.0..3.0f64, 4)), 0..12)) {
            let ds = small(vals.into_iter().enumerate().map(|(i, (l, r, v))| HeatmapSample {
                run_name: format!("run{}", i % 3),
                frame: i as i64,
                source: if i % 2 == 0 { Source::Simulated } else { Source::Experimental },
                n_left: l,
                n_right: r,
                values: v,
            }).collect());
            let text = ds.to_text().unwrap();
            let back = Dataset::parse(text.as_bytes()).unwrap();
            prop_assert_eq!(back.to_text().unwrap(), text);
            prop_assert_eq!(back.samples, ds.samples);
        }
    }
}
