//! Navigation fields: travel time to the target on a regular grid.
//!
//! The travel time `T` solves `|grad T| = c(x)` with `T = 0` on target
//! cells, where the local cost `c = 1 + scale * w_obs * rho_obs` grows near
//! walls. `rho_obs` is a Gaussian blur of the obstacle indicator.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scenario::Scenario;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

/// Cell-centered scalar field; cell `(i, j)` has center
/// `(x0 + (i + 0.5) h, y0 + (j + 0.5) h)` and index `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(x0: f64, y0: f64, h: f64, nx: usize, ny: usize, fill: f64) -> Self {
        GridField {
            x0,
            y0,
            h,
            nx,
            ny,
            values: vec![fill; nx * ny],
        }
    }

    /// A zero field whose cells cover the scenario bounds.
    pub fn covering(scenario: &Scenario, h: f64) -> Self {
        let b = scenario.bounds;
        let nx = (b.width() / h - 1e-9).ceil().max(1.0) as usize;
        let ny = (b.height() / h - 1e-9).ceil().max(1.0) as usize;
        GridField::new(b.min.x, b.min.y, h, nx, ny, 0.0)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.x0 + (i as f64 + 0.5) * self.h,
            self.y0 + (j as f64 + 0.5) * self.h,
        )
    }

    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let fx = ((p.x - self.x0) / self.h).floor();
        let fy = ((p.y - self.y0) / self.h).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    fn centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.center(i, j)))
    }

    fn contains(&self, p: Point) -> bool {
        p.x >= self.x0
            && p.y >= self.y0
            && p.x <= self.x0 + self.nx as f64 * self.h
            && p.y <= self.y0 + self.ny as f64 * self.h
    }

    /// Interpolation weights of the four cells around `p`, clamped to the
    /// outermost cell centers.
    fn stencil(&self, p: Point) -> [(usize, f64); 4] {
        let axis = |v: f64, n: usize| -> (usize, f64) {
            if n == 1 {
                return (0, 0.0);
            }
            let f = v - 0.5;
            let i0 = (f.floor().max(0.0) as usize).min(n - 2);
            (i0, (f - i0 as f64).clamp(0.0, 1.0))
        };
        let (i0, tx) = axis((p.x - self.x0) / self.h, self.nx);
        let (j0, ty) = axis((p.y - self.y0) / self.h, self.ny);
        let i1 = (i0 + 1).min(self.nx - 1);
        let j1 = (j0 + 1).min(self.ny - 1);
        [
            (self.index(i0, j0), (1.0 - tx) * (1.0 - ty)),
            (self.index(i1, j0), tx * (1.0 - ty)),
            (self.index(i0, j1), (1.0 - tx) * ty),
            (self.index(i1, j1), tx * ty),
        ]
    }

    /// Writes the field as CSV: a `# nx ny h x0 y0` header line holding the
    /// five values, then `ny` rows of `nx` values, lowest `y` first.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# {} {} {} {} {}\n",
            self.nx, self.ny, self.h, self.x0, self.y0
        );
        for j in 0..self.ny {
            for i in 0..self.nx {
                if i > 0 {
                    s.push(',');
                }
                let v = self.get(i, j);
                if v.is_infinite() {
                    s.push_str("inf");
                } else {
                    let _ = write!(s, "{v}");
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| Error::parse(1, "missing `# nx ny h x0 y0` header"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(Error::parse(1, "header needs nx ny h x0 y0"));
        }
        let bad = |_| Error::parse(1, "non-numeric header value");
        let nx: usize = parts[0].parse().map_err(|_| Error::parse(1, "bad nx"))?;
        let ny: usize = parts[1].parse().map_err(|_| Error::parse(1, "bad ny"))?;
        let h: f64 = parts[2].parse().map_err(bad)?;
        let x0: f64 = parts[3].parse().map_err(bad)?;
        let y0: f64 = parts[4].parse().map_err(bad)?;
        let mut values = Vec::with_capacity(nx * ny);
        for (k, line) in lines.enumerate() {
            for tok in line.split(',') {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(k + 2, format!("bad value `{tok}`")))?;
                values.push(v);
            }
        }
        if values.len() != nx * ny {
            return Err(Error::validation(format!(
                "expected {} values, found {}",
                nx * ny,
                values.len()
            )));
        }
        Ok(GridField {
            x0,
            y0,
            h,
            nx,
            ny,
            values,
        })
    }
}

/// Bilinear interpolation; any infinite corner makes the result infinite.
pub fn bilinear_sample(field: &GridField, p: Point) -> Result<f64> {
    if !field.contains(p) {
        return Err(Error::validation(format!(
            "point ({}, {}) outside field bounds",
            p.x, p.y
        )));
    }
    let mut acc = 0.0;
    for (idx, w) in field.stencil(p) {
        let v = field.values[idx];
        if v.is_infinite() {
            return Ok(f64::INFINITY);
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Bilinear interpolation over the finite corners only, renormalized.
/// Returns infinity when all four corners are infinite or `p` is outside.
pub fn sample_finite(field: &GridField, p: Point) -> f64 {
    if !field.contains(p) {
        return f64::INFINITY;
    }
    let mut acc = 0.0;
    let mut wsum = 0.0;
    let mut any = false;
    for (idx, w) in field.stencil(p) {
        let v = field.values[idx];
        if v.is_finite() {
            acc += w * v;
            wsum += w;
            any = true;
        }
    }
    match (any, wsum > 1e-12) {
        (true, true) => acc / wsum,
        (true, false) => field
            .stencil(p)
            .iter()
            .map(|&(i, _)| field.values[i])
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min),
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorFieldParams {
    pub h: f64,
    pub w_obs: f64,
    pub sigma_obs: f64,
    pub w_obs_scale: f64,
}

impl Default for FloorFieldParams {
    fn default() -> Self {
        FloorFieldParams {
            h: 0.1,
            w_obs: 0.3,
            sigma_obs: 0.5,
            w_obs_scale: 5.0,
        }
    }
}

impl FloorFieldParams {
    pub fn with_weight(w_obs: f64) -> Self {
        FloorFieldParams {
            w_obs,
            ..Default::default()
        }
    }
}

fn obstacle_mask(scenario: &Scenario, grid: &GridField) -> Vec<bool> {
    grid.centers().map(|c| !scenario.is_walkable(c)).collect()
}

fn gaussian_weights(sigma: f64, h: f64) -> Vec<f64> {
    let radius = (3.0 * sigma / h).floor() as i64;
    let w: Vec<f64> = (-radius..=radius)
        .map(|k| {
            let d = k as f64 * h;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Normalized separable Gaussian blur of a 0/1 mask; cells outside the grid
/// count as obstacle.
fn blur_mask(mask: &[bool], nx: usize, ny: usize, sigma: f64, h: f64) -> Vec<f64> {
    let w = gaussian_weights(sigma, h);
    let r = (w.len() / 2) as i64;
    let src: Vec<f64> = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
    let mut tmp = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let ii = i as i64 + k as i64 - r;
                acc += wk * if ii < 0 || ii >= nx as i64 {
                    1.0
                } else {
                    src[j * nx + ii as usize]
                };
            }
            tmp[j * nx + i] = acc;
        }
    }
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let jj = j as i64 + k as i64 - r;
                acc += wk * if jj < 0 || jj >= ny as i64 {
                    1.0
                } else {
                    tmp[jj as usize * nx + i]
                };
            }
            out[j * nx + i] = acc.clamp(0.0, 1.0);
        }
    }
    out
}

/// Gaussian-blurred obstacle indicator with values in `[0, 1]`.
pub fn obstacle_density(scenario: &Scenario, h: f64, sigma_obs: f64) -> Result<GridField> {
    if !(h > 0.0 && sigma_obs > 0.0) {
        return Err(Error::validation("h and sigma_obs must be positive"));
    }
    let mut grid = GridField::covering(scenario, h);
    let mask = obstacle_mask(scenario, &grid);
    grid.values = blur_mask(&mask, grid.nx, grid.ny, sigma_obs, h);
    Ok(grid)
}

/// Input to the eikonal solvers: per-cell cost (infinite for obstacles)
/// and the zero-time source cells.
#[derive(Debug, Clone)]
pub struct EikonalProblem {
    pub grid: GridField,
    pub cost: Vec<f64>,
    pub sources: Vec<usize>,
}

impl EikonalProblem {
    pub fn from_scenario(scenario: &Scenario, params: &FloorFieldParams) -> Result<Self> {
        if !(params.h > 0.0) {
            return Err(Error::validation("grid cell size h must be positive"));
        }
        if params.w_obs < 0.0 {
            return Err(Error::validation("w_obs must be non-negative"));
        }
        let grid = GridField::covering(scenario, params.h);
        let mask = obstacle_mask(scenario, &grid);
        let rho = if params.w_obs > 0.0 {
            blur_mask(&mask, grid.nx, grid.ny, params.sigma_obs, params.h)
        } else {
            vec![0.0; mask.len()]
        };
        let cost = mask
            .iter()
            .zip(&rho)
            .map(|(&solid, &r)| {
                if solid {
                    f64::INFINITY
                } else {
                    1.0 + params.w_obs_scale * params.w_obs * r
                }
            })
            .collect::<Vec<_>>();

        let seg = scenario.target;
        let steps = (seg.length() / (params.h / 4.0)).ceil().max(1.0) as usize;
        let mut sources = Vec::new();
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let p = seg.a + (seg.b - seg.a) * t;
            if let Some((i, j)) = grid.cell_of(p) {
                let idx = grid.index(i, j);
                if cost[idx].is_finite() && !sources.contains(&idx) {
                    sources.push(idx);
                }
            }
        }
        if sources.is_empty() {
            return Err(Error::validation("target covers no walkable grid cell"));
        }
        Ok(EikonalProblem {
            grid,
            cost,
            sources,
        })
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // Min-heap on time, ties by index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Accuracy of the upwind differences used by [`solve_fast_marching_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarchingOrder {
    /// One-sided first differences (Godunov).
    First,
    /// Second-order one-sided differences where two upwind values are
    /// accepted, first order elsewhere.
    #[default]
    Second,
}

/// Fast marching with second-order upwind differences.
pub fn solve_fast_marching(problem: &EikonalProblem) -> GridField {
    solve_fast_marching_with(problem, MarchingOrder::Second)
}

pub fn solve_fast_marching_with(problem: &EikonalProblem, order: MarchingOrder) -> GridField {
    let g = &problem.grid;
    let (nx, ny, h) = (g.nx, g.ny, g.h);
    let mut t = vec![f64::INFINITY; nx * ny];
    let mut known = vec![false; nx * ny];
    let mut heap = BinaryHeap::new();
    for &s in &problem.sources {
        t[s] = 0.0;
        heap.push(HeapItem(0.0, s));
    }
    while let Some(HeapItem(ts, idx)) = heap.pop() {
        if known[idx] || ts > t[idx] {
            continue;
        }
        known[idx] = true;
        let (i, j) = (idx % nx, idx / nx);
        let mut neigh = [usize::MAX; 4];
        if i > 0 {
            neigh[0] = idx - 1;
        }
        if i + 1 < nx {
            neigh[1] = idx + 1;
        }
        if j > 0 {
            neigh[2] = idx - nx;
        }
        if j + 1 < ny {
            neigh[3] = idx + nx;
        }
        for &n in neigh.iter().filter(|&&n| n != usize::MAX) {
            if known[n] || problem.cost[n].is_infinite() {
                continue;
            }
            let cand = upwind_update(&t, &known, n, nx, ny, problem.cost[n], h, order);
            if cand < t[n] {
                t[n] = cand;
                heap.push(HeapItem(cand, n));
            }
        }
    }
    GridField {
        values: t,
        ..g.clone()
    }
}

/// Upwind term `(alpha, beta)` along one axis: the discrete derivative is
/// `sqrt(alpha) * (T - beta)`.
#[allow(clippy::too_many_arguments)]
fn axis_term(
    t: &[f64],
    known: &[bool],
    idx: usize,
    pos: usize,
    n: usize,
    stride: usize,
    h: f64,
    order: MarchingOrder,
) -> Option<(f64, f64)> {
    let val = |k: usize| if known[k] { t[k] } else { f64::INFINITY };
    // (first-order upwind value, term) of the side with the smaller value.
    let mut best: Option<(f64, (f64, f64))> = None;
    for side in [-1i64, 1] {
        let p1 = pos as i64 + side;
        if p1 < 0 || p1 >= n as i64 {
            continue;
        }
        let t1 = val((idx as i64 + side * stride as i64) as usize);
        if !t1.is_finite() || best.is_some_and(|(b, _)| b <= t1) {
            continue;
        }
        let mut term = (1.0 / (h * h), t1);
        if order == MarchingOrder::Second {
            let p2 = pos as i64 + 2 * side;
            if p2 >= 0 && p2 < n as i64 {
                let t2 = val((idx as i64 + 2 * side * stride as i64) as usize);
                if t2.is_finite() && t2 <= t1 {
                    term = (9.0 / (4.0 * h * h), (4.0 * t1 - t2) / 3.0);
                }
            }
        }
        best = Some((t1, term));
    }
    best.map(|(_, term)| term)
}

#[allow(clippy::too_many_arguments)]
fn upwind_update(
    t: &[f64],
    known: &[bool],
    idx: usize,
    nx: usize,
    ny: usize,
    cost: f64,
    h: f64,
    order: MarchingOrder,
) -> f64 {
    let (i, j) = (idx % nx, idx / nx);
    let terms = [
        axis_term(t, known, idx, i, nx, 1, h, order),
        axis_term(t, known, idx, j, ny, nx, h, order),
    ];
    let mut terms: Vec<(f64, f64)> = terms.into_iter().flatten().collect();
    terms.sort_by(|a, b| a.1.total_cmp(&b.1));
    let Some(&(a0, b0)) = terms.first() else {
        return f64::INFINITY;
    };
    let single = b0 + cost / a0.sqrt();
    if terms.len() < 2 || single <= terms[1].1 {
        return single;
    }
    // Solve sum_k alpha_k (T - beta_k)^2 = cost^2 for the larger root.
    let (sa, sab, sab2) = terms.iter().fold((0.0, 0.0, 0.0), |acc, &(a, b)| {
        (acc.0 + a, acc.1 + a * b, acc.2 + a * b * b)
    });
    let disc = sab * sab - sa * (sab2 - cost * cost);
    if disc < 0.0 {
        return single;
    }
    ((sab + disc.sqrt()) / sa).min(single)
}

/// Precomputed unit offsets for the graph oracle.
fn stencil_offsets(radius: i64) -> Vec<(i64, i64)> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut v = Vec::new();
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            if (dx, dy) != (0, 0) && gcd(dx, dy) == 1 {
                v.push((dx, dy));
            }
        }
    }
    v
}

/// Shortest paths on the cell graph. With `radius = 1` this is the
/// 8-connected grid with edge weight `length * mean(endpoint costs)`; larger
/// radii add straight edges to the `(2r+1)^2` neighborhood, weighted by the
/// mean cost sampled at each cell hop along the edge, and drop edges that
/// pass an obstacle cell.
pub fn solve_dijkstra(problem: &EikonalProblem, radius: usize) -> GridField {
    let g = &problem.grid;
    let (nx, ny, h) = (g.nx as i64, g.ny as i64, g.h);
    let offsets = stencil_offsets(radius.max(1) as i64);
    let mut t = vec![f64::INFINITY; g.nx * g.ny];
    let mut done = vec![false; g.nx * g.ny];
    let mut heap = BinaryHeap::new();
    for &s in &problem.sources {
        t[s] = 0.0;
        heap.push(HeapItem(0.0, s));
    }
    while let Some(HeapItem(ts, idx)) = heap.pop() {
        if done[idx] || ts > t[idx] {
            continue;
        }
        done[idx] = true;
        let (i, j) = ((idx % g.nx) as i64, (idx / g.nx) as i64);
        'edge: for &(dx, dy) in &offsets {
            let (ti, tj) = (i + dx, j + dy);
            if ti < 0 || tj < 0 || ti >= nx || tj >= ny {
                continue;
            }
            let n = (tj * nx + ti) as usize;
            if done[n] || problem.cost[n].is_infinite() {
                continue;
            }
            let hops = dx.abs().max(dy.abs());
            let mut csum = 0.0;
            for k in 0..=hops {
                let f = k as f64 / hops as f64;
                let si = (i as f64 + f * dx as f64).round() as i64;
                let sj = (j as f64 + f * dy as f64).round() as i64;
                let c = problem.cost[(sj * nx + si) as usize];
                if c.is_infinite() {
                    continue 'edge;
                }
                csum += c;
            }
            let len = h * ((dx * dx + dy * dy) as f64).sqrt();
            let cand = ts + len * csum / (hops + 1) as f64;
            if cand < t[n] {
                t[n] = cand;
                heap.push(HeapItem(cand, n));
            }
        }
    }
    GridField {
        values: t,
        ..g.clone()
    }
}

/// Travel-time field by fast marching.
pub fn travel_time_field(scenario: &Scenario, params: &FloorFieldParams) -> Result<GridField> {
    Ok(solve_fast_marching(&EikonalProblem::from_scenario(
        scenario, params,
    )?))
}

/// Independent graph-search oracle for [`travel_time_field`].
pub fn dijkstra_oracle(
    scenario: &Scenario,
    params: &FloorFieldParams,
    radius: usize,
) -> Result<GridField> {
    Ok(solve_dijkstra(
        &EikonalProblem::from_scenario(scenario, params)?,
        radius,
    ))
}

/// Largest absolute difference over cells finite in both fields; `None`
/// when the sets of finite cells differ.
pub fn linf_discrepancy(a: &GridField, b: &GridField) -> Option<f64> {
    let mut worst = 0.0f64;
    for (x, y) in a.values.iter().zip(&b.values) {
        match (x.is_finite(), y.is_finite()) {
            (true, true) => worst = worst.max((x - y).abs()),
            (false, false) => {}
            _ => return None,
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_tjunction, ScenarioConfig};

    fn open_problem(nx: usize, ny: usize, h: f64) -> EikonalProblem {
        let grid = GridField::new(0.0, 0.0, h, nx, ny, 0.0);
        let cost = vec![1.0; nx * ny];
        // Target: the whole top row.
        let sources = (0..nx).map(|i| (ny - 1) * nx + i).collect();
        EikonalProblem {
            grid,
            cost,
            sources,
        }
    }

    #[test]
    fn bilinear_identities() {
        let mut f = GridField::new(0.0, 0.0, 1.0, 2, 1, 0.0);
        f.values = vec![1.0, 3.0];
        assert_eq!(bilinear_sample(&f, Point::new(0.5, 0.5)).unwrap(), 1.0);
        assert_eq!(bilinear_sample(&f, Point::new(1.5, 0.5)).unwrap(), 3.0);
        assert_eq!(bilinear_sample(&f, Point::new(1.0, 0.5)).unwrap(), 2.0);
        let c = GridField::new(-1.0, -1.0, 0.5, 4, 4, 7.25);
        for p in [Point::new(-0.9, 0.3), Point::new(0.99, 0.99), Point::new(0.0, 0.0)] {
            assert_eq!(bilinear_sample(&c, p).unwrap(), 7.25);
        }
        assert!(bilinear_sample(&c, Point::new(1.5, 0.0)).is_err());
        f.values[1] = f64::INFINITY;
        assert!(bilinear_sample(&f, Point::new(1.0, 0.5)).unwrap().is_infinite());
        assert_eq!(sample_finite(&f, Point::new(1.0, 0.5)), 1.0);
    }

    #[test]
    fn dijkstra_single_edge_and_pocket() {
        // 3x1 strip: target at the right end, free cell next to it, obstacle
        // separating a pocket on the left.
        let grid = GridField::new(0.0, 0.0, 0.1, 4, 1, 0.0);
        let cost = vec![1.0, f64::INFINITY, 2.0, 2.0];
        let p = EikonalProblem {
            grid,
            cost,
            sources: vec![3],
        };
        let t = solve_dijkstra(&p, 1);
        assert_eq!(t.values[3], 0.0);
        assert!((t.values[2] - 0.1 * 2.0).abs() < 1e-15);
        assert!(t.values[1].is_infinite());
        assert!(t.values[0].is_infinite());
    }

    #[test]
    fn dijkstra_on_five_by_five_uses_diagonal_geodesics() {
        // Single target cell in a corner; 8-connected distance is
        // max * h + (sqrt2 - 1) * min * h.
        let grid = GridField::new(0.0, 0.0, 1.0, 5, 5, 0.0);
        let p = EikonalProblem {
            grid,
            cost: vec![1.0; 25],
            sources: vec![0],
        };
        let t = solve_dijkstra(&p, 1);
        for j in 0..5 {
            for i in 0..5 {
                let (a, b) = (i.max(j) as f64, i.min(j) as f64);
                let expect = a + (2f64.sqrt() - 1.0) * b;
                assert!((t.get(i, j) - expect).abs() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn fmm_matches_distance_in_empty_corridor() {
        let h = 0.1;
        let p = open_problem(24, 60, h);
        let t = solve_fast_marching(&p);
        for j in 0..60 {
            for i in 0..24 {
                let expect = (59 - j) as f64 * h;
                assert!((t.get(i, j) - expect).abs() <= 2.0 * h);
            }
        }
        // Point source: radial distance within 2h.
        let mut p = open_problem(41, 41, h);
        p.sources = vec![20 * 41 + 20];
        let t = solve_fast_marching(&p);
        let mut worst = 0.0f64;
        for j in 0..41 {
            for i in 0..41 {
                let d = h * (((i as f64 - 20.0).powi(2) + (j as f64 - 20.0).powi(2)).sqrt());
                worst = worst.max((t.get(i, j) - d).abs());
            }
        }
        assert!(worst <= 2.0 * h, "{worst}");
    }

    #[test]
    fn obstacle_density_profile() {
        let s = build_tjunction(&ScenarioConfig::default()).unwrap();
        let rho = obstacle_density(&s, 0.1, 0.2).unwrap();
        assert!(rho.values.iter().all(|v| (0.0..=1.0).contains(v)));
        // Deep inside the waiting room: zero. Deep inside the frame: one.
        let (i, j) = rho.cell_of(s.origin_left.center()).unwrap();
        assert_eq!(rho.get(i, j), 0.0);
        let (i, j) = rho.cell_of(Point::new(0.0, -0.45)).unwrap();
        assert!(rho.get(i, j) > 0.3);
        let (i, j) = rho.cell_of(Point::new(-3.0, 4.5)).unwrap();
        assert!((rho.get(i, j) - 1.0).abs() < 1e-12);
        // Along the ray from the exit corridor wall towards its center.
        let y = 4.0;
        let mut last = f64::INFINITY;
        let mut x = 1.15;
        while x > 0.0 {
            let (i, j) = rho.cell_of(Point::new(x, y)).unwrap();
            let v = rho.get(i, j);
            assert!(v <= last + 1e-15);
            last = v;
            x -= 0.1;
        }
    }

    #[test]
    fn target_cells_are_zero_and_obstacles_infinite() {
        let s = build_tjunction(&ScenarioConfig::default()).unwrap();
        let prob = EikonalProblem::from_scenario(&s, &FloorFieldParams::default()).unwrap();
        let t = solve_fast_marching(&prob);
        for &src in &prob.sources {
            assert_eq!(t.values[src], 0.0);
        }
        for (v, c) in t.values.iter().zip(&prob.cost) {
            assert!(*v >= 0.0);
            if c.is_infinite() {
                assert!(v.is_infinite());
            }
        }
        let zero_count = t.values.iter().filter(|v| **v == 0.0).count();
        assert_eq!(zero_count, prob.sources.len());
    }

    #[test]
    fn unreachable_target_is_an_error() {
        let mut s = build_tjunction(&ScenarioConfig::default()).unwrap();
        s.target.a = Point::new(-100.0, -100.0);
        s.target.b = Point::new(-99.0, -100.0);
        assert!(travel_time_field(&s, &FloorFieldParams::default()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut f = GridField::new(-1.5, 2.0, 0.25, 3, 2, 0.5);
        f.values[4] = f64::INFINITY;
        f.values[1] = 0.1 + 0.2;
        let text = f.to_csv();
        assert!(text.starts_with("# 3 2 0.25 -1.5 2\n"));
        assert_eq!(GridField::from_csv(&text).unwrap(), f);
    }
}
