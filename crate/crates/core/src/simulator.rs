//! Optimal-steps crowd simulation of the merging flow.
//!
//! Each tick visits the walking agents in random order. An agent evaluates
//! candidate positions spread over the disk it can reach within one tick
//! and moves to the feasible one with the highest utility
//!
//! ```text
//! U(x) = -T(x) - sum_j A_p exp(-(|x - x_j| - 2r) / B_p) - A_o exp(-d_obs(x) / B_o)
//! ```
//!
//! where `T` is the navigation field and `d_obs` the distance to the nearest
//! wall. Candidates that overlap another agent or a wall are infeasible; the
//! current position is always a candidate.
//!
//! The step length is the free speed times `dt`, capped by the free gap to
//! the nearest agent on the descent path divided by a time headway. Agents
//! leave once their center crosses the target line.

use crate::error::{Error, Result};
use crate::floorfield::{sample_finite, travel_time_field, FloorFieldParams, GridField};
use crate::geometry::{Point, Rect};
use crate::ingest::{Origin, Source, TrajectorySet, Track};
use crate::rng::{seeded, SimRng};
use crate::scenario::{build_tjunction, Scenario, ScenarioConfig};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: u64,
    pub origin: Origin,
    pub position: Point,
    pub free_speed: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub dt: f64,
    pub candidate_count: usize,
    /// Concentric rings the candidates are spread over, outermost at full
    /// step length.
    pub candidate_rings: usize,
    pub agent_radius: f64,
    pub repulsion_strength_ped: f64,
    pub repulsion_range_ped: f64,
    pub repulsion_strength_obs: f64,
    pub repulsion_range_obs: f64,
    pub speed_mean: f64,
    pub speed_std: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Time headway in s. The step length is capped so the agent covers at
    /// most the free gap to the nearest agent on its path within this time;
    /// 0 disables the cap.
    pub time_gap: f64,
    pub floor_field: FloorFieldParams,
    /// Step budget as a multiple of the slowest free-flow crossing time.
    pub budget_factor: f64,
    /// Consecutive failed placements before spawning gives up.
    pub spawn_retries: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dt: 0.4,
            candidate_count: 20,
            candidate_rings: 3,
            agent_radius: 0.195,
            repulsion_strength_ped: 1.0,
            repulsion_range_ped: 0.5,
            repulsion_strength_obs: 0.6,
            repulsion_range_obs: 0.3,
            speed_mean: 1.34,
            speed_std: 0.26,
            speed_min: 0.5,
            speed_max: 2.2,
            time_gap: 1.0,
            floor_field: FloorFieldParams::default(),
            budget_factor: 10.0,
            spawn_retries: 2000,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::validation("dt must be positive"));
        }
        if self.candidate_count < 4 {
            return Err(Error::validation("candidate_count must be at least 4"));
        }
        if self.candidate_rings == 0 || self.candidate_rings > self.candidate_count {
            return Err(Error::validation(
                "candidate_rings must be between 1 and candidate_count",
            ));
        }
        if !(self.agent_radius > 0.0) {
            return Err(Error::validation("agent_radius must be positive"));
        }
        if !(self.speed_min > 0.0
            && self.speed_min <= self.speed_mean
            && self.speed_mean <= self.speed_max)
        {
            return Err(Error::validation(
                "speeds must satisfy 0 < speed_min <= speed_mean <= speed_max",
            ));
        }
        if !(self.time_gap >= 0.0 && self.time_gap.is_finite()) {
            return Err(Error::validation("time_gap must be finite and non-negative"));
        }
        if !(self.repulsion_range_ped > 0.0 && self.repulsion_range_obs > 0.0) {
            return Err(Error::validation("repulsion ranges must be positive"));
        }
        Ok(())
    }

    fn neighbor_cutoff(&self) -> f64 {
        let repulsion = 4.0 * self.repulsion_range_ped;
        2.0 * self.agent_radius + repulsion.max(self.time_gap * self.speed_max)
    }
}

fn sample_speed(params: &SimParams, rng: &mut SimRng) -> f64 {
    if params.speed_std <= 0.0 {
        return params.speed_mean;
    }
    let normal = Normal::new(params.speed_mean, params.speed_std).expect("valid normal");
    for _ in 0..1000 {
        let v = normal.sample(rng);
        if (params.speed_min..=params.speed_max).contains(&v) {
            return v;
        }
    }
    params.speed_mean
}

fn place_in(
    room: &Rect,
    count: usize,
    origin: Origin,
    first_id: u64,
    params: &SimParams,
    rng: &mut SimRng,
    out: &mut Vec<Agent>,
) -> Result<()> {
    let r = params.agent_radius;
    let inner = room.expand(-(r + 1e-6));
    if inner.width() <= 0.0 || inner.height() <= 0.0 {
        return Err(Error::validation("waiting area too small"));
    }
    let start = out.len();
    for k in 0..count {
        let mut placed = false;
        for _ in 0..params.spawn_retries {
            let p = Point::new(
                rng.random_range(inner.min.x..=inner.max.x),
                rng.random_range(inner.min.y..=inner.max.y),
            );
            if out[start..].iter().all(|a| a.position.dist(p) >= 2.0 * r) {
                let free_speed = sample_speed(params, rng);
                out.push(Agent {
                    id: first_id + k as u64,
                    origin,
                    position: p,
                    free_speed,
                    radius: r,
                });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::validation(format!(
                "waiting area too small: placed {k} of {count} agents"
            )));
        }
    }
    Ok(())
}

/// Places `round(agent_count * split_left)` agents in the left waiting room
/// and the rest in the right one, uniformly at random without overlap.
pub fn spawn_agents(
    scenario: &Scenario,
    config: &ScenarioConfig,
    params: &SimParams,
    rng: &mut SimRng,
) -> Result<Vec<Agent>> {
    let n_left = (config.agent_count as f64 * config.split_left).round() as usize;
    let n_right = config.agent_count - n_left;
    let mut agents = Vec::with_capacity(config.agent_count);
    place_in(&scenario.origin_left, n_left, Origin::Left, 0, params, rng, &mut agents)?;
    place_in(
        &scenario.origin_right,
        n_right,
        Origin::Right,
        n_left as u64,
        params,
        rng,
        &mut agents,
    )?;
    Ok(agents)
}

/// Candidate offsets: `count` points on `rings` concentric rings of the
/// step disk, more points on outer rings, each ring randomly rotated.
fn candidate_offsets(count: usize, rings: usize, radius: f64, rng: &mut SimRng) -> Vec<Point> {
    let total_weight = (rings * (rings + 1) / 2) as f64;
    let mut out = Vec::with_capacity(count);
    let mut placed = 0usize;
    let mut cum = 0.0;
    for k in 1..=rings {
        cum += k as f64 / total_weight;
        let upto = if k == rings {
            count
        } else {
            (cum * count as f64).round() as usize
        };
        let n = upto - placed;
        placed = upto;
        let rr = radius * k as f64 / rings as f64;
        let phase = rng.random_range(0.0..TAU);
        for m in 0..n {
            let a = phase + TAU * m as f64 / n as f64;
            out.push(Point::new(rr * a.cos(), rr * a.sin()));
        }
    }
    out
}

fn utility(
    x: Point,
    field: &GridField,
    neighbors: &[Point],
    scenario: &Scenario,
    params: &SimParams,
    radius: f64,
) -> Option<f64> {
    let d_obs = scenario.obstacle_distance(x);
    if d_obs < radius {
        return None;
    }
    let mut rep = 0.0;
    for &n in neighbors {
        let d = x.dist(n);
        if d < 2.0 * radius {
            return None;
        }
        rep += params.repulsion_strength_ped * (-(d - 2.0 * radius) / params.repulsion_range_ped).exp();
    }
    // Beyond the target line the field is replaced by the signed distance
    // past it, so crossing always beats waiting on the line.
    let past = scenario.past_target(x);
    let t = if past >= 0.0 { -past } else { sample_finite(field, x) };
    if !t.is_finite() {
        return None;
    }
    Some(-t - rep - params.repulsion_strength_obs * (-d_obs / params.repulsion_range_obs).exp())
}

/// Unit vector of steepest descent of the navigation field at `p`.
fn descent_direction(field: &GridField, p: Point) -> Option<Point> {
    let h = field.h;
    let fx0 = sample_finite(field, p - Point::new(h, 0.0));
    let fx1 = sample_finite(field, p + Point::new(h, 0.0));
    let fy0 = sample_finite(field, p - Point::new(0.0, h));
    let fy1 = sample_finite(field, p + Point::new(0.0, h));
    let here = sample_finite(field, p);
    let diff = |a: f64, b: f64| match (a.is_finite(), b.is_finite()) {
        (true, true) => Some((b - a) / (2.0 * h)),
        (true, false) if here.is_finite() => Some((here - a) / h),
        (false, true) if here.is_finite() => Some((b - here) / h),
        _ => None,
    };
    let g = Point::new(diff(fx0, fx1)?, diff(fy0, fy1)?);
    let n = g.norm();
    (n > 0.0).then(|| g * (-1.0 / n))
}

/// Free speed reduced to the gap ahead divided by the time headway.
fn headway_speed(agent: &Agent, field: &GridField, neighbors: &[Point], params: &SimParams) -> f64 {
    if params.time_gap <= 0.0 {
        return agent.free_speed;
    }
    let Some(e) = descent_direction(field, agent.position) else {
        return agent.free_speed;
    };
    let contact = 2.0 * agent.radius;
    let mut gap = f64::INFINITY;
    for &n in neighbors {
        let d = n - agent.position;
        let along = d.dot(e);
        let across = (d.x * e.y - d.y * e.x).abs();
        if along > 0.0 && across < contact {
            gap = gap.min(along - (contact * contact - across * across).sqrt());
        }
    }
    (gap.max(0.0) / params.time_gap).min(agent.free_speed)
}

/// Chooses the agent's next position. `neighbors` are the positions of the
/// other agents that may interact with it.
pub fn step_agent(
    agent: &Agent,
    field: &GridField,
    neighbors: &[Point],
    scenario: &Scenario,
    params: &SimParams,
    rng: &mut SimRng,
) -> Point {
    let step = headway_speed(agent, field, neighbors, params) * params.dt;
    let offsets = candidate_offsets(params.candidate_count, params.candidate_rings, step, rng);
    let here = agent.position;
    let mut best = here;
    let mut best_u = utility(here, field, neighbors, scenario, params, agent.radius)
        .unwrap_or(f64::NEG_INFINITY);
    for off in offsets {
        let x = here + off;
        if let Some(u) = utility(x, field, neighbors, scenario, params, agent.radius) {
            if u > best_u {
                best_u = u;
                best = x;
            }
        }
    }
    best
}

/// Buckets of agent indices on a square grid.
struct NeighborGrid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl NeighborGrid {
    fn new(bounds: &Rect, cell: f64) -> Self {
        let nx = (bounds.width() / cell).ceil() as usize + 1;
        let ny = (bounds.height() / cell).ceil() as usize + 1;
        NeighborGrid {
            origin: bounds.min,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        }
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let i = ((p.x - self.origin.x) / self.cell).floor().max(0.0) as usize;
        let j = ((p.y - self.origin.y) / self.cell).floor().max(0.0) as usize;
        (i.min(self.nx - 1), j.min(self.ny - 1))
    }

    fn rebuild(&mut self, positions: &[Point], active: &[usize]) {
        for b in &mut self.buckets {
            b.clear();
        }
        for &a in active {
            let (i, j) = self.cell_of(positions[a]);
            self.buckets[j * self.nx + i].push(a as u32);
        }
    }

    fn query(&self, p: Point, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        let (i0, j0) = self.cell_of(p - Point::new(radius, radius));
        let (i1, j1) = self.cell_of(p + Point::new(radius, radius));
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend(self.buckets[j * self.nx + i].iter().map(|&k| k as usize));
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub trajectories: TrajectorySet,
    /// Agents that had not reached the target when the budget ran out.
    pub unfinished: usize,
    pub ticks: usize,
}

/// Runs one seeded simulation of the configured scenario.
pub fn run_simulation(config: &ScenarioConfig, params: &SimParams) -> Result<SimOutcome> {
    params.validate()?;
    let scenario = build_tjunction(config)?;
    let field = travel_time_field(&scenario, &params.floor_field)?;
    run_in(&scenario, &field, config, params)
}

/// Like [`run_simulation`] with a prebuilt scenario and navigation field.
pub fn run_in(
    scenario: &Scenario,
    field: &GridField,
    config: &ScenarioConfig,
    params: &SimParams,
) -> Result<SimOutcome> {
    params.validate()?;
    let mut rng = seeded(config.seed);
    let mut agents = spawn_agents(scenario, config, params, &mut rng)?;
    let fps = 1.0 / params.dt;
    let mut set = TrajectorySet::new(config.name.clone(), fps, Source::Simulated);
    for a in &agents {
        set.pedestrians.insert(
            a.id,
            Track {
                origin: a.origin,
                samples: vec![(0, a.position)],
            },
        );
    }

    let crossing = agents
        .iter()
        .map(|a| sample_finite(field, a.position) / a.free_speed)
        .fold(0.0f64, f64::max);
    let budget = (params.budget_factor * crossing / params.dt).ceil() as usize;

    let cutoff = params.neighbor_cutoff();
    let max_step = params.speed_max * params.dt;
    let mut grid = NeighborGrid::new(&scenario.bounds, cutoff.max(0.5));
    let mut positions: Vec<Point> = agents.iter().map(|a| a.position).collect();
    let mut active: Vec<usize> = (0..agents.len()).collect();
    let mut candidates = Vec::new();
    let mut neighbors = Vec::new();
    let mut ticks = 0;

    while !active.is_empty() && ticks < budget {
        ticks += 1;
        let frame = ticks as i64;
        grid.rebuild(&positions, &active);
        active.shuffle(&mut rng);
        let mut arrived = Vec::new();
        for &a in &active {
            grid.query(positions[a], cutoff + 2.0 * max_step, &mut candidates);
            neighbors.clear();
            let reach = cutoff + agents[a].free_speed * params.dt;
            for &b in &candidates {
                if b != a && positions[b].dist(positions[a]) <= reach {
                    neighbors.push(positions[b]);
                }
            }
            agents[a].position = positions[a];
            let next = step_agent(&agents[a], field, &neighbors, scenario, params, &mut rng);
            positions[a] = next;
            agents[a].position = next;
            if scenario.past_target(next) >= 0.0 {
                arrived.push(a);
            }
        }
        for &a in &active {
            set.pedestrians
                .get_mut(&agents[a].id)
                .expect("track exists")
                .samples
                .push((frame, positions[a]));
        }
        active.retain(|a| !arrived.contains(a));
        // Keep iteration order independent of the previous shuffle.
        active.sort_unstable();
    }

    Ok(SimOutcome {
        trajectories: set,
        unfinished: active.len(),
        ticks,
    })
}
