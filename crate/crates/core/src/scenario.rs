//! Parameterized T-junction geometry.
//!
//! Coordinates: the junction is centered on `x = 0`. The two arm corridors
//! run along `-x` and `+x` at `y in [0, b_cor]` and feed the exit corridor
//! `x in [-b_exit/2, b_exit/2]`, which runs along `+y` up to the target line
//! at `y = exit_length`. Waiting rooms sit at the far ends of the arms and
//! open into them through an entrance of width `b_entrance`.

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, Rect, Segment};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Thickness of the solid frame around the walkable area.
const WALL_MARGIN: f64 = 0.5;
/// Walkable run-out past the target line so agents can cross it.
const EXIT_RUNOUT: f64 = 1.0;
/// Length of the door opening between waiting room and arm.
const DOOR_DEPTH: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub b_entrance: f64,
    pub b_cor: f64,
    pub b_exit: f64,
    pub arm_length: f64,
    /// Distance from the arm floor (`y = 0`) to the target line.
    pub exit_length: f64,
    /// Extent of each waiting room along the arm axis.
    pub waiting_depth: f64,
    /// Extent of each waiting room across the arm axis.
    pub waiting_width: f64,
    pub obs_area_depth: f64,
    /// Length of the measurement areas along their corridor.
    pub measurement_length: f64,
    pub agent_count: usize,
    pub split_left: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "240-240-240".into(),
            b_entrance: 2.4,
            b_cor: 2.4,
            b_exit: 2.4,
            arm_length: 4.5,
            exit_length: 5.0,
            waiting_depth: 10.0,
            waiting_width: 10.0,
            obs_area_depth: 1.0,
            measurement_length: 2.0,
            agent_count: 300,
            split_left: 0.5,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("b_entrance", self.b_entrance),
            ("b_cor", self.b_cor),
            ("b_exit", self.b_exit),
            ("arm_length", self.arm_length),
            ("exit_length", self.exit_length),
            ("waiting_depth", self.waiting_depth),
            ("waiting_width", self.waiting_width),
            ("obs_area_depth", self.obs_area_depth),
            ("measurement_length", self.measurement_length),
        ];
        for (field, v) in dims {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!("{field} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.split_left) {
            return Err(Error::validation("split_left must lie in [0, 1]"));
        }
        if self.obs_area_depth > self.exit_length - self.b_cor {
            return Err(Error::validation(format!(
                "obs_area_depth {} does not fit between the arm mouths (y = {}) and the target (y = {})",
                self.obs_area_depth, self.b_cor, self.exit_length
            )));
        }
        if self.waiting_width < self.b_cor.min(self.b_entrance) {
            return Err(Error::validation(
                "waiting_width must be at least the entrance opening",
            ));
        }
        Ok(())
    }

    /// Reads a config from TOML (`.toml`) or JSON (anything else).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ScenarioConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text)
                .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Json {
                context: path.display().to_string(),
                source: e,
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Which geometric width the middle number of a preset name controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PresetInterpretation {
    /// `entrance-corridor-exit`: the middle number is the arm corridor width.
    #[default]
    Corridor,
    /// The middle number is the waiting-room entrance; arms stay 2.4 m wide.
    Entrance,
}

const PRESET_MIDDLE_CM: [u32; 7] = [50, 60, 80, 100, 120, 150, 240];

/// The seven experiment layouts, `240-50-240` through `240-240-240`.
pub fn scenario_presets() -> Vec<ScenarioConfig> {
    scenario_presets_with(PresetInterpretation::Corridor)
}

pub fn scenario_presets_with(interp: PresetInterpretation) -> Vec<ScenarioConfig> {
    PRESET_MIDDLE_CM
        .iter()
        .map(|&cm| {
            let middle = f64::from(cm) / 100.0;
            let mut cfg = ScenarioConfig {
                name: format!("240-{cm}-240"),
                ..ScenarioConfig::default()
            };
            match interp {
                PresetInterpretation::Corridor => cfg.b_cor = middle,
                PresetInterpretation::Entrance => cfg.b_entrance = middle,
            }
            cfg
        })
        .collect()
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    scenario_presets().into_iter().find(|c| c.name == name)
}

/// Observation area #1 (1 m deep) or #2 (2 m deep) of the default layout.
/// The area sits at the same place in every preset.
pub fn observation_area_preset(id: u8) -> Result<Rect> {
    let depth = match id {
        1 => 1.0,
        2 => 2.0,
        _ => return Err(Error::validation(format!("observation area must be 1 or 2, got {id}"))),
    };
    let cfg = ScenarioConfig {
        obs_area_depth: depth,
        ..ScenarioConfig::default()
    };
    Ok(build_tjunction(&cfg)?.observation_area)
}

/// Index into [`Scenario::measurement_areas`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementArea {
    LeftArm = 0,
    RightArm = 1,
    Exit = 2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    #[serde(skip)]
    pub config: ScenarioConfig,
    pub bounds: Rect,
    /// Walkable space as a union of rectangles.
    pub walkable: Vec<Rect>,
    /// Solid obstacles; together with `walkable` they tile `bounds`.
    pub obstacles: Vec<Polygon>,
    pub origin_left: Rect,
    pub origin_right: Rect,
    pub target: Segment,
    /// Unit normal of the target pointing away from the junction.
    pub target_normal: Point,
    pub exit_corridor: Rect,
    /// Left arm, right arm, exit corridor.
    pub measurement_areas: [Rect; 3],
    pub observation_area: Rect,
    #[serde(skip)]
    obstacle_boxes: Vec<Rect>,
}

pub fn build_tjunction(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let e = config.b_exit / 2.0;
    let c = config.b_cor;
    let arm = config.arm_length;
    let depth = config.waiting_depth;
    let y_t = config.exit_length;
    let arm_mid = c / 2.0;
    let door = config.b_entrance.min(c);
    let room_y0 = arm_mid - config.waiting_width / 2.0;
    let room_y1 = arm_mid + config.waiting_width / 2.0;
    let arm_end = e + arm;
    let door_depth = DOOR_DEPTH.min(arm / 2.0);

    let exit_corridor = Rect::new(-e, 0.0, e, y_t + EXIT_RUNOUT);
    let mut walkable = vec![exit_corridor];
    for s in [-1.0, 1.0] {
        let room = Rect::new(s * (arm_end + depth), room_y0, s * arm_end, room_y1);
        let arm_rect = if door < c {
            walkable.push(Rect::new(
                s * arm_end,
                arm_mid - door / 2.0,
                s * (arm_end - door_depth),
                arm_mid + door / 2.0,
            ));
            Rect::new(s * (arm_end - door_depth), 0.0, s * e, c)
        } else {
            Rect::new(s * arm_end, 0.0, s * e, c)
        };
        walkable.push(arm_rect);
        walkable.push(room);
    }

    let bounds = Rect::new(
        -(arm_end + depth),
        room_y0.min(0.0),
        arm_end + depth,
        (y_t + EXIT_RUNOUT).max(room_y1),
    )
    .expand(WALL_MARGIN);

    let obstacle_boxes = complement_rects(&bounds, &walkable);
    let obstacles = obstacle_boxes.iter().map(Rect::to_polygon).collect();

    let ml = config.measurement_length.min(arm);
    let measurement_areas = [
        Rect::new(-e - ml, 0.0, -e, c),
        Rect::new(e, 0.0, e + ml, c),
        Rect::new(-e, c, e, (c + config.measurement_length).min(y_t)),
    ];
    let observation_area = Rect::new(-e, y_t - config.obs_area_depth, e, y_t);

    Ok(Scenario {
        name: config.name.clone(),
        config: config.clone(),
        bounds,
        walkable,
        obstacles,
        origin_left: Rect::new(-(arm_end + depth), room_y0, -arm_end, room_y1),
        origin_right: Rect::new(arm_end, room_y0, arm_end + depth, room_y1),
        target: Segment::new(Point::new(-e, y_t), Point::new(e, y_t)),
        target_normal: Point::new(0.0, 1.0),
        exit_corridor,
        measurement_areas,
        observation_area,
        obstacle_boxes,
    })
}

/// Tiles `bounds` minus the union of `cover` with disjoint rectangles.
fn complement_rects(bounds: &Rect, cover: &[Rect]) -> Vec<Rect> {
    let mut xs = vec![bounds.min.x, bounds.max.x];
    let mut ys = vec![bounds.min.y, bounds.max.y];
    for r in cover {
        xs.extend([r.min.x, r.max.x]);
        ys.extend([r.min.y, r.max.y]);
    }
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let covered = |i: usize, j: usize| {
        let p = Point::new((xs[i] + xs[i + 1]) / 2.0, (ys[j] + ys[j + 1]) / 2.0);
        cover.iter().any(|r| r.contains(p))
    };

    // Horizontal runs per row, then merge identical runs in consecutive rows.
    let mut open: Vec<(usize, usize, usize)> = Vec::new(); // (i0, i1, j0)
    let mut out = Vec::new();
    for j in 0..ys.len() - 1 {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < xs.len() - 1 {
            if covered(i, j) {
                i += 1;
                continue;
            }
            let start = i;
            while i < xs.len() - 1 && !covered(i, j) {
                i += 1;
            }
            runs.push((start, i));
        }
        let mut next = Vec::new();
        for (i0, i1, j0) in open.drain(..) {
            if let Some(pos) = runs.iter().position(|&r| r == (i0, i1)) {
                runs.remove(pos);
                next.push((i0, i1, j0));
            } else {
                out.push(Rect::new(xs[i0], ys[j0], xs[i1], ys[j]));
            }
        }
        next.extend(runs.into_iter().map(|(i0, i1)| (i0, i1, j)));
        open = next;
    }
    let top = ys[ys.len() - 1];
    out.extend(
        open.into_iter()
            .map(|(i0, i1, j0)| Rect::new(xs[i0], ys[j0], xs[i1], top)),
    );
    out
}

impl Scenario {
    pub fn is_walkable(&self, p: Point) -> bool {
        self.walkable.iter().any(|r| r.contains(p))
            && !self.obstacle_boxes.iter().any(|r| {
                p.x > r.min.x && p.x < r.max.x && p.y > r.min.y && p.y < r.max.y
            })
    }

    /// Distance from `p` to the nearest obstacle; zero inside one.
    pub fn obstacle_distance(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for (bx, poly) in self.obstacle_boxes.iter().zip(&self.obstacles) {
            if bx.distance(p) >= best {
                continue;
            }
            best = best.min(poly.distance(p));
            if best == 0.0 {
                break;
            }
        }
        best
    }

    /// Signed distance of `p` past the target line (positive beyond it).
    pub fn past_target(&self, p: Point) -> f64 {
        (p - self.target.a).dot(self.target_normal)
    }

    /// Geometry as pretty JSON for external plotting.
    pub fn to_geometry_json(&self) -> String {
        #[derive(Serialize)]
        struct Export<'a> {
            format: &'static str,
            config: &'a ScenarioConfig,
            #[serde(flatten)]
            scenario: &'a Scenario,
        }
        serde_json::to_string_pretty(&Export {
            format: "tjunction-geometry v1",
            config: &self.config,
            scenario: self,
        })
        .expect("scenario geometry serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(b_cor: f64, depth: f64) -> ScenarioConfig {
        ScenarioConfig {
            b_cor,
            obs_area_depth: depth,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn observation_area_sizes() {
        let s = build_tjunction(&cfg(2.4, 2.0)).unwrap();
        assert!((s.observation_area.width() - 2.4).abs() < 1e-12);
        assert!((s.observation_area.height() - 2.0).abs() < 1e-12);
        let s = build_tjunction(&cfg(2.4, 1.0)).unwrap();
        assert!((s.observation_area.width() - 2.4).abs() < 1e-12);
        assert!((s.observation_area.height() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_corridor_is_rejected_by_name() {
        let err = build_tjunction(&cfg(0.0, 1.0)).unwrap_err();
        assert_eq!(err.to_string(), "b_cor must be positive");
        let bad = ScenarioConfig {
            split_left: 1.5,
            ..ScenarioConfig::default()
        };
        assert!(build_tjunction(&bad).is_err());
    }

    #[test]
    fn observation_presets() {
        let a1 = observation_area_preset(1).unwrap();
        let a2 = observation_area_preset(2).unwrap();
        assert_eq!((a1.width(), a1.height()), (2.4, 1.0));
        assert_eq!((a2.width(), a2.height()), (2.4, 2.0));
        assert_eq!(a1.max, a2.max);
        for c in scenario_presets() {
            assert_eq!(build_tjunction(&c).unwrap().observation_area, a1);
        }
        assert!(observation_area_preset(3).is_err());
    }

    #[test]
    fn presets_are_the_seven_layouts() {
        let p = scenario_presets();
        assert_eq!(p.len(), 7);
        assert_eq!(p[0].name, "240-50-240");
        assert_eq!(p[6].name, "240-240-240");
        let widths: Vec<f64> = p.iter().map(|c| c.b_cor).collect();
        assert_eq!(widths, vec![0.5, 0.6, 0.8, 1.0, 1.2, 1.5, 2.4]);
        for c in &p {
            assert_eq!(c.b_entrance, 2.4);
            assert_eq!(c.b_exit, 2.4);
            build_tjunction(c).unwrap();
        }
        let alt = scenario_presets_with(PresetInterpretation::Entrance);
        assert_eq!(alt[0].b_entrance, 0.5);
        assert_eq!(alt[0].b_cor, 2.4);
        build_tjunction(&alt[0]).unwrap();
    }

    #[test]
    fn areas_lie_in_walkable_space() {
        for interp in [PresetInterpretation::Corridor, PresetInterpretation::Entrance] {
            for c in scenario_presets_with(interp) {
                for depth in [1.0, 2.0] {
                    let s = build_tjunction(&ScenarioConfig {
                        obs_area_depth: depth,
                        ..c.clone()
                    })
                    .unwrap();
                    let mut areas = vec![s.observation_area, s.origin_left, s.origin_right];
                    areas.extend(s.measurement_areas);
                    for a in &areas {
                        assert!(s.walkable.iter().any(|w| w.contains_rect(a)), "{a:?}");
                        for o in &s.obstacles {
                            assert!(!o.bounding_box().overlaps(a));
                        }
                    }
                    assert!(s.exit_corridor.contains_rect(&s.observation_area));
                    assert!(s.exit_corridor.contains_rect(&s.measurement_areas[2]));
                    // Observation area spans the corridor and touches the target.
                    assert_eq!(s.observation_area.width(), s.config.b_exit);
                    assert_eq!(s.observation_area.max.y, s.target.a.y);
                    assert_eq!(s.observation_area.min.x, s.target.a.x);
                    assert_eq!(s.observation_area.max.x, s.target.b.x);
                }
            }
        }
    }

    #[test]
    fn obstacles_tile_the_complement() {
        let s = build_tjunction(&ScenarioConfig::default()).unwrap();
        let total: f64 = s.obstacles.iter().map(|o| o.area()).sum::<f64>()
            + s.walkable.iter().map(|w| w.area()).sum::<f64>();
        assert!((total - s.bounds.area()).abs() < 1e-9);
        // Sample a lattice: every point is either walkable or inside an obstacle.
        let mut x = s.bounds.min.x + 0.013;
        while x < s.bounds.max.x {
            let mut y = s.bounds.min.y + 0.017;
            while y < s.bounds.max.y {
                let p = Point::new(x, y);
                let solid = s.obstacles.iter().any(|o| o.contains(p));
                assert_ne!(solid, s.is_walkable(p), "{p:?}");
                y += 0.31;
            }
            x += 0.29;
        }
    }

    #[test]
    fn deterministic_build() {
        let c = ScenarioConfig::default();
        assert_eq!(build_tjunction(&c).unwrap(), build_tjunction(&c).unwrap());
        assert_eq!(
            build_tjunction(&c).unwrap().to_geometry_json(),
            build_tjunction(&c).unwrap().to_geometry_json()
        );
    }

    #[test]
    fn obstacle_distance_in_corridor() {
        let s = build_tjunction(&cfg(1.0, 1.0)).unwrap();
        // Middle of the left arm: 0.5 m to floor and ceiling.
        let d = s.obstacle_distance(Point::new(-3.0, 0.5));
        assert!((d - 0.5).abs() < 1e-12);
        assert_eq!(s.obstacle_distance(Point::new(-3.0, -0.2)), 0.0);
    }

    #[test]
    fn config_reads_toml() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "name = \"x\"\nb_cor = 0.8\nobs_area_depth = 2.0\n").unwrap();
        let c = ScenarioConfig::from_file(&path).unwrap();
        assert_eq!(c.b_cor, 0.8);
        assert_eq!(c.obs_area_depth, 2.0);
        assert_eq!(c.b_exit, 2.4);
        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(ScenarioConfig::from_file(&path).is_err());
    }
}
