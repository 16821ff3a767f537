//! Trajectory files: parsing, normalization, origin labels, sidecars.
//!
//! Text format, one sample per line: `id frame x y [z]`, whitespace
//! separated; lines starting with `#` are comments. Normalized files are in
//! meters and carry a JSON sidecar (`<stem>.meta.json`) with the name,
//! frame rate, source and per-pedestrian origin.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scenario::{Scenario, ScenarioConfig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::{Path, PathBuf};

/// Frame rate assumed for experiment files when none is given.
pub const DEFAULT_EXPERIMENT_FPS: f64 = 16.0;
/// Half-width of the band around the junction centerline labeled Unknown.
pub const DEFAULT_EPSILON_X: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Left,
    Right,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "sim")]
    Simulated,
    #[serde(rename = "exp")]
    Experimental,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::Simulated => "sim",
            Source::Experimental => "exp",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "sim" => Some(Source::Simulated),
            "exp" => Some(Source::Experimental),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Centimeters,
    Meters,
}

impl Units {
    fn scale(self) -> f64 {
        match self {
            Units::Centimeters => 0.01,
            Units::Meters => 1.0,
        }
    }
}

impl std::str::FromStr for Units {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cm" => Ok(Units::Centimeters),
            "m" => Ok(Units::Meters),
            other => Err(Error::validation(format!("unknown units `{other}` (cm|m)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub origin: Origin,
    /// Strictly increasing frames.
    pub samples: Vec<(i64, Point)>,
}

impl Track {
    pub fn position_at(&self, frame: i64) -> Option<Point> {
        self.samples
            .binary_search_by_key(&frame, |s| s.0)
            .ok()
            .map(|k| self.samples[k].1)
    }

    pub fn first(&self) -> Option<(i64, Point)> {
        self.samples.first().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub name: String,
    pub fps: f64,
    pub source: Source,
    pub pedestrians: BTreeMap<u64, Track>,
}

impl TrajectorySet {
    pub fn new(name: impl Into<String>, fps: f64, source: Source) -> Self {
        TrajectorySet {
            name: name.into(),
            fps,
            source,
            pedestrians: BTreeMap::new(),
        }
    }

    /// Inclusive frame span over all pedestrians.
    pub fn frame_range(&self) -> Option<(i64, i64)> {
        let mut span: Option<(i64, i64)> = None;
        for t in self.pedestrians.values() {
            if let (Some(a), Some(b)) = (t.samples.first(), t.samples.last()) {
                span = Some(match span {
                    None => (a.0, b.0),
                    Some((lo, hi)) => (lo.min(a.0), hi.max(b.0)),
                });
            }
        }
        span
    }

    pub fn sample_count(&self) -> usize {
        self.pedestrians.values().map(|t| t.samples.len()).sum()
    }

    pub fn origins(&self) -> BTreeMap<u64, Origin> {
        self.pedestrians
            .iter()
            .map(|(&id, t)| (id, t.origin))
            .collect()
    }

    /// Writes the text format in meters, ordered by id then frame.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# id frame x y\n");
        for (id, t) in &self.pedestrians {
            for (f, p) in &t.samples {
                let _ = writeln!(s, "{id} {f} {} {}", p.x, p.y);
            }
        }
        s
    }
}

fn parse_frame(tok: &str) -> Option<i64> {
    tok.parse::<i64>().ok().or_else(|| {
        let v: f64 = tok.parse().ok()?;
        (v.fract() == 0.0 && v.abs() < 9e15).then_some(v as i64)
    })
}

/// Parses `id frame x y [z]` lines; `z` is ignored and coordinates are
/// scaled to meters. All origins start as [`Origin::Unknown`].
pub fn parse_trajectories<R: BufRead>(
    reader: R,
    units: Units,
    fps: f64,
    name: &str,
    source: Source,
) -> Result<TrajectorySet> {
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(Error::validation("fps must be positive"));
    }
    let scale = units.scale();
    let mut set = TrajectorySet::new(name, fps, source);
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < 4 {
            return Err(Error::parse(
                lineno,
                format!("expected `id frame x y [z]`, found {} columns", cols.len()),
            ));
        }
        let id: u64 = parse_frame(cols[0])
            .and_then(|v| u64::try_from(v).ok())
            .ok_or_else(|| Error::parse(lineno, format!("bad id `{}`", cols[0])))?;
        let frame = parse_frame(cols[1])
            .ok_or_else(|| Error::parse(lineno, format!("bad frame `{}`", cols[1])))?;
        let coord = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(lineno, format!("non-numeric coordinate `{s}`")))
        };
        let p = Point::new(coord(cols[2])? * scale, coord(cols[3])? * scale);
        let track = set.pedestrians.entry(id).or_insert_with(|| Track {
            origin: Origin::Unknown,
            samples: Vec::new(),
        });
        if let Some(&(last, _)) = track.samples.last() {
            if frame <= last {
                return Err(Error::parse(
                    lineno,
                    format!("frame {frame} of pedestrian {id} does not follow frame {last}"),
                ));
            }
        }
        track.samples.push((frame, p));
    }
    Ok(set)
}

/// Labels each pedestrian by the side of the junction centerline where it
/// was first recorded; within `epsilon_x` of the centerline it stays
/// Unknown. Returns the relabeled set and the number of Unknown pedestrians.
pub fn assign_origins(
    set: &TrajectorySet,
    scenario: &Scenario,
    epsilon_x: f64,
) -> (TrajectorySet, usize) {
    let center_x = scenario.target.midpoint().x;
    let mut out = set.clone();
    let mut unknown = 0;
    for t in out.pedestrians.values_mut() {
        t.origin = match t.first() {
            Some((_, p)) if p.x < center_x - epsilon_x => Origin::Left,
            Some((_, p)) if p.x > center_x + epsilon_x => Origin::Right,
            _ => Origin::Unknown,
        };
        if t.origin == Origin::Unknown {
            unknown += 1;
        }
    }
    (out, unknown)
}

/// Structured sidecar describing a normalized trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub format: String,
    pub name: String,
    pub fps: f64,
    pub source: Source,
    pub units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ScenarioConfig>,
    /// Agents still walking when the step budget ran out.
    #[serde(default)]
    pub unfinished: usize,
    pub origins: BTreeMap<u64, Origin>,
}

pub const META_FORMAT: &str = "tjunction-trajectory-meta v1";

impl TrajectoryMeta {
    pub fn for_set(set: &TrajectorySet) -> Self {
        TrajectoryMeta {
            format: META_FORMAT.into(),
            name: set.name.clone(),
            fps: set.fps,
            source: set.source,
            units: "m".into(),
            seed: None,
            split_left: None,
            config: None,
            unfinished: 0,
            origins: set.origins(),
        }
    }
}

/// `runs/a.traj` -> `runs/a.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// Writes the trajectory text file and its metadata sidecar.
pub fn write_trajectory_file(path: &Path, set: &TrajectorySet, meta: &TrajectoryMeta) -> Result<()> {
    std::fs::write(path, set.to_text()).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(meta).expect("metadata serializes");
    std::fs::write(&side, json + "\n").map_err(|e| Error::io(side, e))
}

pub fn read_meta(path: &Path) -> Result<Option<TrajectoryMeta>> {
    let side = sidecar_path(path);
    if !side.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Error::Json {
            context: side.display().to_string(),
            source: e,
        })
}

/// Reads a normalized trajectory file in meters. Name, frame rate, source
/// and origins come from the sidecar when present; otherwise `fps` is used
/// and origins stay Unknown.
pub fn read_trajectory_file(
    path: &Path,
    fps: f64,
) -> Result<(TrajectorySet, Option<TrajectoryMeta>)> {
    let meta = read_meta(path)?;
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let (name, fps, source) = match &meta {
        Some(m) => (m.name.clone(), m.fps, m.source),
        None => (
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            fps,
            Source::Experimental,
        ),
    };
    let mut set = parse_trajectories(
        std::io::BufReader::new(file),
        Units::Meters,
        fps,
        &name,
        source,
    )
    .map_err(|e| e.in_file(path))?;
    if let Some(m) = &meta {
        for (id, t) in set.pedestrians.iter_mut() {
            t.origin = m.origins.get(id).copied().unwrap_or(Origin::Unknown);
        }
    }
    Ok((set, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_tjunction, ScenarioConfig};
    use proptest::prelude::*;

    fn parse(text: &str, units: Units) -> Result<TrajectorySet> {
        parse_trajectories(text.as_bytes(), units, 16.0, "t", Source::Experimental)
    }

    #[test]
    fn converts_centimeters() {
        let s = parse("1 0 -350.0 120.0 165.0\n", Units::Centimeters).unwrap();
        let t = &s.pedestrians[&1];
        assert_eq!(t.samples.len(), 1);
        let (f, p) = t.samples[0];
        assert_eq!(f, 0);
        assert!((p.x + 3.5).abs() < 1e-12 && (p.y - 1.2).abs() < 1e-12);
        assert_eq!(t.origin, Origin::Unknown);
    }

    #[test]
    fn skips_comments() {
        let s = parse("# comment\n\n", Units::Meters).unwrap();
        assert!(s.pedestrians.is_empty());
    }

    #[test]
    fn reports_bad_lines() {
        let err = parse("1 0 abc 2.0\n", Units::Meters).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse("# h\n1 0 1.0\n", Units::Meters).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse("1 3 0 0\n1 3 0 0\n", Units::Meters).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse("1 0 0 0\n", Units::Meters).is_ok());
    }

    #[test]
    fn interleaved_frames_are_fine() {
        let s = parse("1 0 0 0\n2 0 1 1\n1 1 0 0.1\n2 1 1 1.1\n", Units::Meters).unwrap();
        assert_eq!(s.pedestrians.len(), 2);
        assert_eq!(s.frame_range(), Some((0, 1)));
        assert_eq!(s.pedestrians[&2].position_at(1), Some(Point::new(1.0, 1.1)));
    }

    #[test]
    fn origin_sign_rule() {
        let sc = build_tjunction(&ScenarioConfig::default()).unwrap();
        let s = parse("1 0 -3.5 1.2\n2 0 2.0 0.8\n3 0 0.0 0.5\n3 1 -4 0\n", Units::Meters).unwrap();
        let (l, unknown) = assign_origins(&s, &sc, DEFAULT_EPSILON_X);
        assert_eq!(l.pedestrians[&1].origin, Origin::Left);
        assert_eq!(l.pedestrians[&2].origin, Origin::Right);
        assert_eq!(l.pedestrians[&3].origin, Origin::Unknown);
        assert_eq!(unknown, 1);
        for (id, t) in &l.pedestrians {
            assert_eq!(t.samples, s.pedestrians[id].samples);
        }
    }

    #[test]
    fn sidecar_restores_origins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.traj");
        let mut s = parse("1 0 -3.5 1.2\n1 1 -3.4 1.25\n2 0 3 1\n", Units::Meters).unwrap();
        s.source = Source::Simulated;
        s.pedestrians.get_mut(&1).unwrap().origin = Origin::Left;
        s.pedestrians.get_mut(&2).unwrap().origin = Origin::Right;
        write_trajectory_file(&path, &s, &TrajectoryMeta::for_set(&s)).unwrap();
        let (back, meta) = read_trajectory_file(&path, 1.0).unwrap();
        assert!(meta.is_some());
        assert_eq!(back, s);
    }

    fn arb_set() -> impl Strategy<Value = TrajectorySet> {
        prop::collection::btree_map(
            0u64..1000,
            prop::collection::vec((1i64..5, -1e4f64..1e4, -1e4f64..1e4), 1..8),
            0..6,
        )
        .prop_map(|m| {
            let mut s = TrajectorySet::new("p", 16.0, Source::Experimental);
            for (id, steps) in m {
                let mut f = -3;
                let samples = steps
                    .into_iter()
                    .map(|(df, x, y)| {
                        f += df;
                        (f, Point::new(x, y))
                    })
                    .collect();
                s.pedestrians.insert(
                    id,
                    Track {
                        origin: Origin::Unknown,
                        samples,
                    },
                );
            }
            s
        })
    }

    proptest! {
        #[test]
        fn text_round_trips(s in arb_set()) {
            let back = parse(&s.to_text(), Units::Meters).unwrap();
            prop_assert_eq!(back.pedestrians, s.pedestrians);
        }

        #[test]
        fn centimeters_equal_prescaled_meters(x in -1e4f64..1e4, y in -1e4f64..1e4) {
            let cm = parse(&format!("4 2 {x} {y} 170\n"), Units::Centimeters).unwrap();
            let m = parse(&format!("4 2 {} {}\n", x / 100.0, y / 100.0), Units::Meters).unwrap();
            let (a, b) = (cm.pedestrians[&4].samples[0].1, m.pedestrians[&4].samples[0].1);
            prop_assert!((a.x - b.x).abs() <= 1e-12 * x.abs().max(1.0));
            prop_assert!((a.y - b.y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
}
