//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Each function takes plain numbers and strings and returns a JSON string;
//! errors come back as `{"error": "..."}` so the page never has to catch.

use serde::Serialize;
use serde_json::{json, Value};
use tjunction::floorfield::{travel_time_field, FloorFieldParams, GridField};
use tjunction::forest::ForestParams;
use tjunction::heatmap::{build_dataset, dedup_consecutive, frame_positions, GridMeta, DEFAULT_SIGMA};
use tjunction::ingest::Origin;
use tjunction::pipeline::{relative_error, shuffle_split, train_origin_models};
use tjunction::scenario::{build_tjunction, observation_area_preset, preset, ScenarioConfig};
use tjunction::simulator::{run_simulation, SimParams};
use wasm_bindgen::prelude::*;

fn config(name: &str) -> tjunction::Result<ScenarioConfig> {
    preset(name).ok_or_else(|| tjunction::Error::Validation(format!("unknown preset `{name}`")))
}

fn wrap(r: tjunction::Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn field_json(f: &GridField) -> Value {
    // JSON has no infinity; unreachable cells become null.
    let values: Vec<Option<f64>> = f.values.iter().map(|v| v.is_finite().then_some(*v)).collect();
    json!({ "x0": f.x0, "y0": f.y0, "h": f.h, "nx": f.nx, "ny": f.ny, "values": values })
}

fn geometry(cfg: &ScenarioConfig) -> tjunction::Result<Value> {
    let text = build_tjunction(cfg)?.to_geometry_json();
    Ok(serde_json::from_str(&text).expect("geometry export is valid JSON"))
}

/// Travel-time field of a preset for a wall-avoidance weight.
#[wasm_bindgen]
pub fn floor_field(preset_name: &str, w_obs: f64) -> String {
    wrap((|| {
        let cfg = config(preset_name)?;
        let f = travel_time_field(&build_tjunction(&cfg)?, &FloorFieldParams::with_weight(w_obs))?;
        Ok(json!({ "geometry": geometry(&cfg)?, "field": field_json(&f) }))
    })())
}

#[derive(Serialize)]
struct Frame {
    frame: i64,
    /// `[x, y, origin]` with origin 0 left, 1 right, 2 unknown.
    agents: Vec<(f32, f32, u8)>,
}

/// One simulation run: positions every `every` frames and the area-1
/// heatmaps with their labels.
#[wasm_bindgen]
pub fn simulate(preset_name: &str, agents: usize, split_left: f64, seed: u64, every: usize) -> String {
    wrap((|| {
        let mut cfg = config(preset_name)?;
        cfg.agent_count = agents;
        cfg.split_left = split_left;
        cfg.seed = seed;
        cfg.validate()?;
        let out = run_simulation(&cfg, &SimParams::default())?;
        let set = &out.trajectories;
        let mut frames = Vec::new();
        if let Some((a, b)) = set.frame_range() {
            for f in (a..=b).step_by(every.max(1)) {
                let agents = frame_positions(set, f)
                    .into_iter()
                    .map(|(p, o)| {
                        let o = match o {
                            Origin::Left => 0,
                            Origin::Right => 1,
                            Origin::Unknown => 2,
                        };
                        (p.x as f32, p.y as f32, o)
                    })
                    .collect();
                frames.push(Frame { frame: f, agents });
            }
        }
        let meta = GridMeta::for_area(observation_area_preset(1)?, 0.1)?;
        let ds = build_dataset(std::slice::from_ref(set), meta, DEFAULT_SIGMA, 1)?;
        let heatmaps: Vec<Value> = ds
            .samples
            .iter()
            .map(|s| json!({ "frame": s.frame, "left": s.n_left, "right": s.n_right, "values": s.values }))
            .collect();
        Ok(json!({
            "geometry": geometry(&cfg)?,
            "frames": frames,
            "unfinished": out.unfinished,
            "grid": { "nx": ds.meta.nx, "ny": ds.meta.ny, "h": ds.meta.h, "area": ds.meta.area },
            "heatmaps": heatmaps,
        }))
    })())
}

/// Simulates `runs` runs with left fractions cycling through 0.1..0.9,
/// trains on 80% of the area-1 heatmaps and reports every test prediction.
#[wasm_bindgen]
pub fn error_explorer(preset_name: &str, agents: usize, runs: usize, trees: usize, seed: u64) -> String {
    wrap((|| {
        const SPLITS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
        let base = config(preset_name)?;
        let mut sets = Vec::new();
        for i in 0..runs.max(1) {
            let mut cfg = base.clone();
            cfg.name = format!("{}-{}", base.name, i + 1);
            cfg.agent_count = agents;
            cfg.split_left = SPLITS[i % SPLITS.len()];
            cfg.seed = seed + i as u64;
            sets.push(run_simulation(&cfg, &SimParams::default())?.trajectories);
        }
        let meta = GridMeta::for_area(observation_area_preset(1)?, 0.1)?;
        let ds = dedup_consecutive(&build_dataset(&sets, meta, DEFAULT_SIGMA, 1)?);
        let (tr, te) = shuffle_split(ds.len(), 0.8, seed)?;
        let params = ForestParams { n_trees: trees.max(1), seed, ..ForestParams::default() };
        let (train, test) = (ds.subset(&tr), ds.subset(&te));
        let models = train_origin_models(&train, &params)?;
        let preds = models.predict_dataset(&test)?;
        let rows: Vec<Value> = test
            .samples
            .iter()
            .zip(&preds)
            .map(|(s, &p)| {
                let y = (100.0 * s.frac_left(), 100.0 * s.frac_right());
                json!({
                    "run": s.run_name, "frame": s.frame,
                    "true_left": y.0, "pred_left": p.0,
                    "error": relative_error(y, p),
                })
            })
            .collect();
        let mean = rows.iter().map(|r| r["error"].as_f64().unwrap()).sum::<f64>() / rows.len().max(1) as f64;
        Ok(json!({ "train": train.len(), "test": test.len(), "mean_error": mean, "rows": rows }))
    })())
}
