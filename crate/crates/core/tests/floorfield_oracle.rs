//! Fast marching against the graph-search oracle on every preset layout.

use tjunction::floorfield::*;
use tjunction::scenario::*;

const H: f64 = 0.1;
const ORACLE_RADIUS: usize = 5;

#[test]
fn fast_marching_tracks_oracle_on_all_presets() {
    for c in scenario_presets() {
        let s = build_tjunction(&c).unwrap();
        for w in [0.0, 0.3] {
            let p = FloorFieldParams::with_weight(w);
            let f = travel_time_field(&s, &p).unwrap();
            let d = dijkstra_oracle(&s, &p, ORACLE_RADIUS).unwrap();
            let linf = linf_discrepancy(&f, &d).expect("same reachable cells");
            assert!(linf <= 2.0 * H, "{} w_obs={w}: {linf}", c.name);
        }
    }
}

#[test]
fn travel_time_is_monotone_in_obstacle_weight() {
    let s = build_tjunction(&preset("240-80-240").unwrap()).unwrap();
    let mut prev: Option<GridField> = None;
    for w in [0.0, 0.1, 0.3, 0.9] {
        let f = travel_time_field(&s, &FloorFieldParams::with_weight(w)).unwrap();
        if let Some(p) = &prev {
            for (a, b) in p.values.iter().zip(&f.values) {
                assert!(b >= a || (a.is_infinite() && b.is_infinite()));
            }
        }
        prev = Some(f);
    }
}

#[test]
fn steepest_descent_reaches_target() {
    let s = build_tjunction(&preset("240-50-240").unwrap()).unwrap();
    let f = travel_time_field(&s, &FloorFieldParams::default()).unwrap();
    let budget = f.nx * f.ny;
    for start in (0..f.values.len()).step_by(97) {
        if f.values[start].is_infinite() {
            continue;
        }
        let mut idx = start;
        let mut steps = 0;
        while f.values[idx] > 0.0 {
            let (i, j) = ((idx % f.nx) as i64, (idx / f.nx) as i64);
            let mut best = idx;
            for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= f.nx as i64 || b >= f.ny as i64 {
                    continue;
                }
                let n = (b as usize) * f.nx + a as usize;
                if f.values[n] < f.values[best] {
                    best = n;
                }
            }
            assert_ne!(best, idx, "local minimum at cell {idx}");
            idx = best;
            steps += 1;
            assert!(steps < budget);
        }
    }
}
