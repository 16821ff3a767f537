//! Training and evaluation protocol: split, per-origin forests, normalized
//! predictions and relative errors over repeated runs.

use crate::error::{Error, Result};
use crate::forest::{fit_forest, Forest, ForestParams, Matrix};
use crate::heatmap::{Dataset, GridMeta};
use crate::rng::{derive_seed, seeded};
use rand::seq::SliceRandom;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

/// Largest possible distance between two distributions in percent.
pub const E_MAX: f64 = 141.421_356_237_309_5;
pub const MODELS_FORMAT: &str = "# origin-models v1";
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sim,
    Exp,
    Hybrid,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sim => "sim",
            Mode::Exp => "exp",
            Mode::Hybrid => "hybrid",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim" => Ok(Mode::Sim),
            "exp" => Ok(Mode::Exp),
            "hybrid" => Ok(Mode::Hybrid),
            _ => Err(Error::validation(format!(
                "unknown mode `{s}` (expected sim, exp or hybrid)"
            ))),
        }
    }
}

/// Seeded permutation; the first `round(fraction * n)` indices train.
pub fn shuffle_split(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 5 {
        return Err(Error::validation(format!("too few samples: {n} (need at least 5)")));
    }
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::validation("train fraction must lie in [0, 1]"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(seed));
    let k = (train_fraction * n as f64).round() as usize;
    let test = idx.split_off(k);
    Ok((idx, test))
}

pub fn features(ds: &Dataset) -> Result<Matrix> {
    let rows: Vec<&[f64]> = ds.samples.iter().map(|s| s.values.as_slice()).collect();
    if rows.is_empty() {
        return Matrix::from_rows::<&[f64]>(&[]);
    }
    Matrix::from_rows(&rows)
}

pub fn targets(ds: &Dataset) -> (Vec<f64>, Vec<f64>) {
    ds.samples
        .iter()
        .map(|s| (100.0 * s.frac_left(), 100.0 * s.frac_right()))
        .unzip()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OriginModels {
    pub grid: GridMeta,
    pub left: Forest,
    pub right: Forest,
}

const LEFT_STREAM: u64 = 0x4c;
const RIGHT_STREAM: u64 = 0x52;

/// One forest per origin on the same features.
pub fn train_origin_models(train: &Dataset, params: &ForestParams) -> Result<OriginModels> {
    if train.is_empty() {
        return Err(Error::validation("cannot train on an empty dataset"));
    }
    let x = features(train)?;
    let (yl, yr) = targets(train);
    let left = fit_forest(
        &x,
        &yl,
        &ForestParams {
            seed: derive_seed(params.seed, LEFT_STREAM),
            ..*params
        },
    )?;
    let right = fit_forest(
        &x,
        &yr,
        &ForestParams {
            seed: derive_seed(params.seed, RIGHT_STREAM),
            ..*params
        },
    )?;
    Ok(OriginModels {
        grid: train.meta,
        left,
        right,
    })
}

/// Clamps both raw predictions to [0, 100] and rescales them to sum to 100;
/// (50, 50) when both clamp to zero.
pub fn normalize(raw_left: f64, raw_right: f64) -> (f64, f64) {
    let l = if raw_left.is_nan() { 0.0 } else { raw_left.clamp(0.0, 100.0) };
    let r = if raw_right.is_nan() { 0.0 } else { raw_right.clamp(0.0, 100.0) };
    let s = l + r;
    if s <= 0.0 {
        return (50.0, 50.0);
    }
    let pl = (100.0 * l / s).min(100.0);
    (pl, 100.0 - pl)
}

impl OriginModels {
    pub fn predict_distribution(&self, values: &[f64]) -> Result<(f64, f64)> {
        Ok(normalize(self.left.predict(values)?, self.right.predict(values)?))
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<(f64, f64)>> {
        if !self.grid.compatible(&ds.meta) {
            return Err(Error::validation(
                "dataset grid does not match the grid the models were trained on",
            ));
        }
        let x = features(ds)?;
        if ds.is_empty() {
            return Ok(Vec::new());
        }
        let l = self.left.predict_matrix(&x)?;
        let r = self.right.predict_matrix(&x)?;
        Ok(l.into_iter().zip(r).map(|(a, b)| normalize(a, b)).collect())
    }

    pub fn to_text(&self) -> String {
        format!(
            "{MODELS_FORMAT}\n{}\n[left]\n{}[right]\n{}",
            self.grid.header(),
            self.left.to_text(),
            self.right.to_text()
        )
    }

    pub fn parse(text: &str) -> Result<OriginModels> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MODELS_FORMAT) {
            return Err(Error::parse(1, format!("expected `{MODELS_FORMAT}`")));
        }
        let grid = GridMeta::from_header(lines.next().unwrap_or_default())
            .map_err(|e| Error::parse(2, e.to_string()))?;
        let body: Vec<&str> = text.lines().collect();
        let find = |tag: &str| {
            body.iter()
                .position(|l| l.trim() == tag)
                .ok_or_else(|| Error::parse(1, format!("missing `{tag}` section")))
        };
        let (li, ri) = (find("[left]")?, find("[right]")?);
        if ri < li {
            return Err(Error::parse(ri + 1, "`[right]` before `[left]`"));
        }
        let left = Forest::parse(&body[li + 1..ri].join("\n"), li + 2)?;
        let right = Forest::parse(&body[ri + 1..].join("\n"), ri + 2)?;
        if left.n_features != grid.len() || right.n_features != grid.len() {
            return Err(Error::parse(2, "forest feature count does not match the grid"));
        }
        Ok(OriginModels { grid, left, right })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<OriginModels> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        OriginModels::parse(&text).map_err(|e| e.in_file(path))
    }
}

/// Euclidean distance of two percentage pairs relative to [`E_MAX`], in percent.
pub fn relative_error(y: (f64, f64), y_hat: (f64, f64)) -> f64 {
    100.0 * (y.0 - y_hat.0).hypot(y.1 - y_hat.1) / E_MAX
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub mean_error: f64,
    pub stdev_error: f64,
    pub oob_r2_left: f64,
    pub oob_r2_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mode: Mode,
    pub runs: Vec<RunResult>,
}

fn mean_stdev(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

impl EvalReport {
    pub fn mean_of_means(&self) -> f64 {
        mean_stdev(&self.runs.iter().map(|r| r.mean_error).collect::<Vec<_>>()).0
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("mode,run,seed,n_train,n_test,mean_error,stdev_error,oob_r2_left,oob_r2_right\n");
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.mode.as_str(),
                r.run,
                r.seed,
                r.n_train,
                r.n_test,
                r.mean_error,
                r.stdev_error,
                r.oob_r2_left,
                r.oob_r2_right
            );
        }
        out
    }

    /// One column per run, as in a results table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<26}", format!("mode {}", self.mode.as_str()));
        for r in &self.runs {
            let _ = write!(out, "{:>10}", format!("Run {}", r.run + 1));
        }
        out.push('\n');
        let mut row = |name: &str, f: &dyn Fn(&RunResult) -> String| {
            let _ = write!(out, "{name:<26}");
            for r in &self.runs {
                let _ = write!(out, "{:>10}", f(r));
            }
            out.push('\n');
        };
        row("Mean Euclidean error", &|r| format!("{:.2}%", r.mean_error));
        row("Stdev Euclidean error", &|r| format!("{:.2}%", r.stdev_error));
        row("OOB R2 left", &|r| format!("{:.3}", r.oob_r2_left));
        row("OOB R2 right", &|r| format!("{:.3}", r.oob_r2_right));
        row("Train / test samples", &|r| format!("{}/{}", r.n_train, r.n_test));
        out
    }
}

/// Repeats split, training and testing `n_runs` times with seeds
/// `base_seed + run`. In hybrid mode the models train on a fresh 80 % of
/// `train_source` each run and are tested on all of `test_source`.
pub fn run_experiment(
    mode: Mode,
    train_source: &Dataset,
    test_source: &Dataset,
    n_runs: usize,
    base_seed: u64,
    forest: &ForestParams,
) -> Result<EvalReport> {
    if !train_source.meta.compatible(&test_source.meta) {
        return Err(Error::validation(format!(
            "grid mismatch: training data is {}x{} cells of {} m, test data is {}x{} cells of {} m",
            train_source.meta.nx,
            train_source.meta.ny,
            train_source.meta.h,
            test_source.meta.nx,
            test_source.meta.ny,
            test_source.meta.h
        )));
    }
    let mut runs = Vec::with_capacity(n_runs);
    for run in 0..n_runs {
        let seed = base_seed + run as u64;
        let (tr, te) = shuffle_split(train_source.len(), DEFAULT_TRAIN_FRACTION, seed)?;
        let (train, test) = match mode {
            Mode::Sim | Mode::Exp => (train_source.subset(&tr), train_source.subset(&te)),
            Mode::Hybrid => (train_source.subset(&tr), test_source.clone()),
        };
        let params = ForestParams { seed, ..*forest };
        let models = train_origin_models(&train, &params)?;
        let x = features(&train)?;
        let (yl, yr) = targets(&train);
        let oob_l = models.left.oob_scores(&x, &yl)?;
        let oob_r = models.right.oob_scores(&x, &yr)?;
        let preds = models.predict_dataset(&test)?;
        let errors: Vec<f64> = test
            .samples
            .iter()
            .zip(&preds)
            .map(|(s, &p)| relative_error((100.0 * s.frac_left(), 100.0 * s.frac_right()), p))
            .collect();
        let (mean_error, stdev_error) = mean_stdev(&errors);
        runs.push(RunResult {
            run,
            seed,
            n_train: train.len(),
            n_test: test.len(),
            mean_error,
            stdev_error,
            oob_r2_left: oob_l.r2,
            oob_r2_right: oob_r.r2,
        });
    }
    Ok(EvalReport { mode, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::heatmap::HeatmapSample;
    use crate::ingest::Source;
    use proptest::prelude::*;

    fn toy(n: usize, label: impl Fn(usize) -> (u32, u32)) -> Dataset {
        let meta = GridMeta::for_area(Rect::new(0.0, 0.0, 0.3, 0.1), 0.1).unwrap();
        let mut ds = Dataset::new(meta);
        for i in 0..n {
            let (l, r) = label(i);
            let t = l as f64 / (l + r) as f64;
            ds.samples.push(HeatmapSample {
                run_name: "toy".into(),
                frame: i as i64,
                source: Source::Simulated,
                n_left: l,
                n_right: r,
                values: vec![t + 0.001 * i as f64, (i as f64 * 0.37).sin().abs(), 1.0 - t],
            });
        }
        ds
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = shuffle_split(10, 0.8, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(shuffle_split(10, 0.8, 1).unwrap(), (tr, te));
        assert!(shuffle_split(4, 0.8, 1).unwrap_err().to_string().contains("too few samples"));
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize(30.0, 90.0), (25.0, 75.0));
        assert_eq!(normalize(0.0, 0.0), (50.0, 50.0));
        assert_eq!(normalize(-10.0, 50.0), (0.0, 100.0));
    }

    #[test]
    fn error_examples() {
        assert_eq!(relative_error((30.0, 70.0), (30.0, 70.0)), 0.0);
        assert!((relative_error((100.0, 0.0), (0.0, 100.0)) - 100.0).abs() < 1e-12);
        assert!((relative_error((100.0, 0.0), (50.0, 50.0)) - 50.0).abs() < 1e-12);
        assert!((E_MAX - (2.0f64 * 100.0 * 100.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_left_target() {
        let ds = toy(20, |_| (3, 0));
        let m = train_origin_models(&ds, &ForestParams { n_trees: 5, ..Default::default() }).unwrap();
        for s in &ds.samples {
            assert_eq!(m.left.predict(&s.values).unwrap(), 100.0);
        }
        let empty = Dataset::new(ds.meta);
        assert!(train_origin_models(&empty, &ForestParams::default()).is_err());
    }

    #[test]
    fn complementary_forests() {
        let ds = toy(50, |i| ((i % 5) as u32, (4 - i % 5) as u32 + 1));
        let x = features(&ds).unwrap();
        let (yl, yr) = targets(&ds);
        let all: Vec<usize> = (0..ds.len()).collect();
        let tp = crate::forest::TreeParams { mtry: 3, min_leaf: 1 };
        let tl = crate::forest::fit_tree(&x, &yl, &all, &mut seeded(1), tp).unwrap();
        let tr = crate::forest::fit_tree(&x, &yr, &all, &mut seeded(2), tp).unwrap();
        for s in &ds.samples {
            assert!((tl.predict(&s.values) + tr.predict(&s.values) - 100.0).abs() < 1e-9);
        }
        let m = train_origin_models(&ds, &ForestParams { n_trees: 30, min_leaf: 1, seed: 4, ..Default::default() }).unwrap();
        for s in &ds.samples {
            let l = m.left.predict(&s.values).unwrap();
            let r = m.right.predict(&s.values).unwrap();
            assert!((l + r - 100.0).abs() < 10.0, "{l} + {r}");
        }
    }

    #[test]
    fn models_round_trip_and_grid_check() {
        let ds = toy(30, |i| ((i % 4) as u32, 1));
        let m = train_origin_models(&ds, &ForestParams { n_trees: 3, ..Default::default() }).unwrap();
        let back = OriginModels::parse(&m.to_text()).unwrap();
        assert_eq!(back.to_text(), m.to_text());
        assert_eq!(back.predict_dataset(&ds).unwrap(), m.predict_dataset(&ds).unwrap());
        let other = Dataset::new(GridMeta::for_area(Rect::new(0.0, 0.0, 0.2, 0.1), 0.1).unwrap());
        assert!(m.predict_dataset(&other).is_err());
    }

    #[test]
    fn experiment_shape() {
        let ds = toy(40, |i| ((i % 3) as u32, ((i / 3) % 2) as u32 + 1));
        let p = ForestParams { n_trees: 4, ..Default::default() };
        let rep = run_experiment(Mode::Sim, &ds, &ds, 3, 10, &p).unwrap();
        assert_eq!(rep.runs.len(), 3);
        assert_eq!(rep.runs[2].seed, 12);
        assert_eq!((rep.runs[0].n_train, rep.runs[0].n_test), (32, 8));
        for r in &rep.runs {
            assert!((0.0..=100.0).contains(&r.mean_error) && r.stdev_error >= 0.0);
        }
        assert_eq!(run_experiment(Mode::Sim, &ds, &ds, 3, 10, &p).unwrap(), rep);
        let hyb = run_experiment(Mode::Hybrid, &ds, &ds, 2, 0, &p).unwrap();
        assert_eq!(hyb.runs[0].n_test, 40);
        let bad = Dataset::new(GridMeta::for_area(Rect::new(0.0, 0.0, 0.2, 0.1), 0.1).unwrap());
        assert!(run_experiment(Mode::Hybrid, &ds, &bad, 1, 0, &p).is_err());
        assert!(rep.to_csv().starts_with("mode,run,seed,n_train,n_test,mean_error"));
        assert!(rep.to_table().contains("Mean Euclidean error"));
    }

    proptest! {
        #[test]
        fn normalized_sums_to_100(a in -500.0..500.0f64, b in -500.0..500.0f64) {
            let (l, r) = normalize(a, b);
            prop_assert!((l + r - 100.0).abs() < 1e-9);
            prop_assert!((0.0..=100.0).contains(&l) && (0.0..=100.0).contains(&r));
        }

        #[test]
        fn error_is_symmetric_and_bounded(a in 0.0..100.0f64, b in 0.0..100.0f64) {
            let y = (a, 100.0 - a);
            let z = (b, 100.0 - b);
            let e = relative_error(y, z);
            prop_assert!((0.0..=100.0 + 1e-9).contains(&e));
            prop_assert_eq!(e, relative_error(z, y));
        }
    }
}
