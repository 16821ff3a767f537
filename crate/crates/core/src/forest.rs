//! Regression forests of CART trees with bootstrap aggregation.

use crate::error::{Error, Result};
use crate::rng::{rng_for, SimRng};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use std::fmt::Write as _;

pub const FOREST_FORMAT: &str = "# forest v1";
const PURE_VARIANCE: f64 = 1e-12;

/// Dense feature matrix stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    p: usize,
    cols: Vec<f64>,
}

impl Matrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut cols = vec![0.0; n * p];
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != p {
                return Err(Error::validation(format!(
                    "row {i} has {} features, expected {p}",
                    r.len()
                )));
            }
            for (f, v) in r.iter().enumerate() {
                cols[f * n + i] = *v;
            }
        }
        Ok(Matrix { n, p, cols })
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn features(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, f: usize) -> f64 {
        self.cols[f * self.n + i]
    }

    pub fn column(&self, f: usize) -> &[f64] {
        &self.cols[f * self.n..(f + 1) * self.n]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|f| self.get(i, f)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    /// Samples with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { value: f64 },
}

/// Nodes in preorder; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    fn predict_row(&self, x: &Matrix, i: usize) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if x.get(i, feature) <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, k: usize) -> usize {
            match t.nodes[k] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    pub fn leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    fn to_tokens(&self) -> String {
        let mut out = String::new();
        for (k, n) in self.nodes.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            match n {
                TreeNode::Split {
                    feature, threshold, ..
                } => {
                    let _ = write!(out, "({feature},{threshold})");
                }
                TreeNode::Leaf { value } => {
                    let _ = write!(out, "leaf({value})");
                }
            }
        }
        out
    }

    fn from_tokens(s: &str, p: usize) -> std::result::Result<Tree, String> {
        enum Tok {
            Split(usize, f64),
            Leaf(f64),
        }
        let mut toks = Vec::new();
        for t in s.split_whitespace() {
            if let Some(v) = t.strip_prefix("leaf(").and_then(|r| r.strip_suffix(')')) {
                toks.push(Tok::Leaf(v.parse().map_err(|_| format!("bad leaf `{t}`"))?));
            } else if let Some((f, thr)) = t
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|r| r.split_once(','))
            {
                let f: usize = f.parse().map_err(|_| format!("bad split `{t}`"))?;
                if f >= p {
                    return Err(format!("split feature {f} out of range"));
                }
                toks.push(Tok::Split(f, thr.parse().map_err(|_| format!("bad split `{t}`"))?));
            } else {
                return Err(format!("bad node `{t}`"));
            }
        }
        // Rebuild child links from the preorder sequence.
        fn build(toks: &[Tok], pos: &mut usize, out: &mut Vec<TreeNode>) -> std::result::Result<usize, String> {
            let k = out.len();
            match toks.get(*pos).ok_or("truncated tree")? {
                Tok::Leaf(v) => {
                    *pos += 1;
                    out.push(TreeNode::Leaf { value: *v });
                }
                Tok::Split(f, t) => {
                    *pos += 1;
                    out.push(TreeNode::Leaf { value: 0.0 });
                    let left = build(toks, pos, out)?;
                    let right = build(toks, pos, out)?;
                    out[k] = TreeNode::Split {
                        feature: *f,
                        threshold: *t,
                        left,
                        right,
                    };
                }
            }
            Ok(k)
        }
        let mut nodes = Vec::with_capacity(toks.len());
        let mut pos = 0;
        build(&toks, &mut pos, &mut nodes)?;
        if pos != toks.len() {
            return Err("trailing nodes after tree".into());
        }
        Ok(Tree { nodes })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub mtry: usize,
    pub min_leaf: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(p / 3)`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 50,
            mtry: None,
            min_leaf: 5,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn resolve_mtry(&self, p: usize) -> Result<usize> {
        let m = self.mtry.unwrap_or(p.div_ceil(3));
        if m == 0 || m > p {
            return Err(Error::validation(format!(
                "mtry must be between 1 and {p}, got {m}"
            )));
        }
        Ok(m)
    }
}

/// Row order of every feature column, ascending by value.
pub struct Presorted {
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &Matrix) -> Self {
        let order = (0..x.p)
            .into_par_iter()
            .map(|f| {
                let col = x.column(f);
                let mut o: Vec<u32> = (0..x.n as u32).collect();
                o.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                o
            })
            .collect();
        Presorted { order }
    }
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    params: TreeParams,
    /// Per feature, the node's rows sorted by that feature, plus a last
    /// list sorted by row index; a node owns the same range in every list.
    order: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    features: Vec<usize>,
    nodes: Vec<TreeNode>,
}

struct Best {
    proxy: f64,
    feature: usize,
    threshold: f64,
    n_left: usize,
}

impl Grower<'_> {
    fn grow(&mut self, lo: usize, hi: usize, rng: &mut SimRng) -> usize {
        let k = self.nodes.len();
        let n = hi - lo;
        let rows = &self.order[self.x.p][lo..hi];
        let (mut s, mut s2) = (0.0, 0.0);
        for &r in rows {
            let v = self.y[r as usize];
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let sse = (s2 - s * s / n as f64).max(0.0);
        self.nodes.push(TreeNode::Leaf { value: mean });
        if n < 2 * self.params.min_leaf || n < 2 || sse / (n as f64) < PURE_VARIANCE {
            return k;
        }
        let Some(best) = self.find_split(lo, hi, s, rng) else {
            return k;
        };
        let child_sse = s2 - best.proxy;
        if !(child_sse < sse - PURE_VARIANCE) {
            return k;
        }
        let mid = lo + best.n_left;
        self.partition(lo, hi, best.feature, best.threshold);
        let left = self.grow(lo, mid, rng);
        let right = self.grow(mid, hi, rng);
        self.nodes[k] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        k
    }

    /// Maximizes `S_l^2/n_l + S_r^2/n_r`, which minimizes the summed child
    /// squared error. Ties go to the lowest feature, then lowest threshold.
    fn find_split(&mut self, lo: usize, hi: usize, total: f64, rng: &mut SimRng) -> Option<Best> {
        let n = hi - lo;
        let m = self.params.min_leaf.max(1);
        self.features.shuffle(rng);
        let mut best: Option<Best> = None;
        let mut tried = 0;
        for fi in 0..self.features.len() {
            if tried >= self.params.mtry && best.is_some() {
                break;
            }
            let f = self.features[fi];
            let col = self.x.column(f);
            let ord = &self.order[f][lo..hi];
            if col[ord[0] as usize] == col[ord[n - 1] as usize] {
                continue;
            }
            tried += 1;
            let mut sl = 0.0;
            for i in 0..n - 1 {
                sl += self.y[ord[i] as usize];
                let nl = i + 1;
                let (a, b) = (col[ord[i] as usize], col[ord[i + 1] as usize]);
                if a == b || nl < m || n - nl < m {
                    continue;
                }
                let sr = total - sl;
                let proxy = sl * sl / nl as f64 + sr * sr / (n - nl) as f64;
                let threshold = a + (b - a) / 2.0;
                let better = match &best {
                    None => true,
                    Some(bb) => {
                        proxy > bb.proxy
                            || (proxy == bb.proxy
                                && (f < bb.feature || (f == bb.feature && threshold < bb.threshold)))
                    }
                };
                if better {
                    best = Some(Best {
                        proxy,
                        feature: f,
                        threshold,
                        n_left: nl,
                    });
                }
            }
        }
        best
    }

    fn partition(&mut self, lo: usize, hi: usize, feature: usize, threshold: f64) {
        let col = self.x.column(feature);
        for &r in &self.order[feature][lo..hi] {
            self.goes_left[r as usize] = col[r as usize] <= threshold;
        }
        for ord in self.order.iter_mut() {
            let seg = &mut ord[lo..hi];
            self.scratch.clear();
            let mut w = 0;
            for i in 0..seg.len() {
                let r = seg[i];
                if self.goes_left[r as usize] {
                    seg[w] = r;
                    w += 1;
                } else {
                    self.scratch.push(r);
                }
            }
            seg[w..].copy_from_slice(&self.scratch);
        }
    }
}

fn grow_tree(
    x: &Matrix,
    y: &[f64],
    sample_indices: &[usize],
    presorted: &Presorted,
    params: TreeParams,
    rng: &mut SimRng,
) -> Tree {
    let mut mult = vec![0u32; x.n];
    for &i in sample_indices {
        mult[i] += 1;
    }
    let expand = |o: &mut dyn Iterator<Item = u32>| {
        let mut v = Vec::with_capacity(sample_indices.len());
        for r in o {
            for _ in 0..mult[r as usize] {
                v.push(r);
            }
        }
        v
    };
    let mut order: Vec<Vec<u32>> = presorted
        .order
        .iter()
        .map(|o| expand(&mut o.iter().copied()))
        .collect();
    order.push(expand(&mut (0..x.n as u32)));
    let mut g = Grower {
        x,
        y,
        params,
        order,
        goes_left: vec![false; x.n],
        scratch: Vec::new(),
        features: (0..x.p).collect(),
        nodes: Vec::new(),
    };
    if sample_indices.is_empty() {
        return Tree {
            nodes: vec![TreeNode::Leaf { value: 0.0 }],
        };
    }
    g.grow(0, sample_indices.len(), rng);
    Tree { nodes: g.nodes }
}

/// Grows one tree on the rows listed in `sample_indices` (repeats allowed).
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    sample_indices: &[usize],
    rng: &mut SimRng,
    params: TreeParams,
) -> Result<Tree> {
    check_xy(x, y)?;
    if sample_indices.is_empty() {
        return Err(Error::validation("cannot fit a tree on zero samples"));
    }
    if params.mtry == 0 || params.mtry > x.p.max(1) {
        return Err(Error::validation("mtry must be between 1 and the feature count"));
    }
    if let Some(&bad) = sample_indices.iter().find(|&&i| i >= x.n) {
        return Err(Error::validation(format!("sample index {bad} out of range")));
    }
    let pre = Presorted::new(x);
    Ok(grow_tree(x, y, sample_indices, &pre, params, rng))
}

fn check_xy(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.n != y.len() {
        return Err(Error::validation(format!(
            "{} feature rows but {} targets",
            x.n,
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) || x.cols.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("features and targets must be finite"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub mtry: usize,
    pub min_leaf: usize,
    pub seed: u64,
    /// Rows left out of each tree's bootstrap sample, ascending.
    pub oob_indices: Vec<Vec<usize>>,
}

/// Bootstrap sample of `n` rows for tree `t` and the tree's RNG.
fn bootstrap(n: usize, seed: u64, t: usize) -> (Vec<usize>, SimRng) {
    let mut rng = rng_for(seed, t as u64);
    let draws = (0..n).map(|_| rng.random_range(0..n)).collect();
    (draws, rng)
}

pub fn fit_forest(x: &Matrix, y: &[f64], params: &ForestParams) -> Result<Forest> {
    check_xy(x, y)?;
    if x.n < 2 {
        return Err(Error::validation("a forest needs at least 2 samples"));
    }
    if params.n_trees == 0 {
        return Err(Error::validation("n_trees must be at least 1"));
    }
    if params.min_leaf == 0 {
        return Err(Error::validation("min_leaf must be at least 1"));
    }
    let mtry = params.resolve_mtry(x.p)?;
    let tp = TreeParams {
        mtry,
        min_leaf: params.min_leaf,
    };
    let pre = Presorted::new(x);
    let fitted: Vec<(Tree, Vec<usize>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let (draws, mut rng) = bootstrap(x.n, params.seed, t);
            let mut seen = vec![false; x.n];
            for &d in &draws {
                seen[d] = true;
            }
            let oob = (0..x.n).filter(|&i| !seen[i]).collect();
            (grow_tree(x, y, &draws, &pre, tp, &mut rng), oob)
        })
        .collect();
    let (trees, oob_indices) = fitted.into_iter().unzip();
    Ok(Forest {
        trees,
        n_features: x.p,
        mtry,
        min_leaf: params.min_leaf,
        seed: params.seed,
        oob_indices,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OobScores {
    pub mse: f64,
    pub r2: f64,
    /// Samples out of bag for at least one tree.
    pub included: usize,
    pub excluded: usize,
}

impl Forest {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::validation(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        Ok(self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64)
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.p != self.n_features {
            return Err(Error::validation(format!(
                "expected {} features, got {}",
                self.n_features, x.p
            )));
        }
        Ok((0..x.n)
            .into_par_iter()
            .map(|i| {
                self.trees.iter().map(|t| t.predict_row(x, i)).sum::<f64>()
                    / self.trees.len() as f64
            })
            .collect())
    }

    /// Out-of-bag error on the training data the forest was fitted to.
    pub fn oob_scores(&self, x: &Matrix, y: &[f64]) -> Result<OobScores> {
        check_xy(x, y)?;
        if x.p != self.n_features {
            return Err(Error::validation("feature count differs from the model"));
        }
        let mut sum = vec![0.0; x.n];
        let mut cnt = vec![0usize; x.n];
        for (tree, oob) in self.trees.iter().zip(&self.oob_indices) {
            for &i in oob {
                if i >= x.n {
                    return Err(Error::validation("out-of-bag index beyond the data"));
                }
                sum[i] += tree.predict_row(x, i);
                cnt[i] += 1;
            }
        }
        let inc: Vec<usize> = (0..x.n).filter(|&i| cnt[i] > 0).collect();
        if inc.is_empty() {
            return Err(Error::validation("no sample is out of bag for any tree"));
        }
        let mean_y = inc.iter().map(|&i| y[i]).sum::<f64>() / inc.len() as f64;
        let (mut ss_res, mut ss_tot) = (0.0, 0.0);
        for &i in &inc {
            let pred = sum[i] / cnt[i] as f64;
            ss_res += (y[i] - pred).powi(2);
            ss_tot += (y[i] - mean_y).powi(2);
        }
        let r2 = if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else if ss_res <= 1e-12 {
            1.0
        } else {
            0.0
        };
        Ok(OobScores {
            mse: ss_res / inc.len() as f64,
            r2,
            included: inc.len(),
            excluded: x.n - inc.len(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(FOREST_FORMAT);
        let _ = writeln!(
            out,
            "\nn_trees={} n_features={} mtry={} min_leaf={} seed={}",
            self.trees.len(),
            self.n_features,
            self.mtry,
            self.min_leaf,
            self.seed
        );
        for (t, (tree, oob)) in self.trees.iter().zip(&self.oob_indices).enumerate() {
            let _ = writeln!(out, "tree {t}");
            out.push_str("oob");
            for i in oob {
                let _ = write!(out, " {i}");
            }
            out.push('\n');
            out.push_str(&tree.to_tokens());
            out.push('\n');
        }
        out
    }

    /// Parses [`Forest::to_text`] output. `first_line` is the line number of
    /// the format header within a larger file, for error messages.
    pub fn parse(text: &str, first_line: usize) -> Result<Forest> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + first_line, l));
        let err = |ln: usize, m: &str| Error::parse(ln, m.to_string());
        match lines.next() {
            Some((_, l)) if l.trim() == FOREST_FORMAT => {}
            Some((ln, _)) => return Err(err(ln, "expected `# forest v1`")),
            None => return Err(err(first_line, "empty forest")),
        }
        let (ln, head) = lines.next().ok_or_else(|| err(first_line, "missing forest header"))?;
        let mut kv = std::collections::HashMap::new();
        for tok in head.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| err(ln, "bad forest header"))?;
            kv.insert(k, v);
        }
        let num = |k: &str| -> Result<u64> {
            kv.get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(ln, &format!("missing or bad `{k}`")))
        };
        let n_trees = num("n_trees")? as usize;
        let n_features = num("n_features")? as usize;
        let mtry = num("mtry")? as usize;
        let min_leaf = num("min_leaf")? as usize;
        let seed = num("seed")?;
        let mut trees = Vec::with_capacity(n_trees);
        let mut oob_indices = Vec::with_capacity(n_trees);
        for t in 0..n_trees {
            let (ln, l) = lines.next().ok_or_else(|| err(ln, "missing tree"))?;
            if l.trim() != format!("tree {t}") {
                return Err(err(ln, &format!("expected `tree {t}`")));
            }
            let (ln, l) = lines.next().ok_or_else(|| err(ln, "missing oob line"))?;
            let rest = l.strip_prefix("oob").ok_or_else(|| err(ln, "expected `oob`"))?;
            let oob = rest
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<Vec<usize>, _>>()
                .map_err(|_| err(ln, "bad oob index"))?;
            oob_indices.push(oob);
            let (ln, l) = lines.next().ok_or_else(|| err(ln, "missing nodes"))?;
            trees.push(Tree::from_tokens(l, n_features).map_err(|m| err(ln, &m))?);
        }
        if trees.is_empty() {
            return Err(err(first_line, "forest has no trees"));
        }
        Ok(Forest {
            trees,
            n_features,
            mtry,
            min_leaf,
            seed,
            oob_indices,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn full(p: usize) -> TreeParams {
        TreeParams { mtry: p, min_leaf: 1 }
    }

    #[test]
    fn constant_target_is_one_leaf() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 0.0]]).unwrap();
        let t = fit_tree(&x, &[7.0; 3], &[0, 1, 2], &mut seeded(0), full(2)).unwrap();
        assert_eq!(t.nodes, vec![TreeNode::Leaf { value: 7.0 }]);
        let one = fit_tree(&x, &[1.0, 2.0, 3.0], &[1], &mut seeded(0), full(2)).unwrap();
        assert_eq!(one.nodes, vec![TreeNode::Leaf { value: 2.0 }]);
    }

    #[test]
    fn separable_split() {
        let rows: Vec<[f64; 1]> = [-3.0, -2.0, -1.5, 1.0, 2.0, 4.0].iter().map(|&v| [v]).collect();
        let y: Vec<f64> = rows.iter().map(|r| (r[0] > 0.0) as u8 as f64).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let t = fit_tree(&x, &y, &[0, 1, 2, 3, 4, 5], &mut seeded(0), full(1)).unwrap();
        assert_eq!(t.depth(), 1);
        match t.nodes[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(threshold, -0.25),
            _ => panic!("expected a split"),
        }
        for (r, v) in rows.iter().zip(&y) {
            assert_eq!(t.predict(r), *v);
        }
    }

    #[test]
    fn min_leaf_respected() {
        let rows: Vec<[f64; 2]> = (0..40).map(|i| [i as f64, (i * 7 % 11) as f64]).collect();
        let y: Vec<f64> = (0..40).map(|i| ((i * 13) % 17) as f64).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let idx: Vec<usize> = (0..40).collect();
        let t = fit_tree(&x, &y, &idx, &mut seeded(3), TreeParams { mtry: 2, min_leaf: 5 }).unwrap();
        // Count training rows per leaf.
        let mut counts = std::collections::HashMap::new();
        for r in &rows {
            let mut k = 0;
            while let TreeNode::Split { feature, threshold, left, right } = t.nodes[k] {
                k = if r[feature] <= threshold { left } else { right };
            }
            *counts.entry(k).or_insert(0) += 1;
        }
        assert!(counts.values().all(|&c| c >= 5));
    }

    #[test]
    fn tie_breaks_to_lowest_feature() {
        // Two identical columns.
        let rows: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| (i >= 5) as u8 as f64).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        for s in 0..10 {
            let t = fit_tree(&x, &y, &(0..10).collect::<Vec<_>>(), &mut seeded(s), full(2)).unwrap();
            assert!(matches!(t.nodes[0], TreeNode::Split { feature: 0, .. }));
        }
    }

    #[test]
    fn forest_basics() {
        let rows: Vec<[f64; 3]> = (0..60)
            .map(|i| [i as f64, ((i * 17) % 23) as f64, ((i * 5) % 7) as f64])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * 0.5 + r[2]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let p = ForestParams {
            n_trees: 7,
            seed: 11,
            ..ForestParams::default()
        };
        let a = fit_forest(&x, &y, &p).unwrap();
        let b = fit_forest(&x, &y, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mtry, 1);
        let (lo, hi) = (0.0, 29.5 + 6.0);
        for r in &rows {
            let v = a.predict(r).unwrap();
            assert!(v >= lo && v <= hi);
        }
        assert!(a.predict(&[1.0]).is_err());
        assert!(fit_forest(&Matrix::from_rows(&[[1.0]]).unwrap(), &[1.0], &p).is_err());

        // A one-tree forest is its bootstrap tree.
        let one = fit_forest(&x, &y, &ForestParams { n_trees: 1, ..p }).unwrap();
        let (draws, mut rng) = bootstrap(60, 11, 0);
        let pre = Presorted::new(&x);
        let t = grow_tree(&x, &y, &draws, &pre, TreeParams { mtry: 1, min_leaf: 5 }, &mut rng);
        assert_eq!(one.trees[0], t);
        for r in &rows {
            assert_eq!(one.predict(r).unwrap(), t.predict(r));
        }
    }

    #[test]
    fn leaf_forest_predicts_constant() {
        let f = Forest {
            trees: vec![Tree { nodes: vec![TreeNode::Leaf { value: 4.5 }] }; 3],
            n_features: 2,
            mtry: 1,
            min_leaf: 1,
            seed: 0,
            oob_indices: vec![vec![0], vec![1], vec![]],
        };
        assert_eq!(f.predict(&[0.0, 9.0]).unwrap(), 4.5);
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let s = f.oob_scores(&x, &[4.5, 4.5]).unwrap();
        assert_eq!((s.r2, s.mse, s.included), (1.0, 0.0, 2));
        let s = f.oob_scores(&x, &[3.5, 5.5]).unwrap();
        assert_eq!(s.r2, 0.0);
    }

    #[test]
    fn serialization_round_trip() {
        let rows: Vec<[f64; 2]> = (0..30).map(|i| [(i as f64).sin(), (i as f64 * 0.3).cos()]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 100.0 * r[0].abs()).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let f = fit_forest(&x, &y, &ForestParams { n_trees: 4, min_leaf: 2, seed: 5, ..Default::default() }).unwrap();
        let text = f.to_text();
        assert!(text.starts_with("# forest v1\n"));
        let back = Forest::parse(&text, 1).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_text(), text);
        let broken = text.replacen("leaf(", "lef(", 1);
        assert!(Forest::parse(&broken, 1).is_err());
    }

    proptest! {
        #[test]
        fn full_tree_memorizes(vals in prop::collection::btree_set(-1000i32..1000, 2..40)) {
            let v: Vec<i32> = vals.into_iter().collect();
            let rows: Vec<[f64; 2]> = v.iter().map(|&a| [a as f64, (a * 31 % 17) as f64]).collect();
            let y: Vec<f64> = v.iter().map(|&a| ((a * 7919) % 101) as f64).collect();
            let x = Matrix::from_rows(&rows).unwrap();
            let idx: Vec<usize> = (0..rows.len()).collect();
            let t = fit_tree(&x, &y, &idx, &mut seeded(1), full(2)).unwrap();
            for (r, target) in rows.iter().zip(&y) {
                prop_assert_eq!(t.predict(r), *target);
            }
        }

        #[test]
        fn column_permutation_invariant(seed in 0u64..50) {
            let rows: Vec<[f64; 3]> = (0..40).map(|i| {
                let i = i as f64;
                [(i * 1.7).sin(), (i * 0.9).cos(), i * 0.01]
            }).collect();
            let y: Vec<f64> = rows.iter().map(|r| 50.0 + 30.0 * r[0] - 10.0 * r[1]).collect();
            let perm = [2usize, 0, 1];
            let prow: Vec<[f64; 3]> = rows.iter().map(|r| [r[perm[0]], r[perm[1]], r[perm[2]]]).collect();
            let idx: Vec<usize> = (0..40).collect();
            let p = TreeParams { mtry: 3, min_leaf: 2 };
            let a = fit_tree(&Matrix::from_rows(&rows).unwrap(), &y, &idx, &mut seeded(seed), p).unwrap();
            let b = fit_tree(&Matrix::from_rows(&prow).unwrap(), &y, &idx, &mut seeded(seed), p).unwrap();
            for (r, q) in rows.iter().zip(&prow) {
                prop_assert_eq!(a.predict(r), b.predict(q));
            }
        }

        #[test]
        fn monotone_transform_keeps_partition(seed in 0u64..50) {
            let rows: Vec<[f64; 2]> = (0..30).map(|i| [((i * 37) % 29) as f64 / 7.0, ((i * 11) % 13) as f64]).collect();
            let y: Vec<f64> = rows.iter().map(|r| r[0] * r[0] + r[1]).collect();
            let trows: Vec<[f64; 2]> = rows.iter().map(|r| [r[0].exp(), r[1]]).collect();
            let idx: Vec<usize> = (0..30).collect();
            let p = TreeParams { mtry: 1, min_leaf: 1 };
            let a = fit_tree(&Matrix::from_rows(&rows).unwrap(), &y, &idx, &mut seeded(seed), p).unwrap();
            let b = fit_tree(&Matrix::from_rows(&trows).unwrap(), &y, &idx, &mut seeded(seed), p).unwrap();
            prop_assert_eq!(a.nodes.len(), b.nodes.len());
            for (r, q) in rows.iter().zip(&trows) {
                prop_assert_eq!(a.predict(r), b.predict(q));
            }
        }

        #[test]
        fn duplicates_stay_in_range(extra in prop::collection::vec(0usize..20, 0..20)) {
            let mut rows: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, (i % 3) as f64]).collect();
            let mut y: Vec<f64> = (0..20).map(|i| ((i * 37) % 100) as f64).collect();
            for &e in &extra {
                rows.push(rows[e]);
                y.push(y[e]);
            }
            let x = Matrix::from_rows(&rows).unwrap();
            let f = fit_forest(&x, &y, &ForestParams { n_trees: 5, min_leaf: 2, seed: 3, ..Default::default() }).unwrap();
            let (lo, hi) = (0.0, 99.0);
            for r in &rows {
                let v = f.predict(r).unwrap();
                prop_assert!(v >= lo && v <= hi);
            }
        }
    }
}
