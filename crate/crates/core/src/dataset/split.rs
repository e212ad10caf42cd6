//! Block-tiled, leakage-free cross-validation splits.
//!
//! The scene is tiled into `g x g` blocks and each block is assigned whole to one fold. A
//! fold's test set is the labeled pixels of its blocks. Its training set is every other labeled
//! pixel whose `(2r+1)^2` patch neighbourhood shares no pixel with any test patch neighbourhood,
//! i.e. a buffer of width `2r` around the test origins is pruned from training.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Coord, LabelMap};
use crate::{Error, Result, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitParams {
    pub folds: usize,
    pub block_size: usize,
    pub patch_radius: usize,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self { folds: 5, block_size: 8, patch_radius: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    /// Ids `bx * blocks_y + by` of the blocks held out by this fold.
    pub blocks: Vec<usize>,
    pub train: Vec<Coord>,
    pub test: Vec<Coord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub width: usize,
    pub height: usize,
    pub patch_radius: usize,
    pub block_size: usize,
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub seed: u64,
    pub folds: Vec<Fold>,
}

impl SplitSpec {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Marks every pixel within Chebyshev distance `r` of an origin (clipped to the scene).
fn neighbourhood_mask(width: usize, height: usize, origins: &[Coord], r: usize) -> Vec<bool> {
    let mut mask = vec![false; width * height];
    for &(x, y) in origins {
        for nx in x.saturating_sub(r)..(x + r + 1).min(width) {
            for ny in y.saturating_sub(r)..(y + r + 1).min(height) {
                mask[nx * height + ny] = true;
            }
        }
    }
    mask
}

fn touches(mask: &[bool], width: usize, height: usize, (x, y): Coord, r: usize) -> bool {
    (x.saturating_sub(r)..(x + r + 1).min(width))
        .any(|nx| (y.saturating_sub(r)..(y + r + 1).min(height)).any(|ny| mask[nx * height + ny]))
}

pub fn generate_patch_splits(labels: &LabelMap, params: SplitParams, rng: &mut SeededRng) -> Result<SplitSpec> {
    let SplitParams { folds, block_size: g, patch_radius: r } = params;
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("at least 2 folds required, got {folds}")));
    }
    if g < 2 * r + 1 {
        return Err(Error::InvalidConfig(format!("block size {g} smaller than patch size {}", 2 * r + 1)));
    }
    let (w, h) = (labels.width(), labels.height());
    let (bx_n, by_n) = (w.div_ceil(g), h.div_ceil(g));
    let block_of = |x: usize, y: usize| (x / g) * by_n + y / g;

    let mut block_classes = vec![BTreeSet::new(); bx_n * by_n];
    let mut block_pixels = vec![0usize; bx_n * by_n];
    for (x, y) in labels.labeled() {
        let b = block_of(x, y);
        block_classes[b].insert(labels.get(x, y));
        block_pixels[b] += 1;
    }
    let mut labeled_blocks: Vec<usize> = (0..block_pixels.len()).filter(|&b| block_pixels[b] > 0).collect();
    if labeled_blocks.len() < folds {
        return Err(Error::InfeasibleSplit(format!(
            "{} labeled blocks of size {g} cannot fill {folds} folds",
            labeled_blocks.len()
        )));
    }
    rng.shuffle_slice(&mut labeled_blocks);

    // greedy stratification: favour the fold gaining the most unseen classes, then the
    // lightest fold, then the lowest index
    let mut assignment = vec![usize::MAX; block_pixels.len()];
    let mut fold_classes = vec![BTreeSet::new(); folds];
    let mut fold_pixels = vec![0usize; folds];
    for &b in &labeled_blocks {
        let best = (0..folds)
            .max_by(|&f1, &f2| {
                let gain = |f: usize| block_classes[b].difference(&fold_classes[f]).count();
                gain(f1)
                    .cmp(&gain(f2))
                    .then(fold_pixels[f2].cmp(&fold_pixels[f1]))
                    .then(f2.cmp(&f1))
            })
            .expect("folds >= 2");
        assignment[b] = best;
        fold_classes[best].extend(block_classes[b].iter().copied());
        fold_pixels[best] += block_pixels[b];
    }
    let mut next = 0;
    for a in assignment.iter_mut().filter(|a| **a == usize::MAX) {
        *a = next % folds;
        next += 1;
    }

    let labeled = labels.labeled();
    let folds = (0..folds)
        .map(|f| {
            let blocks: Vec<usize> = (0..assignment.len()).filter(|&b| assignment[b] == f).collect();
            let test: Vec<Coord> = labeled.iter().copied().filter(|&(x, y)| assignment[block_of(x, y)] == f).collect();
            let covered = neighbourhood_mask(w, h, &test, r);
            let train = labeled
                .iter()
                .copied()
                .filter(|&(x, y)| assignment[block_of(x, y)] != f && !touches(&covered, w, h, (x, y), r))
                .collect();
            Fold { blocks, train, test }
        })
        .collect();

    Ok(SplitSpec {
        width: w,
        height: h,
        patch_radius: r,
        block_size: g,
        blocks_x: bx_n,
        blocks_y: by_n,
        seed: rng.seed(),
        folds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LeakageReport {
    /// Train/test origin pairs whose patch neighbourhoods share a pixel.
    pub violations: usize,
    /// `(fold, train origin, test origin)` of the first violation found.
    pub first: Option<(usize, Coord, Coord)>,
    /// Labeled pixels not in exactly one test set, plus unlabeled or out-of-scene entries.
    pub coverage_errors: usize,
}

impl LeakageReport {
    pub fn is_clean(&self) -> bool {
        self.violations == 0 && self.coverage_errors == 0
    }
}

fn window(c: usize, r: usize, n: usize) -> (usize, usize) {
    (c.saturating_sub(r), (c + r).min(n - 1))
}

/// Exhaustive check of the split invariants: every labeled pixel is in exactly one test set,
/// and within each fold no training patch shares a pixel with any test patch.
pub fn verify_no_leakage(split: &SplitSpec, labels: &LabelMap) -> LeakageReport {
    let (w, h, r) = (labels.width(), labels.height(), split.patch_radius);
    let mut report = LeakageReport::default();
    let mut test_hits = vec![0usize; w * h];
    for fold in &split.folds {
        for &(x, y) in fold.test.iter().chain(&fold.train) {
            if x >= w || y >= h || labels.get(x, y) == 0 {
                report.coverage_errors += 1;
            }
        }
        for &(x, y) in &fold.test {
            if x < w && y < h {
                test_hits[x * h + y] += 1;
            }
        }
    }
    report.coverage_errors += labels.labeled().iter().filter(|&&(x, y)| test_hits[x * h + y] != 1).count();

    for (f, fold) in split.folds.iter().enumerate() {
        for &t in fold.train.iter().filter(|&&(x, y)| x < w && y < h) {
            let (tx0, tx1) = window(t.0, r, w);
            let (ty0, ty1) = window(t.1, r, h);
            for &s in fold.test.iter().filter(|&&(x, y)| x < w && y < h) {
                let (sx0, sx1) = window(s.0, r, w);
                let (sy0, sy1) = window(s.1, r, h);
                if tx0.max(sx0) <= tx1.min(sx1) && ty0.max(sy0) <= ty1.min(sy1) {
                    report.violations += 1;
                    report.first.get_or_insert((f, t, s));
                }
            }
        }
    }
    report
}
