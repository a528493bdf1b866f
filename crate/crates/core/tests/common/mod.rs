//! Shared fixtures and independent reference implementations for the
//! integration tests.
#![allow(dead_code)]

use infection_risk::data::{
    generate_synthetic, train_test_split, Dataset, GeneratorConfig, Matrix, Standardizer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn benchmark(n: usize, seed: u64) -> Dataset {
    generate_synthetic(&GeneratorConfig {
        n,
        seed,
        ..Default::default()
    })
    .unwrap()
    .dataset
}

/// Default benchmark split into standardized train and test matrices.
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub x_train: Matrix,
    pub y_train: Vec<u8>,
    pub x_test: Matrix,
    pub y_test: Vec<u8>,
}

pub fn prepared(n: usize, seed: u64) -> Prepared {
    let data = benchmark(n, seed);
    let (train, test) = train_test_split(&data, 0.2, seed).unwrap();
    let s = Standardizer::fit(&train.features()).unwrap();
    Prepared {
        x_train: s.apply(&train.features()).unwrap(),
        y_train: train.labels().unwrap(),
        x_test: s.apply(&test.features()).unwrap(),
        y_test: test.labels().unwrap(),
        train,
        test,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    Matrix::from_vec(rows, cols, data)
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect()
}

/// `|a − n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Central difference of `f` along every coordinate of `at`.
pub fn numeric_gradient(at: &[f64], step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = at.to_vec();
    (0..at.len())
        .map(|k| {
            p[k] = at[k] + step;
            let up = f(&p);
            p[k] = at[k] - step;
            let down = f(&p);
            p[k] = at[k];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// One candidate from the exhaustive split scan.
#[derive(Debug, Clone, Copy)]
pub struct NaiveSplit {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

fn gini_of(pos: usize, n: usize) -> f64 {
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

/// Every (feature, midpoint) split with at least `min_leaf` rows per side,
/// in feature-then-threshold order, scored by Gini decrease.
pub fn exhaustive_splits(x: &Matrix, y: &[u8], min_leaf: usize) -> Vec<NaiveSplit> {
    let n = y.len();
    let total_pos = y.iter().filter(|&&v| v == 1).count();
    let parent = gini_of(total_pos, n);
    let mut out = Vec::new();
    for f in 0..x.cols() {
        let mut values = x.column(f);
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let threshold = (w[0] + w[1]) / 2.0;
            let left: Vec<usize> = (0..n).filter(|&i| x.get(i, f) < threshold).collect();
            let nl = left.len();
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let pl = left.iter().filter(|&&i| y[i] == 1).count();
            let pr = total_pos - pl;
            let decrease = parent
                - nl as f64 / n as f64 * gini_of(pl, nl)
                - nr as f64 / n as f64 * gini_of(pr, nr);
            out.push(NaiveSplit {
                feature: f,
                threshold,
                decrease,
            });
        }
    }
    out
}

/// Indices of the `k` nearest rows by a full sort on squared distance,
/// ties to the lower index.
pub fn naive_knn(x: &Matrix, query: &[f64], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = x
        .iter_rows()
        .enumerate()
        .map(|(i, r)| {
            (
                r.iter()
                    .zip(query)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>(),
                i,
            )
        })
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, i)| i).collect()
}

/// Minimizer of `G·w + ½(H+λ)·w²` found by bisection on the sign of a
/// central-difference slope, without using the closed form.
pub fn numeric_leaf_minimizer(g: f64, h: f64, lambda: f64) -> f64 {
    let objective = |w: f64| g * w + 0.5 * (h + lambda) * w * w;
    let slope = |w: f64| {
        let e = 1e-6 * w.abs().max(1.0);
        objective(w + e) - objective(w - e)
    };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
