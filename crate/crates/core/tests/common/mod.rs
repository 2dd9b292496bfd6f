#![allow(dead_code)]

//! Independent reference implementations shared by the integration tests.
//! Nothing here calls the structured matvecs under test.

use nalgebra::{DMatrix, SymmetricEigen};
use negcut::image::{quantize_gray, IndexedImage, RawImage};
use negcut::kmeans::{kmeans_cluster, DEFAULT_MAX_ITER};
use negcut::oracle::{estimate_sigma, Estimator};
use negcut::smoothness::{
    build_smoothness, Connectivity, SmoothnessGraph, SmoothnessMode, SmoothnessParams,
};
use negcut::synthetic;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub raw: RawImage,
    pub img: IndexedImage,
    pub graph: SmoothnessGraph,
    pub lambda: f64,
    /// `None` for histogram weights.
    pub kernel: Option<(f64, Estimator)>,
}

/// A random segmentation problem with at most `max_n` pixels.
pub fn random_case(
    seed: u64,
    max_n: usize,
    color: bool,
    lambda: f64,
    estimator: Estimator,
) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = max_n.isqrt();
    let w = rng.random_range(1..=side);
    let h = rng.random_range(1..=(max_n / w).min(side * 2));
    let raw = if rng.random::<bool>() {
        synthetic::random_palette_image(w, h, rng.random_range(1..10), seed)
    } else {
        synthetic::noisy_two_block(w, h, [40, 90, 140], [200, 150, 60], 50, seed)
    };
    let graph_params = SmoothnessParams {
        connectivity: if rng.random::<bool>() {
            Connectivity::Four
        } else {
            Connectivity::Eight
        },
        mode: if rng.random::<bool>() {
            SmoothnessMode::Constant
        } else {
            SmoothnessMode::Exponential { beta: None }
        },
        offset: if rng.random::<bool>() { 0.0 } else { 0.25 },
    };
    let graph = build_smoothness(&raw, &graph_params).unwrap();
    if color {
        let m = rng.random_range(1..=8usize).min(raw.len());
        let img = kmeans_cluster(&raw, m, seed, DEFAULT_MAX_ITER).unwrap();
        let sigma2 = if raw.len() >= 2 && rng.random::<bool>() {
            estimate_sigma(&raw).unwrap()
        } else {
            rng.random_range(50.0..5000.0)
        };
        Case {
            raw,
            img,
            graph,
            lambda,
            kernel: Some((sigma2, estimator)),
        }
    } else {
        let levels = rng.random_range(2..=16usize);
        let img = quantize_gray(&raw, levels).unwrap();
        Case {
            raw,
            img,
            graph,
            lambda,
            kernel: None,
        }
    }
}

fn adjacency_dense(graph: &SmoothnessGraph, lambda: f64, m: &mut DMatrix<f64>) {
    for &(p, q, s) in graph.edges() {
        m[(p, q)] += lambda * s;
        m[(q, p)] += lambda * s;
    }
}

/// Histogram weight matrix entry by entry from its definition.
pub fn dense_histogram(img: &IndexedImage, graph: &SmoothnessGraph, lambda: f64) -> DMatrix<f64> {
    let n = img.total();
    let cls = img.class_of();
    let mut m = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            let mut w = -5.0 / (2.0 * n as f64);
            if cls[p] == cls[q] {
                w += 5.0 / (2.0 * img.counts()[cls[p]] as f64);
            }
            m[(p, q)] = w;
        }
    }
    adjacency_dense(graph, lambda, &mut m);
    m
}

fn gauss(sigma2: f64, a: [f64; 3], b: [f64; 3]) -> f64 {
    let d: f64 = (0..3).map(|c| (a[c] - b[c]) * (a[c] - b[c])).sum();
    (-d / (2.0 * sigma2)).exp() / (2.0 * std::f64::consts::PI * sigma2).sqrt()
}

/// Class-pair kernel term by scanning every pixel as a sample, each pixel
/// carrying its class centroid color.
pub fn pixel_scan_w2(img: &IndexedImage, sigma2: f64, estimator: Estimator) -> Vec<Vec<f64>> {
    let m = img.class_count();
    let means = img.means();
    let cls = img.class_of();
    let denom: Vec<f64> = cls
        .iter()
        .map(|&k| cls.iter().map(|&j| gauss(sigma2, means[j], means[k])).sum())
        .collect();
    let mut w2 = vec![vec![0.0; m]; m];
    for (a, row) in w2.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for (pix, &k) in cls.iter().enumerate() {
                let norm = match estimator {
                    Estimator::Paper => denom[pix],
                    Estimator::Consistent => denom[pix] * denom[pix],
                };
                s += gauss(sigma2, means[a], means[k]) * gauss(sigma2, means[b], means[k]) / norm;
            }
            *cell = 2.5 * s;
        }
    }
    w2
}

pub fn dense_kernel(
    img: &IndexedImage,
    graph: &SmoothnessGraph,
    lambda: f64,
    sigma2: f64,
    estimator: Estimator,
) -> DMatrix<f64> {
    let n = img.total();
    let cls = img.class_of();
    let w2 = pixel_scan_w2(img, sigma2, estimator);
    let mut m = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            if p != q {
                m[(p, q)] = -5.0 / (2.0 * n as f64) + w2[cls[p]][cls[q]];
            }
        }
    }
    adjacency_dense(graph, lambda, &mut m);
    m
}

pub fn dense_for(case: &Case) -> DMatrix<f64> {
    match case.kernel {
        None => dense_histogram(&case.img, &case.graph, case.lambda),
        Some((s, e)) => dense_kernel(&case.img, &case.graph, case.lambda, s, e),
    }
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Does some sub-multiset sum to exactly half the total?
pub fn subset_sum_half(values: &[u64]) -> bool {
    let total: u64 = values.iter().sum();
    if total % 2 == 1 {
        return false;
    }
    let half = (total / 2) as usize;
    let mut reach = vec![false; half + 1];
    reach[0] = true;
    for &v in values {
        for s in (v as usize..=half).rev() {
            if reach[s - v as usize] {
                reach[s] = true;
            }
        }
    }
    reach[half]
}

/// All multisets of size 1..=max_len over 1..=max_value, non-decreasing.
pub fn multisets(max_len: usize, max_value: u64) -> Vec<Vec<u64>> {
    fn extend(
        cur: &mut Vec<u64>,
        lo: u64,
        max_len: usize,
        max_value: u64,
        out: &mut Vec<Vec<u64>>,
    ) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max_len {
            return;
        }
        for v in lo..=max_value {
            cur.push(v);
            extend(cur, v, max_len, max_value, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 1, max_len, max_value, &mut out);
    out
}
