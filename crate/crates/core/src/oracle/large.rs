//! Kernel color model for large color spaces.
//!
//! Each color class contributes a Gaussian bump around its centroid. The
//! class-pair term `w2(a, b)` integrates the product of two bumps against the
//! image's own color samples, each class centroid standing in for its pixels.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::image::{IndexedImage, Labeling, RawImage};
use crate::smoothness::SmoothnessGraph;

use super::{class_sums, LinearOperator, WeightOracle};

/// How the sample sum over `k` normalizes `Pr_a(k) Pr_b(k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Estimator {
    /// Divide by `sum_j Pr_j(k)`, as the sum is literally written.
    Paper,
    /// Divide by `(sum_j Pr_j(k))^2`, the importance-sampling form; reduces to
    /// the histogram weights `5/(2 n_i)` as sigma goes to zero.
    #[default]
    Consistent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelModel {
    sigma2: f64,
    estimator: Estimator,
    class_means: Vec<[f64; 3]>,
    class_counts: Vec<usize>,
    /// Row-major `m x m`.
    class_pair_w2: Vec<f64>,
}

impl KernelModel {
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    pub fn class_count(&self) -> usize {
        self.class_counts.len()
    }

    pub fn class_means(&self) -> &[[f64; 3]] {
        &self.class_means
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn w2(&self, a: usize, b: usize) -> f64 {
        self.class_pair_w2[a * self.class_count() + b]
    }

    pub fn density(&self, from: [f64; 3], at: [f64; 3]) -> f64 {
        kernel_density(self.sigma2, from, at)
    }
}

fn squared_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|c| (a[c] - b[c]).powi(2)).sum()
}

/// `(2 pi sigma^2)^(-1/2) exp(-|from - at|^2 / (2 sigma^2))`.
pub fn kernel_density(sigma2: f64, from: [f64; 3], at: [f64; 3]) -> f64 {
    (2.0 * PI * sigma2).sqrt().recip() * (-squared_distance(from, at) / (2.0 * sigma2)).exp()
}

/// Mean squared RGB distance between 4-adjacent pixels, floored at 1.
pub fn estimate_sigma(img: &RawImage) -> Result<f64> {
    if img.len() < 2 {
        return Err(Error::InvalidParameter(
            "sigma estimation needs at least two pixels".into(),
        ));
    }
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let dist = |p: usize, q: usize| -> f64 {
        (0..3)
            .map(|c| (px[p][c] as f64 - px[q][c] as f64).powi(2))
            .sum()
    };
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if x + 1 < w {
                sum += dist(p, p + 1);
                pairs += 1;
            }
            if y + 1 < h {
                sum += dist(p, p + w);
                pairs += 1;
            }
        }
    }
    Ok((sum / pairs as f64).max(1.0))
}

/// Builds the class-pair matrix `w2` by treating each class centroid as a
/// sample with multiplicity equal to the class size.
pub fn build_class_kernel(
    img: &IndexedImage,
    sigma2: f64,
    estimator: Estimator,
) -> Result<KernelModel> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma2 must be positive, got {sigma2}"
        )));
    }
    let m = img.class_count();
    let means = img.means().to_vec();
    let counts = img.counts().to_vec();

    // density[a * m + k] = Pr_{c_a}(c_k)
    let mut density = vec![0.0; m * m];
    for a in 0..m {
        for k in 0..m {
            density[a * m + k] = kernel_density(sigma2, means[a], means[k]);
        }
    }
    let weight: Vec<f64> = (0..m)
        .map(|k| {
            let denom: f64 = (0..m).map(|b| counts[b] as f64 * density[b * m + k]).sum();
            let norm = match estimator {
                Estimator::Paper => denom,
                Estimator::Consistent => denom * denom,
            };
            counts[k] as f64 / norm
        })
        .collect();

    let mut w2 = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let s: f64 = (0..m)
                .map(|k| weight[k] * density[a * m + k] * density[b * m + k])
                .sum();
            w2[a * m + b] = 2.5 * s;
            w2[b * m + a] = 2.5 * s;
        }
    }
    if w2.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "class kernel is not finite for sigma2 = {sigma2}"
        )));
    }

    Ok(KernelModel {
        sigma2,
        estimator,
        class_means: means,
        class_counts: counts,
        class_pair_w2: w2,
    })
}

/// Kernel weight matrix:
/// `w(p, q) = -5/(2n) + w2(class(p), class(q)) + [p ~ q] lambda S(p, q)`.
#[derive(Clone, Debug)]
pub struct LargeOracle<'a> {
    n: usize,
    class_of: &'a [usize],
    lambda: f64,
    graph: &'a SmoothnessGraph,
    model: &'a KernelModel,
    total_weight_sum: f64,
}

pub fn build_large_oracle<'a>(
    img: &'a IndexedImage,
    graph: &'a SmoothnessGraph,
    lambda: f64,
    model: &'a KernelModel,
) -> Result<LargeOracle<'a>> {
    Error::check_len(img.total(), graph.n())?;
    Error::check_len(img.class_count(), model.class_count())?;
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    let n = img.total();
    let nf = n as f64;
    let m = model.class_count();
    let counts = img.counts();

    let mut pair_sum = 0.0;
    for a in 0..m {
        for b in 0..m {
            pair_sum += model.w2(a, b) * counts[a] as f64 * counts[b] as f64;
        }
        pair_sum -= model.w2(a, a) * counts[a] as f64;
    }
    let total = -2.5 / nf * nf * (nf - 1.0) + pair_sum + 2.0 * lambda * graph.total_weight();

    Ok(LargeOracle {
        n,
        class_of: img.class_of(),
        lambda,
        graph,
        model,
        total_weight_sum: total,
    })
}

impl LinearOperator for LargeOracle<'_> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, r: &[f64], out: &mut [f64]) {
        let m = self.model.class_count();
        let global_coef = 2.5 / self.n as f64;
        let phi = -global_coef * r.iter().sum::<f64>();
        let sums = class_sums(self.class_of, m, r);
        let theta: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|b| self.model.w2(i, b) * sums[b]).sum())
            .collect();
        self.graph.neighbor_sum(r, out);
        for (k, o) in out.iter_mut().enumerate() {
            let c = self.class_of[k];
            *o = phi + theta[c] + self.lambda * *o + (global_coef - self.model.w2(c, c)) * r[k];
        }
    }
}

impl WeightOracle for LargeOracle<'_> {
    fn weight(&self, p: usize, q: usize) -> f64 {
        if p == q {
            return 0.0;
        }
        let mut w = -2.5 / self.n as f64 + self.model.w2(self.class_of[p], self.class_of[q]);
        if let Some(s) = self.graph.weight(p, q) {
            w += self.lambda * s;
        }
        w
    }

    fn total_weight_sum(&self) -> f64 {
        self.total_weight_sum
    }
}

/// The kernel segmentation objective evaluated directly from class counts:
/// `sum_{a, b} n0a n1b (-5/(2n) + w2(a, b)) + lambda E_S`.
pub fn kernel_objective(
    img: &IndexedImage,
    model: &KernelModel,
    labeling: &Labeling,
    graph: &SmoothnessGraph,
    lambda: f64,
) -> Result<f64> {
    Error::check_len(img.total(), labeling.len())?;
    Error::check_len(img.class_count(), model.class_count())?;
    let m = img.class_count();
    let mut fore = vec![0usize; m];
    for (p, &c) in img.class_of().iter().enumerate() {
        if labeling.is_fore(p) {
            fore[c] += 1;
        }
    }
    let global = -2.5 / img.total() as f64;
    let mut data = 0.0;
    for a in 0..m {
        for b in 0..m {
            let back_b = img.counts()[b] - fore[b];
            data += fore[a] as f64 * back_b as f64 * (global + model.w2(a, b));
        }
    }
    Ok(data + lambda * graph.smoothness_cut(labeling)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DENSE_CAP;
    use crate::smoothness::{build_smoothness, SmoothnessParams};

    fn indexed(w: usize, h: usize, colors: &[[f64; 3]], classes: &[usize]) -> IndexedImage {
        let px: Vec<[f64; 3]> = classes.iter().map(|&c| colors[c]).collect();
        IndexedImage::from_classes(w, h, classes, &px).unwrap()
    }

    fn grid(w: usize, h: usize) -> SmoothnessGraph {
        build_smoothness(
            &RawImage::filled(w, h, [0; 3]).unwrap(),
            &SmoothnessParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn density_values() {
        let c = (2.0 * PI).sqrt().recip();
        assert!((kernel_density(1.0, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) - c).abs() < 1e-15);
        assert!((c - 0.398942).abs() < 1e-6);
        // squared distance 2 with sigma2 = 1
        let v = kernel_density(1.0, [0.0; 3], [1.0, 1.0, 0.0]);
        assert!((v - c * (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.146762).abs() < 1e-6);
        assert_eq!(kernel_density(1.0, [0.0; 3], [1e6, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn sigma_estimates() {
        assert_eq!(
            estimate_sigma(&RawImage::filled(4, 4, [7; 3]).unwrap()).unwrap(),
            1.0
        );
        let pair = RawImage::new(2, 1, vec![[0, 0, 0], [10, 0, 0]]).unwrap();
        assert_eq!(estimate_sigma(&pair).unwrap(), 100.0);
        let px: Vec<[u8; 3]> = (0..16)
            .map(|i| {
                if (i % 4 + i / 4) % 2 == 0 {
                    [0, 0, 0]
                } else {
                    [3, 4, 0]
                }
            })
            .collect();
        let checker = RawImage::new(4, 4, px).unwrap();
        assert_eq!(estimate_sigma(&checker).unwrap(), 25.0);
        assert!(estimate_sigma(&RawImage::filled(1, 1, [0; 3]).unwrap()).is_err());
    }

    #[test]
    fn single_class_kernels() {
        let img = indexed(3, 1, &[[50.0; 3]], &[0, 0, 0]);
        let sigma2 = 4.0;
        let c = (2.0 * PI * sigma2).sqrt().recip();
        let paper = build_class_kernel(&img, sigma2, Estimator::Paper).unwrap();
        assert!((paper.w2(0, 0) - 2.5 * c).abs() < 1e-14);
        let consistent = build_class_kernel(&img, sigma2, Estimator::Consistent).unwrap();
        assert!((consistent.w2(0, 0) - 2.5 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn separated_classes_recover_histogram() {
        let img = indexed(4, 1, &[[0.0; 3], [255.0; 3]], &[0, 1, 1, 1]);
        let model = build_class_kernel(&img, 10.0, Estimator::Consistent).unwrap();
        assert!(model.w2(0, 1).abs() < 1e-12);
        assert!((model.w2(0, 0) - 2.5).abs() < 1e-12);
        assert!((model.w2(1, 1) - 2.5 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cancellation_for_one_class() {
        let img = indexed(3, 2, &[[9.0; 3]], &[0; 6]);
        let g = grid(3, 2);
        let model = build_class_kernel(&img, 2.0, Estimator::Consistent).unwrap();

        let o = build_large_oracle(&img, &g, 0.0, &model).unwrap();
        assert!(o.total_weight_sum().abs() < 1e-14);
        let out = o.matvec(&[1.0, -2.0, 3.0, 0.5, 7.0, -1.0]).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-14));
        let d = o.materialize_dense(DENSE_CAP).unwrap();
        assert!((0..6).all(|i| d.row(i).iter().all(|v| v.abs() < 1e-15)));

        let o = build_large_oracle(&img, &g, 1.0, &model).unwrap();
        for p in 0..6 {
            for q in 0..6 {
                let expect = if p != q {
                    g.weight(p, q).unwrap_or(0.0)
                } else {
                    0.0
                };
                assert!((o.weight(p, q) - expect).abs() < 1e-14);
            }
        }
        assert_eq!(o.matvec(&[0.0; 6]).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn rejects_bad_sigma_and_sizes() {
        let img = indexed(2, 1, &[[0.0; 3], [1.0; 3]], &[0, 1]);
        assert!(build_class_kernel(&img, 0.0, Estimator::Paper).is_err());
        assert!(build_class_kernel(&img, f64::NAN, Estimator::Paper).is_err());
        let model = build_class_kernel(&img, 1.0, Estimator::Paper).unwrap();
        assert!(build_large_oracle(&img, &grid(3, 1), 1.0, &model).is_err());
        let other = indexed(2, 1, &[[0.0; 3]], &[0, 0]);
        assert!(build_large_oracle(&other, &grid(2, 1), 1.0, &model).is_err());
    }
}
