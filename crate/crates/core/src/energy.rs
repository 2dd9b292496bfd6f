//! Uninformed MRF energy: the exact histogram form, its quadratic surrogate,
//! and the scalar approximation `x ln x + (1-x) ln(1-x) ~ -5/2 x(1-x) - 1/12`
//! that connects them.
//!
//! All logarithms are natural and `0 ln 0 = 0`.

use crate::error::{Error, Result};
use crate::image::{IndexedImage, Labeling};
use crate::smoothness::SmoothnessGraph;

/// `x ln x` with the `0 ln 0 = 0` convention.
pub fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(x))
    }
}

/// `x ln x + (1 - x) ln(1 - x)`.
pub fn f3(x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(xlnx(x) + xlnx(1.0 - x))
}

/// The quadratic stand-in for [`f3`]: `-5/2 x(1 - x) - 1/12`.
pub fn f3_approx(x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(quadratic(x) - 1.0 / 12.0)
}

fn quadratic(x: f64) -> f64 {
    -2.5 * x * (1.0 - x)
}

/// `Delta(x) = -5/2 x(1 - x) - f3(x)`, the remainder dropped by the quadratic.
pub fn delta(x: f64) -> Result<f64> {
    Ok(quadratic(x) - f3(x)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaStats {
    /// Mean of `Delta` over `[0, 1]`.
    pub mean: f64,
    /// Mean of `(Delta - 1/12)^2` over `[0, 1]`.
    pub mse: f64,
}

/// Integrates `Delta` and its squared deviation from 1/12 with the composite
/// Simpson rule on `samples` intervals (rounded up to even).
pub fn delta_stats(samples: usize) -> Result<DeltaStats> {
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "delta_stats needs at least 1000 samples, got {samples}"
        )));
    }
    let intervals = samples + samples % 2;
    let h = 1.0 / intervals as f64;
    let mut mean = 0.0;
    let mut mse = 0.0;
    for i in 0..=intervals {
        let x = (i as f64 * h).min(1.0);
        let d = delta(x)?;
        let weight = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        mean += weight * d;
        mse += weight * (d - 1.0 / 12.0).powi(2);
    }
    Ok(DeltaStats {
        mean: mean * h / 3.0,
        mse: mse * h / 3.0,
    })
}

/// Per-class fore/back pixel counts for one labeling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSplit {
    /// `s0`, the foreground size.
    pub fore: usize,
    /// `s1`, the background size.
    pub back: usize,
    /// `n_{0,i}` per class.
    pub fore_by_class: Vec<usize>,
    /// `n_{1,i}` per class.
    pub back_by_class: Vec<usize>,
}

impl ClassSplit {
    pub fn new(img: &IndexedImage, labeling: &Labeling) -> Result<Self> {
        Error::check_len(img.total(), labeling.len())?;
        let m = img.class_count();
        let mut fore_by_class = vec![0usize; m];
        for (p, &c) in img.class_of().iter().enumerate() {
            if labeling.is_fore(p) {
                fore_by_class[c] += 1;
            }
        }
        let back_by_class: Vec<usize> = img
            .counts()
            .iter()
            .zip(&fore_by_class)
            .map(|(&n, &f)| n - f)
            .collect();
        let fore = fore_by_class.iter().sum();
        Ok(Self {
            fore,
            back: img.total() - fore,
            fore_by_class,
            back_by_class,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    /// Negative log-likelihood in nats.
    pub data_term: f64,
    /// Unweighted smoothness cut.
    pub smoothness_term: f64,
    pub lambda: f64,
    /// `data_term + lambda * smoothness_term`.
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(data_term: f64, smoothness_term: f64, lambda: f64) -> Self {
        Self {
            data_term,
            smoothness_term,
            lambda,
            total: data_term + lambda * smoothness_term,
        }
    }
}

/// Histogram data term `s0 ln s0 + s1 ln s1 - sum_i (n0i ln n0i + n1i ln n1i)`.
///
/// An all-fore or all-back labeling yields `n` times the entropy of the color
/// histogram.
pub fn histogram_data_term(split: &ClassSplit) -> f64 {
    let sides = xlnx(split.fore as f64) + xlnx(split.back as f64);
    let classes: f64 = split
        .fore_by_class
        .iter()
        .zip(&split.back_by_class)
        .map(|(&f, &b)| xlnx(f as f64) + xlnx(b as f64))
        .sum();
    sides - classes
}

pub fn exact_energy(
    img: &IndexedImage,
    labeling: &Labeling,
    graph: &SmoothnessGraph,
    lambda: f64,
) -> Result<EnergyBreakdown> {
    Error::check_len(img.total(), graph.n())?;
    let split = ClassSplit::new(img, labeling)?;
    let smooth = graph.smoothness_cut(labeling)?;
    Ok(EnergyBreakdown::new(
        histogram_data_term(&split),
        smooth,
        lambda,
    ))
}

/// Quadratic surrogate of the histogram data term:
/// `-5/(2n) s0 (n - s0) + sum_i 5/(2 n_i) n0i (n_i - n0i)`.
pub fn approx_data_term(img: &IndexedImage, split: &ClassSplit) -> f64 {
    let n = img.total() as f64;
    let global = -2.5 / n * split.fore as f64 * split.back as f64;
    let per_class: f64 = img
        .counts()
        .iter()
        .zip(&split.fore_by_class)
        .map(|(&ni, &f)| {
            let ni_f = ni as f64;
            2.5 / ni_f * f as f64 * (ni - f) as f64
        })
        .sum();
    global + per_class
}

/// The approximate energy: surrogate data term plus `lambda` times the
/// smoothness cut. With `restore_constants` the labeling-independent terms
/// are added back, putting the value on the same scale as [`exact_energy`]:
/// `n f3~(s0/n) - sum_i n_i f3~(n0i/n_i) + n ln n - sum_i n_i ln n_i + lambda E_S`.
pub fn approx_energy(
    img: &IndexedImage,
    labeling: &Labeling,
    graph: &SmoothnessGraph,
    lambda: f64,
    restore_constants: bool,
) -> Result<f64> {
    Error::check_len(img.total(), graph.n())?;
    let split = ClassSplit::new(img, labeling)?;
    let smooth = lambda * graph.smoothness_cut(labeling)?;
    if !restore_constants {
        return Ok(approx_data_term(img, &split) + smooth);
    }
    let n = img.total() as f64;
    let mut data = n * f3_approx(split.fore as f64 / n)? + xlnx(n);
    for (&ni, &f) in img.counts().iter().zip(&split.fore_by_class) {
        let ni_f = ni as f64;
        data -= ni_f * f3_approx(f as f64 / ni_f)? + xlnx(ni_f);
    }
    Ok(data + smooth)
}
