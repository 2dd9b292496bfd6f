//! End-to-end segmentation: build the weight oracle, take its dominant
//! eigenvector, threshold it, and score the resulting labeling.

use crate::eigen::{lanczos_largest, threshold_labels, EigenResult, LanczosParams};
use crate::energy::{approx_energy, exact_energy, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::image::{IndexedImage, Labeling};
use crate::oracle::{
    build_class_kernel, build_large_oracle, build_small_oracle, kernel_objective, Estimator,
    WeightOracle,
};
use crate::smoothness::SmoothnessGraph;

/// Which weight matrix to segment with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleKind {
    /// Histogram weights over the image's color classes.
    Histogram,
    /// Gaussian kernel weights between class centroids.
    Kernel { sigma2: f64, estimator: Estimator },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentParams {
    pub lambda: f64,
    pub kind: OracleKind,
    pub solver: LanczosParams,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            kind: OracleKind::Histogram,
            solver: LanczosParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentationResult {
    pub labeling: Labeling,
    pub eigen: EigenResult,
    /// Histogram energy of the labeling.
    pub exact: EnergyBreakdown,
    /// Quadratic objective minimized by the cut: the histogram surrogate in
    /// histogram mode, the kernel objective in kernel mode.
    pub approx: f64,
    /// Cut weight of the labeling in the oracle's graph.
    pub cut: f64,
    pub fore_size: usize,
    pub back_size: usize,
    /// Adjacent pairs with different labels.
    pub boundary_edges: usize,
}

pub fn segment(
    img: &IndexedImage,
    graph: &SmoothnessGraph,
    params: &SegmentParams,
) -> Result<SegmentationResult> {
    Error::check_len(img.total(), graph.n())?;
    let lambda = params.lambda;
    let (eigen, labeling, cut, approx) = match params.kind {
        OracleKind::Histogram => {
            let oracle = build_small_oracle(img, graph, lambda)?;
            let eigen = lanczos_largest(&oracle, &params.solver)?;
            let labeling = threshold_labels(&eigen.eigenvector)?;
            let cut = oracle.cut_value(&labeling)?;
            let approx = approx_energy(img, &labeling, graph, lambda, false)?;
            (eigen, labeling, cut, approx)
        }
        OracleKind::Kernel { sigma2, estimator } => {
            let model = build_class_kernel(img, sigma2, estimator)?;
            let oracle = build_large_oracle(img, graph, lambda, &model)?;
            let eigen = lanczos_largest(&oracle, &params.solver)?;
            let labeling = threshold_labels(&eigen.eigenvector)?;
            let cut = oracle.cut_value(&labeling)?;
            let approx = kernel_objective(img, &model, &labeling, graph, lambda)?;
            (eigen, labeling, cut, approx)
        }
    };
    let exact = exact_energy(img, &labeling, graph, lambda)?;
    Ok(SegmentationResult {
        fore_size: labeling.fore_count(),
        back_size: labeling.back_count(),
        boundary_edges: graph.boundary_edges(&labeling)?,
        labeling,
        eigen,
        exact,
        approx,
        cut,
    })
}

/// Pairwise Rand index between two labelings: the fraction of unordered
/// pixel pairs on which both agree about "same side" versus "different
/// sides". Invariant under swapping either labeling's fore and back.
pub fn rand_index(a: &Labeling, b: &Labeling) -> Result<f64> {
    Error::check_len(a.len(), b.len())?;
    let n = a.len();
    if n < 2 {
        return Ok(1.0);
    }
    let mut table = [[0u64; 2]; 2];
    for (x, y) in a.labels().iter().zip(b.labels()) {
        table[a_idx(*x)][a_idx(*y)] += 1;
    }
    let pairs = |k: u64| k * k.saturating_sub(1) / 2;
    let total = pairs(n as u64);
    let both: u64 = table.iter().flatten().map(|&k| pairs(k)).sum();
    let rows: u64 = table.iter().map(|r| pairs(r[0] + r[1])).sum();
    let cols: u64 = (0..2).map(|j| pairs(table[0][j] + table[1][j])).sum();
    // agreements = pairs together in both + pairs apart in both
    let agree = total + 2 * both - rows - cols;
    Ok(agree as f64 / total as f64)
}

fn a_idx(l: crate::image::Label) -> usize {
    match l {
        crate::image::Label::Fore => 0,
        crate::image::Label::Back => 1,
    }
}
