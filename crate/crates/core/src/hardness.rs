//! The set-partition reduction: an integer multiset `X` becomes a one-row
//! image with one color block per element, and `X` splits into two equal
//! halves iff the minimum uninformed energy over block-coherent labelings
//! equals `2k ln k - sum_i x_i ln x_i`, where `2k = sum_i x_i`.

use crate::energy::{exact_energy, xlnx};
use crate::error::{Error, Result};
use crate::image::{IndexedImage, Label, Labeling};
use crate::smoothness::SmoothnessGraph;

/// Default pixel cap for exhaustive labeling enumeration.
pub const BRUTE_FORCE_CAP: usize = 22;
/// Largest multiset accepted by block enumeration.
pub const MAX_BLOCKS: usize = 24;
/// Absolute tolerance for the equal-split test.
pub const PARTITION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionInstance {
    values: Vec<u64>,
}

impl PartitionInstance {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("instance has no values".into()));
        }
        if values.contains(&0) {
            return Err(Error::InvalidParameter("values must be positive".into()));
        }
        Ok(Self { values })
    }

    /// Parses a comma-separated list such as `"1,2,3"`.
    pub fn parse(list: &str) -> Result<Self> {
        let values = list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidParameter(format!("not a positive integer: {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }

    /// `2k ln k - sum_i x_i ln x_i` with `k = total / 2`.
    pub fn target(&self) -> f64 {
        let k = self.total() as f64 / 2.0;
        2.0 * xlnx(k) - self.values.iter().map(|&x| xlnx(x as f64)).sum::<f64>()
    }
}

/// One row of `sum x_i` pixels, `x_i` consecutive pixels of class `i`.
pub fn build_partition_image(inst: &PartitionInstance) -> Result<IndexedImage> {
    let classes: Vec<usize> = inst
        .values
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| std::iter::repeat_n(i, x as usize))
        .collect();
    let colors: Vec<[f64; 3]> = classes.iter().map(|&c| [c as f64; 3]).collect();
    IndexedImage::from_classes(classes.len(), 1, &classes, &colors)
}

/// Labeling from a binary code: pixel 0 is the most significant bit and a set
/// bit means fore.
pub fn labeling_from_code(code: u64, n: usize) -> Labeling {
    Labeling::from_bools((0..n).map(|p| (code >> (n - 1 - p)) & 1 == 1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub energy: f64,
    pub labeling: Labeling,
}

fn brute_force_over(
    img: &IndexedImage,
    graph: &SmoothnessGraph,
    lambda: f64,
    cap: usize,
    admit: impl Fn(&Labeling) -> bool,
) -> Result<Minimum> {
    let n = img.total();
    if n > cap || n >= 64 {
        return Err(Error::TooLarge { size: n, cap });
    }
    let mut best: Option<Minimum> = None;
    for code in 0..(1u64 << n) {
        let labeling = labeling_from_code(code, n);
        if !admit(&labeling) {
            continue;
        }
        let energy = exact_energy(img, &labeling, graph, lambda)?.total;
        // keep the lowest code among numerically tied minima
        let improves = best
            .as_ref()
            .is_none_or(|b| energy < b.energy - 1e-12 * (1.0 + b.energy.abs()));
        if improves {
            best = Some(Minimum { energy, labeling });
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("no admissible labeling".into()))
}

/// Exhaustive minimum of the exact energy over all `2^n` labelings.
pub fn brute_force_min_energy(
    img: &IndexedImage,
    graph: &SmoothnessGraph,
    lambda: f64,
    cap: usize,
) -> Result<Minimum> {
    brute_force_over(img, graph, lambda, cap, |_| true)
}

/// As [`brute_force_min_energy`], restricted to labelings that give every
/// color class a single label (the effect of unbounded intra-color
/// smoothness).
pub fn brute_force_block_coherent(
    img: &IndexedImage,
    graph: &SmoothnessGraph,
    lambda: f64,
    cap: usize,
) -> Result<Minimum> {
    let m = img.class_count();
    let class_of = img.class_of();
    brute_force_over(img, graph, lambda, cap, |l| {
        let mut first: Vec<Option<Label>> = vec![None; m];
        l.labels().iter().zip(class_of).all(|(&lab, &c)| {
            let slot = &mut first[c];
            match slot {
                Some(prev) => *prev == lab,
                None => {
                    *slot = Some(lab);
                    true
                }
            }
        })
    })
}

/// Energy of the split that sends the blocks selected by `mask` to the fore.
pub fn block_energy(inst: &PartitionInstance, mask: u64) -> f64 {
    let mut fore = 0u64;
    let mut back = 0u64;
    for (i, &x) in inst.values.iter().enumerate() {
        if mask >> i & 1 == 1 {
            fore += x;
        } else {
            back += x;
        }
    }
    let sides = xlnx(fore as f64) + xlnx(back as f64);
    let blocks: f64 = inst.values.iter().map(|&x| xlnx(x as f64)).sum();
    sides - blocks
}

/// Minimum over all `2^m` block subsets of [`block_energy`].
pub fn brute_force_blocks(inst: &PartitionInstance) -> Result<f64> {
    let m = inst.values.len();
    if m > MAX_BLOCKS {
        return Err(Error::TooLarge {
            size: m,
            cap: MAX_BLOCKS,
        });
    }
    Ok((0..(1u64 << m))
        .map(|mask| block_energy(inst, mask))
        .fold(f64::INFINITY, f64::min))
}

/// Decides set partition through the energy minimum. Odd totals are `false`.
pub fn decide_partition(inst: &PartitionInstance) -> Result<bool> {
    if inst.total() % 2 == 1 {
        return Ok(false);
    }
    Ok((brute_force_blocks(inst)? - inst.target()).abs() <= PARTITION_TOL)
}
