//! Pixel adjacency graph with pairwise smoothness weights `S(p, q)`.

use crate::error::{Error, Result};
use crate::image::{Labeling, RawImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

impl Connectivity {
    pub fn from_count(k: u32) -> Result<Self> {
        match k {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(Error::InvalidParameter(format!(
                "connectivity must be 4 or 8, got {k}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum SmoothnessMode {
    /// Every adjacent pair weighs 1.
    #[default]
    Constant,
    /// `exp(-|c_p - c_q|^2 / (2 beta))`; `None` estimates beta from the image.
    Exponential { beta: Option<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SmoothnessParams {
    pub connectivity: Connectivity,
    pub mode: SmoothnessMode,
    /// Added to every edge weight.
    pub offset: f64,
}

/// Undirected grid graph. Edges are stored once with `p < q`; a CSR index
/// gives both directions for neighbor sums.
#[derive(Clone, Debug)]
pub struct SmoothnessGraph {
    n: usize,
    connectivity: Connectivity,
    edges: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
    adjacency: Vec<(usize, f64)>,
}

fn grid_pairs(width: usize, height: usize, connectivity: Connectivity) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for y in 0..height {
        for x in 0..width {
            let p = y * width + x;
            if x + 1 < width {
                pairs.push((p, p + 1));
            }
            if y + 1 < height {
                pairs.push((p, p + width));
                if connectivity == Connectivity::Eight {
                    if x + 1 < width {
                        pairs.push((p, p + width + 1));
                    }
                    if x > 0 {
                        pairs.push((p, p + width - 1));
                    }
                }
            }
        }
    }
    pairs
}

fn squared_distance(a: [u8; 3], b: [u8; 3]) -> f64 {
    (0..3)
        .map(|c| {
            let d = a[c] as f64 - b[c] as f64;
            d * d
        })
        .sum()
}

pub fn build_smoothness(img: &RawImage, params: &SmoothnessParams) -> Result<SmoothnessGraph> {
    if !(params.offset >= 0.0 && params.offset.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "smoothness offset must be a finite value >= 0, got {}",
            params.offset
        )));
    }
    let pairs = grid_pairs(img.width(), img.height(), params.connectivity);
    let px = img.pixels();
    let edges = match params.mode {
        SmoothnessMode::Constant => pairs
            .into_iter()
            .map(|(p, q)| (p, q, 1.0 + params.offset))
            .collect(),
        SmoothnessMode::Exponential { beta } => {
            let beta = match beta {
                Some(b) if b > 0.0 && b.is_finite() => b,
                Some(b) => {
                    return Err(Error::InvalidParameter(format!(
                        "beta must be positive, got {b}"
                    )))
                }
                None => {
                    let sum: f64 = pairs
                        .iter()
                        .map(|&(p, q)| squared_distance(px[p], px[q]))
                        .sum();
                    (sum / pairs.len().max(1) as f64).max(1.0)
                }
            };
            pairs
                .into_iter()
                .map(|(p, q)| {
                    let w = (-squared_distance(px[p], px[q]) / (2.0 * beta)).exp();
                    (p, q, w + params.offset)
                })
                .collect()
        }
    };
    Ok(SmoothnessGraph::from_edges(
        img.len(),
        params.connectivity,
        edges,
    ))
}

impl SmoothnessGraph {
    fn from_edges(n: usize, connectivity: Connectivity, edges: Vec<(usize, usize, f64)>) -> Self {
        let mut degree = vec![0usize; n + 1];
        for &(p, q, _) in &edges {
            degree[p + 1] += 1;
            degree[q + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0usize, 0.0f64); 2 * edges.len()];
        for &(p, q, w) in &edges {
            adjacency[fill[p]] = (q, w);
            fill[p] += 1;
            adjacency[fill[q]] = (p, w);
            fill[q] += 1;
        }
        Self {
            n,
            connectivity,
            edges,
            offsets,
            adjacency,
        }
    }

    /// Pixel count.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, p: usize) -> &[(usize, f64)] {
        &self.adjacency[self.offsets[p]..self.offsets[p + 1]]
    }

    /// `S(p, q)`, or `None` when the pixels are not adjacent.
    pub fn weight(&self, p: usize, q: usize) -> Option<f64> {
        self.neighbors(p)
            .iter()
            .find(|&&(j, _)| j == q)
            .map(|&(_, w)| w)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// `out[k] = sum over neighbors j of S(j, k) * r[j]`.
    pub fn neighbor_sum(&self, r: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.neighbors(k).iter().map(|&(j, w)| w * r[j]).sum();
        }
    }

    /// Sum of `S(p, q)` over adjacent pairs carrying different labels.
    pub fn smoothness_cut(&self, labeling: &Labeling) -> Result<f64> {
        Error::check_len(self.n, labeling.len())?;
        Ok(self
            .edges
            .iter()
            .filter(|&&(p, q, _)| labeling.get(p) != labeling.get(q))
            .map(|e| e.2)
            .sum())
    }

    /// Number of adjacent pairs carrying different labels.
    pub fn boundary_edges(&self, labeling: &Labeling) -> Result<usize> {
        Error::check_len(self.n, labeling.len())?;
        Ok(self
            .edges
            .iter()
            .filter(|&&(p, q, _)| labeling.get(p) != labeling.get(q))
            .count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn constant(conn: Connectivity) -> SmoothnessParams {
        SmoothnessParams {
            connectivity: conn,
            ..Default::default()
        }
    }

    #[test]
    fn grid_edge_counts() {
        let img = RawImage::filled(3, 3, [5, 5, 5]).unwrap();
        let g = build_smoothness(&img, &constant(Connectivity::Four)).unwrap();
        assert_eq!(g.edges().len(), 2 * 3 * 3 - 3 - 3);
        assert!(g.edges().iter().all(|e| e.2 == 1.0));

        let g8 = build_smoothness(&img, &constant(Connectivity::Eight)).unwrap();
        assert_eq!(g8.edges().len(), 4 * 9 - 3 * 3 - 3 * 3 + 2);
    }

    #[test]
    fn exponential_weights() {
        let img = RawImage::filled(4, 3, [9, 9, 9]).unwrap();
        let params = SmoothnessParams {
            mode: SmoothnessMode::Exponential { beta: None },
            ..Default::default()
        };
        let g = build_smoothness(&img, &params).unwrap();
        assert!(g.edges().iter().all(|e| e.2 == 1.0));

        let pair = RawImage::new(2, 1, vec![[0, 0, 0], [3, 4, 0]]).unwrap();
        let params = SmoothnessParams {
            mode: SmoothnessMode::Exponential { beta: Some(25.0) },
            ..Default::default()
        };
        let g = build_smoothness(&pair, &params).unwrap();
        assert!((g.edges()[0].2 - (-0.5f64).exp()).abs() < 1e-15);
        assert!((g.edges()[0].2 - 0.6065).abs() < 1e-4);

        let bad = SmoothnessParams {
            mode: SmoothnessMode::Exponential { beta: Some(0.0) },
            ..Default::default()
        };
        assert!(build_smoothness(&pair, &bad).is_err());
    }

    #[test]
    fn offset_is_added() {
        let img = RawImage::filled(2, 1, [0, 0, 0]).unwrap();
        let params = SmoothnessParams {
            offset: 0.5,
            ..Default::default()
        };
        let g = build_smoothness(&img, &params).unwrap();
        assert_eq!(g.edges()[0].2, 1.5);
    }

    #[test]
    fn cut_examples() {
        let img = RawImage::filled(2, 1, [0, 0, 0]).unwrap();
        let g = build_smoothness(&img, &SmoothnessParams::default()).unwrap();
        let split = Labeling::from_bools([true, false]);
        assert_eq!(g.smoothness_cut(&split).unwrap(), 1.0);
        assert_eq!(
            g.smoothness_cut(&Labeling::from_bools([true, true]))
                .unwrap(),
            0.0
        );
        assert!(g.smoothness_cut(&Labeling::from_bools([true])).is_err());

        // left column fore, right column back on a 2x2 grid
        let img = RawImage::filled(2, 2, [0, 0, 0]).unwrap();
        let g = build_smoothness(&img, &SmoothnessParams::default()).unwrap();
        let cols = Labeling::from_bools([true, false, true, false]);
        assert_eq!(g.smoothness_cut(&cols).unwrap(), 2.0);
        assert_eq!(g.boundary_edges(&cols).unwrap(), 2);
    }

    #[test]
    fn single_pixel_has_no_edges() {
        let img = RawImage::filled(1, 1, [0, 0, 0]).unwrap();
        let params = SmoothnessParams {
            mode: SmoothnessMode::Exponential { beta: None },
            ..Default::default()
        };
        let g = build_smoothness(&img, &params).unwrap();
        assert!(g.edges().is_empty());
        assert!(g.neighbors(0).is_empty());
    }

    fn image_strategy() -> impl Strategy<Value = RawImage> {
        (1usize..7, 1usize..7).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<[u8; 3]>(), w * h)
                .prop_map(move |px| RawImage::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn graph_invariants(img in image_strategy(), eight in any::<bool>(), flips in any::<u64>()) {
            let params = SmoothnessParams {
                connectivity: if eight { Connectivity::Eight } else { Connectivity::Four },
                mode: SmoothnessMode::Exponential { beta: None },
                offset: 0.0,
            };
            let g = build_smoothness(&img, &params).unwrap();
            let n = img.len();
            prop_assert!(g.edges().len() <= 4 * n);
            let mut seen = std::collections::HashSet::new();
            for &(p, q, w) in g.edges() {
                prop_assert!(p < q);
                prop_assert!(w >= 0.0);
                prop_assert!(seen.insert((p, q)));
                prop_assert_eq!(g.weight(p, q), g.weight(q, p));
                prop_assert_eq!(g.weight(p, q), Some(w));
            }

            let labels = Labeling::from_bools((0..n).map(|i| (flips >> (i % 64)) & 1 == 1));
            let cut = g.smoothness_cut(&labels).unwrap();
            prop_assert_eq!(cut, g.smoothness_cut(&labels.flipped()).unwrap());
            prop_assert!(cut <= g.total_weight() + 1e-12);
        }
    }
}
