//! Implicit dense weight matrices over all pixel pairs.
//!
//! Every weight matrix here is full (every pixel pair carries a weight) but
//! has enough color-class structure that `W r` costs `O(n)`. The matrices
//! have a zero diagonal, so for a ±1 indicator `D` of a labeling the cut
//! `sum_{p in F, q in B} w(p, q)` equals `(S_W - D^T W D) / 4`, where `S_W`
//! sums `w(p, q)` over ordered pairs `p != q`.

mod large;
mod small;

pub use large::{
    build_class_kernel, build_large_oracle, estimate_sigma, kernel_density, kernel_objective,
    Estimator, KernelModel, LargeOracle,
};
pub use small::{build_small_oracle, SmallOracle};

use crate::error::{Error, Result};
use crate::image::Labeling;

/// Default cap on the pixel count for dense materialization.
pub const DENSE_CAP: usize = 2048;

/// A symmetric linear map on `R^n`.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Writes `A x` into `y`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// A pixel weight matrix that is never stored explicitly.
pub trait WeightOracle: LinearOperator {
    /// `w(p, q)`; zero when `p == q`.
    fn weight(&self, p: usize, q: usize) -> f64;

    /// `S_W`, the sum of all off-diagonal entries.
    fn total_weight_sum(&self) -> f64;

    fn matvec(&self, r: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.dim(), r.len())?;
        let mut out = vec![0.0; r.len()];
        self.apply(r, &mut out);
        Ok(out)
    }

    fn materialize_dense(&self, cap: usize) -> Result<DenseMatrix> {
        let n = self.dim();
        if n > cap {
            return Err(Error::TooLarge { size: n, cap });
        }
        let mut m = DenseMatrix::zeros(n);
        for p in 0..n {
            for q in (p + 1)..n {
                let w = self.weight(p, q);
                m.set(p, q, w);
                m.set(q, p, w);
            }
        }
        Ok(m)
    }

    /// Total weight of pairs split by the labeling, from one matvec.
    fn cut_value(&self, labeling: &Labeling) -> Result<f64> {
        let d = labeling.indicator();
        let wd = self.matvec(&d)?;
        let quad: f64 = d.iter().zip(&wd).map(|(a, b)| a * b).sum();
        Ok(0.25 * (self.total_weight_sum() - quad))
    }
}

/// Row-major square matrix, used for verification and small problems.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            Error::check_len(n, row.len())?;
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

impl WeightOracle for DenseMatrix {
    fn weight(&self, p: usize, q: usize) -> f64 {
        if p == q {
            0.0
        } else {
            self.get(p, q)
        }
    }

    fn total_weight_sum(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j);
                }
            }
        }
        s
    }
}

/// Per-class sums `sum_{class(j) = i} r_j`.
pub(crate) fn class_sums(class_of: &[usize], m: usize, r: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0; m];
    for (&c, &v) in class_of.iter().zip(r) {
        sums[c] += v;
    }
    sums
}
