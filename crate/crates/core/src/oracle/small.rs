use crate::error::{Error, Result};
use crate::image::IndexedImage;
use crate::smoothness::SmoothnessGraph;

use super::{class_sums, LinearOperator, WeightOracle};

/// Histogram weight matrix for small color spaces:
/// `w(p, q) = -5/(2n) + [class(p) = class(q) = i] 5/(2 n_i) + [p ~ q] lambda S(p, q)`.
#[derive(Clone, Debug)]
pub struct SmallOracle<'a> {
    n: usize,
    class_of: &'a [usize],
    /// `5 / (2 n_i)` per class.
    class_coef: Vec<f64>,
    lambda: f64,
    graph: &'a SmoothnessGraph,
    total_weight_sum: f64,
}

pub fn build_small_oracle<'a>(
    img: &'a IndexedImage,
    graph: &'a SmoothnessGraph,
    lambda: f64,
) -> Result<SmallOracle<'a>> {
    Error::check_len(img.total(), graph.n())?;
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    let n = img.total();
    let nf = n as f64;
    let class_coef: Vec<f64> = img.counts().iter().map(|&c| 2.5 / c as f64).collect();

    let global = -2.5 / nf * nf * (nf - 1.0);
    let same_class: f64 = img
        .counts()
        .iter()
        .zip(&class_coef)
        .map(|(&c, &coef)| coef * c as f64 * (c as f64 - 1.0))
        .sum();
    let smooth = 2.0 * lambda * graph.total_weight();

    Ok(SmallOracle {
        n,
        class_of: img.class_of(),
        class_coef,
        lambda,
        graph,
        total_weight_sum: global + same_class + smooth,
    })
}

impl SmallOracle<'_> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl LinearOperator for SmallOracle<'_> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, r: &[f64], out: &mut [f64]) {
        let global_coef = 2.5 / self.n as f64;
        let phi = -global_coef * r.iter().sum::<f64>();
        let theta: Vec<f64> = class_sums(self.class_of, self.class_coef.len(), r)
            .iter()
            .zip(&self.class_coef)
            .map(|(s, c)| s * c)
            .collect();
        self.graph.neighbor_sum(r, out);
        for (k, o) in out.iter_mut().enumerate() {
            let c = self.class_of[k];
            *o = phi + theta[c] + self.lambda * *o + (global_coef - self.class_coef[c]) * r[k];
        }
    }
}

impl WeightOracle for SmallOracle<'_> {
    fn weight(&self, p: usize, q: usize) -> f64 {
        if p == q {
            return 0.0;
        }
        let mut w = -2.5 / self.n as f64;
        if self.class_of[p] == self.class_of[q] {
            w += self.class_coef[self.class_of[p]];
        }
        if let Some(s) = self.graph.weight(p, q) {
            w += self.lambda * s;
        }
        w
    }

    fn total_weight_sum(&self) -> f64 {
        self.total_weight_sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{Label, Labeling, RawImage};
    use crate::oracle::DENSE_CAP;
    use crate::smoothness::{build_smoothness, SmoothnessParams};

    fn setup(w: usize, h: usize, classes: &[usize]) -> (IndexedImage, SmoothnessGraph) {
        let colors: Vec<[f64; 3]> = classes.iter().map(|&c| [c as f64 * 20.0; 3]).collect();
        let img = IndexedImage::from_classes(w, h, classes, &colors).unwrap();
        let g = build_smoothness(
            &RawImage::filled(w, h, [0; 3]).unwrap(),
            &SmoothnessParams::default(),
        )
        .unwrap();
        (img, g)
    }

    #[test]
    fn constant_image_weights_cancel() {
        let (img, g) = setup(2, 2, &[0; 4]);
        let o = build_small_oracle(&img, &g, 0.0).unwrap();
        let d = o.materialize_dense(DENSE_CAP).unwrap();
        assert!(d.row(0).iter().chain(d.row(3)).all(|&v| v == 0.0));
        assert_eq!(o.total_weight_sum(), 0.0);
    }

    #[test]
    fn two_pixel_weights() {
        let (img, g) = setup(2, 1, &[0, 1]);
        let o = build_small_oracle(&img, &g, 0.0).unwrap();
        assert_eq!(o.weight(0, 1), -1.25);
        let d = o.materialize_dense(DENSE_CAP).unwrap();
        assert_eq!(d.row(0), &[0.0, -1.25]);
        assert_eq!(d.row(1), &[-1.25, 0.0]);
        assert_eq!(
            o.matvec(&[3.0, 7.0]).unwrap(),
            vec![-1.25 * 7.0, -1.25 * 3.0]
        );
        let split = Labeling::from_bools([true, false]);
        assert!((o.cut_value(&split).unwrap() + 1.25).abs() < 1e-15);
        assert_eq!(
            o.cut_value(&Labeling::uniform(2, Label::Fore)).unwrap(),
            0.0
        );

        let (img, g) = setup(2, 1, &[0, 0]);
        let o = build_small_oracle(&img, &g, 1.0).unwrap();
        assert_eq!(o.weight(0, 1), 1.0);
    }

    #[test]
    fn all_ones_on_constant_grid() {
        let (img, g) = setup(2, 2, &[0; 4]);
        let o = build_small_oracle(&img, &g, 1.0).unwrap();
        let out = o.matvec(&[1.0; 4]).unwrap();
        for v in out {
            assert!((v - 2.0).abs() < 1e-15);
        }
        assert_eq!(o.matvec(&[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn single_pixel() {
        let (img, g) = setup(1, 1, &[0]);
        let o = build_small_oracle(&img, &g, 3.0).unwrap();
        let d = o.materialize_dense(DENSE_CAP).unwrap();
        assert_eq!(d.row(0), &[0.0]);
        assert_eq!(o.matvec(&[5.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn errors() {
        let (img, _) = setup(2, 1, &[0, 1]);
        let (_, g3) = setup(3, 1, &[0, 1, 1]);
        assert!(build_small_oracle(&img, &g3, 1.0).is_err());
        let (img, g) = setup(2, 1, &[0, 1]);
        let o = build_small_oracle(&img, &g, 1.0).unwrap();
        assert!(o.matvec(&[1.0]).is_err());
        assert!(matches!(
            o.materialize_dense(1),
            Err(Error::TooLarge { size: 2, cap: 1 })
        ));
        assert!(o.cut_value(&Labeling::uniform(3, Label::Back)).is_err());
    }
}
