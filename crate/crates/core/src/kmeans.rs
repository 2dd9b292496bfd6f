//! Lloyd's k-means in RGB with k-means++ seeding.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{IndexedImage, RawImage};

pub const DEFAULT_MAX_ITER: usize = 100;

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|c| (a[c] - b[c]).powi(2)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(color: [f64; 3], centroids: &[[f64; 3]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &c) in centroids.iter().enumerate() {
        let d = dist2(color, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn seed_centroids(colors: &[[f64; 3]], m: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    let n = colors.len();
    let mut centroids = vec![colors[rng.random_range(0..n)]];
    let mut d2: Vec<f64> = colors.iter().map(|&c| dist2(c, centroids[0])).collect();
    while centroids.len() < m {
        let total: f64 = d2.iter().sum();
        // every pixel already coincides with a centroid
        if total <= 0.0 {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = n - 1;
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 && target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        if d2[pick] == 0.0 {
            pick = d2.iter().rposition(|&d| d > 0.0).unwrap_or(pick);
        }
        let c = colors[pick];
        centroids.push(c);
        for (d, &col) in d2.iter_mut().zip(colors) {
            *d = d.min(dist2(col, c));
        }
    }
    centroids
}

/// Clusters pixel colors into at most `m` classes. Fewer classes come back
/// when the image has fewer than `m` distinct colors.
pub fn kmeans_cluster(
    img: &RawImage,
    m: usize,
    seed: u64,
    max_iter: usize,
) -> Result<IndexedImage> {
    let n = img.len();
    if m == 0 {
        return Err(Error::InvalidParameter(
            "class count must be at least 1".into(),
        ));
    }
    if m > n {
        return Err(Error::InvalidParameter(format!(
            "class count {m} exceeds pixel count {n}"
        )));
    }
    let colors: Vec<[f64; 3]> = img
        .pixels()
        .iter()
        .map(|p| [p[0] as f64, p[1] as f64, p[2] as f64])
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(&colors, m, &mut rng);
    let k = centroids.len();

    let mut assign = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (p, &c) in colors.iter().enumerate() {
            let (i, d) = nearest(c, &centroids);
            if assign[p] != i {
                assign[p] = i;
                changed = true;
            }
            dist[p] = d;
        }
        if !changed {
            break;
        }

        let mut sums = vec![[0.0; 3]; k];
        let mut counts = vec![0usize; k];
        for (&a, c) in assign.iter().zip(&colors) {
            counts[a] += 1;
            for ch in 0..3 {
                sums[a][ch] += c[ch];
            }
        }
        for i in 0..k {
            if counts[i] > 0 {
                let cnt = counts[i] as f64;
                centroids[i] = sums[i].map(|s| s / cnt);
                continue;
            }
            // re-seed an empty cluster from the worst-fit pixel
            let (far, &far_d) =
                dist.iter()
                    .enumerate()
                    .fold((0, &f64::NEG_INFINITY), |best, (p, d)| {
                        if *d > *best.1 {
                            (p, d)
                        } else {
                            best
                        }
                    });
            if far_d > 0.0 {
                centroids[i] = colors[far];
                dist[far] = 0.0;
            }
        }
    }

    IndexedImage::from_classes(img.width(), img.height(), &assign, &colors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(colors: &[[u8; 3]], w: usize, h: usize) -> RawImage {
        RawImage::new(w, h, colors.to_vec()).unwrap()
    }

    #[test]
    fn one_class_is_the_mean() {
        let img = image(&[[0, 0, 0], [10, 20, 30], [20, 40, 60], [30, 0, 90]], 2, 2);
        let q = kmeans_cluster(&img, 1, 42, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(q.class_count(), 1);
        assert_eq!(q.means()[0], [15.0, 15.0, 45.0]);
    }

    #[test]
    fn two_colors_split_exactly() {
        let a = [200, 10, 10];
        let b = [10, 10, 200];
        let px: Vec<[u8; 3]> = (0..20).map(|i| if i % 3 == 0 { a } else { b }).collect();
        let q = kmeans_cluster(&image(&px, 5, 4), 2, 7, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(q.class_count(), 2);
        for (p, &c) in q.class_of().iter().enumerate() {
            let expect = if p % 3 == 0 { a } else { b };
            assert_eq!(q.means()[c], expect.map(f64::from));
        }
    }

    #[test]
    fn distinct_colors_become_classes() {
        let palette = [
            [0, 0, 0],
            [255, 0, 0],
            [0, 255, 0],
            [0, 0, 255],
            [128, 128, 128],
        ];
        let px: Vec<[u8; 3]> = (0..30).map(|i| palette[(i * 7) % 5]).collect();
        let img = image(&px, 6, 5);
        for seed in 0..10 {
            let q = kmeans_cluster(&img, 5, seed, DEFAULT_MAX_ITER).unwrap();
            assert_eq!(q.class_count(), 5);
            let cost: f64 = q
                .class_of()
                .iter()
                .zip(img.pixels())
                .map(|(&c, p)| dist2(q.means()[c], p.map(f64::from)))
                .sum();
            assert_eq!(cost, 0.0, "seed {seed}");
        }
    }

    #[test]
    fn surplus_classes_collapse() {
        let img = image(&[[1, 1, 1], [1, 1, 1], [9, 9, 9], [9, 9, 9]], 2, 2);
        let q = kmeans_cluster(&img, 4, 42, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(q.class_count(), 2);
        assert_eq!(q.counts(), &[2, 2]);
    }

    #[test]
    fn errors_and_determinism() {
        let img = image(&[[1, 2, 3], [4, 5, 6]], 2, 1);
        assert!(kmeans_cluster(&img, 3, 0, 10).is_err());
        assert!(kmeans_cluster(&img, 0, 0, 10).is_err());

        let px: Vec<[u8; 3]> = (0..64u32)
            .map(|i| [(i * 37 % 256) as u8, (i * 11) as u8, 5])
            .collect();
        let img = image(&px, 8, 8);
        let a = kmeans_cluster(&img, 6, 3, DEFAULT_MAX_ITER).unwrap();
        let b = kmeans_cluster(&img, 6, 3, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts().iter().sum::<usize>(), 64);
    }
}
