//! Deterministic synthetic test images.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{Labeling, RawImage, Rgb};

/// Left half `left`, right half `right` (the extra column of an odd width
/// goes right).
pub fn two_block(width: usize, height: usize, left: Rgb, right: Rgb) -> RawImage {
    let pixels = (0..width * height)
        .map(|p| if p % width < width / 2 { left } else { right })
        .collect();
    RawImage::new(width, height, pixels).expect("positive dimensions")
}

/// Ground truth for [`two_block`]: the left half is fore.
pub fn two_block_truth(width: usize, height: usize) -> Labeling {
    Labeling::from_bools((0..width * height).map(|p| p % width < width / 2))
}

/// [`two_block`] with independent uniform noise of `±amplitude` per channel.
pub fn noisy_two_block(
    width: usize,
    height: usize,
    left: Rgb,
    right: Rgb,
    amplitude: u8,
    seed: u64,
) -> RawImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = amplitude as i32;
    let base = two_block(width, height, left, right);
    let pixels = base
        .pixels()
        .iter()
        .map(|p| p.map(|c| (c as i32 + rng.random_range(-a..=a)).clamp(0, 255) as u8))
        .collect();
    RawImage::new(width, height, pixels).expect("positive dimensions")
}

/// Uniformly random colors drawn from `palette_size` random palette entries.
pub fn random_palette_image(
    width: usize,
    height: usize,
    palette_size: usize,
    seed: u64,
) -> RawImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let palette: Vec<Rgb> = (0..palette_size.max(1))
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect();
    let pixels = (0..width * height)
        .map(|_| palette[rng.random_range(0..palette.len())])
        .collect();
    RawImage::new(width, height, pixels).expect("positive dimensions")
}

/// Fully random RGB pixels.
pub fn random_image(width: usize, height: usize, seed: u64) -> RawImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..width * height)
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect();
    RawImage::new(width, height, pixels).expect("positive dimensions")
}

/// Random labeling with each pixel fore with probability one half.
pub fn random_labeling(n: usize, seed: u64) -> Labeling {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Labeling::from_bools((0..n).map(|_| rng.random::<bool>()))
}
