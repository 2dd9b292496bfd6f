//! Image containers, binary netpbm I/O, downscaling and gray quantization.
//!
//! Everything downstream works on an [`IndexedImage`]: every pixel carries the
//! index of its color class, and the per-class pixel counts and mean colors are
//! cached next to it. Classes are always compacted, so every class that exists
//! owns at least one pixel.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// An 8-bit RGB image stored row-major. Gray inputs carry equal channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RawImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        Error::check_len(width * height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_gray(width: usize, height: usize, gray: &[u8]) -> Result<Self> {
        Self::new(width, height, gray.iter().map(|&g| [g, g, g]).collect())
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self> {
        Self::new(width, height, vec![color; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }
}

/// Pixel-to-color-class map with per-class statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedImage {
    width: usize,
    height: usize,
    class_of: Vec<usize>,
    counts: Vec<usize>,
    means: Vec<[f64; 3]>,
}

impl IndexedImage {
    /// Builds an indexed image from raw (possibly sparse) class ids and the
    /// per-pixel colors used to compute class means. Unused ids are dropped and
    /// the remaining classes renumbered in increasing order of their raw id.
    pub fn from_classes(
        width: usize,
        height: usize,
        raw_class: &[usize],
        colors: &[[f64; 3]],
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let n = width * height;
        Error::check_len(n, raw_class.len())?;
        Error::check_len(n, colors.len())?;

        let max_id = raw_class.iter().copied().max().unwrap_or(0);
        let mut remap = vec![usize::MAX; max_id + 1];
        for &c in raw_class {
            remap[c] = 0;
        }
        let mut next = 0;
        for slot in remap.iter_mut().filter(|s| **s == 0) {
            *slot = next;
            next += 1;
        }

        let class_of: Vec<usize> = raw_class.iter().map(|&c| remap[c]).collect();
        let mut counts = vec![0usize; next];
        let mut sums = vec![[0.0f64; 3]; next];
        for (&c, color) in class_of.iter().zip(colors) {
            counts[c] += 1;
            for ch in 0..3 {
                sums[c][ch] += color[ch];
            }
        }
        let means = sums
            .iter()
            .zip(&counts)
            .map(|(s, &k)| {
                let k = k as f64;
                [s[0] / k, s[1] / k, s[2] / k]
            })
            .collect();

        Ok(Self {
            width,
            height,
            class_of,
            counts,
            means,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel count `n`.
    pub fn total(&self) -> usize {
        self.class_of.len()
    }

    /// Number of color classes `m`.
    pub fn class_count(&self) -> usize {
        self.counts.len()
    }

    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn means(&self) -> &[[f64; 3]] {
        &self.means
    }

    /// Renders each pixel with its class mean color.
    pub fn to_raw(&self) -> RawImage {
        let pixels = self
            .class_of
            .iter()
            .map(|&c| {
                let m = self.means[c];
                [to_u8(m[0]), to_u8(m[1]), to_u8(m[2])]
            })
            .collect();
        RawImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Fore,
    Back,
}

impl Label {
    pub fn flipped(self) -> Self {
        match self {
            Label::Fore => Label::Back,
            Label::Back => Label::Fore,
        }
    }

    /// +1 for fore, -1 for back.
    pub fn sign(self) -> f64 {
        match self {
            Label::Fore => 1.0,
            Label::Back => -1.0,
        }
    }
}

/// A binary fore/back labeling of every pixel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Labeling {
    labels: Vec<Label>,
}

impl Labeling {
    pub fn new(labels: Vec<Label>) -> Self {
        Self { labels }
    }

    pub fn uniform(n: usize, label: Label) -> Self {
        Self {
            labels: vec![label; n],
        }
    }

    /// `true` marks a foreground pixel.
    pub fn from_bools(fore: impl IntoIterator<Item = bool>) -> Self {
        Self {
            labels: fore
                .into_iter()
                .map(|f| if f { Label::Fore } else { Label::Back })
                .collect(),
        }
    }

    /// Reads a mask image back: any channel value above 127 is foreground.
    pub fn from_mask(mask: &RawImage) -> Self {
        Self::from_bools(mask.pixels().iter().map(|p| p[0] > 127))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn get(&self, p: usize) -> Label {
        self.labels[p]
    }

    pub fn is_fore(&self, p: usize) -> bool {
        self.labels[p] == Label::Fore
    }

    /// The ±1 indicator vector.
    pub fn indicator(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.sign()).collect()
    }

    pub fn flipped(&self) -> Self {
        Self {
            labels: self.labels.iter().map(|l| l.flipped()).collect(),
        }
    }

    pub fn fore_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == Label::Fore).count()
    }

    pub fn back_count(&self) -> usize {
        self.len() - self.fore_count()
    }
}

/// Reads a binary PGM (P5) or PPM (P6) file with maxval 255.
pub fn load_image(path: impl AsRef<Path>) -> Result<RawImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_netpbm(&bytes)
}

/// Decodes an in-memory binary PGM/PPM.
pub fn decode_netpbm(bytes: &[u8]) -> Result<RawImage> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => {
            return Err(Error::MalformedHeader(
                "missing P5/P6 magic number".to_string(),
            ))
        }
    };
    let mut cursor = 2;
    let width = header_token(bytes, &mut cursor, "width")?;
    let height = header_token(bytes, &mut cursor, "height")?;
    let maxval = header_token(bytes, &mut cursor, "maxval")?;
    // exactly one whitespace byte separates maxval from the payload
    match bytes.get(cursor) {
        Some(b) if b.is_ascii_whitespace() => cursor += 1,
        _ => {
            return Err(Error::MalformedHeader(
                "no whitespace after maxval".to_string(),
            ))
        }
    }
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval as u32));
    }

    let n = width * height;
    let expected = n * channels;
    let payload = &bytes[cursor..];
    if payload.len() < expected {
        return Err(Error::TruncatedData {
            expected,
            actual: payload.len(),
        });
    }
    let payload = &payload[..expected];
    let pixels = if channels == 1 {
        payload.iter().map(|&g| [g, g, g]).collect()
    } else {
        payload
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect()
    };
    RawImage::new(width, height, pixels)
}

fn header_token(bytes: &[u8], cursor: &mut usize, what: &str) -> Result<usize> {
    loop {
        match bytes.get(*cursor) {
            Some(b) if b.is_ascii_whitespace() => *cursor += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*cursor) {
                    *cursor += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::MalformedHeader(format!("missing {what}"))),
        }
    }
    let start = *cursor;
    while bytes.get(*cursor).is_some_and(u8::is_ascii_digit) {
        *cursor += 1;
    }
    if start == *cursor {
        return Err(Error::MalformedHeader(format!("{what} is not a number")));
    }
    std::str::from_utf8(&bytes[start..*cursor])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedHeader(format!("{what} is out of range")))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Encodes a mask as binary PGM: fore = 255, back = 0.
pub fn encode_mask(labeling: &Labeling, width: usize, height: usize) -> Result<Vec<u8>> {
    Error::check_len(width * height, labeling.len())?;
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(
        labeling
            .labels()
            .iter()
            .map(|&l| if l == Label::Fore { 255u8 } else { 0 }),
    );
    Ok(out)
}

pub fn write_mask(
    labeling: &Labeling,
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let bytes = encode_mask(labeling, width, height)?;
    write_file(path.as_ref(), &bytes)
}

pub fn encode_ppm(img: &RawImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.pixels.iter().flatten());
    out
}

pub fn write_ppm(img: &RawImage, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_ppm(img))
}

/// Tints foreground pixels halfway toward pure red.
pub fn overlay(img: &RawImage, labeling: &Labeling) -> Result<RawImage> {
    Error::check_len(img.len(), labeling.len())?;
    let pixels = img
        .pixels
        .iter()
        .zip(labeling.labels())
        .map(|(&[r, g, b], &l)| match l {
            Label::Fore => [((r as u16 + 255) / 2) as u8, (g / 2), (b / 2)],
            Label::Back => [r, g, b],
        })
        .collect();
    Ok(RawImage {
        width: img.width,
        height: img.height,
        pixels,
    })
}

/// Box-filter downscale so the longer side equals `max_dim`. Images already
/// within the bound are returned unchanged.
pub fn resize_max(img: &RawImage, max_dim: usize) -> Result<RawImage> {
    if max_dim == 0 {
        return Err(Error::InvalidParameter("max_dim must be at least 1".into()));
    }
    let (w, h) = (img.width, img.height);
    if w.max(h) <= max_dim {
        return Ok(img.clone());
    }
    let (new_w, new_h) = if w >= h {
        let nh = ((h as f64 * max_dim as f64 / w as f64).round() as usize).max(1);
        (max_dim, nh)
    } else {
        let nw = ((w as f64 * max_dim as f64 / h as f64).round() as usize).max(1);
        (nw, max_dim)
    };

    let span = |i: usize, src: usize, dst: usize| {
        let lo = i * src / dst;
        let hi = ((i + 1) * src / dst).max(lo + 1);
        lo..hi
    };

    let mut pixels = Vec::with_capacity(new_w * new_h);
    for oy in 0..new_h {
        let ys = span(oy, h, new_h);
        for ox in 0..new_w {
            let xs = span(ox, w, new_w);
            let mut acc = [0u64; 3];
            let mut count = 0u64;
            for y in ys.clone() {
                for x in xs.clone() {
                    let p = img.pixels[y * w + x];
                    for ch in 0..3 {
                        acc[ch] += p[ch] as u64;
                    }
                    count += 1;
                }
            }
            // round half up
            pixels.push(acc.map(|s| ((2 * s + count) / (2 * count)) as u8));
        }
    }
    RawImage::new(new_w, new_h, pixels)
}

/// Rec.601 luma, rounded to the nearest integer.
pub fn luminance(p: Rgb) -> u8 {
    let [r, g, b] = p.map(u32::from);
    ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
}

/// Gray-level quantization into `levels` equal-width bins.
pub fn quantize_gray(img: &RawImage, levels: usize) -> Result<IndexedImage> {
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidParameter(format!(
            "gray levels must lie in [2, 256], got {levels}"
        )));
    }
    let gray: Vec<u8> = img.pixels.iter().map(|&p| luminance(p)).collect();
    let raw_class: Vec<usize> = gray.iter().map(|&g| g as usize * levels / 256).collect();
    let colors: Vec<[f64; 3]> = gray.iter().map(|&g| [g as f64; 3]).collect();
    IndexedImage::from_classes(img.width, img.height, &raw_class, &colors)
}
