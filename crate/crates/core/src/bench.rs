//! Wall-time scaling of the structured matvec and the full pipeline.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::image::quantize_gray;
use crate::oracle::{build_small_oracle, LinearOperator};
use crate::segment::{segment, SegmentParams};
use crate::smoothness::{build_smoothness, SmoothnessParams};
use crate::synthetic;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchOptions {
    /// Timing samples per size; the minimum is reported.
    pub repeats: usize,
    /// Matvecs per timing sample.
    pub matvec_batch: usize,
    pub time_segment: bool,
    pub lambda: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            repeats: 5,
            matvec_batch: 20,
            time_segment: true,
            lambda: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    /// Actual pixel count (`width * height`).
    pub n: usize,
    pub width: usize,
    pub height: usize,
    /// Best time for a single matvec.
    pub matvec: Duration,
    pub segment: Option<Duration>,
    /// `matvec / previous row's matvec`.
    pub ratio: Option<f64>,
}

/// Grid shape closest to square with `width * height <= n`.
pub fn grid_for(n: usize) -> (usize, usize) {
    let width = n.isqrt().max(1);
    (width, (n / width).max(1))
}

pub fn run_bench(sizes: &[usize], opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    if opts.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidParameter("sizes must be positive".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "sizes must be strictly ascending".into(),
        ));
    }

    let mut rows: Vec<BenchRow> = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let (width, height) = grid_for(size);
        let raw = synthetic::noisy_two_block(width, height, [60; 3], [180; 3], 40, size as u64);
        let img = quantize_gray(&raw, 16)?;
        let graph = build_smoothness(&raw, &SmoothnessParams::default())?;
        let oracle = build_small_oracle(&img, &graph, opts.lambda)?;
        let n = img.total();

        let r: Vec<f64> = (0..n)
            .map(|i| ((i * 7919) % 1000) as f64 / 500.0 - 1.0)
            .collect();
        let mut out = vec![0.0; n];
        let batch = opts.matvec_batch.max(1);
        let mut best = Duration::MAX;
        for _ in 0..opts.repeats {
            let start = Instant::now();
            for _ in 0..batch {
                oracle.apply(std::hint::black_box(&r), &mut out);
                std::hint::black_box(&out);
            }
            best = best.min(start.elapsed() / batch as u32);
        }

        let segment_time = if opts.time_segment {
            let params = SegmentParams {
                lambda: opts.lambda,
                ..Default::default()
            };
            let mut best = Duration::MAX;
            for _ in 0..opts.repeats {
                let start = Instant::now();
                std::hint::black_box(segment(&img, &graph, &params)?);
                best = best.min(start.elapsed());
            }
            Some(best)
        } else {
            None
        };

        let ratio = rows
            .last()
            .map(|prev| best.as_secs_f64() / prev.matvec.as_secs_f64().max(1e-12));
        rows.push(BenchRow {
            n,
            width,
            height,
            matvec: best,
            segment: segment_time,
            ratio,
        });
    }
    Ok(rows)
}

/// Fixed-width text table of bench rows.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut s = format!(
        "{:>10} {:>14} {:>14} {:>8}\n",
        "n", "matvec_us", "segment_ms", "ratio"
    );
    for r in rows {
        let seg = r
            .segment
            .map(|d| format!("{:.3}", d.as_secs_f64() * 1e3))
            .unwrap_or_else(|| "-".into());
        let ratio = r
            .ratio
            .map(|x| format!("{x:.3}"))
            .unwrap_or_else(|| "-".into());
        s.push_str(&format!(
            "{:>10} {:>14.3} {:>14} {:>8}\n",
            r.n,
            r.matvec.as_secs_f64() * 1e6,
            seg,
            ratio
        ));
    }
    s
}
