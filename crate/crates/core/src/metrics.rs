//! Full-reference quality metrics.

use crate::error::{Error, Result};
use crate::image::{quantized, Image};

pub const PEAK: f64 = 255.0;

const SSIM_RADIUS: usize = 5;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn same_shape(a: &Image, b: &Image) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::Shape(format!(
            "images differ in shape: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// PSNR in dB over all samples; identical inputs give `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image, peak: f64) -> Result<f64> {
    same_shape(a, b)?;
    Ok(psnr_from_mse(mse(a.data(), b.data()), peak))
}

pub fn psnr_per_channel(a: &Image, b: &Image, peak: f64) -> Result<Vec<f64>> {
    same_shape(a, b)?;
    Ok((0..a.channels())
        .map(|c| psnr_from_mse(mse(a.plane(c), b.plane(c)), peak))
        .collect())
}

fn gaussian_taps() -> [f64; 2 * SSIM_RADIUS + 1] {
    let mut g = [0.0; 2 * SSIM_RADIUS + 1];
    for (i, v) in g.iter_mut().enumerate() {
        let d = i as f64 - SSIM_RADIUS as f64;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= s);
    g
}

/// Separable 'valid' Gaussian filter of an `h x w` plane.
fn filter_valid(src: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let n = taps.len();
    let (oh, ow) = (h - n + 1, w - n + 1);
    let mut tmp = vec![0.0; h * ow];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = taps.iter().zip(&row[x..x + n]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            let mut s = 0.0;
            for (k, t) in taps.iter().enumerate() {
                s += t * tmp[(y + k) * ow + x];
            }
            out[y * ow + x] = s;
        }
    }
    out
}

fn ssim_plane(a: &[f64], b: &[f64], h: usize, w: usize) -> f64 {
    let taps = gaussian_taps();
    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(a, h, w, &taps);
    let mu_b = filter_valid(b, h, w, &taps);
    let e_aa = filter_valid(&aa, h, w, &taps);
    let e_bb = filter_valid(&bb, h, w, &taps);
    let e_ab = filter_valid(&ab, h, w, &taps);
    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    total / mu_a.len() as f64
}

/// SSIM of each channel: 11x11 Gaussian window (sigma 1.5) over the valid
/// region, `K1 = 0.01`, `K2 = 0.03`, `L = 255`.
pub fn ssim_per_channel(a: &Image, b: &Image) -> Result<Vec<f64>> {
    same_shape(a, b)?;
    let (h, w, ch) = a.shape();
    let win = 2 * SSIM_RADIUS + 1;
    if h < win || w < win {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            side: win,
        });
    }
    Ok((0..ch).map(|c| ssim_plane(a.plane(c), b.plane(c), h, w)).collect())
}

/// Mean of the per-channel SSIMs.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    let per = ssim_per_channel(a, b)?;
    Ok(per.iter().sum::<f64>() / per.len() as f64)
}

/// Per-channel `10 log10(signal power / noise power)` with
/// `noise = noisy - clean`.
pub fn snr_per_channel(clean: &Image, noisy: &Image) -> Result<Vec<f64>> {
    same_shape(clean, noisy)?;
    Ok((0..clean.channels())
        .map(|c| {
            let (s, n) = clean
                .plane(c)
                .iter()
                .zip(noisy.plane(c))
                .fold((0.0, 0.0), |(s, n), (x, y)| (s + x * x, n + (y - x) * (y - x)));
            if n == 0.0 {
                f64::INFINITY
            } else {
                10.0 * (s / n).log10()
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub id: String,
    /// dB; `f64::INFINITY` for identical images.
    pub psnr: f64,
    pub ssim: f64,
    pub psnr_channels: Vec<f64>,
    pub ssim_channels: Vec<f64>,
}

/// Scores `test` against `reference`. With `quantize` both are rounded to
/// 8 bits first, as they would be after a save/load cycle.
pub fn evaluate(id: impl Into<String>, reference: &Image, test: &Image, quantize: bool) -> Result<MetricsReport> {
    let (r, t);
    let (reference, test) = if quantize {
        r = quantized(reference);
        t = quantized(test);
        (&r, &t)
    } else {
        (reference, test)
    };
    let ssim_channels = ssim_per_channel(reference, test)?;
    Ok(MetricsReport {
        id: id.into(),
        psnr: psnr(reference, test, PEAK)?,
        ssim: ssim_channels.iter().sum::<f64>() / ssim_channels.len() as f64,
        psnr_channels: psnr_per_channel(reference, test, PEAK)?,
        ssim_channels,
    })
}
