//! One-step collaborative filtering: group, transform, hard-threshold,
//! invert, and average back.

use rayon::prelude::*;

use crate::config::DenoiseConfig;
use crate::error::{Error, Result};
use crate::image::{Image, PatchRef, VideoSequence};
use crate::rggb::{RggbGroup, B, G1, G2, R};
use crate::search::{reference_grid, SearchScheme, Searcher};
use crate::talg::{forward_transform, inverse_transform, CoeffGroup, TransformSet};

/// References processed per parallel batch. Results are accumulated in
/// reference order after each batch, so output bits do not depend on the
/// thread count.
const BATCH: usize = 128;

/// `tau_scale * sigma * sqrt(2 ln(3 ps^2 N_f K))`, natural log. Pass
/// `frame_count = 1` for still images.
pub fn threshold_value(cfg: &DenoiseConfig, frame_count: usize) -> f64 {
    let n = 3.0 * (cfg.ps * cfg.ps) as f64 * frame_count.max(1) as f64 * cfg.k as f64;
    cfg.tau_scale * cfg.sigma * (2.0 * n.ln()).sqrt()
}

/// Zeroes every coefficient with `|c| < tau`; values equal to `tau` survive.
pub fn hard_threshold(mut c: CoeffGroup, tau: f64) -> CoeffGroup {
    let mut kept = 0;
    for v in c.data_mut() {
        if v.abs() < tau {
            *v = 0.0;
        } else {
            kept += 1;
        }
    }
    c.retained_count = kept;
    c
}

/// Learns the group's transforms, thresholds its coefficients at `tau` and
/// returns the reconstruction.
pub fn denoise_group(g: &RggbGroup, tau: f64) -> Result<RggbGroup> {
    let t = TransformSet::learn(g);
    let c = hard_threshold(forward_transform(g, &t)?, tau);
    inverse_transform(&c, &t)
}

/// Weighted sums of patch estimates for a stack of frames.
///
/// One weight per pixel is shared by the three channels.
#[derive(Clone, Debug)]
pub struct AggregationBuffer {
    height: usize,
    width: usize,
    frames: usize,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
}

impl AggregationBuffer {
    pub fn new(height: usize, width: usize, frames: usize) -> Self {
        AggregationBuffer {
            height,
            width,
            frames,
            numerator: vec![0.0; frames * 3 * height * width],
            denominator: vec![0.0; frames * height * width],
        }
    }

    /// Adds a denoised RGGB member at its own location with unit weight,
    /// folding the two greens into one.
    pub fn add_rggb(&mut self, at: PatchRef, side: usize, rggb: &[f64]) {
        let (h, w) = (self.height, self.width);
        let n = side * side;
        let num = &mut self.numerator[at.frame * 3 * h * w..(at.frame + 1) * 3 * h * w];
        let den = &mut self.denominator[at.frame * h * w..(at.frame + 1) * h * w];
        for y in 0..side {
            for x in 0..side {
                let i = y * side + x;
                let p = (at.row + y) * w + at.col + x;
                num[p] += rggb[R * n + i];
                num[h * w + p] += 0.5 * (rggb[G1 * n + i] + rggb[G2 * n + i]);
                num[2 * h * w + p] += rggb[B * n + i];
                den[p] += 1.0;
            }
        }
    }

    /// Smallest accumulated weight.
    pub fn min_weight(&self) -> f64 {
        self.denominator.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn weights(&self, frame: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.denominator[frame * n..(frame + 1) * n]
    }

    /// Divides out the weights. Fails if any pixel was never written.
    pub fn finish(self) -> Result<Vec<Image>> {
        if self.min_weight() <= 0.0 {
            return Err(Error::Shape("aggregation left pixels uncovered".into()));
        }
        let (h, w) = (self.height, self.width);
        let n = h * w;
        (0..self.frames)
            .map(|f| {
                let num = &self.numerator[f * 3 * n..(f + 1) * 3 * n];
                let den = &self.denominator[f * n..(f + 1) * n];
                let data = num
                    .chunks(n)
                    .flat_map(|plane| plane.iter().zip(den).map(|(v, d)| v / d))
                    .collect();
                Image::new(h, w, 3, data)
            })
            .collect()
    }
}

fn denoise_frames(frames: &[Image], cfg: &DenoiseConfig, spatio_temporal: bool) -> Result<Vec<Image>> {
    cfg.validate()?;
    let (h, w, ch) = frames[0].shape();
    if ch != 3 {
        return Err(Error::Shape(format!("expected an RGB image, got {ch} channels")));
    }
    let searcher = Searcher::new(frames, cfg)?;
    let tau = threshold_value(cfg, if spatio_temporal { frames.len() } else { 1 });
    let grid = reference_grid(h, w, cfg.ps, cfg.stride)?;
    let refs: Vec<PatchRef> = (0..frames.len())
        .flat_map(|f| grid.iter().map(move |r| PatchRef::in_frame(f, r.row, r.col)))
        .collect();

    let mut agg = AggregationBuffer::new(h, w, frames.len());
    for batch in refs.chunks(BATCH) {
        let groups: Vec<RggbGroup> = batch
            .par_iter()
            .map(|&at| {
                let members = searcher
                    .find(at, SearchScheme::GreenGuided, spatio_temporal)?
                    .into_iter()
                    .map(|c| c.at)
                    .collect();
                let g = RggbGroup::from_frames(frames, members, cfg.ps)?;
                denoise_group(&g, tau)
            })
            .collect::<Result<_>>()?;
        for g in &groups {
            for (k, &m) in g.members().iter().enumerate() {
                agg.add_rggb(m, cfg.ps, g.member_data(k));
            }
        }
    }
    agg.finish()
}

/// Denoises a still RGB image.
pub fn denoise_image(noisy: &Image, cfg: &DenoiseConfig) -> Result<Image> {
    let mut out = denoise_frames(std::slice::from_ref(noisy), cfg, false)?;
    Ok(out.pop().expect("one frame in, one frame out"))
}

/// Denoises a video with spatio-temporal grouping. Every frame contributes
/// its own reference grid; groups may draw members from any frame.
pub fn denoise_video(noisy: &VideoSequence, cfg: &DenoiseConfig) -> Result<VideoSequence> {
    VideoSequence::new(denoise_frames(noisy.frames(), cfg, true)?)
}
