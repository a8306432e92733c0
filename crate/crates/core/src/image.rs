//! Planar floating-point rasters, patches, and noise synthesis.
//!
//! Samples live on the `[0, 255]` scale. Storage is channel-major
//! (`data[c * h * w + y * w + x]`) so that a single channel plane is one
//! contiguous slice.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if !(1..=4).contains(&channels) || channels == 2 {
            return Err(Error::Shape(format!(
                "unsupported channel count {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::Shape(format!(
                "data length {} != {height}x{width}x{channels}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("image samples must be finite".into()));
        }
        Ok(Image {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Self {
        Image::new(
            height,
            width,
            channels,
            vec![value; height * width * channels],
        )
        .expect("valid constant image")
    }

    /// Builds an image from `f(channel, row, col)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(height * width * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Image::new(height, width, channels, data).expect("from_fn produced non-finite sample")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VideoSequence {
    frames: Vec<Image>,
}

impl VideoSequence {
    pub fn new(frames: Vec<Image>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Shape("video needs at least one frame".into()))?;
        if let Some((i, _)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| !f.same_shape(first))
        {
            return Err(Error::Shape(format!(
                "frame {i} shape differs from frame 0"
            )));
        }
        Ok(VideoSequence { frames })
    }

    pub fn frames(&self) -> &[Image] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Image> {
        self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.frames[0].shape()
    }
}

/// Top-left coordinate of a square patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatchRef {
    pub frame: usize,
    pub row: usize,
    pub col: usize,
}

impl PatchRef {
    pub const fn new(row: usize, col: usize) -> Self {
        PatchRef { frame: 0, row, col }
    }

    pub const fn in_frame(frame: usize, row: usize, col: usize) -> Self {
        PatchRef { frame, row, col }
    }

    pub(crate) fn check(&self, height: usize, width: usize, side: usize) -> Result<()> {
        if self.row + side > height || self.col + side > width {
            return Err(Error::OutOfBounds {
                frame: self.frame,
                row: self.row,
                col: self.col,
                side,
                height,
                width,
            });
        }
        Ok(())
    }
}

/// A `side x side x channels` block, channel-major like [`Image`].
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    side: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Patch {
    pub fn new(side: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != side * side * channels {
            return Err(Error::Shape(format!(
                "patch data length {} != {side}x{side}x{channels}",
                data.len()
            )));
        }
        Ok(Patch {
            side,
            channels,
            data,
        })
    }

    pub fn from_fn(
        side: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(side * side * channels);
        for c in 0..channels {
            for y in 0..side {
                for x in 0..side {
                    data.push(f(c, y, x));
                }
            }
        }
        Patch {
            side,
            channels,
            data,
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.side * self.side;
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.side + y) * self.side + x]
    }
}

/// Copies the `side x side` patch at `at` out of a 3-channel image.
pub fn extract_patch(img: &Image, at: PatchRef, side: usize) -> Result<Patch> {
    if img.channels != 3 {
        return Err(Error::Shape(format!(
            "expected 3 channels, got {}",
            img.channels
        )));
    }
    at.check(img.height, img.width, side)?;
    Ok(extract_unchecked(img, at.row, at.col, side))
}

pub(crate) fn extract_unchecked(img: &Image, row: usize, col: usize, side: usize) -> Patch {
    let mut data = Vec::with_capacity(side * side * img.channels);
    for c in 0..img.channels {
        let plane = img.plane(c);
        for y in row..row + side {
            let start = y * img.width + col;
            data.extend_from_slice(&plane[start..start + side]);
        }
    }
    Patch {
        side,
        channels: img.channels,
        data,
    }
}

/// An 8-bit interleaved (`HxWxC`) raster, the on-disk representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster8 {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Raster8 {
    pub fn to_image(&self) -> Image {
        let (h, w, ch) = (self.height, self.width, self.channels);
        Image::from_fn(h, w, ch, |c, y, x| f64::from(self.data[(y * w + x) * ch + c]))
    }
}

#[inline]
pub fn quantize_sample(v: f64) -> u8 {
    // round half up, then clamp; NaN maps to 0
    let r = (v + 0.5).floor();
    if r >= 255.0 {
        255
    } else if r >= 0.0 {
        r as u8
    } else {
        0
    }
}

pub fn quantize(img: &Image) -> Raster8 {
    let (h, w, ch) = img.shape();
    let mut data = vec![0u8; h * w * ch];
    for c in 0..ch {
        for (i, &v) in img.plane(c).iter().enumerate() {
            data[i * ch + c] = quantize_sample(v);
        }
    }
    Raster8 {
        height: h,
        width: w,
        channels: ch,
        data,
    }
}

/// Quantizes and promotes back to float, mimicking a save/load cycle.
pub fn quantized(img: &Image) -> Image {
    quantize(img).to_image()
}

/// Adds i.i.d. `N(0, sigma^2)` noise to every sample. The result is not
/// clamped.
pub fn add_awgn(img: &Image, sigma: f64, seed: u64) -> Image {
    add_awgn_per_channel(img, &vec![sigma; img.channels], seed)
}

/// Adds noise with a separate standard deviation for each channel.
///
/// # Panics
///
/// Panics if `sigmas.len()` differs from the channel count or any sigma is
/// negative or non-finite.
pub fn add_awgn_per_channel(img: &Image, sigmas: &[f64], seed: u64) -> Image {
    assert_eq!(sigmas.len(), img.channels, "one sigma per channel");
    assert!(
        sigmas.iter().all(|s| s.is_finite() && *s >= 0.0),
        "sigma must be finite and non-negative"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = img.height * img.width;
    let mut data = img.data.clone();
    for (c, plane) in data.chunks_mut(n).enumerate() {
        let sigma = sigmas[c];
        for v in plane {
            let z: f64 = StandardNormal.sample(&mut rng);
            if sigma > 0.0 {
                *v += sigma * z;
            }
        }
    }
    Image {
        data,
        ..img.clone()
    }
}
