use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_conjugate_symmetry, dft4, idft4_real, Slices, TUBE};
use crate::error::Result;
use crate::image::Patch;
use crate::rggb::RggbPatch;

/// Mode-3 spectrum of an RGGB patch: four complex `ps x ps` slices.
///
/// Per pixel the slices are `R + 2G + B`, `(R - G) + (B - G)i`, `R - B` and
/// `(R - G) + (G - B)i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierPatch {
    slices: Slices,
}

impl FourierPatch {
    /// Wraps raw slices, checking that they are the spectrum of a real patch.
    pub fn new(slices: Slices) -> Result<Self> {
        let side = slices[0].nrows();
        if slices.iter().any(|s| s.shape() != (side, side)) {
            return Err(crate::error::Error::Shape(
                "fourier slices must be square and equal in size".into(),
            ));
        }
        check_conjugate_symmetry(slices.iter().map(|s| s.as_slice()))?;
        Ok(FourierPatch { slices })
    }

    /// Wraps slices without the symmetry check.
    pub fn new_unchecked(slices: Slices) -> Self {
        FourierPatch { slices }
    }

    pub fn side(&self) -> usize {
        self.slices[0].nrows()
    }

    pub fn slices(&self) -> &Slices {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut Slices {
        &mut self.slices
    }

    pub fn slice(&self, k: usize) -> &DMatrix<Complex64> {
        &self.slices[k]
    }
}

/// Spectrum of one patch laid out channel-major as `[c][row][col]`.
pub(crate) fn spectrum_of(data: &[f64], side: usize) -> Slices {
    let n = side * side;
    let mut out: Slices = std::array::from_fn(|_| DMatrix::zeros(side, side));
    for y in 0..side {
        for x in 0..side {
            let i = y * side + x;
            let f = dft4([data[i], data[n + i], data[2 * n + i], data[3 * n + i]]);
            for k in 0..TUBE {
                out[k][(y, x)] = f[k];
            }
        }
    }
    out
}

/// Inverse of [`spectrum_of`] for conjugate-symmetric slices, written into
/// `out` (channel-major).
pub(crate) fn real_from_spectrum(slices: &Slices, out: &mut [f64]) {
    let side = slices[0].nrows();
    let n = side * side;
    for y in 0..side {
        for x in 0..side {
            let v = idft4_real([
                slices[0][(y, x)],
                slices[1][(y, x)],
                slices[2][(y, x)],
                slices[3][(y, x)],
            ]);
            let i = y * side + x;
            for (k, vk) in v.into_iter().enumerate() {
                out[k * n + i] = vk;
            }
        }
    }
}

pub fn fft_mode3(p: &RggbPatch) -> FourierPatch {
    FourierPatch {
        slices: spectrum_of(p.data(), p.side()),
    }
}

pub fn ifft_mode3(f: &FourierPatch) -> Result<RggbPatch> {
    check_conjugate_symmetry(f.slices.iter().map(|s| s.as_slice()))?;
    let side = f.side();
    let mut data = vec![0.0; TUBE * side * side];
    real_from_spectrum(&f.slices, &mut data);
    RggbPatch::new(Patch::new(side, TUBE, data)?)
}
