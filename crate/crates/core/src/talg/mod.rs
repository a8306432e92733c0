//! t-product algebra over length-4 tubes.
//!
//! Every tensor here has exactly four frontal slices, matching the `[R, G, G,
//! B]` channel fiber of a reformulated patch. The mode-3 transform is the
//! unnormalized 4-point DFT
//!
//! ```text
//! | 1   1   1   1 |
//! | 1  -i  -1   i |
//! | 1  -1   1  -1 |
//! | 1   i  -1  -i |
//! ```
//!
//! and its inverse carries the `1/4` factor. For real input, slices 0 and 2
//! are real and slice 3 is the conjugate of slice 1, so only three slices
//! need any work.

mod basis;
mod fourier;
mod tensor;
mod transform;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use basis::{learn_group_pca, learn_slice_bases, TransformSet};
pub use fourier::{fft_mode3, ifft_mode3, FourierPatch};
pub use tensor::{bcirc, t_product, t_product_bcirc, t_svd, unbcirc, TSvd, Tensor3};
pub use transform::{forward_transform, inverse_transform, CoeffGroup};

/// Tube length.
pub const TUBE: usize = 4;

/// Tolerance on conjugate symmetry, relative to the largest magnitude.
pub const SYMMETRY_TOL: f64 = 1e-9;

pub type Slices = [DMatrix<Complex64>; TUBE];

#[inline]
pub(crate) fn dft4(x: [f64; 4]) -> [Complex64; 4] {
    let [a, b, c, d] = x;
    [
        Complex64::new(a + b + c + d, 0.0),
        Complex64::new(a - c, d - b),
        Complex64::new(a - b + c - d, 0.0),
        Complex64::new(a - c, b - d),
    ]
}

/// Inverse DFT of a conjugate-symmetric spectrum; imaginary parts are
/// dropped.
#[inline]
pub(crate) fn idft4_real(f: [Complex64; 4]) -> [f64; 4] {
    let [f0, f1, f2, f3] = f;
    // x_k = (f0 + i^k f1 + (-1)^k f2 + (-i)^k f3) / 4
    [
        0.25 * (f0.re + f1.re + f2.re + f3.re),
        0.25 * (f0.re - f1.im - f2.re + f3.im),
        0.25 * (f0.re - f1.re + f2.re - f3.re),
        0.25 * (f0.re + f1.im - f2.re - f3.im),
    ]
}

pub(crate) fn check_conjugate_symmetry<'a>(
    slices: impl IntoIterator<Item = &'a [Complex64]>,
) -> Result<()> {
    let s: Vec<&[Complex64]> = slices.into_iter().collect();
    let scale = s
        .iter()
        .flat_map(|sl| sl.iter())
        .fold(0.0f64, |m, z| m.max(z.norm()));
    let mut residual = 0.0f64;
    for i in 0..s[0].len() {
        residual = residual
            .max(s[0][i].im.abs())
            .max(s[2][i].im.abs())
            .max((s[3][i] - s[1][i].conj()).norm());
    }
    if residual > SYMMETRY_TOL * (1.0 + scale) || residual.is_nan() {
        return Err(Error::Asymmetric { residual });
    }
    Ok(())
}

fn max_entry_index(col: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, m) in col.enumerate() {
        if m > best.1 {
            best = (i, m);
        }
    }
    best.0
}

/// Rotates column `j` of `u` so its largest-magnitude entry is real and
/// positive, and applies the same phase to column `j` of `v`.
pub(crate) fn phase_normalize_pair(
    u: &mut DMatrix<Complex64>,
    v: &mut DMatrix<Complex64>,
    j: usize,
) {
    let i = max_entry_index(u.column(j).iter().map(|z| z.norm()));
    let z = u[(i, j)];
    if z.norm() == 0.0 {
        return;
    }
    let phase = z.conj() / z.norm();
    u.column_mut(j).iter_mut().for_each(|w| *w *= phase);
    v.column_mut(j).iter_mut().for_each(|w| *w *= phase);
}

pub(crate) fn phase_normalize(u: &mut DMatrix<Complex64>, j: usize) {
    let i = max_entry_index(u.column(j).iter().map(|z| z.norm()));
    let z = u[(i, j)];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        u.column_mut(j).iter_mut().for_each(|w| *w *= phase);
    }
}

pub(crate) fn sign_normalize(u: &mut DMatrix<f64>, j: usize) {
    let i = max_entry_index(u.column(j).iter().map(|x| x.abs()));
    if u[(i, j)] < 0.0 {
        u.column_mut(j).iter_mut().for_each(|w| *w = -*w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_matches_matrix() {
        let x = [0.5, -1.0, 2.0, 3.5];
        let w = Complex64::new(0.0, -1.0);
        let f = dft4(x);
        for (k, fk) in f.iter().enumerate() {
            let want: Complex64 = (0..4).map(|n| x[n] * w.powu((k * n) as u32)).sum();
            assert!((fk - want).norm() < 1e-12, "slice {k}");
        }
        let back = idft4_real(f);
        for (a, b) in back.iter().zip(x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetry_check_flags_perturbation() {
        let f = dft4([1.0, 2.0, 2.0, 3.0]);
        let ok: Vec<Vec<Complex64>> = f.iter().map(|z| vec![*z]).collect();
        assert!(check_conjugate_symmetry(ok.iter().map(|v| v.as_slice())).is_ok());
        let mut bad = ok.clone();
        bad[3][0] += Complex64::new(0.0, 1e-3);
        assert!(check_conjugate_symmetry(bad.iter().map(|v| v.as_slice())).is_err());
    }
}
