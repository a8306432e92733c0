use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::TransformSet;
use super::fourier::{real_from_spectrum, spectrum_of};
use super::{Slices, TUBE};
use crate::error::{Error, Result};
use crate::image::PatchRef;
use crate::rggb::RggbGroup;

/// Real transform-domain coefficients of a group, `[member][slice][row][col]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffGroup {
    side: usize,
    members: Vec<PatchRef>,
    data: Vec<f64>,
    /// Number of coefficients left nonzero by thresholding; equals the total
    /// entry count before any thresholding.
    pub retained_count: usize,
}

impl CoeffGroup {
    pub fn new(side: usize, members: Vec<PatchRef>, data: Vec<f64>) -> Result<Self> {
        if data.len() != members.len() * TUBE * side * side {
            return Err(Error::Shape("coefficient data length mismatch".into()));
        }
        let retained_count = data.len();
        Ok(CoeffGroup {
            side,
            members,
            data,
            retained_count,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[PatchRef] {
        &self.members
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `out[k] = sum_j m[(k, j)] * x[j]` over member blocks of length `n`.
fn mix_members(m: &DMatrix<f64>, x: &[f64], n: usize) -> Vec<f64> {
    let k = m.nrows();
    let mut out = vec![0.0; x.len()];
    for (i, dst) in out.chunks_mut(n).enumerate() {
        for j in 0..k {
            let w = m[(i, j)];
            if w == 0.0 {
                continue;
            }
            for (d, s) in dst.iter_mut().zip(&x[j * n..(j + 1) * n]) {
                *d += w * s;
            }
        }
    }
    out
}

fn apply_slice_bases(
    data: &[f64],
    side: usize,
    left: &Slices,
    right: &Slices,
    adjoint: bool,
    out: &mut [f64],
) {
    let s = spectrum_of(data, side);
    let prod = |f: usize| -> DMatrix<Complex64> {
        if adjoint {
            // U_row^H P U_col
            left[f].adjoint() * &s[f] * &right[f]
        } else {
            // U_row P U_col^H
            &left[f] * &s[f] * right[f].adjoint()
        }
    };
    let t0 = prod(0);
    let t1 = prod(1);
    let t2 = prod(2);
    let t3 = t1.map(|z| z.conj());
    real_from_spectrum(&[t0, t1, t2, t3], out);
}

/// Coefficients `(U_row^T * G * U_col) x_4 U_group`, returned in the real
/// domain after the inverse mode-3 transform.
pub fn forward_transform(g: &RggbGroup, t: &TransformSet) -> Result<CoeffGroup> {
    t.check_shape(g.side(), g.len())?;
    let side = g.side();
    let n = TUBE * side * side;
    let mut sliced = vec![0.0; g.data().len()];
    for (i, out) in sliced.chunks_mut(n).enumerate() {
        apply_slice_bases(g.member_data(i), side, &t.row, &t.col, true, out);
    }
    let data = mix_members(&t.group, &sliced, n);
    CoeffGroup::new(side, g.members().to_vec(), data)
}

/// Adjoint of [`forward_transform`]: `(U_row * S * U_col^T) x_4 U_group^T`.
pub fn inverse_transform(c: &CoeffGroup, t: &TransformSet) -> Result<RggbGroup> {
    t.check_shape(c.side(), c.len())?;
    let side = c.side();
    let n = TUBE * side * side;
    let unmixed = mix_members(&t.group.transpose(), c.data(), n);
    let mut data = vec![0.0; unmixed.len()];
    for (i, out) in data.chunks_mut(n).enumerate() {
        apply_slice_bases(&unmixed[i * n..(i + 1) * n], side, &t.row, &t.col, false, out);
    }
    Ok(RggbGroup::from_raw(side, c.members().to_vec(), data))
}
