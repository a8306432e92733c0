use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{dft4, idft4_real, phase_normalize_pair, Slices, TUBE};
use crate::error::{Error, Result};

/// A real `rows x cols x 4` tensor, stored as four row-major frontal slices.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor3 {
            rows,
            cols,
            data: vec![0.0; rows * cols * TUBE],
        }
    }

    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols * TUBE {
            return Err(Error::Shape(format!(
                "tensor data length {} != {rows}x{cols}x{TUBE}",
                data.len()
            )));
        }
        Ok(Tensor3 { rows, cols, data })
    }

    /// Builds a tensor from `f(row, col, slice)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor3::zeros(rows, cols);
        for k in 0..TUBE {
            for r in 0..rows {
                for c in 0..cols {
                    t.data[(k * rows + r) * cols + c] = f(r, c, k);
                }
            }
        }
        t
    }

    /// The t-product identity: first frontal slice is `I`, the rest zero.
    pub fn identity(n: usize) -> Self {
        Tensor3::from_fn(n, n, |r, c, k| if k == 0 && r == c { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize, k: usize) -> f64 {
        self.data[(k * self.rows + r) * self.cols + c]
    }

    pub fn frontal(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c, k))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Tensor3) -> Tensor3 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Tensor3 {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Tensor transpose: each frontal slice transposed, slices 1..4 reversed.
    pub fn transpose(&self) -> Tensor3 {
        Tensor3::from_fn(self.cols, self.rows, |r, c, k| {
            self.get(c, r, (TUBE - k) % TUBE)
        })
    }

    /// Mode-3 DFT, one complex matrix per Fourier slice.
    pub fn to_fourier(&self) -> Slices {
        let mut out: Slices = std::array::from_fn(|_| DMatrix::zeros(self.rows, self.cols));
        for r in 0..self.rows {
            for c in 0..self.cols {
                let f = dft4([
                    self.get(r, c, 0),
                    self.get(r, c, 1),
                    self.get(r, c, 2),
                    self.get(r, c, 3),
                ]);
                for k in 0..TUBE {
                    out[k][(r, c)] = f[k];
                }
            }
        }
        out
    }

    /// Inverse mode-3 DFT. Fails when the slices are not the transform of a
    /// real tensor.
    pub fn from_fourier(slices: &Slices) -> Result<Tensor3> {
        let (rows, cols) = slices[0].shape();
        if slices.iter().any(|s| s.shape() != (rows, cols)) {
            return Err(Error::Shape("fourier slices differ in shape".into()));
        }
        super::check_conjugate_symmetry(slices.iter().map(|s| s.as_slice()))?;
        let mut t = Tensor3::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let x = idft4_real([
                    slices[0][(r, c)],
                    slices[1][(r, c)],
                    slices[2][(r, c)],
                    slices[3][(r, c)],
                ]);
                for k in 0..TUBE {
                    t.data[(k * rows + r) * cols + c] = x[k];
                }
            }
        }
        Ok(t)
    }
}

/// Block-circulant matrix: block `(i, j)` is frontal slice `(i - j) mod 4`.
pub fn bcirc(t: &Tensor3) -> DMatrix<f64> {
    let (n1, n2) = (t.rows, t.cols);
    DMatrix::from_fn(TUBE * n1, TUBE * n2, |i, j| {
        let (bi, r) = (i / n1, i % n1);
        let (bj, c) = (j / n2, j % n2);
        t.get(r, c, (bi + TUBE - bj) % TUBE)
    })
}

/// Reads the first block column of a block-circulant matrix back into a
/// tensor.
pub fn unbcirc(m: &DMatrix<f64>, rows: usize, cols: usize) -> Result<Tensor3> {
    if m.nrows() != TUBE * rows || m.ncols() < cols {
        return Err(Error::Shape(format!(
            "matrix {}x{} is not a block-circulant of {rows}x{cols} blocks",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(Tensor3::from_fn(rows, cols, |r, c, k| m[(k * rows + r, c)]))
}

fn check_inner(a: &Tensor3, b: &Tensor3) -> Result<()> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "t-product inner dimensions disagree: {}x{} * {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

/// t-product evaluated slicewise in the Fourier domain.
pub fn t_product(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    check_inner(a, b)?;
    let fa = a.to_fourier();
    let fb = b.to_fourier();
    let c0 = &fa[0] * &fb[0];
    let c1 = &fa[1] * &fb[1];
    let c2 = &fa[2] * &fb[2];
    let c3 = c1.map(|z| z.conj());
    Tensor3::from_fourier(&[c0, c1, c2, c3])
}

/// t-product by explicit block-circulant multiplication. Quadratically more
/// expensive than [`t_product`]; kept as the reference definition.
pub fn t_product_bcirc(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    check_inner(a, b)?;
    let m = bcirc(a) * bcirc(b);
    unbcirc(&m, a.rows, b.cols)
}

/// Thin t-SVD: `a = u * s * v^T` with `r = min(rows, cols)` singular tubes.
#[derive(Clone, Debug)]
pub struct TSvd {
    pub u: Tensor3,
    pub s: Tensor3,
    pub v: Tensor3,
    /// Singular values of each Fourier slice, non-increasing.
    pub singular_values: [Vec<f64>; TUBE],
}

impl TSvd {
    pub fn reconstruct(&self) -> Tensor3 {
        let us = t_product(&self.u, &self.s).expect("u and s conform");
        t_product(&us, &self.v.transpose()).expect("us and v^T conform")
    }
}

pub fn t_svd(a: &Tensor3) -> TSvd {
    let (n1, n2) = (a.rows, a.cols);
    let r = n1.min(n2);
    let fa = a.to_fourier();

    let mut u_f: Slices = std::array::from_fn(|_| DMatrix::zeros(n1, r));
    let mut s_f: Slices = std::array::from_fn(|_| DMatrix::zeros(r, r));
    let mut v_f: Slices = std::array::from_fn(|_| DMatrix::zeros(n2, r));
    let mut singular_values: [Vec<f64>; TUBE] = Default::default();

    for k in 0..3 {
        let (u, sv, v) = if k == 1 {
            let svd = nalgebra::SVD::new(fa[k].clone(), true, true);
            let u = svd.u.expect("u requested");
            let v = svd.v_t.expect("v requested").adjoint();
            (u, svd.singular_values.as_slice().to_vec(), v)
        } else {
            // DC and Nyquist slices of a real tensor are real
            let svd = nalgebra::SVD::new(fa[k].map(|z| z.re), true, true);
            let u = svd.u.expect("u requested").map(Complex64::from);
            let v = svd.v_t.expect("v requested").transpose().map(Complex64::from);
            (u, svd.singular_values.as_slice().to_vec(), v)
        };
        let (mut u, mut v) = (u, v);
        for j in 0..r {
            phase_normalize_pair(&mut u, &mut v, j);
            s_f[k][(j, j)] = Complex64::from(sv[j]);
        }
        u_f[k] = u;
        v_f[k] = v;
        singular_values[k] = sv;
    }
    u_f[3] = u_f[1].map(|z| z.conj());
    s_f[3] = s_f[1].clone();
    v_f[3] = v_f[1].map(|z| z.conj());
    singular_values[3] = singular_values[1].clone();

    TSvd {
        u: Tensor3::from_fourier(&u_f).expect("conjugate-paired factors"),
        s: Tensor3::from_fourier(&s_f).expect("conjugate-paired factors"),
        v: Tensor3::from_fourier(&v_f).expect("conjugate-paired factors"),
        singular_values,
    }
}
