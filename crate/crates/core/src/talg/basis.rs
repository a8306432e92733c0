use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::fourier::spectrum_of;
use super::{phase_normalize, sign_normalize, Slices, TUBE};
use crate::error::{Error, Result};
use crate::rggb::RggbGroup;

/// Per-group learned bases.
///
/// `row[f]` and `col[f]` are unitary `ps x ps` bases for Fourier slice `f`;
/// slice 3 is the conjugate of slice 1. `group` is a real orthogonal `K x K`
/// matrix whose rows are the group principal directions, applied along the
/// member mode.
#[derive(Clone, Debug)]
pub struct TransformSet {
    pub row: Slices,
    pub col: Slices,
    pub group: DMatrix<f64>,
}

impl TransformSet {
    pub fn identity(side: usize, k: usize) -> Self {
        TransformSet {
            row: std::array::from_fn(|_| DMatrix::identity(side, side)),
            col: std::array::from_fn(|_| DMatrix::identity(side, side)),
            group: DMatrix::identity(k, k),
        }
    }

    /// Learns slice bases and the group transform from the group itself.
    pub fn learn(g: &RggbGroup) -> Self {
        let (row, col) = learn_slice_bases(g);
        TransformSet {
            row,
            col,
            group: learn_group_pca(g),
        }
    }

    pub fn side(&self) -> usize {
        self.row[0].nrows()
    }

    pub fn group_size(&self) -> usize {
        self.group.nrows()
    }

    pub(crate) fn check_shape(&self, side: usize, k: usize) -> Result<()> {
        if self.side() != side || self.group_size() != k {
            return Err(Error::Shape(format!(
                "transform set is for {}x{} patches and {} members, group is {side}x{side} with {k}",
                self.side(),
                self.side(),
                self.group_size()
            )));
        }
        Ok(())
    }

    /// Largest Frobenius deviation from orthonormality over all bases.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in self.row.iter().chain(self.col.iter()) {
            let n = m.nrows();
            let d = m.adjoint() * m - DMatrix::<Complex64>::identity(n, n);
            worst = worst.max(d.norm());
        }
        let k = self.group.nrows();
        let d = self.group.transpose() * &self.group - DMatrix::<f64>::identity(k, k);
        worst.max(d.norm())
    }
}

/// Orders eigenpairs by descending eigenvalue; exact ties are broken by the
/// first differing eigenvector component.
fn descending_order<T>(values: &[f64], vecs: &DMatrix<T>, key: impl Fn(&T) -> (f64, f64)) -> Vec<usize>
where
    T: nalgebra::Scalar,
{
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b].total_cmp(&values[a]).then_with(|| {
            for (x, y) in vecs.column(a).iter().zip(vecs.column(b).iter()) {
                let (kx, ky) = (key(x), key(y));
                let o = ky.0.total_cmp(&kx.0).then(ky.1.total_cmp(&kx.1));
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    });
    idx
}

/// Eigenvectors of a real symmetric PSD matrix, as columns in descending
/// eigenvalue order. A zero matrix yields the identity.
pub(crate) fn symmetric_eigenvectors(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if m.iter().all(|&v| v == 0.0) {
        return (vec![0.0; n], DMatrix::identity(n, n));
    }
    let eig = SymmetricEigen::new(m);
    let mut vecs = eig.eigenvectors;
    for j in 0..n {
        sign_normalize(&mut vecs, j);
    }
    let vals = eig.eigenvalues.as_slice().to_vec();
    let order = descending_order(&vals, &vecs, |x| (*x, 0.0));
    let sorted = DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    (order.iter().map(|&j| vals[j]).collect(), sorted)
}

/// Hermitian counterpart of [`symmetric_eigenvectors`]; each eigenvector is
/// rotated so its largest-magnitude entry is real and positive.
pub(crate) fn hermitian_eigenvectors(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    if m.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return (vec![0.0; n], DMatrix::identity(n, n));
    }
    let eig = SymmetricEigen::new(m);
    let mut vecs = eig.eigenvectors;
    for j in 0..n {
        phase_normalize(&mut vecs, j);
    }
    let vals = eig.eigenvalues.as_slice().to_vec();
    let order = descending_order(&vals, &vecs, |z| (z.re, z.im));
    let sorted = DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    (order.iter().map(|&j| vals[j]).collect(), sorted)
}

/// Per-slice row and column covariances `sum P P^H` and `sum P^H P`.
pub(crate) fn slice_covariances(g: &RggbGroup) -> ([DMatrix<Complex64>; 3], [DMatrix<Complex64>; 3]) {
    let side = g.side();
    let k = g.len();
    // wide[f] = [P_1 .. P_K] (side x side*K), tall[f] = [P_1; ..; P_K]
    let mut wide: [DMatrix<Complex64>; 3] = std::array::from_fn(|_| DMatrix::zeros(side, side * k));
    let mut tall: [DMatrix<Complex64>; 3] = std::array::from_fn(|_| DMatrix::zeros(side * k, side));
    for i in 0..k {
        let s = spectrum_of(g.member_data(i), side);
        for f in 0..3 {
            wide[f].columns_mut(i * side, side).copy_from(&s[f]);
            tall[f].rows_mut(i * side, side).copy_from(&s[f]);
        }
    }
    let rows = std::array::from_fn(|f| covariance(&wide[f], f != 1, true));
    let cols = std::array::from_fn(|f| covariance(&tall[f], f != 1, false));
    (rows, cols)
}

/// `m m^H` (outer) or `m^H m`, in real arithmetic when `m` is real.
fn covariance(m: &DMatrix<Complex64>, real: bool, outer: bool) -> DMatrix<Complex64> {
    if real {
        let r = m.map(|z| z.re);
        let c = if outer { &r * r.transpose() } else { r.transpose() * &r };
        c.map(Complex64::from)
    } else {
        // (A + iB)(A + iB)^H = A A^T + B B^T + i (B A^T - A B^T)
        let a = m.map(|z| z.re);
        let b = m.map(|z| z.im);
        let (re, im) = if outer {
            (
                &a * a.transpose() + &b * b.transpose(),
                &b * a.transpose() - &a * b.transpose(),
            )
        } else {
            (
                a.transpose() * &a + b.transpose() * &b,
                a.transpose() * &b - b.transpose() * &a,
            )
        };
        DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
    }
}

fn real_basis(cov: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    symmetric_eigenvectors(cov.map(|z| z.re)).1.map(Complex64::from)
}

/// Shared row and column bases for every Fourier slice of the group.
///
/// Slice `f` gets the eigenvectors of `sum_i P_i P_i^H` (rows) and
/// `sum_i P_i^H P_i` (columns), in descending eigenvalue order.
pub fn learn_slice_bases(g: &RggbGroup) -> (Slices, Slices) {
    let (row_cov, col_cov) = slice_covariances(g);
    let [r0, r1, r2] = row_cov;
    let [c0, c1, c2] = col_cov;
    let row1 = hermitian_eigenvectors(r1).1;
    let col1 = hermitian_eigenvectors(c1).1;
    let row3 = row1.map(|z| z.conj());
    let col3 = col1.map(|z| z.conj());
    (
        [real_basis(&r0), row1, real_basis(&r2), row3],
        [real_basis(&c0), col1, real_basis(&c2), col3],
    )
}

/// Principal directions of the member mode: eigenvectors of the `K x K`
/// Gram matrix of vectorized members, returned as rows.
pub fn learn_group_pca(g: &RggbGroup) -> DMatrix<f64> {
    let n = TUBE * g.side() * g.side();
    let x = DMatrix::from_column_slice(n, g.len(), g.data());
    let gram = x.transpose() * &x;
    symmetric_eigenvectors(gram).1.transpose()
}
