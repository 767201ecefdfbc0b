//! Small dense matrices and the symmetric eigenvalue routines the certificate
//! needs. Sizes here never exceed a few dozen rows, so everything is a plain
//! row-major `Vec<f64>` and eigenvalues come from cyclic Jacobi rotations.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix. Serializes as a list of rows.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::dims("Mat::new", rows * cols, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::InvalidInput("ragged matrix rows".into()));
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0);
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, c: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.shape(), other.shape(), "Mat::add shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.scale(-1.0))
    }

    /// Matrix-vector product. Panics on a length mismatch.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "Mat::mul_vec length mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Mat) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        let mut b = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                b[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        b
    }

    /// Overwrites the strict lower triangle with the upper one, making the
    /// matrix bitwise symmetric.
    pub fn mirror_upper(&mut self) {
        assert!(self.is_square());
        for i in 0..self.rows {
            for j in 0..i {
                self[(i, j)] = self[(j, i)];
            }
        }
    }

    fn symmetrized(&self) -> Mat {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                s[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        s
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Mat {
    type Output = Mat;

    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Mat {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Mat::from_rows(&rows)
    }
}

impl From<Mat> for Vec<Vec<f64>> {
    fn from(m: Mat) -> Self {
        m.to_rows()
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Mat,
}

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

fn check_symmetric(m: &Mat) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let tol = 1e-12 * m.norm_inf();
    for i in 0..m.rows {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Cyclic Jacobi eigen-decomposition of the symmetric part of `m`.
///
/// Sweeps until the off-diagonal Frobenius norm drops below
/// `1e-13 * ‖m‖_F`.
pub fn sym_eigen(m: &Mat) -> Result<SymEigen> {
    check_symmetric(m)?;
    let n = m.rows;
    let mut a = m.symmetrized();
    let mut v = Mat::identity(n);
    let threshold = JACOBI_REL_TOL * a.norm_fro();

    let off = |a: &Mat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- Jᵀ A J with J the (p, q) rotation
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, col)] = v[(k, src)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn eigvals_sym(m: &Mat) -> Result<Vec<f64>> {
    Ok(sym_eigen(m)?.values)
}

/// Smallest eigenvalue of `(m + mᵀ)/2`.
pub fn min_eig_sym(m: &Mat) -> Result<f64> {
    Ok(eigvals_sym(m)?[0])
}

pub fn max_eig_sym(m: &Mat) -> Result<f64> {
    Ok(*eigvals_sym(m)?.last().expect("non-empty"))
}

/// Largest singular value, computed as `sqrt(λ_max(mᵀm))`.
pub fn spectral_norm(m: &Mat) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let mut gram = &m.transpose() * m;
    gram.mirror_upper();
    Ok(max_eig_sym(&gram)?.max(0.0).sqrt())
}

/// `true` iff `λ_min(m) > zeta` (strict).
pub fn is_pd_above(m: &Mat, zeta: f64) -> Result<bool> {
    Ok(min_eig_sym(m)? > zeta)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> Mat {
        Mat::from_rows(&[[a, b], [c, d]]).unwrap()
    }

    #[test]
    fn spectral_norm_examples() {
        assert_abs_diff_eq!(spectral_norm(&Mat::identity(2)).unwrap(), 1.0, epsilon = 1e-14);
        // closed form: λmax((H+BK)ᵀ(H+BK)) = (0.9375 + sqrt(0.86328125)) / 2
        let expected = ((0.9375 + 0.86328125f64.sqrt()) / 2.0).sqrt();
        // 0.96608211..., often quoted truncated as 0.966081
        assert_abs_diff_eq!(expected, 0.966_082_112_6, epsilon = 1e-10);
        let hbk = m2(0.25, -0.5, -0.25, 0.75);
        assert_abs_diff_eq!(spectral_norm(&hbk).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(spectral_norm(&Mat::diag(&[3.0, -4.0])).unwrap(), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn non_finite_rejected() {
        let bad = Mat {
            rows: 1,
            cols: 1,
            data: vec![f64::NAN],
        };
        assert!(matches!(spectral_norm(&bad), Err(Error::InvalidInput(_))));
        assert!(Mat::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn min_eig_examples() {
        assert_abs_diff_eq!(min_eig_sym(&Mat::identity(3)).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(min_eig_sym(&Mat::diag(&[2.0, 5.0])).unwrap(), 2.0);
        assert_abs_diff_eq!(min_eig_sym(&m2(2.0, 1.0, 1.0, 2.0)).unwrap(), 1.0, epsilon = 1e-14);
        let rect = Mat::zeros(2, 3);
        assert!(matches!(min_eig_sym(&rect), Err(Error::InvalidInput(_))));
        assert!(min_eig_sym(&m2(1.0, 2.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn pd_above_is_strict() {
        let i2 = Mat::identity(2);
        assert!(is_pd_above(&i2, 0.5).unwrap());
        assert!(!is_pd_above(&i2, 1.0).unwrap());
        assert!(is_pd_above(&m2(2.0, 1.0, 1.0, 2.0), 0.9).unwrap());
    }

    #[test]
    fn eigenvectors_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 9;
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let eig = sym_eigen(&a).unwrap();
        let lam = Mat::diag(&eig.values);
        let rec = &(&eig.vectors * &lam) * &eig.vectors.transpose();
        assert!(rec.max_abs_diff(&a) < 1e-12);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn serde_as_rows() {
        let m = m2(1.0, 2.0, 3.0, 4.0);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        let back: Mat = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Mat>("[[1.0],[2.0,3.0]]").is_err());
    }

    fn arb_mat(max: usize) -> impl Strategy<Value = Mat> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-10.0f64..10.0, r * c)
                .prop_map(move |data| Mat::new(r, c, data).unwrap())
        })
    }

    fn arb_sym(max: usize) -> impl Strategy<Value = Mat> {
        arb_mat(max).prop_map(|m| {
            let n = m.rows().min(m.cols());
            let b = m.block(0, 0, n, n);
            let mut s = b.add(&b.transpose()).scale(0.5);
            s.mirror_upper();
            s
        })
    }

    proptest! {
        #[test]
        fn norm_of_transpose(m in arb_mat(6)) {
            let a = spectral_norm(&m).unwrap();
            let b = spectral_norm(&m.transpose()).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
        }

        #[test]
        fn norm_is_absolutely_homogeneous(m in arb_mat(5), c in -5.0f64..5.0) {
            let a = spectral_norm(&m.scale(c)).unwrap();
            let b = c.abs() * spectral_norm(&m).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b));
        }

        #[test]
        fn min_eig_bounds_rayleigh(s in arb_sym(6), seed in any::<u64>()) {
            let lo = min_eig_sym(&s).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = s.rows();
            for _ in 0..1000 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let nx = norm2(&x);
                if nx < 1e-9 { continue; }
                let q = dot(&x, &s.mul_vec(&x)) / (nx * nx);
                prop_assert!(lo <= q + 1e-10 * (1.0 + q.abs()));
            }
        }

        #[test]
        fn diagonal_closed_forms(d in proptest::collection::vec(-8.0f64..8.0, 1..8)) {
            let m = Mat::diag(&d);
            let max_abs = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!((spectral_norm(&m).unwrap() - max_abs).abs() < 1e-12);
            prop_assert!((min_eig_sym(&m).unwrap() - min).abs() < 1e-12);
        }
    }
}
