//! Dense brute-force reference: explicit matrices by canonical-basis probing,
//! direct solves, and a dominant eigenpair for small problems.

use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::operators::{dot, norm2};

/// Largest dimension `probe_operator` will assemble.
pub const MAX_PROBE_DIM: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape("ragged matrix rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(shape("matrix product dimensions disagree"));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape("matrix sum dimensions disagree"));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Column `j` is `apply(e_j)`.
pub fn probe_operator(apply: impl Fn(&[f64]) -> Result<Vec<f64>>, d: usize) -> Result<DenseMatrix> {
    if d > MAX_PROBE_DIM {
        return Err(Error::Config(format!(
            "refusing to probe a {d}-dimensional operator (limit {MAX_PROBE_DIM})"
        )));
    }
    let mut m = DenseMatrix::zeros(d, d);
    let mut e = vec![0.0; d];
    for j in 0..d {
        e[j] = 1.0;
        let col = apply(&e)?;
        e[j] = 0.0;
        if col.len() != d {
            return Err(shape(format!("probe returned {} entries, expected {d}", col.len())));
        }
        for (i, v) in col.into_iter().enumerate() {
            m.data[i * d + j] = v;
        }
    }
    Ok(m)
}

/// LU factorization with partial pivoting (`P A = L U`, packed).
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(shape("LU needs a square matrix"));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let floor = 1e-14 * a.max_abs();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))
                .unwrap_or(k);
            let pivot = lu[p * n + k];
            if !(pivot.abs() > floor) {
                return Err(Error::Singular(format!(
                    "pivot {pivot:e} in column {k} is below 1e-14 * max|A|"
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            for i in (k + 1)..n {
                let l = lu[i * n + k] / pivot;
                lu[i * n + k] = l;
                if l != 0.0 {
                    for j in (k + 1)..n {
                        lu[i * n + j] -= l * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu[i * n..i * n + i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu[i * n + i + 1..(i + 1) * n], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}

/// Gaussian elimination with partial pivoting; the residual is checked.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows {
        return Err(shape("right-hand side length differs from the matrix size"));
    }
    let x = LuFactors::new(a)?.solve(b);
    let ax = a.matvec(&x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let (rn, bn) = (norm2(&r), norm2(b));
    if bn > 0.0 && rn / bn > 1e-10 {
        return Err(Error::Singular(format!(
            "direct solve residual {:e} exceeds 1e-10",
            rn / bn
        )));
    }
    Ok(x)
}

/// Dominant eigenpair of `A x = lambda x`, or with `b` of the pair iterated as
/// `x <- A^{-1} B x` (so `lambda` is the eigenvalue of `A^{-1} B`).
///
/// The vector is unit-length with a nonnegative sum.
pub fn dense_dominant_eig(a: &DenseMatrix, b: Option<&DenseMatrix>) -> Result<(f64, Vec<f64>)> {
    let n = a.rows;
    if a.cols != n || b.is_some_and(|b| b.rows != n || b.cols != n) {
        return Err(shape("eigenproblem needs square matrices of one size"));
    }
    let lu = b.map(|_| LuFactors::new(a)).transpose()?;
    let apply = |x: &[f64]| match (&lu, b) {
        (Some(lu), Some(b)) => lu.solve(&b.matvec(x)),
        _ => a.matvec(x),
    };
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut prev2: Option<Vec<f64>> = None;
    for step in 0..100_000 {
        let y = apply(&x);
        let ny = norm2(&y);
        if ny == 0.0 {
            return Err(Error::Singular("operator maps the iterate to zero".into()));
        }
        let lambda = dot(&x, &y);
        let sign = if lambda < 0.0 { -1.0 } else { 1.0 };
        let next: Vec<f64> = y.iter().map(|v| sign * v / ny).collect();
        let change = distance(&next, &x);
        if change <= 1e-12 {
            let mut v = next;
            orient(&mut v);
            let av = apply(&v);
            return Ok((dot(&v, &av) / dot(&v, &v), v));
        }
        if step > 1000 {
            if let Some(p2) = &prev2 {
                if distance(&next, p2) <= 1e-10 && change > 1e-3 {
                    return Err(Error::ComplexDominance(
                        "power iteration oscillates with period two: no real simple dominant eigenvalue".into(),
                    ));
                }
            }
        }
        prev2 = Some(std::mem::replace(&mut x, next));
    }
    Err(Error::ComplexDominance(
        "power iteration did not converge in 100000 steps".into(),
    ))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Flips `v` so its entries sum to a nonnegative value.
pub fn orient(v: &mut [f64]) {
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_identity() {
        let m = probe_operator(|x| Ok(x.to_vec()), 4).unwrap();
        assert_eq!(m, DenseMatrix::identity(4));
        assert!(probe_operator(|x| Ok(x.to_vec()), MAX_PROBE_DIM + 1).is_err());
    }

    #[test]
    fn solve_two_by_two() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = dense_solve(&a, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15 && (x[1] - 7.0 / 11.0).abs() < 1e-15);
        let i = DenseMatrix::identity(3);
        assert_eq!(dense_solve(&i, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(dense_solve(&a, &[1.0, 2.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn dominant_of_diagonal() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (l, v) = dense_dominant_eig(&a, None).unwrap();
        assert!((l - 2.0).abs() < 1e-12);
        assert!((v[0] - 1.0).abs() < 1e-10 && v[1].abs() < 1e-10);
        let i = DenseMatrix::identity(3);
        let (l, _) = dense_dominant_eig(&i, Some(&i)).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_two_group_pair() {
        // (Sigma_t - S) phi = (1/k) chi f^T phi in an infinite medium.
        let a = DenseMatrix::from_rows(&[vec![0.7, -0.1], vec![-0.4, 0.7]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![0.2, 0.9], vec![0.0, 0.0]]).unwrap();
        let (k, _) = dense_dominant_eig(&a, Some(&b)).unwrap();
        assert!((k - 10.0 / 9.0).abs() < 1e-12, "{k}");
    }

    #[test]
    fn rotation_has_no_real_dominant_eigenvalue() {
        let a = DenseMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(dense_dominant_eig(&a, None), Err(Error::ComplexDominance(_))));
    }
}
