//! Small dense real linear algebra: LU factorization, inversion, induced
//! norms, symmetric eigenvalues and matrix measures (logarithmic norms).
//!
//! Everything here targets the tiny matrices (dimension ≲ 16) that show up
//! in Jacobians of low-dimensional DAE systems; no attempt is made to be
//! efficient or stable for large problems.

use crate::error::{Error, Result};

/// Condition-number estimate above which a matrix is treated as singular.
pub const SINGULAR_CONDITION_LIMIT: f64 = 1e12;

/// Which induced p-norm / matrix measure to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    One,
    Two,
    Inf,
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormKind::One => write!(f, "1"),
            NormKind::Two => write!(f, "2"),
            NormKind::Inf => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "one" => Ok(NormKind::One),
            "2" | "two" => Ok(NormKind::Two),
            "inf" | "infinity" => Ok(NormKind::Inf),
            other => Err(Error::InvalidInput(format!(
                "unknown norm '{other}' (expected 1, 2 or inf)"
            ))),
        }
    }
}

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

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
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Column vector from a slice.
    pub fn column(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// Symmetric part (A + Aᵀ)/2.
    pub fn symmetric_part(&self) -> Matrix {
        assert!(self.is_square());
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Horizontal/vertical assembly of the 2x2 block matrix [[a, b], [c, d]].
    pub fn from_blocks(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        Matrix::from_fn(rows, cols, |i, j| {
            if i < a.rows {
                if j < a.cols {
                    a[(i, j)]
                } else {
                    b[(i, j - a.cols)]
                }
            } else if j < a.cols {
                c[(i - a.rows, j)]
            } else {
                d[(i - a.rows, j - a.cols)]
            }
        })
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Display for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:.6e}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

fn require_square(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expected square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// p-norm of a vector for p in {1, 2, inf}.
pub fn vector_norm(v: &[f64], p: NormKind) -> f64 {
    match p {
        NormKind::One => v.iter().map(|x| x.abs()).sum(),
        NormKind::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormKind::Inf => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
    }
}

/// Matrix measure μ_p(A) for p in {1, 2, inf}.
///
/// μ1 is the largest column sum a_jj + Σ_{i≠j}|a_ij|, μ∞ the analogous row
/// sum, and μ2 the largest eigenvalue of (A + Aᵀ)/2.
pub fn matrix_measure(a: &Matrix, p: NormKind) -> Result<f64> {
    require_square(a)?;
    if !a.all_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = a.rows();
    match p {
        NormKind::One => Ok((0..n)
            .map(|j| {
                let mut s = a[(j, j)];
                for i in 0..n {
                    if i != j {
                        s += a[(i, j)].abs();
                    }
                }
                s
            })
            .fold(f64::NEG_INFINITY, f64::max)),
        NormKind::Inf => Ok((0..n)
            .map(|i| {
                let mut s = a[(i, i)];
                for j in 0..n {
                    if j != i {
                        s += a[(i, j)].abs();
                    }
                }
                s
            })
            .fold(f64::NEG_INFINITY, f64::max)),
        NormKind::Two => symmetric_eigen_max(&a.symmetric_part()),
    }
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized internally; a relative asymmetry beyond 1e-12
/// is rejected.
pub fn symmetric_eigen_max(s: &Matrix) -> Result<f64> {
    Ok(symmetric_eigenvalues(s)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

/// All eigenvalues of a symmetric matrix (unordered), cyclic Jacobi.
pub fn symmetric_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    require_square(s)?;
    let n = s.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = s.max_abs();
    let asym = s.sub(&s.transpose()).max_abs();
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (asymmetry {asym:.3e})"
        )));
    }
    let mut a = s.symmetric_part();
    let off = |a: &Matrix| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sum += a[(i, j)] * a[(i, j)];
                }
            }
        }
        sum.sqrt()
    };
    let tol = 1e-14 * a.frobenius().max(1.0);
    for _sweep in 0..60 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::EPSILON * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
            }
        }
    }
    Ok((0..n).map(|i| a[(i, i)]).collect())
}

/// Row-pivoted LU factorization, reusable for multiple solves.
pub struct Lu {
    n: usize,
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu> {
        require_square(a)?;
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if !best.is_finite() || best == 0.0 {
                return Err(Error::SingularMatrix {
                    condition: f64::INFINITY,
                });
            }
            if piv != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
                perm.swap(k, piv);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    lu[(i, j)] -= factor * lu[(k, j)];
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..self.n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..self.n).rev() {
            for j in (i + 1)..self.n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.rows(), self.n);
        let mut out = Matrix::zeros(self.n, b.cols());
        for j in 0..b.cols() {
            let col: Vec<f64> = (0..self.n).map(|i| b[(i, j)]).collect();
            let x = self.solve(&col);
            for i in 0..self.n {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

/// Inverse via row-pivoted LU; rejects matrices whose 1-norm condition
/// estimate ‖A‖₁‖A⁻¹‖₁ exceeds [`SINGULAR_CONDITION_LIMIT`].
pub fn invert(a: &Matrix) -> Result<Matrix> {
    require_square(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let lu = Lu::factor(a)?;
    let inv = lu.solve_matrix(&Matrix::identity(n));
    if !inv.all_finite() {
        return Err(Error::SingularMatrix {
            condition: f64::INFINITY,
        });
    }
    let condition = induced_norm(a, NormKind::One) * induced_norm(&inv, NormKind::One);
    if !condition.is_finite() || condition > SINGULAR_CONDITION_LIMIT {
        return Err(Error::SingularMatrix { condition });
    }
    Ok(inv)
}

/// Induced p-norm ‖A‖_p for p in {1, 2, inf}.
pub fn induced_norm(a: &Matrix, p: NormKind) -> f64 {
    match p {
        NormKind::One => (0..a.cols())
            .map(|j| (0..a.rows()).map(|i| a[(i, j)].abs()).sum::<f64>())
            .fold(0.0_f64, f64::max),
        NormKind::Inf => (0..a.rows())
            .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max),
        NormKind::Two => {
            let ata = a.transpose().matmul(a);
            // AᵀA is symmetric PSD by construction; clamp tiny negative noise.
            symmetric_eigen_max(&ata)
                .map(|l| l.max(0.0).sqrt())
                .unwrap_or(f64::NAN)
        }
    }
}
