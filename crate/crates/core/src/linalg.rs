//! Small dense kernel: Kronecker products, numerical rank and minimum-norm
//! solves. Matrices here are at most a few hundred columns wide, so every
//! decomposition goes through a full SVD.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default cap on the number of entries of any vector or matrix we build.
pub const DEFAULT_CAP: usize = 1_000_000;

/// Default relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Default relative residual tolerance for accepting a linear solve.
pub const DEFAULT_SOLVE_TOL: f64 = 1e-8;

/// Row-major dense matrix of finite reals.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::WrongLength { expected: rows * cols, got: data.len() });
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite matrix entry {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Column vector (n x 1).
    pub fn column(v: &[f64]) -> Result<Self> {
        Self::new(v.len(), 1, v.to_vec())
    }

    /// Stack equal-length vectors as the rows of a matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::WrongLength { expected: cols, got: r.len() });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn check_cap(requested: u128, cap: usize) -> Result<()> {
    if requested > cap as u128 {
        Err(Error::DimensionOverflow { requested, cap })
    } else {
        Ok(())
    }
}

/// Kronecker product `a ⊗ b`: block (i, j) of the result is `a[i][j] * b`.
pub fn kronecker(a: &DenseMatrix, b: &DenseMatrix, cap: usize) -> Result<DenseMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    check_cap(rows as u128 * cols as u128, cap)?;
    let mut data = Vec::with_capacity(rows * cols);
    for ar in 0..a.rows {
        for br in 0..b.rows {
            for ac in 0..a.cols {
                let s = a.get(ar, ac);
                data.extend(b.row(br).iter().map(|x| s * x));
            }
        }
    }
    Ok(DenseMatrix { rows, cols, data })
}

/// Kronecker product of two vectors, treating both as columns.
pub fn kron_vec(a: &[f64], b: &[f64], cap: usize) -> Result<Vec<f64>> {
    check_cap(a.len() as u128 * b.len() as u128, cap)?;
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|y| x * y));
    }
    Ok(out)
}

/// `m`-fold Kronecker power of `v`; the empty power is `[1]`.
pub fn kronecker_power(v: &[f64], m: usize, cap: usize) -> Result<Vec<f64>> {
    let requested = (v.len() as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    check_cap(requested, cap)?;
    let mut acc = vec![1.0];
    for _ in 0..m {
        acc = kron_vec(&acc, v, cap)?;
    }
    Ok(acc)
}

fn singular_values(mat: &DenseMatrix) -> Vec<f64> {
    if mat.rows == 0 || mat.cols == 0 {
        return Vec::new();
    }
    mat.to_nalgebra().singular_values().iter().copied().collect()
}

/// Number of singular values above `tol * sigma_max`.
pub fn rank(mat: &DenseMatrix, tol: f64) -> usize {
    let sv = singular_values(mat);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome {
    Solution { x: Vec<f64>, residual: f64 },
    NoSolution { least_squares: Vec<f64>, residual: f64 },
}

impl SolveOutcome {
    pub fn residual(&self) -> f64 {
        match self {
            SolveOutcome::Solution { residual, .. } | SolveOutcome::NoSolution { residual, .. } => *residual,
        }
    }

    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            SolveOutcome::Solution { x, .. } => Some(x),
            SolveOutcome::NoSolution { .. } => None,
        }
    }
}

/// Minimum-norm least-squares solution of `a x = b` via the pseudoinverse.
///
/// The system counts as solved when the least-squares residual is at most
/// `tol * (1 + ‖b‖)`. Singular values below the usual
/// `max(rows, cols) * eps * sigma_max` cutoff are treated as zero.
pub fn min_norm_solve(a: &DenseMatrix, b: &[f64], tol: f64) -> Result<SolveOutcome> {
    if a.rows != b.len() {
        return Err(Error::WrongLength { expected: a.rows, got: b.len() });
    }
    let x = if a.rows == 0 || a.cols == 0 {
        vec![0.0; a.cols]
    } else {
        let svd = a.to_nalgebra().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let cutoff = a.rows.max(a.cols) as f64 * f64::EPSILON * smax;
        let u = svd.u.as_ref().expect("svd computed with u");
        let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
        let rhs = DVector::from_column_slice(b);
        let mut x = DVector::<f64>::zeros(a.cols);
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > cutoff && s > 0.0 {
                let coef = u.column(k).dot(&rhs) / s;
                x += v_t.row(k).transpose() * coef;
            }
        }
        x.iter().copied().collect()
    };
    let ax = a.mul_vec(&x);
    let resid: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let residual = norm2(&resid);
    if residual <= tol * (1.0 + norm2(b)) {
        Ok(SolveOutcome::Solution { x, residual })
    } else {
        Ok(SolveOutcome::NoSolution { least_squares: x, residual })
    }
}
