//! Dense least squares via Householder QR with a triangular-factor condition
//! estimate.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::{Error, Result, Scalar};

/// Condition-number cap above which a least-squares solve is refused.
pub const DEFAULT_COND_CAP: f64 = 1e8;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ · y`
    pub fn tr_mul_vec(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (r, &yr) in y.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a * yr;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.data[r * self.cols..(r + 1) * self.cols]
                .iter()
                .map(|v| format!("{v:?}"))
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSolution<T> {
    pub solution: Vec<T>,
    pub residual_norm: T,
    /// 2-norm condition number of the system matrix, or an upper bound on it.
    pub condition: T,
}

/// Minimizes `‖a·x − rhs‖₂` for a tall or square `a`.
///
/// The factorization's triangular factor gives a cheap 1-norm condition
/// estimate `κ₁(R)`, which brackets the 2-norm condition within a factor of
/// `n`. Only when that bracket straddles `cond_cap` are the singular values of
/// `R` computed.
pub fn solve_ls<T: Scalar>(
    a: &Matrix<T>,
    rhs: &[T],
    cond_cap: T,
) -> Result<LeastSquaresSolution<T>> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::Dimension(format!(
            "{m}x{n} system is underdetermined"
        )));
    }
    if rhs.len() != m {
        return Err(Error::Dimension(format!(
            "rhs has {} rows, matrix {m}",
            rhs.len()
        )));
    }
    let mut r = a.clone();
    let mut qtb = rhs.to_vec();
    householder_qr_in_place(&mut r, &mut qtb);

    let cap_f64 = cond_cap.to_f64().unwrap_or(f64::INFINITY);
    let ill = |estimate: T| Error::IllConditioned {
        estimate: estimate.to_f64().unwrap_or(f64::INFINITY),
        cap: cap_f64,
    };

    let tiny = T::min_positive_value();
    if (0..n).any(|i| r[(i, i)].abs() <= tiny) {
        return Err(ill(T::infinity()));
    }
    let mut condition = triangular_cond_1(&r, n);
    let nf = T::from_usize_lossy(n.max(1));
    if !condition.is_finite() || condition > cond_cap / nf {
        let sv = singular_values_upper(&r, n);
        let (lo, hi) = sv.iter().fold((T::infinity(), T::zero()), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
        condition = if lo > T::zero() {
            hi / lo
        } else {
            T::infinity()
        };
    }
    if !(condition <= cond_cap) {
        return Err(ill(condition));
    }

    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = qtb[i];
        for j in i + 1..n {
            acc -= r[(i, j)] * x[j];
        }
        x[i] = acc / r[(i, i)];
    }
    let residual_norm = qtb[n..].iter().map(|&v| v * v).sum::<T>().sqrt();
    Ok(LeastSquaresSolution {
        solution: x,
        residual_norm,
        condition,
    })
}

/// Overwrites `a` with `R` (upper triangle) and `b` with `Qᵀb`.
fn householder_qr_in_place<T: Scalar>(a: &mut Matrix<T>, b: &mut [T]) {
    let (m, n) = (a.rows(), a.cols());
    let mut v = vec![T::zero(); m];
    for k in 0..n {
        let norm = (k..m).map(|i| a[(i, k)] * a[(i, k)]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if a[(k, k)] > T::zero() { -norm } else { norm };
        for i in k..m {
            v[i] = a[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: T = (k..m).map(|i| v[i] * v[i]).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for j in k..n {
            let dot: T = (k..m).map(|i| v[i] * a[(i, j)]).sum();
            let s = two * dot / vnorm2;
            for i in k..m {
                let vi = v[i];
                a[(i, j)] -= s * vi;
            }
        }
        let dot: T = (k..m).map(|i| v[i] * b[i]).sum();
        let s = two * dot / vnorm2;
        for i in k..m {
            b[i] -= s * v[i];
        }
        for i in k + 1..m {
            a[(i, k)] = T::zero();
        }
    }
}

/// `‖R‖₁ · ‖R⁻¹‖₁` for the leading `n×n` upper triangle of `r`.
fn triangular_cond_1<T: Scalar>(r: &Matrix<T>, n: usize) -> T {
    // Column j of R⁻¹ by back substitution on e_j.
    let mut inv_norm = T::zero();
    let mut col = vec![T::zero(); n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = T::zero());
        col[j] = T::one() / r[(j, j)];
        for i in (0..j).rev() {
            let mut acc = T::zero();
            for k in i + 1..=j {
                acc += r[(i, k)] * col[k];
            }
            col[i] = -acc / r[(i, i)];
        }
        inv_norm = inv_norm.max(col.iter().map(|c| c.abs()).sum());
    }
    let norm = (0..n)
        .map(|j| (0..=j).map(|i| r[(i, j)].abs()).sum::<T>())
        .fold(T::zero(), T::max);
    norm * inv_norm
}

/// Singular values of the leading `n×n` block by one-sided Jacobi rotations.
fn singular_values_upper<T: Scalar>(r: &Matrix<T>, n: usize) -> Vec<T> {
    let mut u = Matrix::from_fn(n, n, |i, j| if i <= j { r[(i, j)] } else { T::zero() });
    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..n {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == T::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (0..n)
        .map(|j| (0..n).map(|i| u[(i, j)] * u[(i, j)]).sum::<T>().sqrt())
        .collect()
}
