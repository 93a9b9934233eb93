//! Dense complex matrices and the decompositions the simulator needs.
//!
//! Everything here operates on small matrices (the largest products in a
//! campaign are around 144 x 48), so the implementations favor numerical
//! robustness and determinism over blocking or vectorization: one-sided
//! Jacobi for the SVD, cyclic Jacobi for Hermitian eigendecomposition, and
//! Cholesky reduction for the generalized Hermitian eigenproblem.
//!
//! Conventions: row-major storage, thin factorizations, singular values and
//! eigenvalues sorted in descending order.

use num_complex::Complex64;
use thiserror::Error;

/// Relative off-diagonal threshold below which Jacobi sweeps stop.
const JACOBI_TOL: f64 = 1e-14;
/// Sweep cap for both Jacobi loops; typical runs converge in under ten.
const MAX_SWEEPS: usize = 64;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("iteration cap reached in {0} without convergence")]
    NotConverged(&'static str),
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
}

/// Dense complex matrix with row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let v = self[(r, c)];
                write!(f, "{:>9.4}{:+.4}i ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    /// Builds from nested rows; panics if the rows are ragged or empty.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(cols > 0, "matrix needs at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Column vector from a slice.
    pub fn column_vector(values: &[Complex64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Conjugate transpose.
    pub fn h(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in add"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in sub"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch in mul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols, "trace needs a square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    /// Squared Euclidean norm of column `j`.
    pub fn col_norm_sq(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self[(i, j)].norm_sqr()).sum()
    }

    /// Squared Euclidean norm of row `i`.
    pub fn row_norm_sq(&self, i: usize) -> f64 {
        (0..self.cols).map(|j| self[(i, j)].norm_sqr()).sum()
    }

    /// Inner product of columns `p` and `q`: sum of conj(a_ip) * a_iq.
    fn col_inner(&self, p: usize, q: usize) -> Complex64 {
        (0..self.rows)
            .map(|i| self[(i, p)].conj() * self[(i, q)])
            .sum()
    }

    /// Copy of column `j` as an n x 1 matrix.
    pub fn column(&self, j: usize) -> Self {
        Self::from_fn(self.rows, 1, |r, _| self[(r, j)])
    }

    /// New matrix keeping the listed columns, in the given order.
    pub fn take_columns(&self, indices: &[usize]) -> Self {
        Self::from_fn(self.rows, indices.len(), |r, c| self[(r, indices[c])])
    }

    /// First `n` columns.
    pub fn leading_columns(&self, n: usize) -> Self {
        assert!(n <= self.cols, "leading_columns exceeds width");
        self.take_columns(&(0..n).collect::<Vec<_>>())
    }

    pub fn set_column(&mut self, j: usize, values: &Self) {
        assert_eq!(values.rows, self.rows, "column length mismatch");
        assert_eq!(values.cols, 1, "set_column takes a column vector");
        for r in 0..self.rows {
            self[(r, j)] = values[(r, 0)];
        }
    }

    /// Stack matrices vertically; all must share a column count.
    pub fn vstack(parts: &[&Self]) -> Self {
        assert!(!parts.is_empty(), "vstack needs at least one part");
        let cols = parts[0].cols;
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for part in parts {
            assert_eq!(part.cols, cols, "column mismatch in vstack");
            data.extend_from_slice(&part.data);
        }
        Self { rows, cols, data }
    }

    /// Hermitian part (A + A^H) / 2; cheap defense against rounding drift.
    pub fn hermitian_part(&self) -> Self {
        assert_eq!(self.rows, self.cols, "hermitian_part needs a square matrix");
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::mul(self, rhs)
    }
}

/// Thin singular value decomposition a = u * diag(s) * v^H.
pub struct Svd {
    /// Left singular vectors, m x k with k = min(m, n).
    pub u: ComplexMatrix,
    /// Singular values in descending order, length k.
    pub s: Vec<f64>,
    /// Right singular vectors, n x k.
    pub v: ComplexMatrix,
}

/// Jacobi rotation (c, s) zeroing the off-diagonal of the real symmetric
/// 2x2 [[a, t], [t, d]] with t > 0. The angle magnitude stays at or below
/// pi/4, the classical convergent choice.
fn jacobi_cs(a: f64, d: f64, t: f64) -> (f64, f64) {
    let tau = (d - a) / (2.0 * t);
    let tan = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + tan * tan).sqrt();
    (c, c * tan)
}

/// Thin SVD by one-sided Jacobi on columns. Cost is O(m n^2) per sweep,
/// fine for this crate's matrix sizes. Zero singular values get their left
/// vectors from basis completion, so `u` always has orthonormal columns.
pub fn svd(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
    if a.rows < a.cols {
        // Work on the conjugate transpose and swap the factor roles.
        let t = svd(&a.h())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (m, n) = (a.rows, a.cols);
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let app = w.col_norm_sq(p);
                let aqq = w.col_norm_sq(q);
                let apq = w.col_inner(p, q);
                let mag = apq.norm();
                if mag <= JACOBI_TOL * (app * aqq).sqrt() || mag == 0.0 {
                    continue;
                }
                rotated = true;
                // Absorb the cross-term phase into column q, then rotate.
                let phase = apq / mag;
                let (c, s) = jacobi_cs(app, aqq, mag);
                let cphase = phase.conj();
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)] * cphase;
                    w[(i, p)] = wp * c + wq * s;
                    w[(i, q)] = wq * c - wp * s;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * cphase;
                    v[(i, p)] = vp * c + vq * s;
                    v[(i, q)] = vq * c - vp * s;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NotConverged("svd"));
    }

    let mut s: Vec<f64> = (0..n).map(|j| w.col_norm_sq(j).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).expect("singular values are finite"));
    s = order.iter().map(|&j| s[j]).collect();
    let v = v.take_columns(&order);
    let w = w.take_columns(&order);

    // Left vectors: normalized columns where the singular value is
    // meaningful, completed to an orthonormal set where it is not.
    let cutoff = s.first().copied().unwrap_or(0.0) * (m.max(n) as f64) * f64::EPSILON;
    let mut u = ComplexMatrix::zeros(m, n);
    let mut filled = Vec::with_capacity(n);
    for j in 0..n {
        if s[j] > cutoff {
            for i in 0..m {
                u[(i, j)] = w[(i, j)] / s[j];
            }
            filled.push(j);
        }
    }
    for j in 0..n {
        if s[j] > cutoff {
            continue;
        }
        // Gram-Schmidt a standard basis vector against the columns so far.
        let mut chosen = None;
        for cand in 0..m {
            let mut col = vec![Complex64::ZERO; m];
            col[cand] = Complex64::ONE;
            for &f in &filled {
                let proj: Complex64 = (0..m).map(|i| u[(i, f)].conj() * col[i]).sum();
                for i in 0..m {
                    col[i] -= u[(i, f)] * proj;
                }
            }
            let norm = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.5 {
                for x in col.iter_mut() {
                    *x /= norm;
                }
                chosen = Some(col);
                break;
            }
        }
        let col = chosen.expect("basis completion always finds a direction");
        for i in 0..m {
            u[(i, j)] = col[i];
        }
        filled.push(j);
    }

    Ok(Svd { u, s, v })
}

/// Hermitian eigendecomposition a = q * diag(values) * q^H by cyclic
/// two-sided Jacobi. Only the Hermitian part of the input is used.
/// Eigenvalues come back in descending order.
pub fn herm_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    assert_eq!(a.rows, a.cols, "herm_eigen needs a square matrix");
    let n = a.rows;
    let mut w = a.hermitian_part();
    let mut q = ComplexMatrix::identity(n);
    let scale = w.frob_norm();
    if scale == 0.0 || n == 1 {
        let values = (0..n).map(|i| w[(i, i)].re).collect();
        return Ok((values, q));
    }
    let tol = JACOBI_TOL * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for r in p + 1..n {
                let apq = w[(p, r)];
                let mag = apq.norm();
                if mag <= tol {
                    continue;
                }
                rotated = true;
                let phase = apq / mag;
                let (c, s) = jacobi_cs(w[(p, p)].re, w[(r, r)].re, mag);
                // Columns: [p r] <- [p, phase^* r] * [[c, -s], [s, c]].
                let cphase = phase.conj();
                for i in 0..n {
                    let wp = w[(i, p)];
                    let wq = w[(i, r)] * cphase;
                    w[(i, p)] = wp * c + wq * s;
                    w[(i, r)] = wq * c - wp * s;
                }
                // Rows: the conjugate-transposed update.
                for j in 0..n {
                    let wp = w[(p, j)];
                    let wq = w[(r, j)] * phase;
                    w[(p, j)] = wp * c + wq * s;
                    w[(r, j)] = wq * c - wp * s;
                }
                for i in 0..n {
                    let qp = q[(i, p)];
                    let qq = q[(i, r)] * cphase;
                    q[(i, p)] = qp * c + qq * s;
                    q[(i, r)] = qq * c - qp * s;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NotConverged("herm_eigen"));
    }

    let mut values: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .partial_cmp(&values[i])
            .expect("eigenvalues are finite")
    });
    values = order.iter().map(|&i| values[i]).collect();
    Ok((values, q.take_columns(&order)))
}

/// Cholesky factor l (lower triangular, real positive diagonal) with
/// l * l^H equal to the Hermitian positive definite input. Only the lower
/// triangle of `b` is read.
pub fn cholesky(b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    assert_eq!(b.rows, b.cols, "cholesky needs a square matrix");
    let n = b.rows;
    // A pivot that collapses below rounding noise relative to the largest
    // diagonal entry marks the matrix as numerically semidefinite; an
    // absolute zero test would accept such pivots and let the factor feed
    // wildly amplified solves downstream.
    let pivot_floor =
        (0..n).map(|i| b[(i, i)].re).fold(0.0f64, f64::max) * (n as f64) * f64::EPSILON;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = b[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > pivot_floor) || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut v = b[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / djj;
        }
    }
    Ok(l)
}

/// Solves l * x = rhs for lower triangular l by forward substitution.
pub fn solve_lower(l: &ComplexMatrix, rhs: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(l.rows, l.cols, "triangular solve needs a square factor");
    assert_eq!(l.rows, rhs.rows, "shape mismatch in solve_lower");
    let n = l.rows;
    let mut x = rhs.clone();
    for c in 0..rhs.cols {
        for i in 0..n {
            let mut v = x[(i, c)];
            for k in 0..i {
                v -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = v / l[(i, i)];
        }
    }
    x
}

/// Solves l^H * x = rhs for lower triangular l by back substitution.
pub fn solve_lower_h(l: &ComplexMatrix, rhs: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(l.rows, l.cols, "triangular solve needs a square factor");
    assert_eq!(l.rows, rhs.rows, "shape mismatch in solve_lower_h");
    let n = l.rows;
    let mut x = rhs.clone();
    for c in 0..rhs.cols {
        for i in (0..n).rev() {
            let mut v = x[(i, c)];
            for k in i + 1..n {
                // (l^H)[i][k] = conj(l[k][i]).
                v -= l[(k, i)].conj() * x[(k, c)];
            }
            x[(i, c)] = v / l[(i, i)].conj();
        }
    }
    x
}

/// Solves a * x = rhs for Hermitian positive definite a via Cholesky.
pub fn solve_hermitian_pd(
    a: &ComplexMatrix,
    rhs: &ComplexMatrix,
) -> Result<ComplexMatrix, LinalgError> {
    let l = cholesky(a)?;
    Ok(solve_lower_h(&l, &solve_lower(&l, rhs)))
}

/// General inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    assert_eq!(a.rows, a.cols, "inverse needs a square matrix");
    let n = a.rows;
    let mut w = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    let scale = w.frob_norm().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, w[(r, col)].norm()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).expect("finite pivots"))
            .expect("non-empty pivot range");
        if pivot_mag <= scale * (n as f64) * f64::EPSILON {
            return Err(LinalgError::Singular);
        }
        if pivot_row != col {
            for j in 0..n {
                let (a1, a2) = (w[(col, j)], w[(pivot_row, j)]);
                w[(col, j)] = a2;
                w[(pivot_row, j)] = a1;
                let (b1, b2) = (inv[(col, j)], inv[(pivot_row, j)]);
                inv[(col, j)] = b2;
                inv[(pivot_row, j)] = b1;
            }
        }
        let pivot = w[(col, col)];
        for j in 0..n {
            w[(col, j)] /= pivot;
            inv[(col, j)] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = w[(r, col)];
            if factor == Complex64::ZERO {
                continue;
            }
            for j in 0..n {
                let wc = w[(col, j)];
                let ic = inv[(col, j)];
                w[(r, j)] -= factor * wc;
                inv[(r, j)] -= factor * ic;
            }
        }
    }
    Ok(inv)
}

/// Generalized Hermitian eigenproblem a * t = lambda * b * t with b
/// positive definite. Returns eigenvalues in descending order and the
/// matching eigenvector columns, b-orthonormal: t^H * b * t = identity.
///
/// Reduction: factor b = l * l^H, solve the ordinary Hermitian problem for
/// c = l^-1 * a * l^-H, then map eigenvectors back through t = l^-H * q.
pub fn herm_gen_eig(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    assert_eq!(a.rows, a.cols, "herm_gen_eig needs square matrices");
    assert_eq!(b.rows, b.cols, "herm_gen_eig needs square matrices");
    assert_eq!(a.rows, b.rows, "herm_gen_eig needs matching dimensions");
    let l = cholesky(b)?;
    let y = solve_lower(&l, a);
    // c = y * l^-H, computed as (l^-1 * y^H)^H to reuse forward substitution.
    let c = solve_lower(&l, &y.h()).h().hermitian_part();
    let (values, q) = herm_eigen(&c)?;
    let t = solve_lower_h(&l, &q);
    Ok((values, t))
}
