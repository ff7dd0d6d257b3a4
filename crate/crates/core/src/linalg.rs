//! Dense complex linear algebra for the small operators used throughout the
//! crate (dimension 2 to 8).
//!
//! Matrices are stored row-major. Hermitian eigenproblems use cyclic Jacobi
//! rotations; singular values use one-sided (Hestenes) Jacobi. Both are exact
//! enough at these sizes that no external LAPACK binding is needed.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dimension the kernel accepts (three qubits).
pub const MAX_DIM: usize = 8;

/// Max |m - m†| entry tolerated by the Hermitian eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = re(1.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting a wrong entry count
    /// or non-finite values.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidDimension(dim));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| re(x)));
        }
        Self::from_row_major(dim, data)
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = re(v);
        }
        m
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &ComplexVector, v: &ComplexVector) -> Self {
        let n = u.dim();
        assert_eq!(n, v.dim(), "outer product of vectors with different dims");
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        m
    }

    pub fn projector(v: &ComplexVector) -> Self {
        Self::outer(v, v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(re(s))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `self · rho · self†`
    pub fn conjugate(&self, rho: &Self) -> Self {
        self.matmul(rho).matmul(&self.adjoint())
    }

    /// Tr[self · other] without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim, "trace_product dimension mismatch");
        let n = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim, v.dim(), "apply dimension mismatch");
        let n = self.dim;
        let data = (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)] * v[j]).sum())
            .collect();
        ComplexVector { data }
    }

    /// Largest entry of |m - m†|.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (m + m†)/2
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max entrywise |a - b|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Complex column vector (pure-state amplitudes).
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .data
            .iter()
            .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
            .collect();
        write!(f, "ComplexVector[{}]", parts.join(", "))
    }
}

impl ComplexVector {
    pub fn new(data: Vec<C64>) -> Self {
        Self { data }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            data: values.iter().map(|&x| re(x)).collect(),
        }
    }

    /// Computational basis vector `|index⟩` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim];
        data[index] = re(1.0);
        Self { data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            data: self.data.iter().map(|z| z / n).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        Self { data }
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = C64;
    #[inline]
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim());
        ComplexVector {
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Kronecker product; entry [(i·db + k), (j·db + l)] = a[i,j]·b[k,l].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut iter = factors.iter();
    let first = (*iter.next().expect("kron_all needs at least one factor")).clone();
    iter.fold(first, |acc, f| kron(&acc, f))
}

fn check_subsystems(dim: usize, subsystem_dims: &[usize], index: usize) -> Result<()> {
    let total: usize = subsystem_dims.iter().product();
    if subsystem_dims.is_empty() || subsystem_dims.contains(&0) || total != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: total,
        });
    }
    if index >= subsystem_dims.len() {
        return Err(Error::DimensionMismatch {
            expected: subsystem_dims.len(),
            found: index,
        });
    }
    Ok(())
}

/// Splits a flat index into (index before, index of `slot`, index after).
#[inline]
fn split_index(idx: usize, dims: &[usize], slot: usize) -> (usize, usize, usize) {
    let after: usize = dims[slot + 1..].iter().product();
    let low = idx % after;
    let mid = (idx / after) % dims[slot];
    let high = idx / (after * dims[slot]);
    (high, mid, low)
}

/// Traces out subsystem `traced_index` of a matrix on the tensor product of
/// `subsystem_dims` (big-endian ordering, subsystem 0 most significant).
pub fn partial_trace(
    rho: &ComplexMatrix,
    subsystem_dims: &[usize],
    traced_index: usize,
) -> Result<ComplexMatrix> {
    check_subsystems(rho.dim, subsystem_dims, traced_index)?;
    let dt = subsystem_dims[traced_index];
    let after: usize = subsystem_dims[traced_index + 1..].iter().product();
    let reduced = rho.dim / dt;
    let mut out = ComplexMatrix::zeros(reduced);
    for r in 0..reduced {
        let (rh, rl) = (r / after, r % after);
        for s in 0..reduced {
            let (sh, sl) = (s / after, s % after);
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dt {
                let i = (rh * dt + k) * after + rl;
                let j = (sh * dt + k) * after + sl;
                acc += rho[(i, j)];
            }
            out[(r, s)] = acc;
        }
    }
    Ok(out)
}

/// Transposes subsystem `index` in place of the full matrix.
pub fn partial_transpose(
    rho: &ComplexMatrix,
    subsystem_dims: &[usize],
    index: usize,
) -> Result<ComplexMatrix> {
    check_subsystems(rho.dim, subsystem_dims, index)?;
    let n = rho.dim;
    let d = subsystem_dims[index];
    let after: usize = subsystem_dims[index + 1..].iter().product();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        let (ih, im, il) = split_index(i, subsystem_dims, index);
        for j in 0..n {
            let (jh, jm, jl) = split_index(j, subsystem_dims, index);
            let ii = (ih * d + jm) * after + il;
            let jj = (jh * d + im) * after + jl;
            out[(ii, jj)] = rho[(i, j)];
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, ordered like `values`.
    pub vectors: ComplexMatrix,
    /// Size of the (m + m†)/2 correction applied before solving.
    pub symmetrization: f64,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> ComplexVector {
        let n = self.vectors.dim();
        ComplexVector::new((0..n).map(|i| self.vectors[(i, k)]).collect())
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian(deviation));
    }
    let n = m.dim;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = JACOBI_OFF_TOL * a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r < f64::MIN_POSITIVE {
                    continue;
                }
                // Phase-rotate q so the pivot is real, then a real Jacobi rotation.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // G restricted to (p, q): [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
                let g_pp = re(cs);
                let g_pq = re(sn);
                let g_qp = -phase.conj() * sn;
                let g_qq = phase.conj() * cs;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = re(0.0);
                a[(q, p)] = re(0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, src)];
        }
    }
    Ok(HermitianEigen {
        values,
        vectors,
        symmetrization: deviation,
    })
}

/// Real eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|e| e.values)
}

/// Singular values (descending) by one-sided Jacobi on the columns.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim;
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)]).collect())
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g < f64::MIN_POSITIVE {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                for z in cols[q].iter_mut() {
                    *z *= phase.conj();
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                #[allow(clippy::needless_range_loop)] // two columns rotated in lockstep
                for i in 0..n {
                    let xp = cols[p][i];
                    let xq = cols[q][i];
                    cols[p][i] = xp * cs - xq * sn;
                    cols[q][i] = xp * sn + xq * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }
    fn sy() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, vec![re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)]).unwrap()
    }
    fn sz() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, -1.0])
    }

    #[test]
    fn kron_identity() {
        let i4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_z_z_is_diagonal() {
        let zz = kron(&sz(), &sz());
        assert_eq!(zz, ComplexMatrix::diag(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_x_y_antidiagonal() {
        let xy = kron(&sx(), &sy());
        let expected = [
            ((0, 3), c(0.0, -1.0)),
            ((1, 2), c(0.0, 1.0)),
            ((2, 1), c(0.0, -1.0)),
            ((3, 0), c(0.0, 1.0)),
        ];
        for i in 0..4 {
            for j in 0..4 {
                let want = expected
                    .iter()
                    .find(|(ij, _)| *ij == (i, j))
                    .map(|(_, z)| *z)
                    .unwrap_or(re(0.0));
                assert_eq!(xy[(i, j)], want, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = ComplexVector::from_real(&[s, 0.0, 0.0, s]);
        let rho = ComplexMatrix::projector(&phi);
        for k in 0..2 {
            let r = partial_trace(&rho, &[2, 2], k).unwrap();
            assert!(r.max_abs_diff(&ComplexMatrix::diag(&[0.5, 0.5])) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_ghz_last_qubit() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = [0.0; 8];
        amps[0] = s;
        amps[7] = s;
        let rho = ComplexMatrix::projector(&ComplexVector::from_real(&amps));
        let r = partial_trace(&rho, &[2, 2, 2], 0).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5])) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = ComplexMatrix::identity(4);
        assert!(partial_trace(&rho, &[2, 3], 0).is_err());
        assert!(partial_trace(&rho, &[2, 2], 2).is_err());
    }

    #[test]
    fn partial_transpose_of_product_is_product_of_transposes() {
        let a = sy();
        let b = &sx() + &sz();
        let pt = partial_transpose(&kron(&a, &b), &[2, 2], 0).unwrap();
        let want = kron(&a.transpose_for_test(), &b);
        assert!(pt.max_abs_diff(&want) < 1e-15);
    }

    impl ComplexMatrix {
        fn transpose_for_test(&self) -> Self {
            let n = self.dim;
            let mut m = Self::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    m[(j, i)] = self[(i, j)];
                }
            }
            m
        }
    }

    #[test]
    fn eigenvalues_of_identity_and_pauli() {
        assert_eq!(
            hermitian_eigenvalues(&ComplexMatrix::identity(4)).unwrap(),
            vec![1.0; 4]
        );
        let ev = hermitian_eigenvalues(&sx()).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] + 1.0).abs() < 1e-14);
        let ev = hermitian_eigenvalues(&sy()).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let m = &kron(&sx(), &sy()) + &kron(&sz(), &ComplexMatrix::diag(&[0.3, -0.7]));
        let e = hermitian_eigen(&m).unwrap();
        let n = m.dim();
        let mut lam = ComplexMatrix::zeros(n);
        for (i, &v) in e.values.iter().enumerate() {
            lam[(i, i)] = re(v);
        }
        let rebuilt = e.vectors.conjugate(&lam);
        assert!(rebuilt.max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn small_asymmetry_is_symmetrized_and_recorded() {
        let mut m = sx();
        m[(0, 1)] = re(1.0 + 5e-11);
        let e = hermitian_eigen(&m).unwrap();
        assert!(e.symmetrization > 0.0 && e.symmetrization <= HERMITIAN_TOL);
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&ComplexMatrix::identity(3)) - 3.0).abs() < 1e-14);
        assert!((trace_norm(&ComplexMatrix::diag(&[1.0, -1.0, 1.0])) - 3.0).abs() < 1e-14);
        // nilpotent: single singular value 1
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!((trace_norm(&m) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn from_row_major_validates() {
        assert!(ComplexMatrix::from_row_major(2, vec![re(1.0); 3]).is_err());
        assert!(ComplexMatrix::from_row_major(2, vec![re(f64::NAN); 4]).is_err());
        assert!(ComplexMatrix::from_row_major(9, vec![re(0.0); 81]).is_err());
    }
}
