//! Dense complex linear algebra kernel.
//!
//! Everything in scope is a small dense matrix (dimensions well below 4096),
//! stored row-major. Hermitian eigendecomposition is a cyclic complex Jacobi
//! sweep (see [`eig`]); all positivity tests are spectral. Tolerances are
//! relative to `1 + ||A||_F` so that unnormalized effects behave the same as
//! normalized ones.

mod eig;

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Default tolerance for positive-semidefiniteness tests.
pub const PSD_TOL: f64 = 1e-9;
/// Relative tolerance for Hermiticity checks.
pub const HERM_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from row-major real entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        Self {
            rows,
            cols,
            data: entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    /// Build from a row-major complex slice.
    pub fn from_slice(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        Self { rows, cols, data: entries.to_vec() }
    }

    /// Diagonal matrix from real entries.
    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Rank-1 projector |v><v| (v need not be normalized; no normalization is applied).
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Matrix product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// A * v for a column vector v.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Hilbert-Schmidt inner product tr(A† B).
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |A[i][j] - conj(A[j][i])|.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut d = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.rows {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.hermiticity_defect() <= HERM_TOL * (1.0 + self.max_abs())
    }

    /// (A + A†) / 2; input must be square.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian part of non-square matrix");
        let d = self.dagger();
        self.add(&d).scale_re(0.5)
    }

    /// ||U†U - 1||_F.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        self.dagger().mul(self).sub(&Self::identity(n)).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }
}

/// Ordered tensor factorization of a matrix dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    factors: Vec<usize>,
}

impl DimensionSpec {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|&f| f == 0) {
            return Err(Error::invalid("dimension factors must be nonempty and >= 1"));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    assert!(!factors.is_empty());
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = kron(&out, f);
    }
    out
}

fn unpack_index(mut idx: usize, factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0; factors.len()];
    for k in (0..factors.len()).rev() {
        out[k] = idx % factors[k];
        idx /= factors[k];
    }
    out
}

fn pack_index(parts: &[usize], factors: &[usize]) -> usize {
    let mut idx = 0;
    for (p, f) in parts.iter().zip(factors) {
        idx = idx * f + p;
    }
    idx
}

/// Trace over the factors of `dims` not listed in `keep`.
///
/// `keep` is a set of subsystem indices (0-based, order-insensitive); the kept
/// factors stay in their original order. An empty discarded set returns the
/// input unchanged.
pub fn partial_trace(
    a: &ComplexMatrix,
    dims: &DimensionSpec,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != dims.total() {
        return Err(Error::invalid(format!(
            "dimension spec {:?} inconsistent with {}x{} matrix",
            dims.factors(),
            a.rows(),
            a.cols()
        )));
    }
    let nf = dims.factors().len();
    if keep.iter().any(|&k| k >= nf) {
        return Err(Error::invalid("keep index out of range"));
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();

    let kept_factors: Vec<usize> = keep_sorted.iter().map(|&k| dims.factors()[k]).collect();
    let traced: Vec<usize> = (0..nf).filter(|k| !keep_sorted.contains(k)).collect();
    let traced_factors: Vec<usize> = traced.iter().map(|&k| dims.factors()[k]).collect();

    let out_dim: usize = kept_factors.iter().product();
    let tr_dim: usize = traced_factors.iter().product();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);

    let mut full_row = vec![0usize; nf];
    let mut full_col = vec![0usize; nf];
    for i in 0..out_dim {
        let ki = unpack_index(i, &kept_factors);
        for j in 0..out_dim {
            let kj = unpack_index(j, &kept_factors);
            let mut acc = ZERO;
            for t in 0..tr_dim.max(1) {
                let ti = unpack_index(t, &traced_factors);
                for (slot, &k) in keep_sorted.iter().enumerate() {
                    full_row[k] = ki[slot];
                    full_col[k] = kj[slot];
                }
                for (slot, &k) in traced.iter().enumerate() {
                    full_row[k] = ti[slot];
                    full_col[k] = ti[slot];
                }
                acc += a[(pack_index(&full_row, dims.factors()), pack_index(&full_col, dims.factors()))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Permute tensor factors of a square matrix: factor `k` of the result is
/// factor `perm[k]` of the input.
pub fn reorder_subsystems(
    a: &ComplexMatrix,
    dims: &DimensionSpec,
    perm: &[usize],
) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != dims.total() {
        return Err(Error::invalid("dimension spec inconsistent with matrix"));
    }
    let nf = dims.factors().len();
    let mut seen = vec![false; nf];
    for &p in perm {
        if p >= nf || seen[p] {
            return Err(Error::invalid("perm must be a permutation of the factors"));
        }
        seen[p] = true;
    }
    let new_factors: Vec<usize> = perm.iter().map(|&p| dims.factors()[p]).collect();
    let n = a.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let pi = unpack_index(i, &new_factors);
        let mut oi = vec![0usize; nf];
        for (slot, &p) in perm.iter().enumerate() {
            oi[p] = pi[slot];
        }
        let src_i = pack_index(&oi, dims.factors());
        for j in 0..n {
            let pj = unpack_index(j, &new_factors);
            let mut oj = vec![0usize; nf];
            for (slot, &p) in perm.iter().enumerate() {
                oj[p] = pj[slot];
            }
            out[(i, j)] = a[(src_i, pack_index(&oj, dims.factors()))];
        }
    }
    Ok(out)
}

/// Transpose of `A` taken in the coordinates of a unitary `basis`:
/// `basis · (basis† A basis)^T · basis†`.
pub fn transpose_in_basis(a: &ComplexMatrix, basis: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != basis.rows() || !basis.is_square() {
        return Err(Error::invalid("matrix/basis dimension mismatch"));
    }
    if !basis.is_unitary(1e-9 * (1.0 + basis.frobenius_norm())) {
        return Err(Error::invalid("basis is not unitary"));
    }
    let bd = basis.dagger();
    Ok(basis.mul(&bd.mul(a).mul(basis).transpose()).mul(&bd))
}

pub use eig::{hermitian_eig, EigDecomposition};

/// PSD test: min eigenvalue >= -tol * (1 + ||A||_F). Errors on non-Hermitian input.
pub fn is_psd(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(a)? >= -tol * (1.0 + a.frobenius_norm()))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eig(a)?;
    Ok(eig.values[0])
}

/// Project a Hermitian matrix onto the PSD cone (clamp negative eigenvalues).
pub fn psd_projection(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    Ok(eig.reassemble(|v| v.max(0.0)))
}

/// Hermitian square root of a PSD matrix; negative eigenvalues within
/// tolerance are clamped to zero.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    Ok(eig.reassemble(|v| v.max(0.0).sqrt()))
}

/// Pseudo-inverse square root of a PSD matrix: eigenvalues below `cutoff`
/// map to zero.
pub fn inv_sqrt_psd(a: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    Ok(eig.reassemble(|v| if v > cutoff { 1.0 / v.sqrt() } else { 0.0 }))
}

// ---------------------------------------------------------------------------
// JSON interchange: {"rows": n, "cols": m, "re": [[...]], "im": [[...]]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let re = (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.re).collect())
            .collect();
        let im = (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.im).collect())
            .collect();
        MatrixJson { rows: self.rows, cols: self.cols, re, im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = MatrixJson::deserialize(d)?;
        if j.re.len() != j.rows || j.im.len() != j.rows {
            return Err(D::Error::custom("matrix row count mismatch"));
        }
        let mut data = Vec::with_capacity(j.rows * j.cols);
        for (rrow, irow) in j.re.iter().zip(&j.im) {
            if rrow.len() != j.cols || irow.len() != j.cols {
                return Err(D::Error::custom("matrix column count mismatch"));
            }
            for (&re, &im) in rrow.iter().zip(irow) {
                data.push(C64::new(re, im));
            }
        }
        Ok(ComplexMatrix { rows: j.rows, cols: j.cols, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: usize, cols: usize, re: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real(rows, cols, re)
    }

    pub(crate) fn pauli_x() -> ComplexMatrix {
        cm(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub(crate) fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::from_slice(
            2,
            2,
            &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
        )
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let a = ComplexMatrix::diag(&[1.0, 0.0]);
        let b = ComplexMatrix::diag(&[0.0, 1.0]);
        assert_eq!(kron(&a, &b), ComplexMatrix::diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_bit_flip_on_both_factors() {
        let xx = kron(&pauli_x(), &pauli_x());
        let e00 = vec![ONE, ZERO, ZERO, ZERO];
        let out = xx.mul_vec(&e00);
        assert_eq!(out, vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn kron_trace_multiplicative() {
        let a = cm(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = cm(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let t = kron(&a, &b).trace();
        let expect = a.trace() * b.trace();
        assert!((t - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = cm(2, 2, &[0.7, 0.1, 0.1, 0.3]);
        let sigma = cm(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let dims = DimensionSpec::new(vec![2, 2]).unwrap();
        let full = kron(&rho, &sigma);
        let back = partial_trace(&full, &dims, &[0]).unwrap();
        assert!(back.sub(&rho).frobenius_norm() <= 1e-12);
        // trace is preserved
        assert!((partial_trace(&full, &dims, &[1]).unwrap().trace() - full.trace()).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_maximally_entangled() {
        // |Omega> = (|00> + |11>)/sqrt(2)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let omega = [C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let proj = ComplexMatrix::outer(&omega, &omega);
        let dims = DimensionSpec::new(vec![2, 2]).unwrap();
        for keep in [0usize, 1] {
            let red = partial_trace(&proj, &dims, &[keep]).unwrap();
            let half = ComplexMatrix::identity(2).scale_re(0.5);
            assert!(red.sub(&half).frobenius_norm() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_empty_discard_is_identity() {
        let a = cm(4, 4, &(0..16).map(|x| x as f64).collect::<Vec<_>>());
        let dims = DimensionSpec::new(vec![2, 2]).unwrap();
        let out = partial_trace(&a, &dims, &[0, 1]).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let a = cm(3, 3, &[1.0; 9]);
        let dims = DimensionSpec::new(vec![2, 2]).unwrap();
        assert!(partial_trace(&a, &dims, &[0]).is_err());
    }

    #[test]
    fn transpose_in_basis_standard() {
        let sym = cm(2, 2, &[1.0, 2.0, 2.0, 5.0]);
        let i2 = ComplexMatrix::identity(2);
        assert!(transpose_in_basis(&sym, &i2).unwrap().sub(&sym).frobenius_norm() <= 1e-14);
        let y = pauli_y();
        let yt = transpose_in_basis(&y, &i2).unwrap();
        assert!(yt.add(&y).frobenius_norm() <= 1e-14, "sigma_y transposes to -sigma_y");
    }

    #[test]
    fn transpose_in_basis_involution_preserves_spectrum() {
        let a = cm(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        // Fourier basis as a nontrivial unitary
        let n = 3;
        let basis = ComplexMatrix::from_fn(n, n, |m, k| {
            C64::from_polar(1.0 / (n as f64).sqrt(), 2.0 * std::f64::consts::PI * (m * k) as f64 / n as f64)
        });
        let t = transpose_in_basis(&a, &basis).unwrap();
        let tt = transpose_in_basis(&t, &basis).unwrap();
        assert!(tt.sub(&a).frobenius_norm() <= 1e-10);
        let sa = hermitian_eig(&a).unwrap().values;
        let st = hermitian_eig(&t.hermitian_part()).unwrap().values;
        for (x, y) in sa.iter().zip(&st) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn transpose_in_basis_rejects_non_unitary() {
        let a = ComplexMatrix::identity(2);
        let bad = cm(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(transpose_in_basis(&a, &bad).is_err());
    }

    #[test]
    fn reorder_subsystems_swaps_kron_factors() {
        let a = cm(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = cm(3, 3, &(0..9).map(|x| x as f64).collect::<Vec<_>>());
        let ab = kron(&a, &b);
        let dims = DimensionSpec::new(vec![2, 3]).unwrap();
        let ba = reorder_subsystems(&ab, &dims, &[1, 0]).unwrap();
        assert!(ba.sub(&kron(&b, &a)).frobenius_norm() <= 1e-14);
    }

    #[test]
    fn json_round_trip_bit_exact() {
        let a = ComplexMatrix::from_slice(
            2,
            2,
            &[
                C64::new(1.0 / 3.0, -2.0 / 7.0),
                C64::new(f64::MIN_POSITIVE, 1e300),
                C64::new(-0.1, 0.3),
                C64::new(2.0f64.powi(-52), 0.0),
            ],
        );
        let s = serde_json::to_string(&a).unwrap();
        let b: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b, "round trip must be bit-exact for f64-representable values");
    }
}
