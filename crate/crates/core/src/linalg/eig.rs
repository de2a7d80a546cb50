//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Each rotation annihilates one off-diagonal pair through a phased 2x2 plane
//! rotation; sweeps repeat until the off-diagonal Frobenius mass drops below
//! `1e-14 * ||A||_F` or 100 sweeps have run. Deterministic: fixed sweep order,
//! eigenvalues sorted ascending, eigenvector phases canonicalized so that the
//! largest-magnitude entry of each column is real positive.

use super::{C64, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

const SWEEP_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Result of [`hermitian_eig`]: `a = vectors · diag(values) · vectors†`.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl EigDecomposition {
    /// Rebuild `V · diag(f(values)) · V†`.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            if fv == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)];
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj() * fv;
                }
            }
        }
        out
    }

    /// Column `k` as a vector.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let n = self.values.len();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Errors on non-square or non-Hermitian input (tolerance
/// `1e-12 * (1 + maxabs)`); the tiny anti-Hermitian residue of a passing
/// input is dropped before iterating.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigDecomposition> {
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_hermitian() {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (defect {:.3e})",
            a.hermiticity_defect()
        )));
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let fro = m.frobenius_norm();
    let stop = SWEEP_TOL * fro;

    if n > 1 {
        for _sweep in 0..MAX_SWEEPS {
            if off_diagonal_mass(&m) <= stop {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // canonical phase: largest-magnitude entry real positive
        let mut best = 0usize;
        let mut best_mag = -1.0f64;
        for i in 0..n {
            let mag = v[(i, old_col)].norm();
            if mag > best_mag + 1e-12 {
                best_mag = mag;
                best = i;
            }
        }
        let pivot = v[(best, old_col)];
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { super::ONE };
        for i in 0..n {
            vectors[(i, new_col)] = v[(i, old_col)] * phase;
        }
    }
    Ok(EigDecomposition { values, vectors })
}

fn off_diagonal_mass(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += m[(p, q)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation zeroing m[p][q] (and m[q][p]).
///
/// Factors the pivot phase out first, then applies the classical symmetric
/// Jacobi angle; the combined unitary acts on columns p, q of the eigenvector
/// accumulator.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let mpq = m[(p, q)];
    let b = mpq.norm();
    if b == 0.0 {
        return;
    }
    let alpha = m[(p, p)].re;
    let gamma = m[(q, q)].re;
    let phase = mpq / b; // e^{i phi}

    // smaller-magnitude root of b t^2 - 2 b tau t - b = 0 keeps the angle <= 45 deg
    let tau = (gamma - alpha) / (2.0 * b);
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G[p][p] = c, G[p][q] = -s, G[q][p] = s e^{-i phi}, G[q][q] = c e^{-i phi}
    let gqp = C64::new(s, 0.0) * phase.conj();
    let gqq = C64::new(c, 0.0) * phase.conj();

    let n = m.rows();
    // m <- G† m G : update columns then rows
    for i in 0..n {
        let mip = m[(i, p)];
        let miq = m[(i, q)];
        m[(i, p)] = mip * c + miq * gqp;
        m[(i, q)] = mip * (-s) + miq * gqq;
    }
    for j in 0..n {
        let mpj = m[(p, j)];
        let mqj = m[(q, j)];
        m[(p, j)] = mpj * c + mqj * gqp.conj();
        m[(q, j)] = mpj * (-s) + mqj * gqq.conj();
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);

    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * c + viq * gqp;
        v[(i, q)] = vip * (-s) + viq * gqq;
    }
}
