//! Seeded random instance generators.
//!
//! Every randomized input in the CLI and the test suites comes through here
//! with an explicit seed, so runs are reproducible bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::channel::Channel;
use crate::linalg::{kron, C64, ComplexMatrix};
use crate::povm::{DiscretePovm, JointPovm, Label, MarkovKernel};

/// Deterministic RNG for a seed.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Matrix with i.i.d. entries uniform on the complex square.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data: Vec<C64> = (0..rows * cols).map(|_| c64(rng)).collect();
    ComplexMatrix::from_slice(rows, cols, &data)
}

/// Random Hermitian matrix (Gaussian-free: symmetrized uniform entries).
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

/// Random density operator `B B† / tr(B B†)`.
pub fn random_state(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let b = random_matrix(rng, n, n);
    let g = b.mul(&b.dagger());
    let t = g.trace().re;
    g.scale_re(1.0 / t)
}

/// Random pure state as a column vector.
pub fn random_pure_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| c64(rng)).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-ish random unitary via Gram-Schmidt on a random matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    loop {
        let m = random_matrix(rng, n, n);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut v: Vec<C64> = (0..n).map(|i| m[(i, j)]).collect();
            for u in &cols {
                let overlap: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= overlap * ui;
                }
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols.push(v.iter().map(|z| z / norm).collect());
        }
        if ok {
            return ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// Random rank-1 PVM: projectors onto the columns of a random unitary.
pub fn random_rank1_pvm(rng: &mut impl Rng, n: usize) -> DiscretePovm {
    DiscretePovm::basis_pvm(&random_unitary(rng, n)).expect("unitary basis")
}

/// Random PVM with the given projector ranks (summing to the dimension).
pub fn random_pvm(rng: &mut impl Rng, ranks: &[usize]) -> DiscretePovm {
    let n: usize = ranks.iter().sum();
    let u = random_unitary(rng, n);
    let mut effects = Vec::with_capacity(ranks.len());
    let mut col = 0usize;
    for &r in ranks {
        let mut e = ComplexMatrix::zeros(n, n);
        for k in col..col + r {
            let v: Vec<C64> = (0..n).map(|i| u[(i, k)]).collect();
            e = e.add(&ComplexMatrix::outer(&v, &v));
        }
        effects.push(e);
        col += r;
    }
    DiscretePovm::new(n, (0..ranks.len()).map(Label::from).collect(), effects)
        .expect("projector family")
}

/// Random POVM: random PSD effects whitened so they sum to the identity.
pub fn random_povm(rng: &mut impl Rng, dim: usize, outcomes: usize) -> DiscretePovm {
    let raw: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let b = random_matrix(rng, dim, dim);
            b.mul(&b.dagger())
        })
        .collect();
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for e in &raw {
        sum = sum.add(e);
    }
    let w = crate::linalg::inv_sqrt_psd(&sum, 1e-12).expect("sum of full-rank PSDs");
    let effects: Vec<ComplexMatrix> = raw
        .iter()
        .map(|e| w.mul(e).mul(&w).hermitian_part())
        .collect();
    DiscretePovm::new(dim, (0..outcomes).map(Label::from).collect(), effects)
        .expect("whitened POVM")
}

/// Random joint POVM on an `nx` x `ny` grid.
pub fn random_joint_povm(rng: &mut impl Rng, dim: usize, nx: usize, ny: usize) -> JointPovm {
    let flat = random_povm(rng, dim, nx * ny);
    let x_labels: Vec<Label> = (0..nx).map(Label::from).collect();
    let y_labels: Vec<Label> = (0..ny).map(Label::from).collect();
    JointPovm::new(dim, x_labels, y_labels, flat.effects().to_vec()).expect("grid POVM")
}

/// Random row-stochastic Markov kernel.
pub fn random_kernel(rng: &mut impl Rng, source: &[Label], target: &[Label]) -> MarkovKernel {
    let weights: Vec<Vec<f64>> = (0..source.len())
        .map(|_| {
            let mut row: Vec<f64> = (0..target.len()).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: f64 = row.iter().sum();
            for w in &mut row {
                *w /= s;
            }
            // fix rounding so the row sums to 1 exactly
            let s2: f64 = row.iter().sum();
            row[0] += 1.0 - s2;
            row
        })
        .collect();
    MarkovKernel::new(source.to_vec(), target.to_vec(), weights).expect("stochastic rows")
}

/// Random CPTP channel via a Stinespring isometry with a generic environment.
pub fn random_channel(rng: &mut impl Rng, dim_in: usize, dim_out: usize) -> Channel {
    let env = dim_in.div_ceil(dim_out) + 1;
    // isometry: first dim_in columns of a random unitary on dim_out * env
    let big = random_unitary(rng, dim_out * env);
    let kraus: Vec<ComplexMatrix> = (0..env)
        .map(|e| {
            ComplexMatrix::from_fn(dim_out, dim_in, |a, i| big[(a * env + e, i)])
        })
        .collect();
    Channel::from_kraus(&kraus).expect("isometry columns")
}

/// Random probability vector of the given length.
pub fn random_prob_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = p.iter().sum();
    for x in &mut p {
        *x /= s;
    }
    let s2: f64 = p.iter().sum();
    p[0] += 1.0 - s2;
    p
}

/// Joint POVM guaranteed generable from `m (x) n`: the dual of a random
/// broadcaster applied to the product grid.
pub fn random_generated_joint(
    rng: &mut impl Rng,
    dim: usize,
    m: &DiscretePovm,
    n: &DiscretePovm,
) -> (JointPovm, Channel) {
    let ch = random_channel(rng, dim, m.dim() * n.dim());
    let mut effects = Vec::with_capacity(m.len() * n.len());
    for em in m.effects() {
        for en in n.effects() {
            let cell = ch.dual_apply(&kron(em, en)).expect("dims match");
            effects.push(cell.hermitian_part());
        }
    }
    let joint = JointPovm::new(
        dim,
        m.labels().to_vec(),
        n.labels().to_vec(),
        effects,
    )
    .expect("dual of CPTP map on a POVM grid");
    (joint, ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_psd;

    #[test]
    fn generators_produce_valid_objects() {
        let mut r = rng(7);
        for n in [2usize, 3, 4] {
            let rho = random_state(&mut r, n);
            assert!((rho.trace().re - 1.0).abs() <= 1e-12);
            assert!(is_psd(&rho, 1e-9).unwrap());

            let u = random_unitary(&mut r, n);
            assert!(u.is_unitary(1e-10));

            let p = random_povm(&mut r, n, n + 1);
            assert!(p.validate().is_valid());

            let pvm = random_rank1_pvm(&mut r, n);
            assert!(pvm.is_pvm(1e-9));

            let ch = random_channel(&mut r, n, n);
            assert!(ch.verify_cptp().is_ok());
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let a = random_state(&mut rng(123), 3);
        let b = random_state(&mut rng(123), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn generated_joint_is_exactly_generable() {
        let mut r = rng(11);
        let m = random_rank1_pvm(&mut r, 2);
        let n = random_rank1_pvm(&mut r, 2);
        let (joint, ch) = random_generated_joint(&mut r, 2, &m, &n);
        for (x, em) in m.effects().iter().enumerate() {
            for (y, en) in n.effects().iter().enumerate() {
                let got = ch.dual_apply(&kron(em, en)).unwrap();
                assert!(got.sub(joint.effect(x, y)).frobenius_norm() <= 1e-10);
            }
        }
    }
}
