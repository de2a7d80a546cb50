//! CPTP maps stored as Choi matrices, their Heisenberg duals, and the
//! closed-form broadcasting channels for discrete PVMs.
//!
//! Choi convention (input index first):
//! `choi = sum_{ij} |i><j| (x) Phi(|i><j|)`,
//! so complete positivity is `choi >= 0` and trace preservation is
//! `tr_out(choi) = 1_in`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, kron, partial_trace, reorder_subsystems, C64, ComplexMatrix, DimensionSpec,
};
use crate::povm::{DiscretePovm, JointPovm};

/// PSD tolerance on the Choi matrix.
pub const CP_TOL: f64 = 1e-9;
/// Frobenius tolerance on the trace-preservation condition.
pub const TP_TOL: f64 = 1e-9;

/// Completely positive trace-preserving map between finite-dimensional
/// systems, stored as a Choi matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    choi: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    dim_in: usize,
    dim_out: usize,
    choi: ComplexMatrix,
}

impl Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelJson {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            choi: self.choi.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let j = ChannelJson::deserialize(d)?;
        Channel::from_choi(j.dim_in, j.dim_out, j.choi).map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl Channel {
    /// Wrap a Choi matrix, verifying complete positivity and trace
    /// preservation at the standard tolerances.
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: ComplexMatrix) -> Result<Self> {
        let ch = Self { dim_in, dim_out, choi };
        ch.verify_cptp()?;
        Ok(ch)
    }

    /// From Kraus operators (all `dim_out x dim_in`, `sum K†K = 1`).
    pub fn from_kraus(ops: &[ComplexMatrix]) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::invalid("need at least one Kraus operator"));
        }
        let dim_out = ops[0].rows();
        let dim_in = ops[0].cols();
        let mut norm = ComplexMatrix::zeros(dim_in, dim_in);
        for k in ops {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(Error::invalid("Kraus operators must share one shape"));
            }
            norm = norm.add(&k.dagger().mul(k));
        }
        let defect = norm.sub(&ComplexMatrix::identity(dim_in)).frobenius_norm();
        if defect > TP_TOL {
            return Err(Error::invalid(format!(
                "Kraus normalization defect {defect:.3e}"
            )));
        }
        let mut choi = ComplexMatrix::zeros(dim_in * dim_out, dim_in * dim_out);
        for k in ops {
            // vec of K in the (in, out) index split: v[(i,a)] = K[a][i]
            let v: Vec<C64> = (0..dim_in)
                .flat_map(|i| (0..dim_out).map(move |a| (i, a)))
                .map(|(i, a)| k[(a, i)])
                .collect();
            choi = choi.add(&ComplexMatrix::outer(&v, &v));
        }
        Self::from_choi(dim_in, dim_out, choi)
    }

    /// The unitary channel `rho -> U rho U†`.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_unitary(1e-9 * (1.0 + u.frobenius_norm())) {
            return Err(Error::invalid("matrix is not unitary"));
        }
        Self::from_kraus(std::slice::from_ref(u))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_unitary(&ComplexMatrix::identity(dim)).expect("identity channel")
    }

    /// Assemble the Choi matrix by applying a linear map to matrix units.
    /// The map must be linear; CPTP is verified on the result.
    pub fn from_map(
        dim_in: usize,
        dim_out: usize,
        mut map: impl FnMut(&ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        let n = dim_in * dim_out;
        let mut choi = ComplexMatrix::zeros(n, n);
        for i in 0..dim_in {
            for j in 0..dim_in {
                let mut unit = ComplexMatrix::zeros(dim_in, dim_in);
                unit[(i, j)] = C64::new(1.0, 0.0);
                let block = map(&unit);
                if block.rows() != dim_out || block.cols() != dim_out {
                    return Err(Error::invalid("map output dimension mismatch"));
                }
                for a in 0..dim_out {
                    for b in 0..dim_out {
                        choi[(i * dim_out + a, j * dim_out + b)] = block[(a, b)];
                    }
                }
            }
        }
        Self::from_choi(dim_in, dim_out, choi)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    fn choi_dims(&self) -> DimensionSpec {
        DimensionSpec::new(vec![self.dim_in, self.dim_out]).expect("positive dims")
    }

    /// Check `choi >= 0` (tol [`CP_TOL`]) and `tr_out(choi) = 1` (tol [`TP_TOL`]).
    pub fn verify_cptp(&self) -> Result<()> {
        if self.choi.rows() != self.dim_in * self.dim_out || !self.choi.is_square() {
            return Err(Error::invalid("Choi matrix dimension mismatch"));
        }
        if !self.choi.is_hermitian() {
            return Err(Error::invalid(format!(
                "Choi matrix not Hermitian (defect {:.3e})",
                self.choi.hermiticity_defect()
            )));
        }
        let min = linalg::min_eigenvalue(&self.choi)?;
        let tol = CP_TOL * (1.0 + self.choi.frobenius_norm());
        if min < -tol {
            return Err(Error::invalid(format!(
                "Choi matrix not PSD (min eigenvalue {min:.3e})"
            )));
        }
        let reduced = partial_trace(&self.choi, &self.choi_dims(), &[0])?;
        let defect = reduced
            .sub(&ComplexMatrix::identity(self.dim_in))
            .frobenius_norm();
        if defect > TP_TOL {
            return Err(Error::invalid(format!(
                "trace preservation defect {defect:.3e}"
            )));
        }
        Ok(())
    }

    /// Schroedinger action: `Phi(rho) = tr_in[(rho^T (x) 1) choi]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(Error::invalid(format!(
                "state is {}x{}, channel input is {}",
                rho.rows(),
                rho.cols(),
                self.dim_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for i in 0..self.dim_in {
            for j in 0..self.dim_in {
                let w = rho[(i, j)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for a in 0..self.dim_out {
                    for b in 0..self.dim_out {
                        out[(a, b)] += w * self.choi[(i * self.dim_out + a, j * self.dim_out + b)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Heisenberg dual: `Phi*(R) = [tr_out((1 (x) R) choi)]^T`, the unique map
    /// with `tr(Phi(rho) R) = tr(rho Phi*(R))`.
    pub fn dual_apply(&self, r: &ComplexMatrix) -> Result<ComplexMatrix> {
        if r.rows() != self.dim_out || r.cols() != self.dim_out {
            return Err(Error::invalid(format!(
                "observable is {}x{}, channel output is {}",
                r.rows(),
                r.cols(),
                self.dim_out
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for i in 0..self.dim_in {
            for j in 0..self.dim_in {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..self.dim_out {
                    for b in 0..self.dim_out {
                        // tr_out picks (a,b); transpose swaps (i,j)
                        acc += r[(b, a)] * self.choi[(j * self.dim_out + a, i * self.dim_out + b)];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    /// Sequential composition `self ∘ first` (apply `first`, then `self`).
    pub fn compose(&self, first: &Channel) -> Result<Channel> {
        if first.dim_out != self.dim_in {
            return Err(Error::invalid(format!(
                "composition dimension chain mismatch: {} -> {} then {} -> {}",
                first.dim_in, first.dim_out, self.dim_in, self.dim_out
            )));
        }
        Channel::from_map(first.dim_in, self.dim_out, |unit| {
            self.apply(&first.apply(unit).expect("dims checked"))
                .expect("dims checked")
        })
    }

    /// Parallel composition `self (x) other`.
    pub fn tensor(&self, other: &Channel) -> Result<Channel> {
        let k = kron(&self.choi, &other.choi);
        // factors of k: [in_a, out_a, in_b, out_b] -> [in_a, in_b, out_a, out_b]
        let dims = DimensionSpec::new(vec![
            self.dim_in,
            self.dim_out,
            other.dim_in,
            other.dim_out,
        ])?;
        let reordered = reorder_subsystems(&k, &dims, &[0, 2, 1, 3])?;
        Channel::from_choi(
            self.dim_in * other.dim_in,
            self.dim_out * other.dim_out,
            reordered,
        )
    }
}

/// Choi matrix of the measure-and-prepare map
/// `rho -> sum_{x,y} tr(rho H_{x,y}) prep_p[x] (x) prep_q[y]`
/// with `H` stored x-major: `choi = sum H^T (x) prep_p (x) prep_q`.
pub(crate) fn assemble_mp_choi(
    dim: usize,
    grid_ops: &[ComplexMatrix],
    preps_p: &[ComplexMatrix],
    preps_q: &[ComplexMatrix],
) -> ComplexMatrix {
    let d1 = preps_p[0].rows();
    let d2 = preps_q[0].rows();
    let n = dim * d1 * d2;
    let mut choi = ComplexMatrix::zeros(n, n);
    for (x, sp) in preps_p.iter().enumerate() {
        for (y, sq) in preps_q.iter().enumerate() {
            let h = &grid_ops[x * preps_q.len() + y];
            choi = choi.add(&kron(&kron(&h.transpose(), sp), sq));
        }
    }
    choi
}

/// Remark-3 style measure-and-prepare broadcaster: measure `G`, then prepare
/// the product of normalized projectors of `P` and `Q`.
///
/// `Phi(rho) = sum_{x,y} tr(rho G_{x,y}) (P_x/tr P_x) (x) (Q_y/tr Q_y)`,
/// which satisfies `Phi*(P_x (x) Q_y) = G_{x,y}` exactly.
pub fn measure_and_prepare_broadcaster(
    p: &DiscretePovm,
    q: &DiscretePovm,
    g: &JointPovm,
) -> Result<Channel> {
    let dim = g.dim();
    if p.dim() != dim || q.dim() != dim {
        return Err(Error::invalid("P, Q, G must share one Hilbert space"));
    }
    if !p.is_pvm(1e-9) || !q.is_pvm(1e-9) {
        return Err(Error::invalid("P and Q must be PVMs"));
    }
    if g.nx() != p.len() || g.ny() != q.len() {
        return Err(Error::invalid("G grid must match P x Q labels"));
    }
    let mut prep_p = Vec::with_capacity(p.len());
    for e in p.effects() {
        let t = e.trace().re;
        if t <= 1e-12 {
            return Err(Error::unsupported(
                "P has a zero effect; restrict to the support first",
            ));
        }
        prep_p.push(e.scale_re(1.0 / t));
    }
    let mut prep_q = Vec::with_capacity(q.len());
    for e in q.effects() {
        let t = e.trace().re;
        if t <= 1e-12 {
            return Err(Error::unsupported(
                "Q has a zero effect; restrict to the support first",
            ));
        }
        prep_q.push(e.scale_re(1.0 / t));
    }
    let choi = assemble_mp_choi(dim, g.effects(), &prep_p, &prep_q);
    Channel::from_choi(dim, dim * dim, choi)
}

/// Broadcaster realizing the canonical joint measurement of a PVM with
/// itself: copy the basis index of an eigenbasis adapted to `Q`.
///
/// The dual satisfies `Phi*(Q_a (x) Q_b) = delta_{ab} Q_a`.
pub fn self_joint_broadcaster(q: &DiscretePovm) -> Result<Channel> {
    if !q.is_pvm(1e-9) {
        return Err(Error::invalid("self-joint broadcaster needs a PVM"));
    }
    let dim = q.dim();
    // orthonormal basis adapted to the projections: eigenvectors of each Q_i
    // with eigenvalue 1
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for e in q.effects() {
        let eig = linalg::hermitian_eig(e)?;
        for (k, &v) in eig.values.iter().enumerate() {
            if v > 0.5 {
                basis.push(eig.vector(k));
            }
        }
    }
    if basis.len() != dim {
        return Err(Error::invalid("projections do not resolve the identity"));
    }
    let n = dim * dim * dim;
    let mut choi = ComplexMatrix::zeros(n, n);
    for b in &basis {
        let proj = ComplexMatrix::outer(b, b);
        let copy = kron(&proj, &proj);
        choi = choi.add(&kron(&proj.transpose(), &copy));
    }
    Channel::from_choi(dim, dim * dim, choi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::Label;

    fn dephasing() -> Channel {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let k0 = ComplexMatrix::identity(2).scale_re(s);
        let k1 = ComplexMatrix::diag(&[s, -s]);
        Channel::from_kraus(&[k0, k1]).unwrap()
    }

    #[test]
    fn unitary_channel_conjugates() {
        let x = crate::povm::bloch_dot(&[1.0, 0.0, 0.0]);
        let ch = Channel::from_unitary(&x).unwrap();
        let rho = ComplexMatrix::diag(&[1.0, 0.0]);
        let out = ch.apply(&rho).unwrap();
        assert!(out.sub(&ComplexMatrix::diag(&[0.0, 1.0])).frobenius_norm() <= 1e-12);
        // dual is U† R U
        let r = ComplexMatrix::diag(&[2.0, -1.0]);
        let dual = ch.dual_apply(&r).unwrap();
        let expect = x.dagger().mul(&r).mul(&x);
        assert!(dual.sub(&expect).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn replacement_channel_is_constant() {
        // Kraus {|0><0|, |0><1|} sends everything to |0><0|
        let mut k0 = ComplexMatrix::zeros(2, 2);
        k0[(0, 0)] = C64::new(1.0, 0.0);
        let mut k1 = ComplexMatrix::zeros(2, 2);
        k1[(0, 1)] = C64::new(1.0, 0.0);
        let ch = Channel::from_kraus(&[k0, k1]).unwrap();
        let target = ComplexMatrix::diag(&[1.0, 0.0]);
        for rho in [
            ComplexMatrix::diag(&[0.3, 0.7]),
            ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]),
        ] {
            let out = ch.apply(&rho).unwrap();
            assert!(out.sub(&target).frobenius_norm() <= 1e-12);
        }
        // dual of a constant-to-sigma channel: tr(sigma R) * I
        let r = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        let dual = ch.dual_apply(&r).unwrap();
        let expect = ComplexMatrix::identity(2).scale_re(target.hs_inner(&r).re);
        assert!(dual.sub(&expect).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn dephasing_kills_off_diagonals() {
        let ch = dephasing();
        let plus = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let out = ch.apply(&plus).unwrap();
        assert!(out.sub(&ComplexMatrix::identity(2).scale_re(0.5)).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn identity_channel_and_dual_unitality() {
        let ch = Channel::identity(3);
        let rho = ComplexMatrix::from_real(3, 3, &[0.4, 0.1, 0.0, 0.1, 0.3, 0.05, 0.0, 0.05, 0.3]);
        assert!(ch.apply(&rho).unwrap().sub(&rho).frobenius_norm() <= 1e-13);
        let dual_id = dephasing().dual_apply(&ComplexMatrix::identity(2)).unwrap();
        assert!(dual_id.sub(&ComplexMatrix::identity(2)).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn duality_identity_random_pairs() {
        let ch = dephasing();
        let mut state = 42u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..20 {
            let rho = ComplexMatrix::from_fn(2, 2, |_, _| C64::new(next(), next())).hermitian_part();
            let r = ComplexMatrix::from_fn(2, 2, |_, _| C64::new(next(), next())).hermitian_part();
            let lhs = ch.apply(&rho).unwrap().hs_inner(&r).re;
            let rhs = rho.hs_inner(&ch.dual_apply(&r).unwrap()).re;
            let scale = 1.0 + rho.frobenius_norm() * r.frobenius_norm();
            assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn apply_rejects_wrong_dims() {
        let ch = Channel::identity(2);
        assert!(ch.apply(&ComplexMatrix::identity(3)).is_err());
        assert!(ch.dual_apply(&ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn compose_and_tensor_agree_with_direct_action() {
        let x = crate::povm::bloch_dot(&[1.0, 0.0, 0.0]);
        let ux = Channel::from_unitary(&x).unwrap();
        let deph = dephasing();
        let seq = deph.compose(&ux).unwrap();
        let rho = ComplexMatrix::from_real(2, 2, &[0.8, 0.2, 0.2, 0.2]);
        let direct = deph.apply(&ux.apply(&rho).unwrap()).unwrap();
        assert!(seq.apply(&rho).unwrap().sub(&direct).frobenius_norm() <= 1e-12);

        // compose with identity leaves the Choi unchanged
        let same = Channel::identity(2).compose(&deph).unwrap();
        assert!(same.choi().sub(deph.choi()).frobenius_norm() <= 1e-12);

        // tensor of unitary channels is the channel of the tensor unitary
        let z = crate::povm::bloch_dot(&[0.0, 0.0, 1.0]);
        let uz = Channel::from_unitary(&z).unwrap();
        let t = ux.tensor(&uz).unwrap();
        let direct_t = Channel::from_unitary(&kron(&x, &z)).unwrap();
        assert!(t.choi().sub(direct_t.choi()).frobenius_norm() <= 1e-12);

        // dual of a composition = composition of duals in reverse order
        let r = ComplexMatrix::from_real(2, 2, &[1.0, 0.5, 0.5, -2.0]);
        let lhs = seq.dual_apply(&r).unwrap();
        let rhs = ux.dual_apply(&deph.dual_apply(&r).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn kraus_normalization_checked() {
        let k = ComplexMatrix::identity(2).scale_re(0.9);
        assert!(Channel::from_kraus(&[k]).is_err());
    }

    #[test]
    fn measure_and_prepare_reproduces_target_grid() {
        let p = DiscretePovm::computational_pvm(2);
        let fourier = ComplexMatrix::from_fn(2, 2, |m, k| {
            C64::from_polar(
                std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::PI * (m * k) as f64,
            )
        });
        let q = DiscretePovm::basis_pvm(&fourier).unwrap();

        // uniform trivial joint
        let quarter = ComplexMatrix::identity(2).scale_re(0.25);
        let g = JointPovm::new(
            2,
            p.labels().to_vec(),
            q.labels().to_vec(),
            vec![quarter.clone(), quarter.clone(), quarter.clone(), quarter],
        )
        .unwrap();
        let ch = measure_and_prepare_broadcaster(&p, &q, &g).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let target = kron(p.effect(x), q.effect(y));
                let got = ch.dual_apply(&target).unwrap();
                assert!(got.sub(g.effect(x, y)).frobenius_norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn measure_and_prepare_product_case() {
        // commuting product: G = P (x) P restricted to the same space needs
        // dim(G) = dim(P); use the canonical product joint P_x P_y instead
        let p = DiscretePovm::computational_pvm(2);
        let effects: Vec<ComplexMatrix> = (0..2)
            .flat_map(|x: usize| {
                let p = p.clone();
                (0..2).map(move |y: usize| {
                    if x == y {
                        p.effect(x).clone()
                    } else {
                        ComplexMatrix::zeros(2, 2)
                    }
                })
            })
            .collect();
        let g = JointPovm::new(2, p.labels().to_vec(), p.labels().to_vec(), effects).unwrap();
        let ch = measure_and_prepare_broadcaster(&p, &p, &g).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let got = ch.dual_apply(&kron(p.effect(x), p.effect(y))).unwrap();
                assert!(got.sub(g.effect(x, y)).frobenius_norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn measure_and_prepare_rejects_zero_effect() {
        // PVM with a zero effect on an enlarged label set
        let mut effects = vec![ComplexMatrix::zeros(2, 2); 3];
        effects[0] = ComplexMatrix::diag(&[1.0, 0.0]);
        effects[1] = ComplexMatrix::diag(&[0.0, 1.0]);
        let p = DiscretePovm::from_parts(2, (0..3).map(Label::from).collect(), effects).unwrap();
        let q = DiscretePovm::computational_pvm(2);
        let sixth = ComplexMatrix::identity(2).scale_re(1.0 / 6.0);
        let g = JointPovm::new(
            2,
            p.labels().to_vec(),
            q.labels().to_vec(),
            vec![sixth; 6],
        )
        .unwrap();
        match measure_and_prepare_broadcaster(&p, &q, &g) {
            Err(Error::UnsupportedInput(_)) => {}
            other => panic!("expected UnsupportedInput, got {other:?}"),
        }
    }

    #[test]
    fn self_joint_dual_grid() {
        let q = DiscretePovm::computational_pvm(2);
        let ch = self_joint_broadcaster(&q).unwrap();
        let d00 = ch.dual_apply(&kron(q.effect(0), q.effect(0))).unwrap();
        assert!(d00.sub(q.effect(0)).frobenius_norm() <= 1e-10);
        let d01 = ch.dual_apply(&kron(q.effect(0), q.effect(1))).unwrap();
        assert!(d01.frobenius_norm() <= 1e-10);
        let unital = ch.dual_apply(&ComplexMatrix::identity(4)).unwrap();
        assert!(unital.sub(&ComplexMatrix::identity(2)).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn self_joint_rank2_projections() {
        // PVM on dim 4 with two rank-2 projections
        let e0 = ComplexMatrix::diag(&[1.0, 1.0, 0.0, 0.0]);
        let e1 = ComplexMatrix::diag(&[0.0, 0.0, 1.0, 1.0]);
        let q = DiscretePovm::new(4, vec![0.into(), 1.into()], vec![e0, e1]).unwrap();
        let ch = self_joint_broadcaster(&q).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let got = ch.dual_apply(&kron(q.effect(a), q.effect(b))).unwrap();
                let expect = if a == b {
                    q.effect(a).clone()
                } else {
                    ComplexMatrix::zeros(4, 4)
                };
                assert!(got.sub(&expect).frobenius_norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn self_joint_rejects_non_pvm() {
        let trine: Vec<ComplexMatrix> = (0..3)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let v = [C64::new(th.cos(), 0.0), C64::new(th.sin(), 0.0)];
                ComplexMatrix::outer(&v, &v).scale_re(2.0 / 3.0)
            })
            .collect();
        let p = DiscretePovm::new(2, (0..3).map(Label::from).collect(), trine).unwrap();
        assert!(self_joint_broadcaster(&p).is_err());
    }

    #[test]
    fn channel_json_round_trip() {
        let ch = dephasing();
        let s = serde_json::to_string(&ch).unwrap();
        let back: Channel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, ch);
    }
}
