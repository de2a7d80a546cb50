//! Finite Weyl-Heisenberg systems on Z_D: position/momentum bases, shift,
//! boost and phased Weyl unitaries, covariant phase-space observables, the
//! controlled-coupling broadcasters for sharp and noisy position/momentum,
//! the tau-state characterization of covariant broadcastability, and channel
//! twirling over the finite displacement group.
//!
//! Phase convention: `W_{k,l} = s(k,l) U_k V_l` where the section `s` equals
//! `e^{i pi k l / D}` on the canonical representative of each `(k,l)`,
//! `(-k,-l)` pair and is completed on the partner so that
//! `W_{-k,-l} = W_{k,l}†` holds exactly. (No single closed formula satisfies
//! that identity on representatives for every D; the commutation relations
//! are phase-section independent, so the identities below are the arbiter.)
//!
//! Covariance checks conjugate by the two group generators only: conjugation
//! by `W_{g} W_{g'}` equals conjugation by `W_{g+g'}` because the multiplier
//! phase cancels, so generator invariance already implies invariance under
//! the whole group. A full-group sweep is available via
//! [`WeylSystem::is_channel_covariant`] with `full = true`.

use serde::{Deserialize, Serialize};

use crate::channel::{assemble_mp_choi, Channel};
use crate::error::{Error, Result};
use crate::feasibility::{verify_generation, FeasibilityReport, Verdict};
use crate::linalg::{
    self, kron, kron_all, C64, ComplexMatrix,
};
use crate::povm::{DiscretePovm, JointPovm, Label};

/// Precomputed dimension-D Weyl system.
#[derive(Debug, Clone)]
pub struct WeylSystem {
    d: usize,
    fourier: ComplexMatrix,
    parity: ComplexMatrix,
    shifts: Vec<ComplexMatrix>,
    boosts: Vec<ComplexMatrix>,
    weyl: Vec<ComplexMatrix>,
}

/// Result of inverting the covariant-broadcastability mixture equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum SolveTauOutcome {
    /// A state tau reproducing sigma through the weighted Weyl mixture.
    Solved { tau: ComplexMatrix },
    /// No tau exists: a zero-weight Fourier coefficient of sigma is nonzero,
    /// or the fully determined reconstruction fails positivity.
    Infeasible { reason: String },
    /// Free coefficients exist and the zero-completion fails positivity; the
    /// equation may or may not be solvable.
    Indeterminate { reason: String },
}

impl WeylSystem {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "dimension must be positive");
        let fourier = ComplexMatrix::from_fn(d, d, |m, n| {
            C64::from_polar(
                1.0 / (d as f64).sqrt(),
                2.0 * std::f64::consts::PI * ((m * n) % d) as f64 / d as f64,
            )
        });
        let mut parity = ComplexMatrix::zeros(d, d);
        for m in 0..d {
            parity[((d - m) % d, m)] = C64::new(1.0, 0.0);
        }
        let shifts: Vec<ComplexMatrix> = (0..d)
            .map(|k| {
                let mut u = ComplexMatrix::zeros(d, d);
                for m in 0..d {
                    u[((m + k) % d, m)] = C64::new(1.0, 0.0);
                }
                u
            })
            .collect();
        let boosts: Vec<ComplexMatrix> = (0..d)
            .map(|l| {
                let mut v = ComplexMatrix::zeros(d, d);
                for m in 0..d {
                    v[(m, m)] =
                        C64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((m * l) % d) as f64 / d as f64);
                }
                v
            })
            .collect();

        // phase section paired so that W(-k,-l) = W(k,l)†
        let mut phases: Vec<Option<C64>> = vec![None; d * d];
        for k in 0..d {
            for l in 0..d {
                if phases[k * d + l].is_some() {
                    continue;
                }
                let s = C64::from_polar(1.0, std::f64::consts::PI * (k * l) as f64 / d as f64);
                phases[k * d + l] = Some(s);
                let (pk, pl) = ((d - k) % d, (d - l) % d);
                if (pk, pl) != (k, l) {
                    let partner =
                        s.conj() * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * l) as f64 / d as f64);
                    phases[pk * d + pl] = Some(partner);
                }
            }
        }
        let weyl: Vec<ComplexMatrix> = (0..d * d)
            .map(|idx| {
                let (k, l) = (idx / d, idx % d);
                shifts[k].mul(&boosts[l]).scale(phases[idx].unwrap())
            })
            .collect();

        Self { d, fourier, parity, shifts, boosts, weyl }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Discrete Fourier matrix; its columns are the momentum basis.
    pub fn fourier(&self) -> &ComplexMatrix {
        &self.fourier
    }

    pub fn parity(&self) -> &ComplexMatrix {
        &self.parity
    }

    pub fn shift(&self, k: usize) -> &ComplexMatrix {
        &self.shifts[k % self.d]
    }

    pub fn boost(&self, l: usize) -> &ComplexMatrix {
        &self.boosts[l % self.d]
    }

    /// Phased Weyl unitary `W_{k,l}` (indices mod D).
    pub fn weyl(&self, k: usize, l: usize) -> &ComplexMatrix {
        &self.weyl[(k % self.d) * self.d + (l % self.d)]
    }

    /// Sharp position PVM (computational basis).
    pub fn position_pvm(&self) -> DiscretePovm {
        DiscretePovm::computational_pvm(self.d)
    }

    /// Sharp momentum PVM (Fourier basis).
    pub fn momentum_pvm(&self) -> DiscretePovm {
        DiscretePovm::basis_pvm(&self.fourier).expect("Fourier matrix is unitary")
    }

    /// Uniformly noisy position: `lambda Q + (1-lambda) T`.
    pub fn noisy_position_povm(&self, lambda: f64) -> Result<DiscretePovm> {
        self.position_pvm()
            .mix_with_noise(lambda, &vec![1.0 / self.d as f64; self.d])
    }

    /// Uniformly noisy momentum: `mu P + (1-mu) T`.
    pub fn noisy_momentum_povm(&self, mu: f64) -> Result<DiscretePovm> {
        self.momentum_pvm()
            .mix_with_noise(mu, &vec![1.0 / self.d as f64; self.d])
    }

    /// Diagonal part in the position basis.
    pub fn pinch_position(&self, a: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.d, self.d, |i, j| {
            if i == j {
                a[(i, i)]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Diagonal part in the momentum basis.
    pub fn pinch_momentum(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let fd = self.fourier.dagger();
        let in_momentum = fd.mul(a).mul(&self.fourier);
        self.fourier.mul(&self.pinch_position(&in_momentum)).mul(&fd)
    }

    fn check_state(&self, sigma: &ComplexMatrix) -> Result<()> {
        if sigma.rows() != self.d || sigma.cols() != self.d {
            return Err(Error::invalid("state dimension mismatch"));
        }
        if !sigma.is_hermitian() {
            return Err(Error::invalid("state is not Hermitian"));
        }
        if !linalg::is_psd(sigma, 1e-9)? {
            return Err(Error::invalid("state is not positive semidefinite"));
        }
        if (sigma.trace().re - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "state trace is {}, expected 1",
                sigma.trace().re
            )));
        }
        Ok(())
    }

    /// Covariant phase-space observable `G^sigma_{m,n} = (1/D) W_{m,n} sigma W_{m,n}†`.
    pub fn covariant_phase_povm(&self, sigma: &ComplexMatrix) -> Result<JointPovm> {
        self.check_state(sigma)?;
        let scale = 1.0 / self.d as f64;
        let mut effects = Vec::with_capacity(self.d * self.d);
        for m in 0..self.d {
            for n in 0..self.d {
                let w = self.weyl(m, n);
                effects.push(w.mul(sigma).mul(&w.dagger()).scale_re(scale).hermitian_part());
            }
        }
        JointPovm::new(
            self.d,
            (0..self.d).map(Label::from).collect(),
            (0..self.d).map(Label::from).collect(),
            effects,
        )
    }

    /// The coupling unitary `sum_k U_k (x) |phi_k><phi_k|`
    /// `= sum_l |psi_l><psi_l| (x) V_{-l}` (both forms agree).
    pub fn controlled_unitary(&self) -> ComplexMatrix {
        let d = self.d;
        let mut u = ComplexMatrix::zeros(d * d, d * d);
        for k in 0..d {
            // U_k on the first factor, |phi_k><phi_k| on the second
            for m in 0..d {
                u[(((m + k) % d) * d + k, m * d + k)] = C64::new(1.0, 0.0);
            }
        }
        u
    }

    /// Controlled-coupling broadcaster for sharp position and momentum:
    /// `Phi(rho) = U (P sigma^T P (x) rho) U†` whose dual maps
    /// `|phi_m><phi_m| (x) |psi_n><psi_n|` to `G^sigma_{m,n}`.
    pub fn standard_broadcaster(&self, sigma: &ComplexMatrix) -> Result<Channel> {
        self.check_state(sigma)?;
        self.coupling_channel(sigma)
    }

    fn coupling_channel(&self, sigma: &ComplexMatrix) -> Result<Channel> {
        let d = self.d;
        let u = self.controlled_unitary();
        let ancilla = self
            .parity
            .mul(&sigma.transpose())
            .mul(&self.parity)
            .hermitian_part();
        Channel::from_map(d, d * d, |unit| {
            u.mul(&kron(&ancilla, unit)).mul(&u.dagger())
        })
    }

    /// Operator of the noisy-broadcastability condition:
    /// `sigma - (1-mu) sigma^Q - (1-lambda) sigma^P + (1-lambda)(1-mu) 1/D`.
    pub fn noise_condition_operator(
        &self,
        sigma: &ComplexMatrix,
        lambda: f64,
        mu: f64,
    ) -> Result<ComplexMatrix> {
        self.check_state(sigma)?;
        if !(0.0 < lambda && lambda <= 1.0 && 0.0 < mu && mu <= 1.0) {
            return Err(Error::invalid("lambda, mu must lie in (0, 1]"));
        }
        let op = sigma
            .sub(&self.pinch_position(sigma).scale_re(1.0 - mu))
            .sub(&self.pinch_momentum(sigma).scale_re(1.0 - lambda))
            .add(
                &ComplexMatrix::identity(self.d)
                    .scale_re((1.0 - lambda) * (1.0 - mu) / self.d as f64),
            );
        Ok(op.hermitian_part())
    }

    /// Decide whether `G^sigma` can be generated from the uniformly noisy
    /// position/momentum pair; feasible verdicts ship the explicit
    /// noisy broadcaster as witness.
    pub fn cov_noise_condition(
        &self,
        sigma: &ComplexMatrix,
        lambda: f64,
        mu: f64,
    ) -> Result<FeasibilityReport> {
        let op = self.noise_condition_operator(sigma, lambda, mu)?;
        let min = linalg::min_eigenvalue(&op)?;
        let tol = 1e-9 * (1.0 + op.frobenius_norm());
        if min < -tol {
            return Ok(FeasibilityReport {
                verdict: Verdict::Infeasible,
                residual: f64::INFINITY,
                iterations: 0,
                certificate: Some(format!(
                    "noise condition operator has min eigenvalue {min:.6e}"
                )),
                witness: None,
            });
        }
        let witness = self.noisy_broadcaster(sigma, lambda, mu)?;
        let residual = verify_generation(
            &witness,
            &self.noisy_position_povm(lambda)?,
            &self.noisy_momentum_povm(mu)?,
            &self.covariant_phase_povm(sigma)?,
        )?;
        Ok(FeasibilityReport {
            verdict: Verdict::Feasible,
            residual,
            iterations: 0,
            certificate: None,
            witness: Some(witness),
        })
    }

    /// Broadcaster reaching `G^sigma` from the noisy pair `Q^lambda, P^mu`:
    /// the sharp coupling applied to the filtered ancilla state
    /// `sigma~ = (lambda mu)^-1 (sigma - (1-mu) sigma^Q - (1-lambda) sigma^P
    ///  + (1-lambda)(1-mu) 1/D)`.
    pub fn noisy_broadcaster(
        &self,
        sigma: &ComplexMatrix,
        lambda: f64,
        mu: f64,
    ) -> Result<Channel> {
        let op = self.noise_condition_operator(sigma, lambda, mu)?;
        let min = linalg::min_eigenvalue(&op)?;
        if min < -1e-9 * (1.0 + op.frobenius_norm()) {
            return Err(Error::precondition(format!(
                "noise condition violated (min eigenvalue {min:.6e})"
            )));
        }
        let mut tilde = linalg::psd_projection(&op)?.scale_re(1.0 / (lambda * mu));
        let tr = tilde.trace().re;
        tilde = tilde.scale_re(1.0 / tr);
        self.coupling_channel(&tilde)
    }

    /// Recompose sigma from the filtered ancilla state:
    /// `lambda mu s + lambda (1-mu) s^Q + (1-lambda) mu s^P + (1-lambda)(1-mu) 1/D`.
    pub fn noise_recomposition(
        &self,
        tilde: &ComplexMatrix,
        lambda: f64,
        mu: f64,
    ) -> ComplexMatrix {
        tilde
            .scale_re(lambda * mu)
            .add(&self.pinch_position(tilde).scale_re(lambda * (1.0 - mu)))
            .add(&self.pinch_momentum(tilde).scale_re((1.0 - lambda) * mu))
            .add(
                &ComplexMatrix::identity(self.d)
                    .scale_re((1.0 - lambda) * (1.0 - mu) / self.d as f64),
            )
    }

    /// Covariant measure-and-prepare channel attached to a state tau:
    /// `Phi(rho) = sum_{r,s} tr(rho G^tau_{r,s}) |phi_r><phi_r| (x) |psi_s><psi_s|`.
    pub fn covariant_channel_from_tau(&self, tau: &ComplexMatrix) -> Result<Channel> {
        self.check_state(tau)?;
        let g = self.covariant_phase_povm(tau)?;
        let pos = self.position_pvm();
        let mom = self.momentum_pvm();
        let choi = assemble_mp_choi(self.d, g.effects(), pos.effects(), mom.effects());
        Channel::from_choi(self.d, self.d * self.d, choi)
    }

    /// Generalized position POVM: `M_k = U_k diag(mu) U_k†`.
    pub fn generalized_position_povm(&self, muvec: &[f64]) -> Result<DiscretePovm> {
        let mu = crate::povm::check_probability_vector(muvec)?;
        if mu.len() != self.d {
            return Err(Error::invalid("distribution length must equal the dimension"));
        }
        let effects: Vec<ComplexMatrix> = (0..self.d)
            .map(|k| {
                ComplexMatrix::from_fn(self.d, self.d, |i, j| {
                    if i == j {
                        C64::new(mu[(i + self.d - k) % self.d], 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        DiscretePovm::new(self.d, (0..self.d).map(Label::from).collect(), effects)
    }

    /// Generalized momentum POVM: `N_l = V_l F diag(nu) F† V_l†`.
    pub fn generalized_momentum_povm(&self, nuvec: &[f64]) -> Result<DiscretePovm> {
        let nu = crate::povm::check_probability_vector(nuvec)?;
        if nu.len() != self.d {
            return Err(Error::invalid("distribution length must equal the dimension"));
        }
        let mom = self.momentum_pvm();
        let effects: Vec<ComplexMatrix> = (0..self.d)
            .map(|l| {
                let mut acc = ComplexMatrix::zeros(self.d, self.d);
                for (j, &w) in nu.iter().enumerate() {
                    acc = acc.add(&mom.effect((j + l) % self.d).scale_re(w));
                }
                acc
            })
            .collect();
        DiscretePovm::new(self.d, (0..self.d).map(Label::from).collect(), effects)
    }

    /// Weyl coefficient `tr(W_{k,l}† A)`.
    fn weyl_coefficient(&self, a: &ComplexMatrix, k: usize, l: usize) -> C64 {
        self.weyl(k, l).hs_inner(a)
    }

    /// Forward mixture `sum_{k,l} mu_k nu_l W_{k,l} tau W_{k,l}†`.
    pub fn weyl_mixture(
        &self,
        tau: &ComplexMatrix,
        muvec: &[f64],
        nuvec: &[f64],
    ) -> Result<ComplexMatrix> {
        if muvec.len() != self.d || nuvec.len() != self.d {
            return Err(Error::invalid("distribution length must equal the dimension"));
        }
        let mut acc = ComplexMatrix::zeros(self.d, self.d);
        for (k, &mk) in muvec.iter().enumerate() {
            for (l, &nl) in nuvec.iter().enumerate() {
                let w = self.weyl(k, l);
                acc = acc.add(&w.mul(tau).mul(&w.dagger()).scale_re(mk * nl));
            }
        }
        Ok(acc.hermitian_part())
    }

    /// Symplectic Fourier weight of the mixture map:
    /// conjugation by the weighted Weyl orbit is diagonal in the Weyl
    /// coefficient basis with weights
    /// `c(k,l) = sum_{r,s} mu_r nu_s e^{i omega(k,l;r,s)}`,
    /// `omega(k,l;r,s) = (2 pi / D)(k s - l r)`.
    pub fn symplectic_fourier_weight(&self, muvec: &[f64], nuvec: &[f64], k: usize, l: usize) -> C64 {
        let mut c = C64::new(0.0, 0.0);
        for (r, &mr) in muvec.iter().enumerate() {
            for (s, &ns) in nuvec.iter().enumerate() {
                let omega = 2.0 * std::f64::consts::PI
                    * ((k * s) as f64 - (l * r) as f64)
                    / self.d as f64;
                c += C64::from_polar(mr * ns, omega);
            }
        }
        c
    }

    /// Invert `sigma = sum mu_k nu_l W_{k,l} tau W_{k,l}†` for tau.
    ///
    /// Divides Weyl coefficients by the symplectic Fourier weights where they
    /// are nonzero; zero-weight coefficients of sigma must vanish. Free
    /// coefficients (zero weight, zero sigma coefficient) are completed with
    /// zero, and a positivity failure is then only `Indeterminate`.
    pub fn solve_tau(
        &self,
        sigma: &ComplexMatrix,
        muvec: &[f64],
        nuvec: &[f64],
    ) -> Result<SolveTauOutcome> {
        self.check_state(sigma)?;
        let mu = crate::povm::check_probability_vector(muvec)?;
        let nu = crate::povm::check_probability_vector(nuvec)?;
        if mu.len() != self.d || nu.len() != self.d {
            return Err(Error::invalid("distribution length must equal the dimension"));
        }
        let mut tau = ComplexMatrix::zeros(self.d, self.d);
        let mut free = 0usize;
        for k in 0..self.d {
            for l in 0..self.d {
                let c = self.symplectic_fourier_weight(&mu, &nu, k, l);
                let coeff_sigma = self.weyl_coefficient(sigma, k, l);
                if c.norm() > 1e-12 {
                    let coeff_tau = coeff_sigma / c;
                    tau = tau.add(&self.weyl(k, l).scale(coeff_tau / C64::new(self.d as f64, 0.0)));
                } else if coeff_sigma.norm() > 1e-10 {
                    return Ok(SolveTauOutcome::Infeasible {
                        reason: format!(
                            "Fourier weight at ({k},{l}) vanishes but sigma has coefficient \
                             of magnitude {:.3e} there",
                            coeff_sigma.norm()
                        ),
                    });
                } else {
                    free += 1;
                }
            }
        }
        let tau = tau.hermitian_part();
        let min = linalg::min_eigenvalue(&tau)?;
        let tol = 1e-9 * (1.0 + tau.frobenius_norm());
        if min < -tol {
            let reason = format!("reconstructed tau has min eigenvalue {min:.6e}");
            if free > 0 {
                return Ok(SolveTauOutcome::Indeterminate {
                    reason: format!("{reason} with {free} free coefficients set to zero"),
                });
            }
            return Ok(SolveTauOutcome::Infeasible { reason });
        }
        if (tau.trace().re - 1.0).abs() > 1e-9 {
            return Ok(SolveTauOutcome::Infeasible {
                reason: format!("reconstructed tau has trace {}", tau.trace().re),
            });
        }
        Ok(SolveTauOutcome::Solved { tau })
    }

    /// Conjugation unitary `conj(W_g) (x) W_g (x) W_g` acting on a
    /// broadcaster's Choi matrix.
    fn twirl_conjugator(&self, k: usize, l: usize) -> ComplexMatrix {
        let w = self.weyl(k, l);
        kron_all(&[&w.conj(), w, w])
    }

    /// Average a D -> D*D channel over the displacement group so the result
    /// is (W, W (x) W)-covariant; covariant inputs are fixed points.
    pub fn twirl_channel(&self, phi: &Channel) -> Result<Channel> {
        let d = self.d;
        if phi.dim_in() != d || phi.dim_out() != d * d {
            return Err(Error::invalid(format!(
                "twirl needs a {d} -> {} broadcaster",
                d * d
            )));
        }
        let n = d * d * d;
        let mut acc = ComplexMatrix::zeros(n, n);
        for k in 0..d {
            for l in 0..d {
                let m = self.twirl_conjugator(k, l);
                acc = acc.add(&m.mul(phi.choi()).mul(&m.dagger()));
            }
        }
        Channel::from_choi(d, d * d, acc.scale_re(1.0 / (d * d) as f64).hermitian_part())
    }

    /// Covariance of a broadcaster under `(W, W (x) W)`, by conjugation
    /// invariance of the Choi matrix. Generators suffice (see module docs);
    /// `full` sweeps every group element instead.
    pub fn is_channel_covariant(&self, phi: &Channel, full: bool) -> Result<bool> {
        if phi.dim_in() != self.d || phi.dim_out() != self.d * self.d {
            return Err(Error::invalid("covariance check needs a D -> D*D broadcaster"));
        }
        let tol = 1e-10 * (1.0 + phi.choi().frobenius_norm());
        let gens: Vec<(usize, usize)> = if full {
            (0..self.d)
                .flat_map(|k| (0..self.d).map(move |l| (k, l)))
                .collect()
        } else {
            vec![(1 % self.d, 0), (0, 1 % self.d)]
        };
        for (k, l) in gens {
            let m = self.twirl_conjugator(k, l);
            let moved = m.mul(phi.choi()).mul(&m.dagger());
            if moved.sub(phi.choi()).frobenius_norm() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Covariance of a POVM family under phase-space translations:
    /// `W_{m,n} E_k W_{m,n}† = E_{k + m*dx + n*dy}` for the generators.
    fn is_family_covariant(
        &self,
        effects: &[ComplexMatrix],
        index_of: impl Fn(usize, usize, usize) -> usize,
    ) -> bool {
        let tol = 1e-9;
        for (gen_k, gen_l) in [(1usize, 0usize), (0, 1)] {
            let w = self.weyl(gen_k, gen_l);
            for (idx, e) in effects.iter().enumerate() {
                let moved = w.mul(e).mul(&w.dagger());
                let target = index_of(idx, gen_k, gen_l);
                if moved.sub(&effects[target]).frobenius_norm() > tol * (1.0 + e.frobenius_norm()) {
                    return false;
                }
            }
        }
        true
    }

    /// Single-cell generation criterion for covariant triples: a covariant
    /// channel generates the covariant `G` from covariant `M`, `N` iff it does
    /// so at the origin cell. Errors when any input lacks the covariance.
    pub fn covariant_reduction_check(
        &self,
        phi: &Channel,
        m: &DiscretePovm,
        n: &DiscretePovm,
        g: &JointPovm,
    ) -> Result<bool> {
        let d = self.d;
        if m.len() != d || n.len() != d || g.nx() != d || g.ny() != d || g.dim() != d {
            return Err(Error::invalid("covariant families must be indexed by Z_D"));
        }
        if !self.is_channel_covariant(phi, false)? {
            return Err(Error::precondition("channel is not (W, W x W)-covariant"));
        }
        // position-type family: index k -> k + shift of the first group slot
        if !self.is_family_covariant(m.effects(), |k, gk, _| (k + gk) % d) {
            return Err(Error::precondition("M is not a covariant position family"));
        }
        if !self.is_family_covariant(n.effects(), |l, _, gl| (l + gl) % d) {
            return Err(Error::precondition("N is not a covariant momentum family"));
        }
        let joint_effects = g.effects();
        if !self.is_family_covariant(joint_effects, |idx, gk, gl| {
            let (x, y) = (idx / d, idx % d);
            ((x + gk) % d) * d + (y + gl) % d
        }) {
            return Err(Error::precondition("G is not a covariant joint family"));
        }
        let got = phi.dual_apply(&kron(m.effect(0), n.effect(0)))?;
        Ok(got.sub(g.effect(0, 0)).frobenius_norm() <= 1e-9 * (1.0 + g.effect(0, 0).frobenius_norm()))
    }
}
