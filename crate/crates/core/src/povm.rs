//! Discrete POVMs, PVMs, margins, noise mixing and Markov-kernel
//! post-processing.
//!
//! Outcome labels are ordered and every sum iterates in label order, so all
//! floating-point results are reproducible. Validation is report-valued: a
//! caller gets every violated invariant with its numeric margin instead of
//! the first failure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kron, C64, ComplexMatrix, PSD_TOL};

/// Probability vectors may be off by this much from normalization.
pub const PROB_TOL: f64 = 1e-12;
/// Frobenius tolerance for the completeness sum of a POVM.
pub const SUM_TOL: f64 = 1e-9;

/// Outcome label: an integer, a string, or an ordered pair (for joint grids).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Int(i64),
    Str(String),
    Pair(Box<Label>, Box<Label>),
}

impl Label {
    pub fn pair(x: Label, y: Label) -> Self {
        Label::Pair(Box::new(x), Box::new(y))
    }

    pub fn int(v: i64) -> Self {
        Label::Int(v)
    }
}

impl From<i64> for Label {
    fn from(v: i64) -> Self {
        Label::Int(v)
    }
}

impl From<i32> for Label {
    fn from(v: i32) -> Self {
        Label::Int(v as i64)
    }
}

impl From<usize> for Label {
    fn from(v: usize) -> Self {
        Label::Int(v as i64)
    }
}

impl From<&str> for Label {
    fn from(v: &str) -> Self {
        Label::Str(v.to_string())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(v) => write!(f, "{v}"),
            Label::Str(s) => write!(f, "{s}"),
            Label::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Label::Int(v) => s.serialize_i64(*v),
            Label::Str(t) => s.serialize_str(t),
            Label::Pair(a, b) => (a, b).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        fn conv<E: serde::de::Error>(v: &serde_json::Value) -> std::result::Result<Label, E> {
            match v {
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(Label::Int)
                    .ok_or_else(|| E::custom("label numbers must be integers")),
                serde_json::Value::String(s) => Ok(Label::Str(s.clone())),
                serde_json::Value::Array(items) if items.len() == 2 => Ok(Label::pair(
                    conv(&items[0])?,
                    conv(&items[1])?,
                )),
                _ => Err(E::custom("label must be an integer, a string or a pair")),
            }
        }
        conv(&v)
    }
}

/// One invariant violation with its numeric margin.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub what: String,
    pub margin: f64,
}

/// Result of validating a POVM; empty `violations` means valid.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.is_valid() {
            "valid".to_string()
        } else {
            self.violations
                .iter()
                .map(|v| format!("{} (margin {:.3e})", v.what, v.margin))
                .collect::<Vec<_>>()
                .join("; ")
        }
    }
}

/// Finite outcome-labeled family of positive operators summing to identity.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePovm {
    dim: usize,
    labels: Vec<Label>,
    effects: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct OutcomeJson {
    label: Label,
    effect: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct PovmJson {
    dim: usize,
    outcomes: Vec<OutcomeJson>,
}

impl Serialize for DiscretePovm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PovmJson {
            dim: self.dim,
            outcomes: self
                .labels
                .iter()
                .zip(&self.effects)
                .map(|(l, e)| OutcomeJson { label: l.clone(), effect: e.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscretePovm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = PovmJson::deserialize(d)?;
        let labels = j.outcomes.iter().map(|o| o.label.clone()).collect();
        let effects = j.outcomes.into_iter().map(|o| o.effect).collect();
        DiscretePovm::new(j.dim, labels, effects).map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl DiscretePovm {
    /// Construct and validate. Fails with the full violation summary.
    pub fn new(dim: usize, labels: Vec<Label>, effects: Vec<ComplexMatrix>) -> Result<Self> {
        let povm = Self::from_parts(dim, labels, effects)?;
        let report = povm.validate();
        if !report.is_valid() {
            return Err(Error::invalid(format!("POVM invalid: {}", report.summary())));
        }
        Ok(povm)
    }

    /// Construct checking only structure (shapes, label distinctness), not
    /// positivity or completeness. Used by loaders that want a report.
    pub fn from_parts(dim: usize, labels: Vec<Label>, effects: Vec<ComplexMatrix>) -> Result<Self> {
        if labels.len() != effects.len() {
            return Err(Error::invalid("label/effect count mismatch"));
        }
        if labels.is_empty() {
            return Err(Error::invalid("POVM needs at least one outcome"));
        }
        for e in &effects {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::invalid(format!(
                    "effect is {}x{}, expected {dim}x{dim}",
                    e.rows(),
                    e.cols()
                )));
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::invalid(format!("duplicate outcome label {l}")));
            }
        }
        Ok(Self { dim, labels, effects })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, i: usize) -> &ComplexMatrix {
        &self.effects[i]
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Report of all violated invariants with numeric margins.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for (l, e) in self.labels.iter().zip(&self.effects) {
            let hd = e.hermiticity_defect();
            if hd > linalg::HERM_TOL * (1.0 + e.max_abs()) {
                violations.push(Violation {
                    what: format!("effect {l} not Hermitian"),
                    margin: hd,
                });
                continue;
            }
            match linalg::min_eigenvalue(e) {
                Ok(min) => {
                    let tol = PSD_TOL * (1.0 + e.frobenius_norm());
                    if min < -tol {
                        violations.push(Violation {
                            what: format!("effect {l} not PSD"),
                            margin: min,
                        });
                    }
                }
                Err(err) => violations.push(Violation {
                    what: format!("effect {l}: {err}"),
                    margin: f64::NAN,
                }),
            }
            sum = sum.add(e);
        }
        let defect = sum.sub(&ComplexMatrix::identity(self.dim)).frobenius_norm();
        if defect > SUM_TOL {
            violations.push(Violation {
                what: "effects do not sum to identity".to_string(),
                margin: defect,
            });
        }
        ValidationReport { violations }
    }

    /// True when every effect is an orthogonal projection and completeness holds.
    pub fn is_pvm(&self, tol: f64) -> bool {
        self.validate().is_valid()
            && self.effects.iter().all(|e| e.mul(e).sub(e).frobenius_norm() <= tol)
    }

    /// The PVM onto the computational basis of dimension `dim`.
    pub fn computational_pvm(dim: usize) -> Self {
        let labels = (0..dim).map(Label::from).collect();
        let effects = (0..dim)
            .map(|k| {
                let mut e = ComplexMatrix::zeros(dim, dim);
                e[(k, k)] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        Self { dim, labels, effects }
    }

    /// The PVM whose projectors are onto the columns of a unitary.
    pub fn basis_pvm(basis: &ComplexMatrix) -> Result<Self> {
        if !basis.is_unitary(1e-9 * (1.0 + basis.frobenius_norm())) {
            return Err(Error::invalid("basis is not unitary"));
        }
        let dim = basis.rows();
        let labels = (0..dim).map(Label::from).collect();
        let effects = (0..dim)
            .map(|k| {
                let col: Vec<C64> = (0..dim).map(|i| basis[(i, k)]).collect();
                ComplexMatrix::outer(&col, &col)
            })
            .collect();
        Ok(Self { dim, labels, effects })
    }

    /// Trivial observable: effects `p_x * I`.
    pub fn trivial(dim: usize, labels: Vec<Label>, probs: &[f64]) -> Result<Self> {
        check_probability_vector(probs)?;
        if labels.len() != probs.len() {
            return Err(Error::invalid("label/probability count mismatch"));
        }
        let effects = probs
            .iter()
            .map(|&p| ComplexMatrix::identity(dim).scale_re(p))
            .collect();
        Self::new(dim, labels, effects)
    }

    /// Effect-wise convex mixture with coloured noise:
    /// `lambda * P_x + (1 - lambda) * p_x * I`.
    pub fn mix_with_noise(&self, lambda: f64, p: &[f64]) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid("lambda must lie in [0,1]"));
        }
        if p.len() != self.len() {
            return Err(Error::invalid("noise vector length mismatch"));
        }
        let p = check_probability_vector(p)?;
        let effects = self
            .effects
            .iter()
            .zip(&p)
            .map(|(e, &px)| {
                e.scale_re(lambda)
                    .add(&ComplexMatrix::identity(self.dim).scale_re((1.0 - lambda) * px))
            })
            .collect();
        Self::new(self.dim, self.labels.clone(), effects)
    }

    /// Post-process through a Markov kernel: `beta[M]_z = sum_x beta(z|x) M_x`.
    pub fn post_process(&self, beta: &MarkovKernel) -> Result<Self> {
        if beta.source() != self.labels() {
            return Err(Error::invalid("kernel source labels do not match POVM labels"));
        }
        let effects: Vec<ComplexMatrix> = (0..beta.target().len())
            .map(|z| {
                let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
                for (x, e) in self.effects.iter().enumerate() {
                    let w = beta.weight(x, z);
                    if w != 0.0 {
                        acc = acc.add(&e.scale_re(w));
                    }
                }
                acc
            })
            .collect();
        Self::new(self.dim, beta.target().to_vec(), effects)
    }
}

/// Clamp tiny negative entries and verify normalization; returns the cleaned vector.
pub fn check_probability_vector(p: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(p.len());
    for &x in p {
        if x < -1e-14 {
            return Err(Error::invalid(format!("negative probability {x}")));
        }
        out.push(x.max(0.0));
    }
    let s: f64 = out.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::invalid(format!("probabilities sum to {s}, not 1")));
    }
    Ok(out)
}

/// A POVM on a full product grid X x Y, stored x-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPovm {
    dim: usize,
    x_labels: Vec<Label>,
    y_labels: Vec<Label>,
    /// effects[x * |Y| + y]
    effects: Vec<ComplexMatrix>,
}

impl JointPovm {
    pub fn new(
        dim: usize,
        x_labels: Vec<Label>,
        y_labels: Vec<Label>,
        effects: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if effects.len() != x_labels.len() * y_labels.len() {
            return Err(Error::invalid("joint POVM needs one effect per grid cell"));
        }
        let joint = Self { dim, x_labels, y_labels, effects };
        let report = joint.as_discrete().validate();
        if !report.is_valid() {
            return Err(Error::invalid(format!("joint POVM invalid: {}", report.summary())));
        }
        Ok(joint)
    }

    /// Reinterpret a pair-labeled discrete POVM as a joint POVM; the labels
    /// must form a full product grid.
    pub fn from_discrete(povm: &DiscretePovm) -> Result<Self> {
        let mut x_labels: Vec<Label> = Vec::new();
        let mut y_labels: Vec<Label> = Vec::new();
        for l in povm.labels() {
            let Label::Pair(a, b) = l else {
                return Err(Error::invalid(format!("label {l} is not a pair")));
            };
            if !x_labels.contains(a) {
                x_labels.push((**a).clone());
            }
            if !y_labels.contains(b) {
                y_labels.push((**b).clone());
            }
        }
        if x_labels.len() * y_labels.len() != povm.len() {
            return Err(Error::invalid("labels do not form a full product grid"));
        }
        let mut effects = Vec::with_capacity(povm.len());
        for x in &x_labels {
            for y in &y_labels {
                let want = Label::pair(x.clone(), y.clone());
                let idx = povm
                    .position(&want)
                    .ok_or_else(|| Error::invalid(format!("grid cell {want} missing")))?;
                effects.push(povm.effect(idx).clone());
            }
        }
        Ok(Self {
            dim: povm.dim(),
            x_labels,
            y_labels,
            effects,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x_labels(&self) -> &[Label] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[Label] {
        &self.y_labels
    }

    pub fn nx(&self) -> usize {
        self.x_labels.len()
    }

    pub fn ny(&self) -> usize {
        self.y_labels.len()
    }

    pub fn effect(&self, x: usize, y: usize) -> &ComplexMatrix {
        &self.effects[x * self.y_labels.len() + y]
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    /// View as a pair-labeled discrete POVM (clones the effects).
    pub fn as_discrete(&self) -> DiscretePovm {
        let mut labels = Vec::with_capacity(self.effects.len());
        for x in &self.x_labels {
            for y in &self.y_labels {
                labels.push(Label::pair(x.clone(), y.clone()));
            }
        }
        DiscretePovm {
            dim: self.dim,
            labels,
            effects: self.effects.clone(),
        }
    }

    /// Margins: first sums over y, second over x.
    pub fn margins(&self) -> (DiscretePovm, DiscretePovm) {
        let first: Vec<ComplexMatrix> = (0..self.nx())
            .map(|x| {
                let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
                for y in 0..self.ny() {
                    acc = acc.add(self.effect(x, y));
                }
                acc
            })
            .collect();
        let second: Vec<ComplexMatrix> = (0..self.ny())
            .map(|y| {
                let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
                for x in 0..self.nx() {
                    acc = acc.add(self.effect(x, y));
                }
                acc
            })
            .collect();
        (
            DiscretePovm {
                dim: self.dim,
                labels: self.x_labels.clone(),
                effects: first,
            },
            DiscretePovm {
                dim: self.dim,
                labels: self.y_labels.clone(),
                effects: second,
            },
        )
    }
}

impl<'de> Deserialize<'de> for JointPovm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let povm = DiscretePovm::deserialize(d)?;
        JointPovm::from_discrete(&povm).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Product POVM: effects `kron(M_x, N_y)` on the label grid.
pub fn tensor_povm(m: &DiscretePovm, n: &DiscretePovm) -> JointPovm {
    let mut effects = Vec::with_capacity(m.len() * n.len());
    for em in m.effects() {
        for en in n.effects() {
            effects.push(kron(em, en));
        }
    }
    JointPovm {
        dim: m.dim() * n.dim(),
        x_labels: m.labels().to_vec(),
        y_labels: n.labels().to_vec(),
        effects,
    }
}

/// Row-stochastic relabeling weights: `weights[x][z] = beta(z | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel {
    source: Vec<Label>,
    target: Vec<Label>,
    weights: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct KernelJson {
    source: Vec<Label>,
    target: Vec<Label>,
    weights: Vec<Vec<f64>>,
}

impl Serialize for MarkovKernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KernelJson {
            source: self.source.clone(),
            target: self.target.clone(),
            weights: self.weights.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MarkovKernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = KernelJson::deserialize(d)?;
        MarkovKernel::new(j.source, j.target, j.weights).map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl MarkovKernel {
    pub fn new(source: Vec<Label>, target: Vec<Label>, weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.len() != source.len() {
            return Err(Error::invalid("kernel needs one weight row per source label"));
        }
        for row in &weights {
            if row.len() != target.len() {
                return Err(Error::invalid("kernel row length must match target labels"));
            }
            for &w in row {
                if !(-1e-14..=1.0 + 1e-12).contains(&w) {
                    return Err(Error::invalid(format!("kernel weight {w} outside [0,1]")));
                }
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > PROB_TOL {
                return Err(Error::invalid(format!("kernel row sums to {s}, not 1")));
            }
        }
        Ok(Self { source, target, weights })
    }

    pub fn source(&self) -> &[Label] {
        &self.source
    }

    pub fn target(&self) -> &[Label] {
        &self.target
    }

    pub fn weight(&self, x: usize, z: usize) -> f64 {
        self.weights[x][z]
    }

    /// Identity relabeling on the given labels.
    pub fn identity(labels: &[Label]) -> Self {
        let n = labels.len();
        let weights = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            source: labels.to_vec(),
            target: labels.to_vec(),
            weights,
        }
    }

    /// Deterministic kernel induced by a label map `f: source -> target`.
    pub fn deterministic(
        source: &[Label],
        target: &[Label],
        f: impl Fn(&Label) -> Label,
    ) -> Result<Self> {
        let weights = source
            .iter()
            .map(|x| {
                let fx = f(x);
                let pos = target
                    .iter()
                    .position(|t| *t == fx)
                    .ok_or_else(|| Error::invalid(format!("mapped label {fx} not in target")))?;
                Ok((0..target.len()).map(|j| if j == pos { 1.0 } else { 0.0 }).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Self {
            source: source.to_vec(),
            target: target.to_vec(),
            weights,
        })
    }

    /// Kernel composition `(beta * alpha)(z|x) = sum_y beta(z|y) alpha(y|x)`;
    /// `self` is the outer (later) kernel.
    pub fn compose(&self, alpha: &MarkovKernel) -> Result<MarkovKernel> {
        if self.source != alpha.target {
            return Err(Error::invalid("kernel composition label mismatch"));
        }
        let weights = (0..alpha.source.len())
            .map(|x| {
                (0..self.target.len())
                    .map(|z| {
                        (0..alpha.target.len())
                            .map(|y| self.weights[y][z] * alpha.weights[x][y])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        MarkovKernel::new(alpha.source.clone(), self.target.clone(), weights)
    }

    /// Product kernel on label grids: `(beta1 x beta2)((z,w)|(x,y)) = beta1(z|x) beta2(w|y)`.
    pub fn product(beta1: &MarkovKernel, beta2: &MarkovKernel) -> MarkovKernel {
        let mut source = Vec::new();
        for x in &beta1.source {
            for y in &beta2.source {
                source.push(Label::pair(x.clone(), y.clone()));
            }
        }
        let mut target = Vec::new();
        for z in &beta1.target {
            for w in &beta2.target {
                target.push(Label::pair(z.clone(), w.clone()));
            }
        }
        let mut weights = Vec::with_capacity(source.len());
        for r1 in &beta1.weights {
            for r2 in &beta2.weights {
                let mut row = Vec::with_capacity(target.len());
                for &a in r1 {
                    for &b in r2 {
                        row.push(a * b);
                    }
                }
                weights.push(row);
            }
        }
        MarkovKernel { source, target, weights }
    }
}

/// Binary qubit observable in Bloch form: effects
/// `a*I + avec.sigma` and `(1-a)*I - avec.sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochObservable {
    pub bias: f64,
    pub avec: [f64; 3],
}

pub(crate) fn pauli(k: usize) -> ComplexMatrix {
    match k {
        0 => ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        1 => ComplexMatrix::from_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        ),
        2 => ComplexMatrix::diag(&[1.0, -1.0]),
        _ => panic!("pauli index out of range"),
    }
}

/// `v . sigma` for a real 3-vector.
pub fn bloch_dot(v: &[f64; 3]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(2, 2);
    for k in 0..3 {
        acc = acc.add(&pauli(k).scale_re(v[k]));
    }
    acc
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl BlochObservable {
    pub fn new(bias: f64, avec: [f64; 3]) -> Result<Self> {
        if !(0.0..=1.0).contains(&bias) {
            return Err(Error::invalid("bias must lie in [0,1]"));
        }
        let n = norm3(&avec);
        let cap = bias.min(1.0 - bias);
        if n > cap + 1e-12 {
            return Err(Error::invalid(format!(
                "|avec| = {n} exceeds min(a, 1-a) = {cap}"
            )));
        }
        Ok(Self { bias, avec })
    }

    /// Unbiased observable of sharpness `s` along a unit direction.
    pub fn unbiased(sharpness: f64, direction: [f64; 3]) -> Result<Self> {
        let n = norm3(&direction);
        if n == 0.0 {
            return Self::new(0.5, [0.0; 3]);
        }
        let v = [
            0.5 * sharpness * direction[0] / n,
            0.5 * sharpness * direction[1] / n,
            0.5 * sharpness * direction[2] / n,
        ];
        Self::new(0.5, v)
    }

    pub fn sharpness(&self) -> f64 {
        2.0 * norm3(&self.avec)
    }

    /// The induced binary POVM with labels `+`, `-`.
    pub fn to_povm(&self) -> Result<DiscretePovm> {
        let plus = ComplexMatrix::identity(2)
            .scale_re(self.bias)
            .add(&bloch_dot(&self.avec));
        let minus = ComplexMatrix::identity(2)
            .scale_re(1.0 - self.bias)
            .sub(&bloch_dot(&self.avec));
        DiscretePovm::new(2, vec!["+".into(), "-".into()], vec![plus, minus])
    }

    /// Inverse of [`BlochObservable::to_povm`] for binary qubit POVMs.
    pub fn from_povm(povm: &DiscretePovm) -> Result<Self> {
        if povm.dim() != 2 || povm.len() != 2 {
            return Err(Error::invalid("expected a binary qubit POVM"));
        }
        let plus = povm.effect(0);
        let bias = plus.trace().re / 2.0;
        let mut avec = [0.0; 3];
        for k in 0..3 {
            avec[k] = plus.hs_inner(&pauli(k)).re / 2.0;
        }
        Self::new(bias, avec)
    }
}

/// Decompose each effect of binary qubit POVM `R` as in the biased-noise
/// framework: `R = lambda * Rsharp + (1 - lambda) * T` with `T` coloured noise.
/// Returns `(Rsharp, lambda, noise_probs)`.
pub fn bloch_decompose(obs: &BlochObservable) -> Result<(DiscretePovm, f64, [f64; 2])> {
    let lambda = obs.sharpness();
    let n = norm3(&obs.avec);
    let hat = if n > 0.0 {
        [obs.avec[0] / n, obs.avec[1] / n, obs.avec[2] / n]
    } else {
        [0.0, 0.0, 1.0]
    };
    let half = [hat[0] / 2.0, hat[1] / 2.0, hat[2] / 2.0];
    let sharp = BlochObservable::new(0.5, half)?.to_povm()?;
    let u = 2.0 * obs.bias - 1.0;
    let probs = if lambda >= 1.0 - 1e-15 {
        [0.5, 0.5]
    } else {
        [
            0.5 * (1.0 - lambda + u) / (1.0 - lambda),
            0.5 * (1.0 - lambda - u) / (1.0 - lambda),
        ]
    };
    Ok((sharp, lambda, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::partial_trace;
    use crate::linalg::DimensionSpec;

    #[test]
    fn computational_pvm_valid() {
        let p = DiscretePovm::computational_pvm(3);
        assert!(p.validate().is_valid());
        assert!(p.is_pvm(1e-12));
    }

    #[test]
    fn double_identity_invalid() {
        let i2 = ComplexMatrix::identity(2);
        let p = DiscretePovm::from_parts(2, vec![0.into(), 1.into()], vec![i2.clone(), i2]).unwrap();
        let report = p.validate();
        assert!(!report.is_valid());
        assert!(report.summary().contains("sum"));
    }

    #[test]
    fn trine_povm_valid() {
        // (2/3)|psi_k><psi_k| at 120 degree spacings resolves the identity
        let effects: Vec<ComplexMatrix> = (0..3)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let v = [C64::new(th.cos(), 0.0), C64::new(th.sin(), 0.0)];
                ComplexMatrix::outer(&v, &v).scale_re(2.0 / 3.0)
            })
            .collect();
        let p = DiscretePovm::new(2, (0..3).map(Label::from).collect(), effects).unwrap();
        assert!(p.validate().is_valid());
        assert!(!p.is_pvm(1e-12));
    }

    #[test]
    fn margins_of_tensor_are_factors() {
        let m = DiscretePovm::computational_pvm(2);
        let trine: Vec<ComplexMatrix> = (0..3)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let v = [C64::new(th.cos(), 0.0), C64::new(th.sin(), 0.0)];
                ComplexMatrix::outer(&v, &v).scale_re(2.0 / 3.0)
            })
            .collect();
        let n = DiscretePovm::new(2, (0..3).map(Label::from).collect(), trine).unwrap();
        let g = tensor_povm(&m, &n);
        let (gm, gn) = g.margins();
        // margins of M (x) N live on dim 4 and recover tr-weighted factors:
        // sum_y kron(M_x, N_y) = kron(M_x, I)
        for (x, e) in gm.effects().iter().enumerate() {
            let expect = kron(m.effect(x), &ComplexMatrix::identity(2));
            assert!(e.sub(&expect).frobenius_norm() <= 1e-12);
        }
        for (y, e) in gn.effects().iter().enumerate() {
            let expect = kron(&ComplexMatrix::identity(2), n.effect(y));
            assert!(e.sub(&expect).frobenius_norm() <= 1e-12);
        }
        // partial traces recover the factors exactly (up to dimension weight)
        let dims = DimensionSpec::new(vec![2, 2]).unwrap();
        for (x, e) in gm.effects().iter().enumerate() {
            let red = partial_trace(e, &dims, &[0]).unwrap().scale_re(0.5);
            assert!(red.sub(m.effect(x)).frobenius_norm() <= 1e-12);
        }
    }

    #[test]
    fn product_grid_margins_product_case() {
        // product of two trivial observables: all effects I/(|X||Y|) scaled
        let t1 = DiscretePovm::trivial(2, vec![0.into(), 1.into()], &[0.5, 0.5]).unwrap();
        let t2 = DiscretePovm::trivial(2, vec![0.into(), 1.into()], &[0.25, 0.75]).unwrap();
        let g = tensor_povm(&t1, &t2);
        let (m1, m2) = g.margins();
        for (e, want) in m1.effects().iter().zip(t1.effects()) {
            let expect = kron(want, &ComplexMatrix::identity(2));
            assert!(e.sub(&expect).frobenius_norm() <= 1e-12);
        }
        for (e, want) in m2.effects().iter().zip(t2.effects()) {
            let expect = kron(&ComplexMatrix::identity(2), want);
            assert!(e.sub(&expect).frobenius_norm() <= 1e-12);
        }
    }

    #[test]
    fn mix_with_noise_limits() {
        let q = DiscretePovm::computational_pvm(2);
        let unchanged = q.mix_with_noise(1.0, &[0.5, 0.5]).unwrap();
        for (a, b) in unchanged.effects().iter().zip(q.effects()) {
            assert!(a.sub(b).frobenius_norm() <= 1e-15);
        }
        let trivial = q.mix_with_noise(0.0, &[0.3, 0.7]).unwrap();
        assert!(trivial.effect(0).sub(&ComplexMatrix::identity(2).scale_re(0.3)).frobenius_norm() <= 1e-15);
        // sharp sigma-z mixed at 0.8 with uniform noise has sharpness 0.8
        let s = q.mix_with_noise(0.8, &[0.5, 0.5]).unwrap();
        let bloch = BlochObservable::from_povm(&s).unwrap();
        assert!((bloch.sharpness() - 0.8).abs() <= 1e-12);
        assert!((bloch.bias - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn mix_with_noise_rejects_bad_probs() {
        let q = DiscretePovm::computational_pvm(2);
        assert!(q.mix_with_noise(0.5, &[0.5, 0.6]).is_err());
        assert!(q.mix_with_noise(0.5, &[-0.1, 1.1]).is_err());
    }

    #[test]
    fn post_process_identity_merge_permute() {
        let m = DiscretePovm::computational_pvm(3);
        let id = MarkovKernel::identity(m.labels());
        let same = m.post_process(&id).unwrap();
        assert_eq!(same, m);

        let merge = MarkovKernel::new(
            m.labels().to_vec(),
            vec!["all".into()],
            vec![vec![1.0], vec![1.0], vec![1.0]],
        )
        .unwrap();
        let merged = m.post_process(&merge).unwrap();
        assert!(merged.effect(0).sub(&ComplexMatrix::identity(3)).frobenius_norm() <= 1e-12);

        let perm = MarkovKernel::deterministic(m.labels(), m.labels(), |l| match l {
            Label::Int(v) => Label::Int((v + 1) % 3),
            other => other.clone(),
        })
        .unwrap();
        let permuted = m.post_process(&perm).unwrap();
        for k in 0..3usize {
            let from = m.effect(k);
            let to = permuted.effect((k + 1) % 3);
            assert!(from.sub(to).frobenius_norm() <= 1e-15);
        }
    }

    #[test]
    fn kernel_compose_matches_sequential_post_processing() {
        let m = DiscretePovm::computational_pvm(3);
        let alpha = MarkovKernel::new(
            m.labels().to_vec(),
            vec![0.into(), 1.into()],
            vec![vec![1.0, 0.0], vec![0.25, 0.75], vec![0.0, 1.0]],
        )
        .unwrap();
        let beta = MarkovKernel::new(
            vec![0.into(), 1.into()],
            vec!["a".into(), "b".into()],
            vec![vec![0.5, 0.5], vec![0.1, 0.9]],
        )
        .unwrap();
        let composed = beta.compose(&alpha).unwrap();
        let lhs = m.post_process(&composed).unwrap();
        let rhs = m.post_process(&alpha).unwrap().post_process(&beta).unwrap();
        for (a, b) in lhs.effects().iter().zip(rhs.effects()) {
            assert!(a.sub(b).frobenius_norm() <= 1e-12);
        }
        let id = MarkovKernel::identity(&[0.into(), 1.into()]);
        let same = id.compose(&alpha).unwrap();
        assert_eq!(same, alpha);
    }

    #[test]
    fn bloch_round_trip() {
        let cases = [
            BlochObservable::new(0.5, [0.0, 0.0, 0.5]).unwrap(),
            BlochObservable::new(0.5, [0.0, 0.0, 0.0]).unwrap(),
            BlochObservable::new(0.5, [0.35, 0.0, 0.0]).unwrap(),
            BlochObservable::new(0.7, [0.1, 0.2, 0.1]).unwrap(),
        ];
        for b in cases {
            let p = b.to_povm().unwrap();
            let back = BlochObservable::from_povm(&p).unwrap();
            assert!((back.bias - b.bias).abs() <= 1e-12);
            for k in 0..3 {
                assert!((back.avec[k] - b.avec[k]).abs() <= 1e-12);
            }
        }
        // sharp sigma-z PVM
        let sharp = BlochObservable::new(0.5, [0.0, 0.0, 0.5]).unwrap().to_povm().unwrap();
        assert!(sharp.is_pvm(1e-12));
        // invalid: vector exceeding min(a, 1-a)
        assert!(BlochObservable::new(0.5, [0.6, 0.0, 0.0]).is_err());
        assert!(BlochObservable::new(0.9, [0.0, 0.2, 0.0]).is_err());
    }

    #[test]
    fn unbiased_sharpness_matches() {
        let b = BlochObservable::unbiased(0.8, [1.0, 0.0, 0.0]).unwrap();
        assert!((b.sharpness() - 0.8).abs() <= 1e-15);
        let p = b.to_povm().unwrap();
        assert!(p.validate().is_valid());
    }

    #[test]
    fn label_json_forms() {
        let l = Label::pair(1.into(), "x".into());
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"[1,"x"]"#);
        let back: Label = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn povm_json_round_trip() {
        let p = DiscretePovm::computational_pvm(2);
        let s = serde_json::to_string(&p).unwrap();
        let back: DiscretePovm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        // malformed: effects not summing to identity must fail to parse
        let bad = s.replace("1.0", "0.7");
        assert!(serde_json::from_str::<DiscretePovm>(&bad).is_err());
    }
}
