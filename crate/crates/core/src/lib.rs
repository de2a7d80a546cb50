//! Joint quantum measurements through broadcasting channels.
//!
//! The library decides whether a target joint observable on a product outcome
//! grid can be generated from two local observables by a broadcasting channel
//! (a CPTP map into a bipartite system followed by local measurements),
//! constructs explicit witness channels where closed forms exist, and verifies
//! every construction by direct matrix computation.
//!
//! Module map:
//! * [`linalg`] — dense complex matrices, Hermitian eigensolver, tensor
//!   products, partial traces.
//! * [`povm`] — discrete POVMs, margins, noise mixing, Markov kernels.
//! * [`channel`] — CPTP maps in Choi form, duals, broadcast constructions.
//! * [`feasibility`] — analytic fuzzy-PVM conditions, qubit inequalities and a
//!   semidefinite feasibility solver with witness extraction.
//! * [`weyl`] — finite position/momentum systems on Z_D, covariant phase-space
//!   observables, covariant broadcasters, channel twirling.
//! * [`blmpp`] — the broadcast + local-measurement + post-processing protocol
//!   and the optimal MUB joint measurement.
//! * [`sampling`] — seeded generators for random states, unitaries, POVMs and
//!   channels (used by the CLI's `--seed` inputs and by tests).

pub mod blmpp;
pub mod channel;
pub mod error;
pub mod feasibility;
pub mod linalg;
pub mod povm;
pub mod sampling;
pub mod weyl;

pub use channel::Channel;
pub use error::{Error, Result};
pub use feasibility::{FeasibilityReport, SdpOptions, Verdict};
pub use linalg::{ComplexMatrix, DimensionSpec, C64};
pub use povm::{BlochObservable, DiscretePovm, JointPovm, Label, MarkovKernel};
pub use weyl::WeylSystem;
