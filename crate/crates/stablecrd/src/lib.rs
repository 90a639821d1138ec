//! Semantics of chemical reaction deciders (CRDs), computation of the finite
//! set of minimal output-unstable configurations for bimolecular CRDs, and
//! batch output-stability queries against that set.
//!
//! The crate is organized around five pieces:
//!
//! * [`model`] — configurations, reactions, deciders, the output map Φ, and
//!   reaction-class detection;
//! * [`index`] — antichains of minimal configurations with dominance queries
//!   (linear-scan and k-d tree backends);
//! * [`oracle`] — exhaustive ground truth for mass-bounded deciders:
//!   reachable sets, stability verdicts with witnesses, brute-force minimal
//!   unstable sets, and decider validation;
//! * [`minu`] — the backward-expansion generator of the minimal unstable set,
//!   with full cost instrumentation;
//! * [`textio`] — the `.crd` / `.pp` text formats and the JSON report schema.
//!
//! Every answer the fast path produces can be cross-checked against the
//! oracle; the test suites do exactly that.

pub mod index;
pub mod minu;
pub mod model;
pub mod oracle;
pub mod textio;

pub use index::{Antichain, IndexBackend, IndexError, QueryStats};
pub use minu::{GenOptions, GenResult, GenStats, MinuError, SeedSets};
pub use model::{
    Configuration, Crd, CrdClass, ModelError, Reaction, SpeciesTable, Verdict, Vote,
};
pub use oracle::{
    DecidesFailure, DecidesOutcome, OracleError, ReachReport, StabilityKind, StabilityVerdict,
};
pub use textio::{ParseError, ProtocolTable};
