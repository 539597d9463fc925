//! Nonexistence certificates for generalized bent functions (GBFs).
//!
//! A function `f: (Z/tZ)^n -> Z/tZ` is a GBF of type `[n, t]` when every
//! value of its Fourier transform over `Z[zeta_t]` has squared absolute
//! value `t^n`. For `t = 2p^e` with `n` odd nothing is known to exist, and
//! this crate collects the machinery to rule such types out:
//!
//! * [`arith`]: primality, factoring, multiplicative orders, Wieferich tests.
//! * [`cyclotomic`]: exact arithmetic in `Z[zeta_m]` with Galois action and
//!   relative norms to subfields of `Q(zeta_p)`.
//! * [`gbf`]: exact Fourier spectra and exhaustive search at tiny types.
//! * [`criterion`]: the bound `p > 2^(2B(l) + n l)` and its certificate.
//! * [`scanner`]: prime scans, density counts and Wieferich scans.
//! * [`relsearch`]: class-group relation search over externally computed
//!   class groups of the decomposition field of 2.
//!
//! Data-parallel loops go through [`exec::Exec`]; with the default
//! `parallel` feature they run on rayon, otherwise sequentially.

pub mod arith;
pub mod criterion;
pub mod cyclotomic;
pub mod exec;
pub mod gbf;
pub mod relsearch;
pub mod scanner;

mod serde_big;

pub use arith::{ArithError, FactorConfig, Factorization, OrderResult};
pub use criterion::{Certificate, CriterionError, KnownResultFlags, Verdict};
pub use cyclotomic::{CycloError, CyclotomicInt, DeltaReport, SubfieldSpec};
pub use exec::Exec;
pub use gbf::{GbfCandidate, GbfError, SearchReport};
pub use relsearch::{ClassGroupFixture, FixtureError, NpOutcome, RelationWitness, RelsearchError, SearchMode, SearchOptions};
pub use scanner::{DensityReport, FParity, ScanConfig, ScanError, ScanFilter, ScanHit, ScanOutcome};
