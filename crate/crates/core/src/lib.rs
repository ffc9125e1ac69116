//! Exact arithmetic in Tate algebras over ideal-adic rings.
//!
//! The crate models the restricted power series ring `(R, I)<x1, ..., xn>`
//! — series whose coefficients tend to zero I-adically — over three concrete
//! coefficient domains: truncated residues `Z/m^N`, exact integers with
//! ideal `(m)`, and the rationals with the zero ideal. Everything is exact;
//! the only approximations are the explicit truncations by total degree `D`
//! and coefficient precision `N`, and every identity is read modulo that
//! pair.
//!
//! On top of the series ring sit:
//!
//! * the unit criterion for Tate algebras (`f` is a unit iff `f(0)` is a
//!   unit of `R` and the remaining coefficients lie in the radical of `I`)
//!   with a constructive geometric-series inverse;
//! * polynomial maps with Jacobian matrices and division-free determinants;
//! * formal map inversion by contraction, quadratically convergent I-adic
//!   lifting of inverses with a runtime-checked precision ledger, residue
//!   transfer checks, and coefficient-decay profiling;
//! * an experiment harness: the unimodular-witness procedure over `Z/p^N`,
//!   positive-characteristic counterexample diagnostics, independent
//!   Lagrange-reversion and exhaustive-bijectivity oracles, and seeded
//!   generators for tame maps with closed-form inverses.
//!
//! Values are immutable and operations are pure functions; everything can be
//! shared across threads freely.

pub mod domain;
pub mod error;
pub mod harness;
pub mod inversion;
pub mod io;
pub mod maps;
pub mod series;

pub use domain::{AdicElement, Domain, DomainSpec, Valuation};
pub use error::{Error, Result};
pub use harness::experiment::{
    char_p_report, unimodular_witness, CharPOutcome, WitnessOptions, WitnessOutcome,
};
pub use harness::generate::{generate_tame, TamePair, TameSpec};
pub use harness::oracle::{bijectivity_oracle, bijectivity_oracle_with_budget, lagrange_oracle};
pub use harness::ExperimentReport;
pub use inversion::{
    adic_lift_inverse, certify_polynomial_inverse, decay_profile, formal_inverse,
    residue_reduction, transfer_check, DecayProfile, LiftOutcome, LiftStep, TransferOptions,
    TransferOutcome,
};
pub use io::{MapFile, SeriesFile, SeriesLiteral};
pub use maps::{NormalizedMap, PolyMap, ScalarMatrix, SeriesMatrix};
pub use series::{EvalOutcome, MultiIndex, TateSeries, UnitCheck};
