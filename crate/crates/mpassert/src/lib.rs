//! A workbench for asserted multiparty session protocols.
//!
//! An input file pairs a global description of a distributed protocol,
//! decorated with Presburger-arithmetic assertions, with one pi-calculus
//! style implementation per participant. The library then
//!
//! 1. checks the global description (one-time unfolding, channel linearity,
//!    well-assertedness),
//! 2. projects it onto every participant to obtain endpoint types,
//! 3. infers the session type of every implementation and compares it to
//!    the corresponding projection under a refinement relation, and
//! 4. can execute the verified system on unbounded FIFO channels with
//!    optional runtime assertion monitoring.
//!
//! Start with [`pipeline::run_on_file`] for the whole flow, or use the
//! stage modules ([`analysis`], [`projection`], [`typing`], [`runtime`])
//! directly. The `examples/` directory shows one runnable program per
//! capability.

pub mod analysis;
pub mod diagnostics;
pub mod parse;
pub mod pipeline;
pub mod presburger;
pub mod projection;
pub mod runtime;
pub mod syntax;
pub mod typing;

pub use diagnostics::{CheckReport, Verdict, Violation, ViolationKind};
pub use parse::{parse_formula, parse_global, parse_local, parse_process, parse_protocol_file};
pub use syntax::{
    Channel, Expr, Formula, GlobalAssertion, LocalAssertion, Participant, Process, Sort,
};
