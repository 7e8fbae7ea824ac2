//! A litmus-test checker for the RISC-V weak memory model (RVWMO),
//! extended with explicit load-acquire (`lw.aq`/`ld.aq`) and
//! store-release (`sw.rl`/`sd.rl`) instructions.
//!
//! Given a small multi-hart program and an `exists` predicate over its
//! final state, the checker enumerates every candidate execution (each
//! choice of reads-from sources and per-location coherence orders),
//! filters them through the model axioms, and decides whether the
//! predicate is Allowed or Forbidden. Rejected near-miss executions come
//! with the cycle that forbids them, and any execution can be rendered as
//! a DOT event graph.
//!
//! ```
//! use rvwmo_litmus::litmus::parse_litmus;
//! use rvwmo_litmus::model::PpoRules;
//! use rvwmo_litmus::solver::{solve_test, SolveLimits, Status};
//!
//! let test = parse_litmus(
//!     "RISCV message passing\n\
//!      {\n\
//!      0:x1=x; 0:x2=y;\n\
//!      1:x1=x; 1:x2=y;\n\
//!      x=0; y=0;\n\
//!      }\n\
//!      P0              | P1              ;\n\
//!      addi x3, x0, 1  | lw.aq x3, 0(x2) ;\n\
//!      sw x3, 0(x1)    | lw    x4, 0(x1) ;\n\
//!      sw.rl x3, 0(x2) |                 ;\n\
//!      exists (1:x3=1 /\\ 1:x4=0)\n",
//! )
//! .unwrap();
//! let verdict = solve_test(&test, &PpoRules::default(), &SolveLimits::default()).unwrap();
//! assert_eq!(verdict.status, Status::Forbidden);
//! ```

pub mod cli;
pub mod exec;
pub mod litmus;
pub mod model;
pub mod oracle;
pub mod relation;
pub mod report;
pub mod solver;

pub use exec::{elaborate_events, Elaboration, Event, EventId};
pub use litmus::{parse_litmus, validate, LitmusTest};
pub use model::{compute_ppo, PpoRules};
pub use oracle::sc_outcomes;
pub use relation::Relation;
pub use report::{emit_dot, format_report};
pub use solver::{solve_test, SolveLimits, Status, Verdict};

// The guide chapters under book/src embed runnable snippets; compiling
// them as doctests keeps the book in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/litmus-tests.md")]
    mod litmus_tests {}
    #[doc = include_str!("../../../book/src/events-and-relations.md")]
    mod events_and_relations {}
    #[doc = include_str!("../../../book/src/memory-model.md")]
    mod memory_model {}
    #[doc = include_str!("../../../book/src/checking.md")]
    mod checking {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
