//! Achlioptas-style ℓ-vertex random graph processes, their associated
//! coagulation-type rate equations, and tools to cross-check one against
//! the other.
//!
//! - [`rules`]: decision rules and the expected-change kernel `d_k`.
//! - [`process`]: union-find simulator with an exact component-size census.
//! - [`kinetics`]: truncated rate equations, closed forms and integrators.
//! - [`analysis`]: simulation/ODE comparison, gelation windows, and
//!   concentration diagnostics.
//! - [`io`]: the shared `t,k,value,kind` CSV schema and JSON metadata.

pub mod analysis;
pub mod error;
pub mod io;
pub mod kinetics;
pub mod process;
pub mod rng;
pub mod rules;

pub use error::{Error, Result};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/rules.md")]
    mod rules {}
    #[doc = include_str!("../../../book/src/process.md")]
    mod process {}
    #[doc = include_str!("../../../book/src/kinetics.md")]
    mod kinetics {}
    #[doc = include_str!("../../../book/src/gelation.md")]
    mod gelation {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/catalogue.md")]
    mod catalogue {}
}
