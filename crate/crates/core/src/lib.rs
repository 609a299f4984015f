//! Entanglement Hamiltonians of critical transverse-field Ising chains with
//! defects, computed exactly in the free-fermion picture at arbitrary
//! precision.

pub mod error;
pub mod linalg;
pub mod precision;

pub use error::{Error, Result};
pub use precision::PrecisionContext;
pub mod chain;
pub mod gaussian;
pub mod oracle;
pub mod observables;
pub mod analysis;
pub mod config;
pub mod workbench;

/// Chapters of the guide in `book/`, compiled here so their snippets run as
/// doctests.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/precision.md")]
    pub mod precision {}
    #[doc = include_str!("../../../book/src/chains.md")]
    pub mod chains {}
    #[doc = include_str!("../../../book/src/gaussian.md")]
    pub mod gaussian {}
    #[doc = include_str!("../../../book/src/observables.md")]
    pub mod observables {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    pub mod analysis {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    pub mod oracle {}
    #[doc = include_str!("../../../book/src/workbench.md")]
    pub mod workbench {}
}
