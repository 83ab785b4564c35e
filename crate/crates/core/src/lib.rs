//! Exact and high-precision derivatives of `t -> tr f(A + tB)`.

pub mod divdiff;
pub mod error;
pub mod exactnum;
pub mod formulations;
pub mod linalg;
pub mod loops;
pub mod search;
pub mod traceder;

pub use error::{Error, Result};

/// Guide chapters, compiled as doctests so their snippets stay current.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/numbers.md")]
    pub mod numbers {}
    #[doc = include_str!("../../../book/src/divided-differences.md")]
    pub mod divided_differences {}
    #[doc = include_str!("../../../book/src/trace-derivatives.md")]
    pub mod trace_derivatives {}
    #[doc = include_str!("../../../book/src/formulations.md")]
    pub mod formulations {}
    #[doc = include_str!("../../../book/src/loops.md")]
    pub mod loops {}
    #[doc = include_str!("../../../book/src/search.md")]
    pub mod search {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
}
