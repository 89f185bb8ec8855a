//! Exact, desk-scale laboratory for randomized list approximation of short
//! programs: extractor graphs checked by full enumeration, prime-residue
//! splitting, rich-owner graphs, and the list algorithm itself, run against a
//! small decidable machine so that every success probability is a finite
//! count.
//!
//! The guide in `book/` walks through the pipeline; its snippets are compiled
//! as doctests of this crate.

pub mod bigraph;
pub mod bits;
pub mod extractor;
pub mod harness;
pub mod listapprox;
pub mod machine;
pub mod primes;
pub mod ratio;
pub mod richowner;
pub mod rng;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/extractors.md")]
    mod extractors {}
    #[doc = include_str!("../../../book/src/splitting.md")]
    mod splitting {}
    #[doc = include_str!("../../../book/src/rich-owner.md")]
    mod rich_owner {}
    #[doc = include_str!("../../../book/src/toy-machine.md")]
    mod toy_machine {}
    #[doc = include_str!("../../../book/src/lists.md")]
    mod lists {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
