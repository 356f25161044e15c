//! Exact simulation of, and online learning in, Bayesian Stackelberg games.
//!
//! See the guide in `book/` for a walk-through.

pub mod env;
pub mod error;
pub mod experiment;
pub mod game;
pub mod geometry;
pub mod learner;
pub mod lower_bound;
pub mod rat;
pub mod region;

pub use env::{Environment, Feedback, FeedbackMode, RoundLog};
pub use error::{Error, Result};
pub use game::{ActionProfile, BsgInstance, OptResult};
pub use geometry::{Halfspace, Polytope};
pub use rat::Rat;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/rationals.md")]
    mod rationals {}
    #[doc = include_str!("../../../book/src/polytopes.md")]
    mod polytopes {}
    #[doc = include_str!("../../../book/src/games.md")]
    mod games {}
    #[doc = include_str!("../../../book/src/environment.md")]
    mod environment {}
    #[doc = include_str!("../../../book/src/regions.md")]
    mod regions {}
    #[doc = include_str!("../../../book/src/learner.md")]
    mod learner {}
    #[doc = include_str!("../../../book/src/lower-bound.md")]
    mod lower_bound {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
