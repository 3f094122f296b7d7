//! Evidential opinion-based influence measures for viral marketing.
//!
//! The crate estimates user opinions from tagged messages, turns them into
//! belief functions, weights each edge's evidential influence by the opinions
//! of its endpoints, and selects seed sets that maximize the resulting spread
//! objective with lazy greedy search.
//!
//! Modules, bottom-up:
//!
//! - [`belief`]: frames, mass functions, Dempster's rule
//! - [`opinion`]: lexicon polarity, message and user opinions, opinion BBAs
//! - [`graph`]: the influence graph and its file formats
//! - [`measures`]: the seven per-edge influence measures
//! - [`maximizer`]: the spread objective and CELF
//! - [`baselines`]: cascade simulators, credit distribution, opinion cascading
//! - [`datagen`]: labeled synthetic networks
//! - [`eval`]: accuracy, seed intersections, opinion tables, accumulated curves
//! - [`cli`]: the `evinf` command line
//!
//! The guide in `book/` walks through each concept with runnable snippets.

pub mod baselines;
pub mod belief;
pub mod cli;
pub mod datagen;
pub mod eval;
pub mod graph;
pub mod maximizer;
pub mod measures;
pub mod opinion;

pub use belief::{dempster_combine, simple_bba, Frame, MassFunction, Subset};
pub use graph::{GraphBuilder, InfluenceGraph};
pub use maximizer::{maximize, SeedResult, SpreadOptions};
pub use measures::MeasureKind;
pub use opinion::OpinionDistribution;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/belief.md")]
    mod belief {}
    #[doc = include_str!("../../../book/src/opinion.md")]
    mod opinion {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/spread.md")]
    mod spread {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
