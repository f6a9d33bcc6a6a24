//! Sandpile models on finite multigraphs with a sink: the classical
//! Abelian model, its stochastic variant where toppled grains cross each
//! edge independently with probability `p`, and the partially stochastic
//! family interpolating between the two. The crate provides the toppling
//! dynamics with exact and sampled engines, every standard recurrence
//! characterization (burning, forbidden subsets, compatible orientations,
//! a max-flow decision, and complete-graph fast paths), exhaustive
//! enumerators for the recurrent sets, the convex decomposition of
//! stochastically recurrent states into deterministic ones, and seeded
//! Markov-chain simulation.

pub mod dynamics;
pub mod enumeration;
pub mod error;
pub mod graph;
pub mod markov;
pub mod polytope;
pub mod recurrence;

pub use error::{Error, Result};
