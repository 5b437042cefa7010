//! Embeddings read as epistemic states.
//!
//! A vector in a space `X` is mapped to the set of properties it satisfies
//! through scoring functions `γ_p`. Pooling operators (average, sum,
//! componentwise max, Hadamard product) are checked against the union of
//! those sets, and entailment scorers decide whether a pooled vector
//! entails a propositional formula. All arithmetic is exact.
//!
//! ```
//! use epool::epistemic::PropertySpace;
//! use epool::pooling::pool_in;
//! use epool::spaces::{decode, SpaceConfig, Vector};
//!
//! let config = SpaceConfig::named("max-strict-reals", PropertySpace::indexed(2)).unwrap();
//! let e = Vector::from_ints(&[1, 0]);
//! let f = Vector::from_ints(&[0, 1]);
//! let pooled = pool_in(&config, &e, &f).unwrap();
//! assert_eq!(config.properties.render(&decode(&config, &pooled).unwrap()), "p0 p1");
//! ```

pub mod bitset;
pub mod cli;
pub mod entailment;
pub mod epistemic;
pub mod logic;
pub mod numeric;
pub mod pooling;
pub mod spaces;
pub mod verifier;
pub mod weighted;
