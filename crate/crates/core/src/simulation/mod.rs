//! Monte Carlo: pattern generators and experiment drivers.

mod experiments;
pub mod layout;
pub mod rng;
pub mod sampling;

pub use experiments::*;
pub use sampling::{
    association_delta, association_epsilon, sample_alternative, sample_alternative_rejection,
    sample_uniform_hull, sample_unit_square,
    segregation_delta, segregation_epsilon, AlternativeSpec, SupportPieces,
};
