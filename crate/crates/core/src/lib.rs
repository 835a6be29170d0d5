//! Exact checking of disjoint-occurrence (BK) inequalities on {0,1}^n.
//!
//! The crate computes `A □ B`, builds k-out-of-n, weighted, product,
//! pair-alternating, tensor, projected and mixture measures with exact
//! rational masses, and checks BK-type inequalities over exhaustive or
//! seeded-random families of events.

pub mod boxop;
pub mod cube;
pub mod demo;
pub mod error;
pub mod io;
pub mod limits;
pub mod measures;
pub mod monotone;
pub mod proofkit;
pub mod rational;
pub mod rng;
pub mod verify;

pub use boxop::{box_general, box_general_with_witnesses, box_increasing, disjoint_occurrence, BoxWitness};
pub use cube::{bar_event, cylinder_subset, flip, is_increasing, minimal_elements, up_closure, Config, Event, IndexSet};
pub use error::{Error, Result};
pub use measures::{
    hat_measure, hat_measure_perm, k_out_of_n_measure, measure_of, mixture_measure, product_measure, project,
    sample_weighted_k, tensor, weighted_k_out_of_n_measure, Measure, MeasureSpec, MixingVariable, Permutation,
    WeightedSampler,
};
pub use monotone::enumerate_monotone_events;
pub use rational::Rational;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
