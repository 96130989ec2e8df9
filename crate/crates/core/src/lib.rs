//! Compile combinatorial problems into QUBO/Ising form, minor-embed them on
//! Chimera hardware graphs and sample them with classical and
//! quantum-inspired annealing engines.
//!
//! Model types are generic over [`Scalar`], so the same code runs on `f64`,
//! `f32` or exact rationals. The aliases below cover the common cases.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anneal;
pub mod bench;
pub mod chimera;
pub mod error;
pub mod ising;
pub mod mappers;
pub mod parallel;
pub mod scalar;

pub use error::{Error, ErrorKind, Result};
pub use scalar::{Real, Scalar};

pub type Qubo = ising::QuboModel<f64>;
pub type Ising = ising::IsingModel<f64>;
pub type Poly = ising::PolyObjective<f64>;
pub type Samples = ising::SampleSet<f64>;

pub type ExactQubo = ising::QuboModel<num_rational::Rational64>;
pub type ExactIsing = ising::IsingModel<num_rational::Rational64>;
pub type ExactPoly = ising::PolyObjective<num_rational::Rational64>;
