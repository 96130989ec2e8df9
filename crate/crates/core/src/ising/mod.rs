//! Problem representations: pseudo-Boolean polynomials, QUBO and Ising
//! models, conversions between them, degree reduction, gauges and the
//! exhaustive oracle.

mod brute;
mod gauge;
mod model;
mod poly;
mod reduce;
mod sample;

pub use brute::{brute_force, brute_force_with_cap, GroundStates, DEFAULT_BRUTE_FORCE_CAP};
pub use gauge::{apply_gauge, decode_gauge, Gauge};
pub(crate) use model::check_assignment;
pub use model::{Domain, IsingModel, QuboModel};
pub use poly::PolyObjective;
pub use reduce::{reduce_degree, reduce_degree_auto, safe_penalty_bound, Ancilla, AncillaMap, Reduction};
pub use sample::{Provenance, Sample, SampleSet};

use crate::error::Result;
use crate::scalar::Scalar;

/// Anything that assigns an energy to a fixed-length vector over one domain.
pub trait EnergyModel<T: Scalar> {
    const DOMAIN: Domain;

    fn num_vars(&self) -> usize;

    /// Energy without length or domain checks.
    fn energy_unchecked(&self, x: &[i8]) -> T;

    fn energy(&self, x: &[i8]) -> Result<T> {
        check_assignment(x, self.num_vars(), Self::DOMAIN)?;
        Ok(self.energy_unchecked(x))
    }

    /// Equivalent Ising model when one exists. The oracle uses it for
    /// incremental enumeration.
    fn ising_form(&self) -> Option<IsingModel<T>>;
}

impl<T: Scalar> EnergyModel<T> for IsingModel<T> {
    const DOMAIN: Domain = Domain::Spin;

    fn num_vars(&self) -> usize {
        IsingModel::num_vars(self)
    }

    fn energy_unchecked(&self, x: &[i8]) -> T {
        IsingModel::energy_unchecked(self, x)
    }

    fn ising_form(&self) -> Option<IsingModel<T>> {
        Some(self.clone())
    }
}

impl<T: Scalar> EnergyModel<T> for QuboModel<T> {
    const DOMAIN: Domain = Domain::Binary;

    fn num_vars(&self) -> usize {
        QuboModel::num_vars(self)
    }

    fn energy_unchecked(&self, x: &[i8]) -> T {
        QuboModel::energy_unchecked(self, x)
    }

    fn ising_form(&self) -> Option<IsingModel<T>> {
        Some(self.to_ising())
    }
}

impl<T: Scalar> EnergyModel<T> for PolyObjective<T> {
    const DOMAIN: Domain = Domain::Binary;

    fn num_vars(&self) -> usize {
        PolyObjective::num_vars(self)
    }

    fn energy_unchecked(&self, x: &[i8]) -> T {
        PolyObjective::energy_unchecked(self, x)
    }

    fn ising_form(&self) -> Option<IsingModel<T>> {
        self.to_qubo().ok().map(|q| q.to_ising())
    }
}

/// Converts a binary vector to spins via `s = 2x - 1`.
pub fn bits_to_spins(bits: &[i8]) -> Vec<i8> {
    bits.iter().map(|&b| 2 * b - 1).collect()
}

/// Converts spins to a binary vector via `x = (s + 1) / 2`.
pub fn spins_to_bits(spins: &[i8]) -> Vec<i8> {
    spins.iter().map(|&s| (s + 1) / 2).collect()
}
