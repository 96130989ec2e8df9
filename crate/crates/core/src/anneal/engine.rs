use serde::{Deserialize, Serialize};

use crate::anneal::{simulated_annealing, simulated_quantum_annealing, SaParams, SqaParams};
use crate::error::Result;
use crate::ising::{IsingModel, SampleSet};
use crate::scalar::Real;

/// A sampling engine with its parameters, as accepted in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "lowercase")]
pub enum Engine {
    Sa(SaParams),
    Sqa(SqaParams),
}

impl Default for Engine {
    fn default() -> Self {
        Engine::Sa(SaParams::default())
    }
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Sa(_) => "sa",
            Engine::Sqa(_) => "sqa",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Engine::Sa(p) => p.seed,
            Engine::Sqa(p) => p.seed,
        }
    }

    pub fn num_reads(&self) -> usize {
        match self {
            Engine::Sa(p) => p.num_reads,
            Engine::Sqa(p) => p.num_reads,
        }
    }

    pub fn sweeps(&self) -> usize {
        match self {
            Engine::Sa(p) => p.sweeps,
            Engine::Sqa(p) => p.sweeps,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut e = self.clone();
        match &mut e {
            Engine::Sa(p) => p.seed = seed,
            Engine::Sqa(p) => p.seed = seed,
        }
        e
    }

    pub fn with_reads(&self, reads: usize) -> Self {
        let mut e = self.clone();
        match &mut e {
            Engine::Sa(p) => p.num_reads = reads,
            Engine::Sqa(p) => p.num_reads = reads,
        }
        e
    }

    pub fn sample<T: Real>(&self, m: &IsingModel<T>) -> Result<SampleSet<T>> {
        match self {
            Engine::Sa(p) => simulated_annealing(m, p),
            Engine::Sqa(p) => simulated_quantum_annealing(m, p),
        }
    }
}
