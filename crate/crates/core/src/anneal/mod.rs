//! Monte Carlo engines over Ising models: simulated annealing, simulated
//! quantum annealing, fixed-temperature sampling, effective-temperature
//! estimation and control-noise modeling.

mod boltzmann;
mod engine;
mod noise;
mod sa;
mod schedule;
mod sqa;
mod teff;

pub use boltzmann::{boltzmann_sample, BoltzmannParams};
pub use engine::Engine;
pub use noise::{apply_noise, resilience_check, NoiseModel};
pub use sa::{default_beta_range, simulated_annealing, SaParams};
pub use schedule::{AnnealSchedule, SchedulePoint};
pub use sqa::{simulated_quantum_annealing, transverse_coupling, SqaParams};
pub use teff::{estimate_effective_temperature, BoltzmannSpec, TeffEstimate};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ising::{IsingModel, Sample};
use crate::scalar::Real;

/// Compressed adjacency of an Ising model for fast local-field updates.
pub(crate) struct Sparse<T> {
    pub h: Vec<T>,
    pub start: Vec<usize>,
    pub nbr: Vec<usize>,
    pub weight: Vec<T>,
}

impl<T: Real> Sparse<T> {
    pub fn new(m: &IsingModel<T>) -> Self {
        let adj = m.adjacency();
        let mut start = Vec::with_capacity(adj.len() + 1);
        let mut nbr = Vec::new();
        let mut weight = Vec::new();
        start.push(0);
        for list in &adj {
            for &(j, w) in list {
                nbr.push(j);
                weight.push(w);
            }
            start.push(nbr.len());
        }
        Self {
            h: m.h().to_vec(),
            start,
            nbr,
            weight,
        }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.start[i]..self.start[i + 1];
        self.nbr[r.clone()].iter().copied().zip(self.weight[r].iter().copied())
    }

    /// `h_i + sum_j J_ij s_j` for every spin.
    pub fn fields(&self, s: &[i8]) -> Vec<T> {
        (0..self.len())
            .map(|i| {
                self.neighbors(i)
                    .fold(self.h[i], |acc, (j, w)| if s[j] > 0 { acc + w } else { acc - w })
            })
            .collect()
    }

    /// Flips spin `i` and updates the neighbours' fields.
    #[inline]
    pub fn flip(&self, s: &mut [i8], field: &mut [T], i: usize) {
        s[i] = -s[i];
        let two = if s[i] > 0 { T::two() } else { -T::two() };
        for k in self.start[i]..self.start[i + 1] {
            let j = self.nbr[k];
            field[j] = field[j] + two * self.weight[k];
        }
    }
}

pub(crate) fn random_spins<R: Rng>(n: usize, rng: &mut R) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

pub(crate) fn random_order<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Metropolis test for an energy change `delta` at inverse temperature `beta`.
#[inline]
pub(crate) fn metropolis<T: Real, R: Rng>(delta: T, beta: T, rng: &mut R) -> bool {
    delta <= T::zero() || rng.random::<f64>() < (-beta * delta).exp().to_f64().unwrap_or(0.0)
}

/// Builds a read result, cross-checking the tracked energy against a fresh
/// evaluation so that a drifting field cache surfaces as a solver error.
pub(crate) fn finish_read<T: Real>(
    m: &IsingModel<T>,
    spins: Vec<i8>,
    tracked: Option<T>,
    read: usize,
) -> Result<Sample<T>> {
    let energy = m.energy_unchecked(&spins);
    if let Some(t) = tracked {
        let scale = T::one() + m.max_abs_coefficient() * T::from_usize(m.num_vars() + m.couplings().len()).unwrap();
        let tol = T::from_f64(1e-9).unwrap() * scale * T::from_f64(1e3).unwrap();
        if !((t - energy).abs() <= tol) {
            return Err(Error::Solver(format!(
                "read {read}: tracked energy {t} drifted from evaluated energy {energy}"
            )));
        }
    }
    Ok(Sample {
        values: spins,
        energy,
        count: 1,
        gauge: None,
        read: Some(read as u32),
    })
}

pub(crate) fn check_reads(num_reads: usize, sweeps: usize) -> Result<()> {
    if num_reads == 0 {
        return Err(Error::Parameter("num_reads must be at least 1".into()));
    }
    if sweeps == 0 {
        return Err(Error::Parameter("sweeps must be at least 1".into()));
    }
    Ok(())
}
