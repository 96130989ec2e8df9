use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{check_reads, finish_read, metropolis, random_order, random_spins, Sparse};
use crate::error::{Error, Result};
use crate::ising::{Domain, IsingModel, Provenance, SampleSet};
use crate::parallel::substream;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaParams {
    pub num_reads: usize,
    pub sweeps: usize,
    /// `(beta_start, beta_end)`, interpolated geometrically over sweeps.
    /// Derived from the model's coefficients when absent.
    pub beta_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            num_reads: 100,
            sweeps: 1000,
            beta_range: None,
            seed: 0,
        }
    }
}

/// Inverse temperatures at which the largest possible single-flip uphill
/// move is accepted with probability 1/2 (start) and the smallest one with
/// probability 1e-4 (end).
pub fn default_beta_range<T: Real>(m: &IsingModel<T>) -> (f64, f64) {
    let sp = Sparse::new(m);
    let mut max_delta = 0.0f64;
    let mut min_delta = f64::INFINITY;
    for i in 0..sp.len() {
        let mut total = sp.h[i].abs().to_f64().unwrap_or(0.0);
        let mut smallest = if sp.h[i].is_zero() { f64::INFINITY } else { total };
        for (_, w) in sp.neighbors(i) {
            let w = w.abs().to_f64().unwrap_or(0.0);
            total += w;
            smallest = smallest.min(w);
        }
        max_delta = max_delta.max(2.0 * total);
        min_delta = min_delta.min(2.0 * smallest);
    }
    if max_delta == 0.0 || !min_delta.is_finite() {
        return (0.1, 1.0);
    }
    let hot = std::f64::consts::LN_2 / max_delta;
    let cold = (1e4f64).ln() / min_delta;
    (hot, cold.max(hot))
}

/// Independent single-spin-flip Metropolis anneals, one per read. Each read
/// visits spins in its own random order, fixed for all of its sweeps.
pub fn simulated_annealing<T: Real>(m: &IsingModel<T>, p: &SaParams) -> Result<SampleSet<T>> {
    m.validate()?;
    check_reads(p.num_reads, p.sweeps)?;
    let (b0, b1) = p.beta_range.unwrap_or_else(|| default_beta_range(m));
    if !(b0 > 0.0 && b0 <= b1 && b1.is_finite()) {
        return Err(Error::Parameter(format!(
            "beta range must satisfy 0 < start <= end, got ({b0}, {b1})"
        )));
    }
    let betas: Vec<T> = (0..p.sweeps)
        .map(|k| {
            let t = if p.sweeps == 1 {
                1.0
            } else {
                k as f64 / (p.sweeps - 1) as f64
            };
            T::from_f64(b0 * (b1 / b0).powf(t)).expect("finite beta")
        })
        .collect();
    let sp = Sparse::new(m);
    let samples = (0..p.num_reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = substream(p.seed, "sa", read as u64);
            let mut s = random_spins(sp.len(), &mut rng);
            let order = random_order(sp.len(), &mut rng);
            let mut field = sp.fields(&s);
            let mut energy = m.energy_unchecked(&s);
            for &beta in &betas {
                for &i in &order {
                    let delta = if s[i] > 0 {
                        -T::two() * field[i]
                    } else {
                        T::two() * field[i]
                    };
                    if metropolis(delta, beta, &mut rng) {
                        sp.flip(&mut s, &mut field, i);
                        energy = energy + delta;
                    }
                }
            }
            finish_read(m, s, Some(energy), read)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = SampleSet::new(
        Domain::Spin,
        Provenance {
            engine: "sa".into(),
            seed: p.seed,
            gauges: Vec::new(),
        },
    );
    samples.into_iter().for_each(|s| set.push(s));
    Ok(set)
}
