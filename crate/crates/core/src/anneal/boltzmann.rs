use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{default_beta_range, random_spins, Sparse};
use crate::error::{Error, Result};
use crate::ising::{Domain, IsingModel, Provenance, Sample, SampleSet};
use crate::parallel::substream;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoltzmannParams {
    pub beta: f64,
    /// Total samples, split evenly over the chains.
    pub num_samples: usize,
    /// Sweeps discarded at the start of every chain.
    pub burn_in: usize,
    /// Sweeps between recorded samples.
    pub thinning: usize,
    pub chains: usize,
    pub seed: u64,
}

impl Default for BoltzmannParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            num_samples: 10_000,
            burn_in: 1000,
            thinning: 1,
            chains: 16,
            seed: 0,
        }
    }
}

/// Fixed-temperature single-spin-flip chains targeting
/// `P(s) ~ exp(-beta E(s))`.
///
/// Spins are visited in order and flipped with the heat-bath probability
/// `1 / (1 + exp(beta dE))`, which satisfies detailed balance and, unlike the
/// plain Metropolis rule, does not flip deterministically as `beta -> 0`.
/// The first half of the burn-in raises `beta` geometrically from a hot
/// start so that cold chains are not stuck in the basin they started in.
/// Output is aggregated by assignment.
pub fn boltzmann_sample<T: Real>(m: &IsingModel<T>, p: &BoltzmannParams) -> Result<SampleSet<T>> {
    m.validate()?;
    if !(p.beta > 0.0 && p.beta.is_finite()) {
        return Err(Error::Parameter(format!("beta must be positive, got {}", p.beta)));
    }
    if p.num_samples == 0 || p.chains == 0 || p.thinning == 0 {
        return Err(Error::Parameter(
            "num_samples, chains and thinning must be at least 1".into(),
        ));
    }
    let sp = Sparse::new(m);
    let n = sp.len();
    let chains = p.chains.min(p.num_samples);
    let hot = default_beta_range(m).0.min(p.beta);
    let counts: Vec<BTreeMap<Vec<i8>, u64>> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let quota = p.num_samples / chains + usize::from(c < p.num_samples % chains);
            let mut rng = substream(p.seed, "boltzmann", c as u64);
            let mut s = random_spins(n, &mut rng);
            let mut field = sp.fields(&s);
            let sweep = |beta: f64, s: &mut Vec<i8>, field: &mut Vec<T>, rng: &mut _| {
                for i in 0..n {
                    let delta = -2.0 * f64::from(s[i]) * field[i].to_f64().unwrap_or(0.0);
                    if heat_bath(delta, beta, rng) {
                        sp.flip(s, field, i);
                    }
                }
            };
            let ramp = p.burn_in / 2;
            for k in 0..p.burn_in {
                let beta = if k < ramp {
                    hot * (p.beta / hot).powf(k as f64 / ramp as f64)
                } else {
                    p.beta
                };
                sweep(beta, &mut s, &mut field, &mut rng);
            }
            let mut hist = BTreeMap::new();
            for _ in 0..quota {
                for _ in 0..p.thinning {
                    sweep(p.beta, &mut s, &mut field, &mut rng);
                }
                *hist.entry(s.clone()).or_insert(0) += 1;
            }
            hist
        })
        .collect();
    let mut merged: BTreeMap<Vec<i8>, u64> = BTreeMap::new();
    for hist in counts {
        for (k, v) in hist {
            *merged.entry(k).or_insert(0) += v;
        }
    }
    let mut set = SampleSet::new(
        Domain::Spin,
        Provenance {
            engine: "boltzmann".into(),
            seed: p.seed,
            gauges: Vec::new(),
        },
    );
    for (values, count) in merged {
        let energy = m.energy_unchecked(&values);
        set.push(Sample {
            values,
            energy,
            count,
            gauge: None,
            read: None,
        });
    }
    Ok(set)
}

#[inline]
fn heat_bath<R: Rng>(delta: f64, beta: f64, rng: &mut R) -> bool {
    rng.random::<f64>() * (1.0 + (beta * delta).exp()) < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_spin_alignment_probability() {
        let m = IsingModel::from_parts(vec![0.0, 0.0], [((0, 1), -1.0)], 0.0).unwrap();
        let p = BoltzmannParams {
            num_samples: 200_000,
            burn_in: 100,
            seed: 4,
            ..Default::default()
        };
        let set = boltzmann_sample(&m, &p).unwrap();
        assert_eq!(set.total_count(), 200_000);
        let aligned: u64 = set
            .samples
            .iter()
            .filter(|s| s.values[0] == s.values[1])
            .map(|s| s.count)
            .sum();
        let e = std::f64::consts::E;
        let exact = e / (e + 1.0 / e);
        let got = aligned as f64 / 200_000.0;
        assert!((got - exact).abs() / exact < 0.01, "{got} vs {exact}");
    }

    #[test]
    fn cold_chain_concentrates() {
        let m = IsingModel::from_parts(vec![1.0, 1.0, 1.0], [((0, 1), -0.5), ((1, 2), -0.5)], 0.0).unwrap();
        let p = BoltzmannParams {
            beta: 20.0,
            num_samples: 10_000,
            seed: 1,
            ..Default::default()
        };
        let set = boltzmann_sample(&m, &p).unwrap();
        let best = set.samples.iter().max_by_key(|s| s.count).unwrap();
        assert_eq!(best.values, vec![-1, -1, -1]);
        assert!(best.count >= 9900);
    }

    #[test]
    fn rejects_bad_parameters() {
        let m = IsingModel::<f64>::new(2);
        assert!(boltzmann_sample(
            &m,
            &BoltzmannParams {
                beta: 0.0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(boltzmann_sample(
            &m,
            &BoltzmannParams {
                thinning: 0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
