use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{check_reads, finish_read, random_order, random_spins, AnnealSchedule, Sparse};
use crate::error::{Error, Result};
use crate::ising::{Domain, IsingModel, Provenance, SampleSet};
use crate::parallel::substream;
use crate::scalar::Real;
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SqaParams {
    pub num_reads: usize,
    pub sweeps: usize,
    pub trotter_slices: usize,
    /// Simulation temperature in model energy units.
    pub temperature: f64,
    pub schedule: AnnealSchedule,
    pub seed: u64,
}

impl Default for SqaParams {
    fn default() -> Self {
        Self {
            num_reads: 100,
            sweeps: 1000,
            trotter_slices: 16,
            temperature: 0.05,
            schedule: AnnealSchedule::default(),
            seed: 0,
        }
    }
}

/// Ferromagnetic coupling between neighbouring Trotter slices,
/// `J_perp = -(P T / 2) ln tanh(A / (P T))`. A vanishing driver gives
/// `+inf` (slices locked together).
pub fn transverse_coupling(a: f64, slices: usize, temperature: f64) -> Result<f64> {
    let pt = slices as f64 * temperature;
    if a == 0.0 {
        return Ok(f64::INFINITY);
    }
    let j = -(pt / 2.0) * (a / pt).tanh().ln();
    if j.is_nan() || j < 0.0 || j == f64::INFINITY {
        return Err(Error::Parameter(format!(
            "inter-slice coupling is not finite for A={a}, P={slices}, T={temperature} (A/(P T) = {})",
            a / pt
        )));
    }
    Ok(j)
}

/// Path-integral Monte Carlo over `P` coupled replicas of the problem.
///
/// Sweep `k` uses `s = k / (sweeps - 1)`; the replica energy is
/// `sum_k B(s) H(s_k) - J_perp(s) sum_k sum_i s_ik s_i,k+1` at inverse
/// temperature `1 / (P T)`. Each sweep does single-spin Metropolis updates
/// in every slice, then one pass of whole-worldline flips. The returned
/// state is the slice with the lowest problem energy.
pub fn simulated_quantum_annealing<T: Real>(m: &IsingModel<T>, p: &SqaParams) -> Result<SampleSet<T>> {
    m.validate()?;
    check_reads(p.num_reads, p.sweeps)?;
    if p.trotter_slices == 0 {
        return Err(Error::Parameter("Trotter slice count must be at least 1".into()));
    }
    if !(p.temperature > 0.0 && p.temperature.is_finite()) {
        return Err(Error::Parameter(format!(
            "simulation temperature must be positive, got {}",
            p.temperature
        )));
    }
    let slices = p.trotter_slices;
    let beta = 1.0 / (slices as f64 * p.temperature);
    let mut plan = Vec::with_capacity(p.sweeps);
    for k in 0..p.sweeps {
        let s = if p.sweeps == 1 {
            1.0
        } else {
            k as f64 / (p.sweeps - 1) as f64
        };
        let (a, b) = p.schedule.at(s);
        let jp = if slices == 1 {
            0.0
        } else {
            transverse_coupling(a, slices, p.temperature)?
        };
        plan.push((b, jp));
    }
    let sp = Sparse::new(m);
    let n = sp.len();
    let samples = (0..p.num_reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = substream(p.seed, "sqa", read as u64);
            let init = random_spins(n, &mut rng);
            let order = random_order(n, &mut rng);
            let mut spins: Vec<Vec<i8>> = vec![init; slices];
            let mut fields: Vec<Vec<T>> = spins.iter().map(|s| sp.fields(s)).collect();
            for &(b, jp) in &plan {
                for k in 0..slices {
                    let (up, down) = ((k + slices - 1) % slices, (k + 1) % slices);
                    for &i in &order {
                        let si = f64::from(spins[k][i]);
                        let local = -2.0 * si * b * fields[k][i].to_f64().unwrap_or(0.0);
                        let accept = if slices == 1 {
                            accept_delta(local, beta, &mut rng)
                        } else {
                            let align = si * f64::from(spins[up][i] + spins[down][i]);
                            if jp.is_infinite() && align != 0.0 {
                                align < 0.0
                            } else {
                                let perp = if align == 0.0 { 0.0 } else { 2.0 * jp * align };
                                accept_delta(local + perp, beta, &mut rng)
                            }
                        };
                        if accept {
                            sp.flip(&mut spins[k], &mut fields[k], i);
                        }
                    }
                }
                if slices > 1 {
                    for &i in &order {
                        let delta: f64 = (0..slices)
                            .map(|k| -2.0 * f64::from(spins[k][i]) * b * fields[k][i].to_f64().unwrap_or(0.0))
                            .sum();
                        if accept_delta(delta, beta, &mut rng) {
                            for k in 0..slices {
                                sp.flip(&mut spins[k], &mut fields[k], i);
                            }
                        }
                    }
                }
            }
            let best = spins
                .into_iter()
                .map(|s| (m.energy_unchecked(&s), s))
                .fold(None, |acc: Option<(T, Vec<i8>)>, cur| match acc {
                    Some(a) if a.0 <= cur.0 => Some(a),
                    _ => Some(cur),
                })
                .expect("at least one slice");
            finish_read(m, best.1, None, read)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = SampleSet::new(
        Domain::Spin,
        Provenance {
            engine: "sqa".into(),
            seed: p.seed,
            gauges: Vec::new(),
        },
    );
    samples.into_iter().for_each(|s| set.push(s));
    Ok(set)
}

#[inline]
fn accept_delta<R: Rng>(delta: f64, beta: f64, rng: &mut R) -> bool {
    delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anneal::SchedulePoint;

    fn chain(n: usize) -> IsingModel<f64> {
        IsingModel::from_parts(vec![0.0; n], (0..n - 1).map(|i| ((i, i + 1), -1.0)), 0.0).unwrap()
    }

    #[test]
    fn coupling_formula() {
        let j = transverse_coupling(1.0, 16, 0.05).unwrap();
        let expected = -0.4 * (1.0f64 / 0.8).tanh().ln();
        assert!((j - expected).abs() < 1e-15);
        assert_eq!(transverse_coupling(0.0, 16, 0.05).unwrap(), f64::INFINITY);
        assert!(transverse_coupling(-1.0, 16, 0.05).is_err());
    }

    #[test]
    fn chain_ground_state() {
        let p = SqaParams {
            num_reads: 40,
            sweeps: 300,
            seed: 5,
            ..Default::default()
        };
        let set = simulated_quantum_annealing(&chain(8), &p).unwrap();
        let hits = set.samples.iter().filter(|s| s.energy == -7.0).count();
        assert!(hits >= 38, "{hits}");
    }

    #[test]
    fn single_slice_is_classical() {
        let p = SqaParams {
            num_reads: 20,
            sweeps: 200,
            trotter_slices: 1,
            schedule: AnnealSchedule::custom(vec![
                SchedulePoint { s: 0.0, a: 0.0, b: 0.1 },
                SchedulePoint { s: 1.0, a: 0.0, b: 1.0 },
            ])
            .unwrap(),
            ..Default::default()
        };
        let set = simulated_quantum_annealing(&chain(5), &p).unwrap();
        assert!(set.samples.iter().all(|s| s.energy == -4.0));
        assert!(simulated_quantum_annealing(
            &chain(3),
            &SqaParams {
                temperature: 0.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
