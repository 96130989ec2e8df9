use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{brute_force, IsingModel};
use crate::parallel::substream;
use crate::scalar::Scalar;

/// Control errors on biases and couplers: a fixed offset plus Gaussian noise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub sigma_h: f64,
    pub sigma_j: f64,
    pub delta_h: f64,
    pub delta_j: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let all = [self.sigma_h, self.sigma_j, self.delta_h, self.delta_j];
        if all.iter().any(|v| !v.is_finite()) || self.sigma_h < 0.0 || self.sigma_j < 0.0 {
            return Err(Error::Parameter("noise widths must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// `h' = h + delta_h + N(0, sigma_h)` on every spin and
/// `J' = J + delta_J + N(0, sigma_J)` on every existing coupler.
///
/// The standard normal draws depend only on the seed, so models generated
/// with the same seed and different widths share their noise direction.
pub fn apply_noise<T: Scalar>(m: &IsingModel<T>, nm: &NoiseModel) -> Result<IsingModel<T>> {
    nm.validate()?;
    let mut rng = substream(nm.seed, "noise", 0);
    let mut out = m.clone();
    let mut perturb = |v: &mut T, sigma: f64, delta: f64| {
        let z: f64 = StandardNormal.sample(&mut rng);
        let shift = delta + sigma * z;
        if shift != 0.0 {
            *v = *v + T::from_f64_lossy(shift);
        }
    };
    for h in out.h_mut() {
        perturb(h, nm.sigma_h, nm.delta_h);
    }
    for j in out.couplings_mut().values_mut() {
        perturb(j, nm.sigma_j, nm.delta_j);
    }
    Ok(out)
}

/// True when every ground state of `original` is still a ground state of
/// `noisy`, up to the scalar's tie tolerance.
pub fn resilience_check<T: Scalar>(original: &IsingModel<T>, noisy: &IsingModel<T>) -> Result<bool> {
    if original.num_vars() != noisy.num_vars() {
        return Err(Error::input(format!(
            "models have {} and {} spins",
            original.num_vars(),
            noisy.num_vars()
        )));
    }
    let ground = brute_force(original)?;
    let noisy_min = brute_force(noisy)?.min_energy;
    Ok(ground
        .states
        .iter()
        .all(|s| noisy.energy_unchecked(s) <= noisy_min + T::tie_tolerance()))
}
