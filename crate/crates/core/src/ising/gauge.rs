use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{Domain, IsingModel, SampleSet};
use crate::scalar::Scalar;

/// Per-spin sign relabelling `s' = g s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct Gauge(Vec<i8>);

impl Gauge {
    pub fn identity(n: usize) -> Self {
        Gauge(vec![1; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Gauge((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&g| g == 1)
    }

    /// Maps spins elementwise; the map is its own inverse.
    pub fn transform(&self, spins: &[i8]) -> Vec<i8> {
        spins.iter().zip(&self.0).map(|(&s, &g)| s * g).collect()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::input(format!(
                "gauge has length {}, model has {n} spins",
                self.0.len()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<i8>> for Gauge {
    type Error = Error;

    fn try_from(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&g| g != 1 && g != -1) {
            return Err(Error::input("gauge entries must be +1 or -1"));
        }
        Ok(Gauge(signs))
    }
}

impl From<Gauge> for Vec<i8> {
    fn from(g: Gauge) -> Self {
        g.0
    }
}

/// `h'_j = g_j h_j`, `J'_ij = g_i g_j J_ij`; the offset is unchanged.
pub fn apply_gauge<T: Scalar>(m: &IsingModel<T>, g: &Gauge) -> Result<IsingModel<T>> {
    g.check_len(m.num_vars())?;
    let flip = |v: T, sign: i8| if sign < 0 { -v } else { v };
    let mut out = m.clone();
    for (h, &sign) in out.h_mut().iter_mut().zip(g.signs()) {
        *h = flip(*h, sign);
    }
    for (&(i, j), v) in out.couplings_mut().iter_mut() {
        *v = flip(*v, g.signs()[i] * g.signs()[j]);
    }
    Ok(out)
}

/// Maps samples of the gauged model back via `s_j = g_j s'_j` and re-evaluates
/// them under `original`. Fails if a stored energy disagrees with the
/// re-evaluated one.
pub fn decode_gauge<T: Scalar>(samples: &SampleSet<T>, g: &Gauge, original: &IsingModel<T>) -> Result<SampleSet<T>> {
    if samples.domain != Domain::Spin {
        return Err(Error::input("gauge decoding needs spin-domain samples"));
    }
    g.check_len(original.num_vars())?;
    let mut out = SampleSet::new(Domain::Spin, samples.provenance.clone());
    for s in &samples.samples {
        if s.values.len() != g.len() {
            return Err(Error::input("sample length does not match gauge"));
        }
        let values = g.transform(&s.values);
        let energy = original.evaluate(&values)?;
        if (energy - s.energy).abs() > T::tie_tolerance() {
            return Err(Error::input(format!(
                "decoded energy {energy} differs from stored gauged energy {}",
                s.energy
            )));
        }
        let mut d = s.clone();
        d.values = values;
        d.energy = energy;
        out.push(d);
    }
    Ok(out)
}
