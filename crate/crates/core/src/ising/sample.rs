use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{check_assignment, Domain, EnergyModel};
use crate::scalar::Scalar;

/// One recorded assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Sample<T> {
    pub values: Vec<i8>,
    pub energy: T,
    pub count: u64,
    /// Gauge the read was taken under, when gauge averaging was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<u32>,
    /// Read index within its gauge. Absent once samples are aggregated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub read: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub engine: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gauges: Vec<u32>,
}

/// Multiset of assignments with energies and occurrence counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SampleSet<T> {
    pub domain: Domain,
    pub samples: Vec<Sample<T>>,
    pub provenance: Provenance,
}

impl<T: Scalar> SampleSet<T> {
    pub fn new(domain: Domain, provenance: Provenance) -> Self {
        Self {
            domain,
            samples: Vec::new(),
            provenance,
        }
    }

    pub fn push(&mut self, sample: Sample<T>) {
        self.samples.push(sample);
    }

    pub fn total_count(&self) -> u64 {
        self.samples.iter().map(|s| s.count).sum()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Lowest stored energy; first such sample on ties.
    pub fn best(&self) -> Option<&Sample<T>> {
        self.samples
            .iter()
            .fold(None, |best: Option<&Sample<T>>, s| match best {
                Some(b) if b.energy <= s.energy => Some(b),
                _ => Some(s),
            })
    }

    /// Number of reads whose energy is within `tol` of `target`.
    pub fn count_at_or_below(&self, target: T, tol: T) -> u64 {
        self.samples
            .iter()
            .filter(|s| s.energy <= target + tol)
            .map(|s| s.count)
            .sum()
    }

    /// Checks domain, positive counts and that every stored energy matches
    /// re-evaluation within `tol`.
    pub fn check_against<M: EnergyModel<T>>(&self, model: &M, tol: T) -> Result<()> {
        if self.domain != M::DOMAIN {
            return Err(Error::input(format!(
                "sample domain {:?} does not match model domain {:?}",
                self.domain,
                M::DOMAIN
            )));
        }
        for (k, s) in self.samples.iter().enumerate() {
            check_assignment(&s.values, model.num_vars(), self.domain)?;
            if s.count == 0 {
                return Err(Error::input(format!("sample {k} has zero count")));
            }
            let e = model.energy_unchecked(&s.values);
            if (e - s.energy).abs() > tol {
                return Err(Error::input(format!(
                    "sample {k}: stored energy {} disagrees with re-evaluation {e}",
                    s.energy
                )));
            }
        }
        Ok(())
    }

    /// Merges identical assignments, summing counts and dropping read tags.
    /// Output is ordered by assignment.
    pub fn aggregated(&self) -> Self {
        let mut merged: BTreeMap<&[i8], (T, u64)> = BTreeMap::new();
        for s in &self.samples {
            merged
                .entry(&s.values)
                .and_modify(|e| e.1 += s.count)
                .or_insert((s.energy, s.count));
        }
        Self {
            domain: self.domain,
            samples: merged
                .into_iter()
                .map(|(v, (energy, count))| Sample {
                    values: v.to_vec(),
                    energy,
                    count,
                    gauge: None,
                    read: None,
                })
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Appends the samples of `other`, keeping their tags.
    pub fn extend_from(&mut self, other: SampleSet<T>) -> Result<()> {
        if other.domain != self.domain {
            return Err(Error::input("cannot merge sample sets of different domains"));
        }
        self.samples.extend(other.samples);
        for g in other.provenance.gauges {
            if !self.provenance.gauges.contains(&g) {
                self.provenance.gauges.push(g);
            }
        }
        Ok(())
    }
}
