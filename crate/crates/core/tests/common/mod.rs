//! Reference implementations used as test oracles. They work on raw
//! coefficient lists and plain enumeration, sharing no code paths with the
//! library beyond reading coefficients out of its models.

#![allow(dead_code)]

use std::collections::BTreeMap;

use annealkit::ising::{IsingModel, PolyObjective, QuboModel};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Raw Ising coefficients.
#[derive(Clone, Debug)]
pub struct RawIsing {
    pub h: Vec<f64>,
    pub j: Vec<(usize, usize, f64)>,
    pub offset: f64,
}

impl RawIsing {
    pub fn of(m: &IsingModel<f64>) -> Self {
        Self {
            h: m.h().to_vec(),
            j: m.couplings().iter().map(|(&(a, b), &v)| (a, b, v)).collect(),
            offset: m.offset(),
        }
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, s: &[i8]) -> f64 {
        let mut e = self.offset;
        for (i, &hi) in self.h.iter().enumerate() {
            e += hi * f64::from(s[i]);
        }
        for &(a, b, v) in &self.j {
            e += v * f64::from(s[a]) * f64::from(s[b]);
        }
        e
    }

    pub fn model(&self) -> IsingModel<f64> {
        IsingModel::from_parts(self.h.clone(), self.j.iter().map(|&(a, b, v)| ((a, b), v)), self.offset).unwrap()
    }
}

pub fn qubo_energy(q: &QuboModel<f64>, x: &[i8]) -> f64 {
    let mut e = q.offset();
    for (i, &a) in q.linear().iter().enumerate() {
        e += a * f64::from(x[i]);
    }
    for (&(i, j), &b) in q.quadratic() {
        e += b * f64::from(x[i]) * f64::from(x[j]);
    }
    e
}

/// Value of a polynomial over bits, term by term.
pub fn poly_value<T: annealkit::Scalar>(p: &PolyObjective<T>, x: &[i8]) -> T {
    p.terms()
        .iter()
        .filter(|(vars, _)| vars.iter().all(|&v| x[v] == 1))
        .fold(T::zero(), |acc, (_, &c)| acc + c)
}

/// Spin assignment number `idx`: bit `k` of `idx` set means `s_k = +1`.
pub fn spins(idx: u64, n: usize) -> Vec<i8> {
    (0..n).map(|k| if idx >> k & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn bits(idx: u64, n: usize) -> Vec<i8> {
    (0..n).map(|k| (idx >> k & 1) as i8).collect()
}

/// Every energy of a spin model, indexed by assignment number.
pub fn spectrum(raw: &RawIsing) -> Vec<f64> {
    (0..1u64 << raw.n()).map(|i| raw.energy(&spins(i, raw.n()))).collect()
}

/// Exhaustive minimum and minimizers, with tolerance `tol` for ties.
pub fn ground_states(raw: &RawIsing, tol: f64) -> (f64, Vec<Vec<i8>>) {
    let spec = spectrum(raw);
    let min = spec.iter().copied().fold(f64::INFINITY, f64::min);
    let states = (0..spec.len())
        .filter(|&i| spec[i] <= min + tol)
        .map(|i| spins(i as u64, raw.n()))
        .collect();
    (min, states)
}

/// Exact Boltzmann probabilities at inverse temperature `beta`.
pub fn boltzmann(raw: &RawIsing, beta: f64) -> Vec<f64> {
    let spec = spectrum(raw);
    let min = spec.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = spec.iter().map(|e| (-beta * (e - min)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// Index of a spin vector in the enumeration order of [`spins`].
pub fn index_of(s: &[i8]) -> usize {
    s.iter()
        .enumerate()
        .filter(|(_, &v)| v > 0)
        .map(|(k, _)| 1usize << k)
        .sum()
}

/// Draws `count` assignments from a discrete distribution by inversion.
pub fn draw(probs: &[f64], count: usize, r: &mut impl Rng) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..count {
        let u = r.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        counts[k] += 1;
    }
    counts
}

/// Random dense spin model with coefficients uniform in `[-scale, scale]`.
pub fn random_ising(n: usize, density: f64, scale: f64, r: &mut impl Rng) -> RawIsing {
    let h = (0..n).map(|_| r.random_range(-scale..=scale)).collect();
    let mut j = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.random::<f64>() < density {
                j.push((a, b, r.random_range(-scale..=scale)));
            }
        }
    }
    RawIsing { h, j, offset: 0.0 }
}

/// Standard normal CDF by composite Simpson quadrature of the density.
pub fn normal_cdf(x: f64) -> f64 {
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let (a, b) = if x < 0.0 { (x, 0.0) } else { (0.0, x) };
    let n = 2000;
    let h = (b - a) / n as f64;
    let mut sum = density(a) + density(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * density(a + k as f64 * h);
    }
    let integral = sum * h / 3.0;
    if x < 0.0 {
        0.5 - integral
    } else {
        0.5 + integral
    }
}

/// Chi-square test of homogeneity between two histograms; returns the p-value.
/// Categories with fewer than 5 expected counts in either sample are pooled.
pub fn chi_square_p(a: &BTreeMap<i64, u64>, b: &BTreeMap<i64, u64>) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let keys: Vec<i64> = a
        .keys()
        .chain(b.keys())
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let (na, nb) = (a.values().sum::<u64>() as f64, b.values().sum::<u64>() as f64);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pending = (0.0, 0.0);
    for k in keys {
        pending.0 += *a.get(&k).unwrap_or(&0) as f64;
        pending.1 += *b.get(&k).unwrap_or(&0) as f64;
        let total = pending.0 + pending.1;
        if total * na.min(nb) / (na + nb) >= 5.0 {
            cells.push(pending);
            pending = (0.0, 0.0);
        }
    }
    if pending.0 + pending.1 > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += pending.0;
                last.1 += pending.1;
            }
            None => cells.push(pending),
        }
    }
    if cells.len() < 2 {
        return 1.0;
    }
    let n = na + nb;
    let mut stat = 0.0;
    for &(x, y) in &cells {
        let col = x + y;
        for (obs, row) in [(x, na), (y, nb)] {
            let exp = row * col / n;
            stat += (obs - exp).powi(2) / exp;
        }
    }
    let dist = ChiSquared::new((cells.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}
