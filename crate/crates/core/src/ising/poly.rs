use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{check_assignment, Domain, QuboModel};
use crate::scalar::Scalar;

/// Pseudo-Boolean polynomial over binary variables.
///
/// Keys are strictly sorted index sets; the empty key is the constant term.
/// Since `x * x == x` on binary variables, repeated indices collapse when a
/// term is inserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PolyObjective<T> {
    num_vars: usize,
    #[serde(with = "term_list")]
    terms: BTreeMap<Vec<usize>, T>,
}

impl<T: Scalar> PolyObjective<T> {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, value: T) -> Self {
        let mut p = Self::new(num_vars);
        p.add_term([], value);
        p
    }

    pub fn variable(num_vars: usize, index: usize) -> Self {
        let mut p = Self::new(num_vars);
        p.add_term([index], T::one());
        p
    }

    /// `1 - x_index`.
    pub fn complement(num_vars: usize, index: usize) -> Self {
        let mut p = Self::constant(num_vars, T::one());
        p.add_term([index], -T::one());
        p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, T> {
        &self.terms
    }

    pub fn constant_term(&self) -> T {
        self.terms.get(&Vec::new()).copied().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Adds `coeff * prod(vars)`. Panics if an index is out of range.
    pub fn add_term(&mut self, vars: impl IntoIterator<Item = usize>, coeff: T) {
        let mut key: Vec<usize> = vars.into_iter().collect();
        key.sort_unstable();
        key.dedup();
        if let Some(&last) = key.last() {
            assert!(
                last < self.num_vars,
                "variable {last} out of range for {} variables",
                self.num_vars
            );
        }
        self.accumulate(key, coeff);
    }

    pub(crate) fn accumulate(&mut self, key: Vec<usize>, coeff: T) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &PolyObjective<T>) {
        assert_eq!(self.num_vars, other.num_vars, "variable count mismatch");
        for (k, &v) in &other.terms {
            self.accumulate(k.clone(), v);
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = Self::new(self.num_vars);
        for (k, &v) in &self.terms {
            out.accumulate(k.clone(), v * factor);
        }
        out
    }

    pub fn product(&self, other: &PolyObjective<T>) -> Self {
        assert_eq!(self.num_vars, other.num_vars, "variable count mismatch");
        let mut out = Self::new(self.num_vars);
        for (ka, &va) in &self.terms {
            for (kb, &vb) in &other.terms {
                let mut key: Vec<usize> = ka.iter().chain(kb.iter()).copied().collect();
                key.sort_unstable();
                key.dedup();
                out.accumulate(key, va * vb);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.terms {
            if !v.is_finite_value() {
                return Err(Error::input(format!("non-finite coefficient on term {k:?}")));
            }
            if k.windows(2).any(|w| w[0] >= w[1]) || k.last().is_some_and(|&l| l >= self.num_vars) {
                return Err(Error::input(format!("malformed term key {k:?}")));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, bits: &[i8]) -> Result<T> {
        check_assignment(bits, self.num_vars, Domain::Binary)?;
        Ok(self.energy_unchecked(bits))
    }

    pub(crate) fn energy_unchecked(&self, bits: &[i8]) -> T {
        self.terms
            .iter()
            .filter(|(k, _)| k.iter().all(|&i| bits[i] == 1))
            .fold(T::zero(), |acc, (_, &v)| acc + v)
    }

    /// Replaces the listed variables by constants. The variable count is kept,
    /// the substituted variables simply no longer appear in any term.
    pub fn substitute(&self, fixed: &[(usize, bool)]) -> Self {
        let mut value = vec![None; self.num_vars];
        for &(i, v) in fixed {
            value[i] = Some(v);
        }
        let mut out = Self::new(self.num_vars);
        'terms: for (k, &c) in &self.terms {
            let mut key = Vec::with_capacity(k.len());
            for &i in k {
                match value[i] {
                    Some(false) => continue 'terms,
                    Some(true) => {}
                    None => key.push(i),
                }
            }
            out.accumulate(key, c);
        }
        out
    }

    /// Drops variables that appear in no term and renumbers the rest densely.
    /// Returns the compacted polynomial and, for each new index, the old one.
    pub fn compact(&self) -> (Self, Vec<usize>) {
        let mut used = vec![false; self.num_vars];
        for k in self.terms.keys() {
            for &i in k {
                used[i] = true;
            }
        }
        let kept: Vec<usize> = (0..self.num_vars).filter(|&i| used[i]).collect();
        let mut new_index = vec![usize::MAX; self.num_vars];
        for (n, &o) in kept.iter().enumerate() {
            new_index[o] = n;
        }
        let mut out = Self::new(kept.len());
        for (k, &c) in &self.terms {
            out.accumulate(k.iter().map(|&i| new_index[i]).collect(), c);
        }
        (out, kept)
    }

    /// Converts a polynomial of degree at most two into a QUBO.
    pub fn to_qubo(&self) -> Result<QuboModel<T>> {
        if self.degree() > 2 {
            return Err(Error::input(format!(
                "polynomial has degree {}, reduce it before converting to a QUBO",
                self.degree()
            )));
        }
        let mut q = QuboModel::new(self.num_vars);
        for (k, &c) in &self.terms {
            match k.as_slice() {
                [] => q.add_offset(c),
                [i] => q.add_linear(*i, c),
                [i, j] => q.add_quadratic(*i, *j, c),
                _ => unreachable!(),
            }
        }
        Ok(q)
    }
}

impl<T: Scalar> From<&QuboModel<T>> for PolyObjective<T> {
    fn from(q: &QuboModel<T>) -> Self {
        let mut p = Self::constant(q.num_vars(), q.offset());
        for (i, &a) in q.linear().iter().enumerate() {
            p.accumulate(vec![i], a);
        }
        for (&(i, j), &b) in q.quadratic() {
            p.accumulate(vec![i, j], b);
        }
        p
    }
}

mod term_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Term<T> {
        vars: Vec<usize>,
        coeff: T,
    }

    pub fn serialize<S: Serializer, T: Serialize>(
        terms: &BTreeMap<Vec<usize>, T>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(terms.iter().map(|(k, v)| Term {
            vars: k.clone(),
            coeff: v,
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Deserialize<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<Vec<usize>, T>, D::Error> {
        let list: Vec<Term<T>> = Vec::deserialize(d)?;
        Ok(list.into_iter().map(|t| (t.vars, t.coeff)).collect())
    }
}
