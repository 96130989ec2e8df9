use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Value domain of an assignment vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Entries in `{0, 1}`.
    Binary,
    /// Entries in `{-1, +1}`.
    Spin,
}

impl Domain {
    pub fn contains(self, v: i8) -> bool {
        match self {
            Domain::Binary => v == 0 || v == 1,
            Domain::Spin => v == -1 || v == 1,
        }
    }
}

pub(crate) fn check_assignment(x: &[i8], num_vars: usize, domain: Domain) -> Result<()> {
    if x.len() != num_vars {
        return Err(Error::input(format!(
            "assignment has length {}, model has {num_vars} variables",
            x.len()
        )));
    }
    if let Some((i, v)) = x.iter().enumerate().find(|(_, &v)| !domain.contains(v)) {
        return Err(Error::input(format!(
            "value {v} at position {i} is not a valid {domain:?} value"
        )));
    }
    Ok(())
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

fn accumulate<T: Scalar>(map: &mut BTreeMap<(usize, usize), T>, key: (usize, usize), v: T) {
    if v.is_zero() {
        return;
    }
    let sum = map.get(&key).copied().unwrap_or_else(T::zero) + v;
    if sum.is_zero() {
        map.remove(&key);
    } else {
        map.insert(key, sum);
    }
}

/// Wire format shared by both quadratic models.
#[derive(Serialize, Deserialize)]
struct ModelWire<T> {
    num_vars: usize,
    linear: Vec<T>,
    quadratic: Vec<(usize, usize, T)>,
    offset: T,
}

/// Variable count, linear terms, couplings and offset.
type Parts<T> = (usize, Vec<T>, BTreeMap<(usize, usize), T>, T);

fn from_wire<T: Scalar>(w: ModelWire<T>) -> Result<Parts<T>> {
    if w.linear.len() != w.num_vars {
        return Err(Error::input(format!(
            "linear has {} entries but num_vars is {}",
            w.linear.len(),
            w.num_vars
        )));
    }
    let mut quadratic = BTreeMap::new();
    for (i, j, v) in w.quadratic {
        if i >= j || j >= w.num_vars {
            return Err(Error::input(format!(
                "quadratic key ({i}, {j}) must satisfy i < j < num_vars"
            )));
        }
        if quadratic.insert((i, j), v).is_some() {
            return Err(Error::input(format!("duplicate quadratic key ({i}, {j})")));
        }
    }
    for v in w
        .linear
        .iter()
        .chain(quadratic.values())
        .chain(std::iter::once(&w.offset))
    {
        if !v.is_finite_value() {
            return Err(Error::input("non-finite coefficient"));
        }
    }
    quadratic.retain(|_, v: &mut T| !v.is_zero());
    Ok((w.num_vars, w.linear, quadratic, w.offset))
}

/// `offset + sum a_i x_i + sum_{i<j} b_ij x_i x_j` over `x in {0,1}^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboModel<T> {
    num_vars: usize,
    linear: Vec<T>,
    quadratic: BTreeMap<(usize, usize), T>,
    offset: T,
}

impl<T: Scalar> QuboModel<T> {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            linear: vec![T::zero(); num_vars],
            quadratic: BTreeMap::new(),
            offset: T::zero(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn linear(&self) -> &[T] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), T> {
        &self.quadratic
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn add_offset(&mut self, v: T) {
        self.offset = self.offset + v;
    }

    pub fn add_linear(&mut self, i: usize, v: T) {
        self.linear[i] = self.linear[i] + v;
    }

    /// Adds `v * x_i * x_j`; a diagonal entry lands in the linear part.
    pub fn add_quadratic(&mut self, i: usize, j: usize, v: T) {
        assert!(i < self.num_vars && j < self.num_vars, "index out of range");
        if i == j {
            self.add_linear(i, v);
        } else {
            accumulate(&mut self.quadratic, ordered(i, j), v);
        }
    }

    pub fn evaluate(&self, x: &[i8]) -> Result<T> {
        check_assignment(x, self.num_vars, Domain::Binary)?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[i8]) -> T {
        let mut e = self.offset;
        for (i, &a) in self.linear.iter().enumerate() {
            if x[i] == 1 {
                e = e + a;
            }
        }
        for (&(i, j), &b) in &self.quadratic {
            if x[i] == 1 && x[j] == 1 {
                e = e + b;
            }
        }
        e
    }

    /// Substitutes `x = (s + 1) / 2`.
    pub fn to_ising(&self) -> IsingModel<T> {
        let half = T::half();
        let quarter = T::quarter();
        let mut m = IsingModel::new(self.num_vars);
        for (i, &a) in self.linear.iter().enumerate() {
            m.h[i] = m.h[i] + a * half;
            m.offset = m.offset + a * half;
        }
        for (&(i, j), &b) in &self.quadratic {
            let q = b * quarter;
            accumulate(&mut m.couplings, (i, j), q);
            m.h[i] = m.h[i] + q;
            m.h[j] = m.h[j] + q;
            m.offset = m.offset + q;
        }
        m.offset = m.offset + self.offset;
        m
    }

    pub fn interaction_edges(&self) -> Vec<(usize, usize)> {
        self.quadratic.keys().copied().collect()
    }

    pub fn validate(&self) -> Result<()> {
        from_wire(self.to_wire()).map(|_| ())
    }

    fn to_wire(&self) -> ModelWire<T> {
        ModelWire {
            num_vars: self.num_vars,
            linear: self.linear.clone(),
            quadratic: self.quadratic.iter().map(|(&(i, j), &v)| (i, j, v)).collect(),
            offset: self.offset,
        }
    }
}

/// `offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j` over `s in {-1,+1}^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel<T> {
    num_vars: usize,
    h: Vec<T>,
    couplings: BTreeMap<(usize, usize), T>,
    offset: T,
}

impl<T: Scalar> IsingModel<T> {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            h: vec![T::zero(); num_vars],
            couplings: BTreeMap::new(),
            offset: T::zero(),
        }
    }

    pub fn from_parts(h: Vec<T>, couplings: impl IntoIterator<Item = ((usize, usize), T)>, offset: T) -> Result<Self> {
        let quadratic = couplings.into_iter().map(|((i, j), v)| (i, j, v)).collect();
        let (num_vars, h, couplings, offset) = from_wire(ModelWire {
            num_vars: h.len(),
            linear: h,
            quadratic,
            offset,
        })?;
        Ok(Self {
            num_vars,
            h,
            couplings,
            offset,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn h(&self) -> &[T] {
        &self.h
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), T> {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> T {
        self.couplings.get(&ordered(i, j)).copied().unwrap_or_else(T::zero)
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn set_offset(&mut self, v: T) {
        self.offset = v;
    }

    pub fn add_h(&mut self, i: usize, v: T) {
        self.h[i] = self.h[i] + v;
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, v: T) {
        assert!(i != j, "self-coupling on spin {i}");
        assert!(i < self.num_vars && j < self.num_vars, "index out of range");
        accumulate(&mut self.couplings, ordered(i, j), v);
    }

    pub fn evaluate(&self, s: &[i8]) -> Result<T> {
        check_assignment(s, self.num_vars, Domain::Spin)?;
        Ok(self.energy_unchecked(s))
    }

    pub(crate) fn energy_unchecked(&self, s: &[i8]) -> T {
        let sign = |v: T, positive: bool| if positive { v } else { -v };
        let mut e = self.offset;
        for (i, &h) in self.h.iter().enumerate() {
            e = e + sign(h, s[i] > 0);
        }
        for (&(i, j), &jv) in &self.couplings {
            e = e + sign(jv, s[i] == s[j]);
        }
        e
    }

    /// Substitutes `s = 2x - 1`.
    pub fn to_qubo(&self) -> QuboModel<T> {
        let two = T::two();
        let four = two * two;
        let mut q = QuboModel::new(self.num_vars);
        for (i, &h) in self.h.iter().enumerate() {
            q.linear[i] = q.linear[i] + two * h;
            q.offset = q.offset - h;
        }
        for (&(i, j), &jv) in &self.couplings {
            accumulate(&mut q.quadratic, (i, j), four * jv);
            q.linear[i] = q.linear[i] - two * jv;
            q.linear[j] = q.linear[j] - two * jv;
            q.offset = q.offset + jv;
        }
        q.offset = q.offset + self.offset;
        q
    }

    /// Multiplies every coefficient, offset included, by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let mut out = Self::new(self.num_vars);
        for (i, &h) in self.h.iter().enumerate() {
            out.h[i] = h * c;
        }
        for (&k, &v) in &self.couplings {
            accumulate(&mut out.couplings, k, v * c);
        }
        out.offset = self.offset * c;
        out
    }

    /// Largest absolute bias or coupling.
    pub fn max_abs_coefficient(&self) -> T {
        crate::scalar::max_abs(self.h.iter().chain(self.couplings.values()).copied())
    }

    pub fn interaction_edges(&self) -> Vec<(usize, usize)> {
        self.couplings.keys().copied().collect()
    }

    /// Per-spin neighbour lists `(neighbour, J)`, sorted by neighbour.
    pub fn adjacency(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.num_vars];
        for (&(i, j), &v) in &self.couplings {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        for a in &mut adj {
            a.sort_by_key(|&(n, _)| n);
        }
        adj
    }

    pub fn validate(&self) -> Result<()> {
        from_wire(self.to_wire()).map(|_| ())
    }

    fn to_wire(&self) -> ModelWire<T> {
        ModelWire {
            num_vars: self.num_vars,
            linear: self.h.clone(),
            quadratic: self.couplings.iter().map(|(&(i, j), &v)| (i, j, v)).collect(),
            offset: self.offset,
        }
    }

    pub(crate) fn h_mut(&mut self) -> &mut [T] {
        &mut self.h
    }

    pub(crate) fn couplings_mut(&mut self) -> &mut BTreeMap<(usize, usize), T> {
        &mut self.couplings
    }
}

macro_rules! wire_serde {
    ($ty:ident) => {
        impl<T: Scalar + Serialize> Serialize for $ty<T> {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                self.to_wire().serialize(s)
            }
        }

        impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for $ty<T> {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let wire = ModelWire::<T>::deserialize(d)?;
                let (num_vars, linear, quadratic, offset) = from_wire(wire).map_err(serde::de::Error::custom)?;
                Ok(Self::from_validated(num_vars, linear, quadratic, offset))
            }
        }
    };
}

impl<T> QuboModel<T> {
    fn from_validated(num_vars: usize, linear: Vec<T>, quadratic: BTreeMap<(usize, usize), T>, offset: T) -> Self {
        Self {
            num_vars,
            linear,
            quadratic,
            offset,
        }
    }
}

impl<T> IsingModel<T> {
    fn from_validated(num_vars: usize, h: Vec<T>, couplings: BTreeMap<(usize, usize), T>, offset: T) -> Self {
        Self {
            num_vars,
            h,
            couplings,
            offset,
        }
    }
}

wire_serde!(QuboModel);
wire_serde!(IsingModel);

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn evaluate_examples() {
        let mut q = QuboModel::<f64>::new(1);
        q.add_linear(0, 1.0);
        assert_eq!(q.evaluate(&[0]).unwrap(), 0.0);

        let mut q = QuboModel::<f64>::new(2);
        q.add_linear(0, 1.0);
        q.add_linear(1, 1.0);
        q.add_quadratic(0, 1, -2.0);
        assert_eq!(q.evaluate(&[1, 1]).unwrap(), 0.0);

        let m = IsingModel::from_parts(vec![1.0], [], 0.0).unwrap();
        assert_eq!(m.evaluate(&[-1]).unwrap(), -1.0);
    }

    #[test]
    fn evaluate_rejects_bad_assignments() {
        let q = QuboModel::<f64>::new(2);
        assert!(matches!(q.evaluate(&[0]), Err(Error::Input(_))));
        assert!(matches!(q.evaluate(&[0, -1]), Err(Error::Input(_))));
        let m = IsingModel::<f64>::new(2);
        assert!(matches!(m.evaluate(&[1, 0]), Err(Error::Input(_))));
    }

    #[test]
    fn single_variable_qubo_to_ising() {
        let mut q = QuboModel::new(1);
        q.add_linear(0, r(1, 1));
        let m = q.to_ising();
        assert_eq!(m.h(), &[r(1, 2)]);
        assert_eq!(m.offset(), r(1, 2));
    }

    #[test]
    fn product_qubo_to_ising() {
        let mut q = QuboModel::new(2);
        q.add_quadratic(0, 1, r(1, 1));
        let m = q.to_ising();
        assert_eq!(m.coupling(0, 1), r(1, 4));
        assert_eq!(m.h(), &[r(1, 4), r(1, 4)]);
        assert_eq!(m.offset(), r(1, 4));
    }

    #[test]
    fn ising_to_qubo_examples() {
        let m = IsingModel::from_parts(vec![r(1, 2)], [], r(1, 2)).unwrap();
        let q = m.to_qubo();
        assert_eq!(q.linear(), &[r(1, 1)]);
        assert_eq!(q.offset(), r(0, 1));
        assert!(q.quadratic().is_empty());

        let m = IsingModel::from_parts(vec![r(0, 1), r(0, 1)], [((0, 1), r(1, 1))], r(0, 1)).unwrap();
        let q = m.to_qubo();
        assert_eq!(q.quadratic().get(&(0, 1)), Some(&r(4, 1)));
        assert_eq!(q.linear(), &[r(-2, 1), r(-2, 1)]);
        assert_eq!(q.offset(), r(1, 1));
    }

    #[test]
    fn diagonal_quadratic_is_linear() {
        let mut q = QuboModel::<f64>::new(2);
        q.add_quadratic(1, 1, 3.0);
        assert_eq!(q.linear(), &[0.0, 3.0]);
        assert!(q.quadratic().is_empty());
    }

    #[test]
    fn json_shape_and_validation() {
        let mut q = QuboModel::<f64>::new(2);
        q.add_linear(0, 0.1);
        q.add_quadratic(1, 0, -2.5);
        q.add_offset(1.0 / 3.0);
        let text = serde_json::to_string(&q).unwrap();
        assert_eq!(
            text,
            r#"{"num_vars":2,"linear":[0.1,0.0],"quadratic":[[0,1,-2.5]],"offset":0.3333333333333333}"#
        );
        let back: QuboModel<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);

        let bad = r#"{"num_vars":2,"linear":[0,0],"quadratic":[[1,0,1.0]],"offset":0}"#;
        assert!(serde_json::from_str::<QuboModel<f64>>(bad).is_err());
        let short = r#"{"num_vars":3,"linear":[0,0],"quadratic":[],"offset":0}"#;
        assert!(serde_json::from_str::<IsingModel<f64>>(short).is_err());
    }
}
