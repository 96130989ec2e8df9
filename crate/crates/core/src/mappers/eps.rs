//! Multiple-fault diagnosis in an electrical power system.
//!
//! Circuit breakers form a rooted tree; power enters at the root. Each sensor
//! (ammeter) sits on one breaker and reads High iff every breaker on the path
//! from the root is healthy. With `x_i = 1` for a healthy breaker, `y_k = 1`
//! for a healthy sensor and `l_k` the readout:
//!
//! ```text
//! H = l_CB sum (1 - x_i) + l_S sum (1 - y_k) + l_path sum_k y_k g_k
//! g_k = l_k + f_k - 2 f_k l_k,   f_k = prod_{i in P_k} x_i
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::PolyObjective;
use crate::mappers::{VarLabel, VarMap};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpsWeights {
    pub path: f64,
    pub cb_fault: f64,
    pub sensor_fault: f64,
}

impl Default for EpsWeights {
    fn default() -> Self {
        Self {
            path: 1.0,
            cb_fault: 1.0,
            sensor_fault: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsNetwork {
    /// Parent breaker of each breaker; `None` for the root.
    pub parents: Vec<Option<usize>>,
    /// Breaker each sensor is attached to.
    pub sensors: Vec<usize>,
    /// Readout `l_k` per sensor: 1 High, 0 Low.
    pub readouts: Vec<Option<u8>>,
    #[serde(default)]
    pub weights: EpsWeights,
}

/// Faulty components of a diagnosis.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub faulty_breakers: Vec<usize>,
    pub faulty_sensors: Vec<usize>,
}

impl Diagnosis {
    pub fn num_faults(&self) -> usize {
        self.faulty_breakers.len() + self.faulty_sensors.len()
    }
}

impl EpsNetwork {
    /// Complete tree with the given branching and depth, breakers numbered
    /// breadth-first from the root, one sensor on every leaf. Readouts start
    /// as all High.
    pub fn tree(branching: usize, depth: usize) -> Self {
        let mut parents = vec![None];
        let mut level = vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &p in &level {
                for _ in 0..branching {
                    next.push(parents.len());
                    parents.push(Some(p));
                }
            }
            level = next;
        }
        let sensors = level;
        let readouts = vec![Some(1); sensors.len()];
        Self {
            parents,
            sensors,
            readouts,
            weights: EpsWeights::default(),
        }
    }

    pub fn num_breakers(&self) -> usize {
        self.parents.len()
    }

    pub fn num_sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_breakers() + self.num_sensors()
    }

    pub fn breaker_var(&self, i: usize) -> usize {
        i
    }

    pub fn sensor_var(&self, k: usize) -> usize {
        self.num_breakers() + k
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_breakers();
        let roots = self.parents.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::input(format!(
                "network must have exactly one root, found {roots}"
            )));
        }
        if self.parents.iter().flatten().any(|&p| p >= n) {
            return Err(Error::input("parent index out of range"));
        }
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = self.parents[cur] {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(Error::input("breaker parents contain a cycle"));
                }
            }
        }
        if let Some(&b) = self.sensors.iter().find(|&&b| b >= n) {
            return Err(Error::input(format!("sensor attached to unknown breaker {b}")));
        }
        if self.readouts.len() != self.num_sensors() {
            return Err(Error::input(format!(
                "{} readouts for {} sensors",
                self.readouts.len(),
                self.num_sensors()
            )));
        }
        for (k, r) in self.readouts.iter().enumerate() {
            match r {
                None => return Err(Error::input(format!("missing readout for sensor {k}"))),
                Some(v) if *v > 1 => return Err(Error::input(format!("readout {v} for sensor {k} is not 0 or 1"))),
                _ => {}
            }
        }
        let w = &self.weights;
        if !(w.path > 0.0 && w.cb_fault > 0.0 && w.sensor_fault > 0.0) {
            return Err(Error::input("diagnosis penalty weights must be positive"));
        }
        Ok(())
    }

    /// Breakers from the root down to sensor `k`'s breaker.
    pub fn path(&self, k: usize) -> Vec<usize> {
        let mut path = vec![self.sensors[k]];
        while let Some(p) = self.parents[*path.last().expect("non-empty")] {
            path.push(p);
        }
        path.reverse();
        path
    }

    pub fn paths(&self) -> Vec<Vec<usize>> {
        (0..self.num_sensors()).map(|k| self.path(k)).collect()
    }

    fn readout(&self, k: usize) -> u8 {
        self.readouts[k].expect("validated readout")
    }

    /// Readouts produced by a set of faults. A faulty sensor reports the
    /// opposite of what reaches it.
    pub fn readouts_for(&self, faults: &Diagnosis) -> Vec<Option<u8>> {
        (0..self.num_sensors())
            .map(|k| {
                let powered = self.path(k).iter().all(|b| !faults.faulty_breakers.contains(b));
                let honest = !faults.faulty_sensors.contains(&k);
                Some(u8::from(powered == honest))
            })
            .collect()
    }

    pub fn with_readouts_for(mut self, faults: &Diagnosis) -> Self {
        self.readouts = self.readouts_for(faults);
        self
    }

    pub fn decode(&self, bits: &[i8]) -> Diagnosis {
        Diagnosis {
            faulty_breakers: (0..self.num_breakers())
                .filter(|&i| bits[self.breaker_var(i)] == 0)
                .collect(),
            faulty_sensors: (0..self.num_sensors())
                .filter(|&k| bits[self.sensor_var(k)] == 0)
                .collect(),
        }
    }

    /// Direct check: every healthy sensor reads what the breaker states predict.
    pub fn is_consistent(&self, bits: &[i8]) -> bool {
        (0..self.num_sensors()).all(|k| {
            bits[self.sensor_var(k)] == 0
                || u8::from(self.path(k).iter().all(|&b| bits[self.breaker_var(b)] == 1)) == self.readout(k)
        })
    }

    /// Weighted fault count.
    pub fn fault_cost(&self, bits: &[i8]) -> f64 {
        let d = self.decode(bits);
        self.weights.cb_fault * d.faulty_breakers.len() as f64
            + self.weights.sensor_fault * d.faulty_sensors.len() as f64
    }
}

pub fn map_fault_diagnosis<T: Scalar>(net: &EpsNetwork) -> Result<(PolyObjective<T>, VarMap)> {
    net.validate()?;
    let nv = net.num_vars();
    let w_cb = T::from_f64_lossy(net.weights.cb_fault);
    let w_s = T::from_f64_lossy(net.weights.sensor_fault);
    let w_path = T::from_f64_lossy(net.weights.path);
    let mut h = PolyObjective::new(nv);
    for i in 0..net.num_breakers() {
        h.add_assign(&PolyObjective::complement(nv, net.breaker_var(i)).scaled(w_cb));
    }
    for k in 0..net.num_sensors() {
        h.add_assign(&PolyObjective::complement(nv, net.sensor_var(k)).scaled(w_s));
    }
    for k in 0..net.num_sensors() {
        let y = net.sensor_var(k);
        let mut f = PolyObjective::constant(nv, T::one());
        for b in net.path(k) {
            f = f.product(&PolyObjective::variable(nv, net.breaker_var(b)));
        }
        // g = l + f - 2 f l
        let g = if net.readout(k) == 1 {
            let mut g = PolyObjective::constant(nv, T::one());
            g.add_assign(&f.scaled(-T::one()));
            g
        } else {
            f
        };
        h.add_assign(&g.product(&PolyObjective::variable(nv, y)).scaled(w_path));
    }
    let labels = (0..net.num_breakers())
        .map(|index| VarLabel::Breaker { index })
        .chain((0..net.num_sensors()).map(|index| VarLabel::Sensor { index }))
        .collect();
    Ok((h, VarMap::new(labels)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{brute_force, reduce_degree_auto};

    /// Root with two children, one sensor on each child.
    fn small(readouts: [u8; 2]) -> EpsNetwork {
        EpsNetwork {
            parents: vec![None, Some(0), Some(0)],
            sensors: vec![1, 2],
            readouts: readouts.iter().map(|&r| Some(r)).collect(),
            weights: EpsWeights::default(),
        }
    }

    #[test]
    fn quaternary_tree_counts_and_paths() {
        let net = EpsNetwork::tree(4, 2);
        assert_eq!(net.num_breakers(), 21);
        assert_eq!(net.num_sensors(), 16);
        assert_eq!(net.path(0), vec![0, 1, 5]);
        assert_eq!(net.path(1), vec![0, 1, 6]);
        assert_eq!(net.path(15), vec![0, 4, 20]);
        let (h, _) = map_fault_diagnosis::<f64>(&net).unwrap();
        assert_eq!(h.num_vars(), 37);
        assert_eq!(h.degree(), 4);
    }

    #[test]
    fn all_healthy_all_high_is_zero() {
        let net = small([1, 1]);
        let (h, _) = map_fault_diagnosis::<f64>(&net).unwrap();
        assert_eq!(h.evaluate(&[1; 5]).unwrap(), 0.0);
    }

    #[test]
    fn root_fault_explains_two_low_readouts() {
        let net = small([0, 0]);
        let (h, _) = map_fault_diagnosis::<f64>(&net).unwrap();
        let r = reduce_degree_auto(&h).unwrap();
        let g = brute_force(&r.qubo).unwrap();
        assert_eq!(g.min_energy, 1.0);
        assert_eq!(g.states.len(), 1);
        assert_eq!(net.decode(&g.states[0][..5]).faulty_breakers, vec![0]);
    }

    #[test]
    fn missing_readout_is_rejected() {
        let mut net = small([1, 1]);
        net.readouts[1] = None;
        assert!(matches!(map_fault_diagnosis::<f64>(&net), Err(Error::Input(_))));
        net.readouts.pop();
        assert!(map_fault_diagnosis::<f64>(&net).is_err());
    }

    #[test]
    fn two_roots_are_rejected() {
        let mut net = small([1, 1]);
        net.parents[2] = None;
        assert!(net.validate().is_err());
    }

    #[test]
    fn planted_faults_generate_consistent_readouts() {
        let faults = Diagnosis {
            faulty_breakers: vec![1],
            faulty_sensors: vec![1],
        };
        let net = small([1, 1]).with_readouts_for(&faults);
        assert_eq!(net.readouts, vec![Some(0), Some(0)]);
        let mut bits = vec![1i8; 5];
        bits[1] = 0;
        bits[4] = 0;
        assert!(net.is_consistent(&bits));
    }
}
