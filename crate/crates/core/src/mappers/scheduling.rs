//! Time-indexed scheduling of unit-length jobs.
//!
//! Bit `x_{j,m,t}` runs job `j` on machine `m` in slot `t`. Hard constraints
//! are quadratic penalties:
//!
//! * each job runs exactly once: `w_a (sum_{m,t} x_{j,m,t} - 1)^2`
//! * one job per machine and slot: `w_c x_{j,m,t} x_{j',m,t}`
//! * precedence `a -> b`: `w_p x_{a,m,t} x_{b,m',t'}` whenever `t' <= t`
//! * ineligible machines: `w_a x_{j,m,t}`
//!
//! Per-(job, slot) priority costs enter as a linear field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::QuboModel;
use crate::mappers::{VarLabel, VarMap};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulingWeights {
    pub assignment: f64,
    pub capacity: f64,
    pub precedence: f64,
}

impl Default for SchedulingWeights {
    fn default() -> Self {
        Self {
            assignment: 1.0,
            capacity: 1.0,
            precedence: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulingInstance {
    pub num_jobs: usize,
    pub num_machines: usize,
    pub num_slots: usize,
    /// Machines each job may use; `None` means every machine.
    #[serde(default)]
    pub eligible: Option<Vec<Vec<usize>>>,
    /// Cost of running job `j` in slot `t`, indexed `[j][t]`.
    #[serde(default)]
    pub priority: Option<Vec<Vec<f64>>>,
    /// Pairs `(a, b)`: job `a` must finish before job `b` starts.
    #[serde(default)]
    pub precedence: Vec<(usize, usize)>,
    #[serde(default)]
    pub weights: SchedulingWeights,
}

/// Placement of a job: `(machine, slot)`.
pub type Placement = (usize, usize);

impl SchedulingInstance {
    pub fn new(num_jobs: usize, num_machines: usize, num_slots: usize) -> Self {
        Self {
            num_jobs,
            num_machines,
            num_slots,
            eligible: None,
            priority: None,
            precedence: Vec::new(),
            weights: SchedulingWeights::default(),
        }
    }

    pub fn with_slots(&self, num_slots: usize) -> Self {
        let mut out = self.clone();
        out.num_slots = num_slots;
        if let Some(p) = &mut out.priority {
            for row in p {
                row.resize(num_slots, 0.0);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_jobs == 0 || self.num_machines == 0 || self.num_slots == 0 {
            return Err(Error::input("scheduling needs at least one job, machine and slot"));
        }
        if let Some(e) = &self.eligible {
            if e.len() != self.num_jobs || e.iter().flatten().any(|&m| m >= self.num_machines) {
                return Err(Error::input(
                    "eligibility lists must cover every job with valid machines",
                ));
            }
        }
        if let Some(p) = &self.priority {
            if p.len() != self.num_jobs || p.iter().any(|row| row.len() != self.num_slots) {
                return Err(Error::input("priority table must be num_jobs x num_slots"));
            }
            if p.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::input("priority costs must be finite"));
            }
        }
        for &(a, b) in &self.precedence {
            if a >= self.num_jobs || b >= self.num_jobs || a == b {
                return Err(Error::input(format!("invalid precedence pair ({a}, {b})")));
            }
        }
        if !self.precedence_is_acyclic() {
            return Err(Error::input("precedence graph has a cycle"));
        }
        let w = &self.weights;
        if !(w.assignment > 0.0 && w.capacity > 0.0 && w.precedence > 0.0) {
            return Err(Error::input("scheduling penalty weights must be positive"));
        }
        Ok(())
    }

    fn precedence_is_acyclic(&self) -> bool {
        let mut indegree = vec![0usize; self.num_jobs];
        for &(_, b) in &self.precedence {
            indegree[b] += 1;
        }
        let mut ready: Vec<usize> = (0..self.num_jobs).filter(|&j| indegree[j] == 0).collect();
        let mut seen = 0;
        while let Some(j) = ready.pop() {
            seen += 1;
            for &(a, b) in &self.precedence {
                if a == j {
                    indegree[b] -= 1;
                    if indegree[b] == 0 {
                        ready.push(b);
                    }
                }
            }
        }
        seen == self.num_jobs
    }

    pub fn num_vars(&self) -> usize {
        self.num_jobs * self.num_machines * self.num_slots
    }

    pub fn var(&self, job: usize, machine: usize, slot: usize) -> usize {
        (job * self.num_machines + machine) * self.num_slots + slot
    }

    pub fn is_eligible(&self, job: usize, machine: usize) -> bool {
        self.eligible.as_ref().is_none_or(|e| e[job].contains(&machine))
    }

    pub fn priority_cost(&self, job: usize, slot: usize) -> f64 {
        self.priority.as_ref().map_or(0.0, |p| p[job][slot])
    }

    /// Placement per job, when every job is placed exactly once.
    pub fn decode(&self, bits: &[i8]) -> Option<Vec<Placement>> {
        (0..self.num_jobs)
            .map(|j| {
                let mut set = (0..self.num_machines)
                    .flat_map(|m| (0..self.num_slots).map(move |t| (m, t)))
                    .filter(|&(m, t)| bits[self.var(j, m, t)] == 1);
                match (set.next(), set.next()) {
                    (Some(p), None) => Some(p),
                    _ => None,
                }
            })
            .collect()
    }

    /// Checks a decoded schedule directly against the constraints.
    pub fn is_feasible(&self, schedule: &[Placement]) -> bool {
        if schedule.len() != self.num_jobs {
            return false;
        }
        let placed_ok = schedule
            .iter()
            .enumerate()
            .all(|(j, &(m, t))| m < self.num_machines && t < self.num_slots && self.is_eligible(j, m));
        let no_clash = (0..self.num_jobs).all(|a| (a + 1..self.num_jobs).all(|b| schedule[a] != schedule[b]));
        let ordered = self.precedence.iter().all(|&(a, b)| schedule[a].1 < schedule[b].1);
        placed_ok && no_clash && ordered
    }

    /// Priority objective of an assignment: sum of costs of every set bit.
    pub fn priority_value(&self, bits: &[i8]) -> f64 {
        let mut total = 0.0;
        for j in 0..self.num_jobs {
            for m in 0..self.num_machines {
                for t in 0..self.num_slots {
                    if bits[self.var(j, m, t)] == 1 {
                        total += self.priority_cost(j, t);
                    }
                }
            }
        }
        total
    }

    /// Latest used slot plus one.
    pub fn makespan(schedule: &[Placement]) -> usize {
        schedule.iter().map(|&(_, t)| t + 1).max().unwrap_or(0)
    }
}

pub fn map_scheduling<T: Scalar>(inst: &SchedulingInstance) -> Result<(QuboModel<T>, VarMap)> {
    inst.validate()?;
    let (jobs, machines, slots) = (inst.num_jobs, inst.num_machines, inst.num_slots);
    let wa = T::from_f64_lossy(inst.weights.assignment);
    let wc = T::from_f64_lossy(inst.weights.capacity);
    let wp = T::from_f64_lossy(inst.weights.precedence);
    let cells: Vec<(usize, usize)> = (0..machines).flat_map(|m| (0..slots).map(move |t| (m, t))).collect();
    let mut q = QuboModel::new(inst.num_vars());

    for j in 0..jobs {
        q.add_offset(wa);
        for (k, &(m, t)) in cells.iter().enumerate() {
            let v = inst.var(j, m, t);
            q.add_linear(v, -wa + T::from_f64_lossy(inst.priority_cost(j, t)));
            if !inst.is_eligible(j, m) {
                q.add_linear(v, wa);
            }
            for &(m2, t2) in &cells[k + 1..] {
                q.add_quadratic(v, inst.var(j, m2, t2), wa + wa);
            }
        }
    }
    for &(m, t) in &cells {
        for a in 0..jobs {
            for b in a + 1..jobs {
                q.add_quadratic(inst.var(a, m, t), inst.var(b, m, t), wc);
            }
        }
    }
    for &(a, b) in &inst.precedence {
        for &(m, t) in &cells {
            for &(m2, t2) in cells.iter().filter(|&&(_, t2)| t2 <= t) {
                q.add_quadratic(inst.var(a, m, t), inst.var(b, m2, t2), wp);
            }
        }
    }

    let labels = (0..jobs)
        .flat_map(|job| {
            (0..machines).flat_map(move |machine| (0..slots).map(move |slot| VarLabel::Job { job, machine, slot }))
        })
        .collect();
    Ok((q, VarMap::new(labels)))
}
