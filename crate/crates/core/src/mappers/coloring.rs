use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::QuboModel;
use crate::mappers::{VarLabel, VarMap};
use crate::scalar::Scalar;

fn one() -> f64 {
    1.0
}

/// Graph coloring: every vertex gets exactly one of `num_colors` colors and
/// adjacent vertices differ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoringInstance {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub num_colors: usize,
    #[serde(default = "one")]
    pub w_onehot: f64,
    #[serde(default = "one")]
    pub w_conflict: f64,
}

impl ColoringInstance {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>, num_colors: usize) -> Self {
        Self {
            num_vertices,
            edges,
            num_colors,
            w_onehot: 1.0,
            w_conflict: 1.0,
        }
    }

    pub fn complete(n: usize, num_colors: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self::new(n, edges, num_colors)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_colors == 0 {
            return Err(Error::input("coloring needs at least one color"));
        }
        for &(a, b) in &self.edges {
            if a >= self.num_vertices || b >= self.num_vertices {
                return Err(Error::input(format!("edge ({a}, {b}) references a missing vertex")));
            }
            if a == b {
                return Err(Error::input(format!("self-loop on vertex {a}")));
            }
        }
        if !(self.w_onehot > 0.0 && self.w_conflict > 0.0) {
            return Err(Error::input("coloring penalty weights must be positive"));
        }
        Ok(())
    }

    pub fn var(&self, vertex: usize, color: usize) -> usize {
        vertex * self.num_colors + color
    }

    pub fn num_vars(&self) -> usize {
        self.num_vertices * self.num_colors
    }

    fn unique_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Color per vertex when every vertex has exactly one color bit set.
    pub fn decode(&self, bits: &[i8]) -> Option<Vec<usize>> {
        (0..self.num_vertices)
            .map(|v| {
                let mut set = (0..self.num_colors).filter(|&c| bits[self.var(v, c)] == 1);
                match (set.next(), set.next()) {
                    (Some(c), None) => Some(c),
                    _ => None,
                }
            })
            .collect()
    }

    pub fn is_proper(&self, coloring: &[usize]) -> bool {
        coloring.len() == self.num_vertices
            && coloring.iter().all(|&c| c < self.num_colors)
            && self.edges.iter().all(|&(a, b)| coloring[a] != coloring[b])
    }
}

/// `w_onehot sum_v (sum_c x_vc - 1)^2 + w_conflict sum_c sum_{(v,v') in E} x_vc x_v'c`.
pub fn map_coloring<T: Scalar>(inst: &ColoringInstance) -> Result<(QuboModel<T>, VarMap)> {
    inst.validate()?;
    let w1 = T::from_f64_lossy(inst.w_onehot);
    let w2 = T::from_f64_lossy(inst.w_conflict);
    let mut q = QuboModel::new(inst.num_vars());
    for v in 0..inst.num_vertices {
        // (sum x - 1)^2 = 1 - sum x + 2 sum_{c<c'} x x  on binaries
        q.add_offset(w1);
        for c in 0..inst.num_colors {
            q.add_linear(inst.var(v, c), -w1);
            for c2 in c + 1..inst.num_colors {
                q.add_quadratic(inst.var(v, c), inst.var(v, c2), w1 + w1);
            }
        }
    }
    for (a, b) in inst.unique_edges() {
        for c in 0..inst.num_colors {
            q.add_quadratic(inst.var(a, c), inst.var(b, c), w2);
        }
    }
    let labels = (0..inst.num_vertices)
        .flat_map(|vertex| (0..inst.num_colors).map(move |color| VarLabel::Color { vertex, color }))
        .collect();
    Ok((q, VarMap::new(labels)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::brute_force;

    #[test]
    fn triangle_three_colors() {
        let (q, map) = map_coloring::<f64>(&ColoringInstance::complete(3, 3)).unwrap();
        assert_eq!(q.num_vars(), 9);
        assert_eq!(map.len(), 9);
        let g = brute_force(&q).unwrap();
        assert_eq!(g.min_energy, 0.0);
        assert_eq!(g.states.len(), 6);
    }

    #[test]
    fn triangle_two_colors_has_one_conflict() {
        let (q, _) = map_coloring::<f64>(&ColoringInstance::complete(3, 2)).unwrap();
        assert_eq!(brute_force(&q).unwrap().min_energy, 1.0);
    }

    #[test]
    fn single_vertex_single_color() {
        let (q, _) = map_coloring::<f64>(&ColoringInstance::new(1, vec![], 1)).unwrap();
        let g = brute_force(&q).unwrap();
        assert_eq!(g.min_energy, 0.0);
        assert_eq!(g.states, vec![vec![1]]);
    }

    #[test]
    fn validation() {
        assert!(map_coloring::<f64>(&ColoringInstance::new(2, vec![(0, 0)], 2)).is_err());
        assert!(map_coloring::<f64>(&ColoringInstance::new(2, vec![(0, 2)], 2)).is_err());
        assert!(map_coloring::<f64>(&ColoringInstance::new(2, vec![], 0)).is_err());
    }
}
