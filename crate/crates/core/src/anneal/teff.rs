use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{Domain, IsingModel, SampleSet};
use crate::scalar::Scalar;

/// Probabilistic model `P(s) ~ exp(beta (sum W_ij s_i s_j + sum b_i s_i))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoltzmannSpec {
    pub biases: Vec<f64>,
    /// `(i, j, W_ij)` with `i < j`.
    pub weights: Vec<(usize, usize, f64)>,
    #[serde(default = "one")]
    pub beta: f64,
}

fn one() -> f64 {
    1.0
}

impl BoltzmannSpec {
    pub fn new(biases: Vec<f64>, weights: Vec<(usize, usize, f64)>) -> Self {
        Self {
            biases,
            weights,
            beta: 1.0,
        }
    }

    /// Ising model whose energy is `-(sum W s s + sum b s)`, so that
    /// `P ~ exp(-beta E)`.
    pub fn energy_model(&self) -> Result<IsingModel<f64>> {
        for &(i, j, _) in &self.weights {
            if i >= j {
                return Err(Error::input(format!("weight index ({i}, {j}) must satisfy i < j")));
            }
        }
        IsingModel::from_parts(
            self.biases.iter().map(|b| -b).collect(),
            self.weights.iter().map(|&(i, j, w)| ((i, j), -w)),
            0.0,
        )
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            biases: self.biases.iter().map(|b| b * c).collect(),
            weights: self.weights.iter().map(|&(i, j, w)| (i, j, w * c)).collect(),
            beta: self.beta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeffEstimate {
    pub t_eff: f64,
    pub beta: f64,
    /// Standard error of `t_eff` from the weighted residuals.
    pub std_error: f64,
    pub num_bins: usize,
}

/// Fits `ln(n_a / n_b) = -beta (E_a - E_b)` over every pair of populated
/// bins by weighted least squares through the origin, with pair weight
/// `min(n_a, n_b)`, and returns `T_eff = 1 / beta`.
///
/// Bins are distinct assignments rather than energy levels, so degenerate
/// levels do not bias the log-ratios. Energies come from `spec`, whose
/// `beta` field is ignored.
pub fn estimate_effective_temperature<T: Scalar>(samples: &SampleSet<T>, spec: &BoltzmannSpec) -> Result<TeffEstimate> {
    if samples.domain != Domain::Spin {
        return Err(Error::input("effective temperature needs spin-domain samples"));
    }
    let model = spec.energy_model()?;
    let agg = samples.aggregated();
    let mut bins: Vec<(f64, f64)> = Vec::with_capacity(agg.len());
    for s in &agg.samples {
        bins.push((s.count as f64, model.evaluate(&s.values)?));
    }
    let tol = 1e-12 * (1.0 + bins.iter().map(|b| b.1.abs()).fold(0.0, f64::max));
    let (lo, hi) = bins.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
        (lo.min(b.1), hi.max(b.1))
    });
    if bins.len() < 2 || hi - lo <= tol {
        return Err(Error::Degenerate("samples cover fewer than two energy levels".into()));
    }

    // With bins sorted by count, the pair weight of (p, q > p) is n_p, so
    // every pair sum reduces to suffix sums over q.
    bins.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = bins.len();
    let (mut se, mut sl, mut sel, mut se2, mut sl2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for p in (0..k).rev() {
        let (n, e) = bins[p];
        let l = n.ln();
        let m = (k - 1 - p) as f64;
        // x = E_q - E_p, y = L_p - L_q
        let xy = l * se - sel - m * e * l + e * sl;
        let xx = se2 - 2.0 * e * se + m * e * e;
        let yy = m * l * l - 2.0 * l * sl + sl2;
        sxy += n * xy;
        sxx += n * xx;
        syy += n * yy;
        se += e;
        sl += l;
        sel += e * l;
        se2 += e * e;
        sl2 += l * l;
    }
    let beta = sxy / sxx;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Degenerate(format!(
            "fitted inverse temperature {beta} is not positive; samples do not favour low energies"
        )));
    }
    let pairs = (k * (k - 1) / 2) as f64;
    let rss = (syy - 2.0 * beta * sxy + beta * beta * sxx).max(0.0);
    let se_beta = if pairs > 1.0 {
        (rss / (pairs - 1.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(TeffEstimate {
        t_eff: 1.0 / beta,
        beta,
        std_error: se_beta / (beta * beta),
        num_bins: k,
    })
}
