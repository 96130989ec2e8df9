use rayon::prelude::*;

use crate::anneal::Engine;
use crate::error::Result;
use crate::ising::{apply_gauge, decode_gauge, Gauge, IsingModel, SampleSet};
use crate::parallel::{derive_seed, substream};
use crate::scalar::Real;

/// Time to reach the optimum with 99% confidence from repeated reads:
/// `t_read ln(0.01) / ln(1 - p)`, `t_read` when `p = 1`, infinite when `p = 0`.
pub fn tts(p: f64, t_read: f64) -> f64 {
    if p <= 0.0 {
        f64::INFINITY
    } else if p >= 1.0 {
        t_read
    } else {
        t_read * (0.01f64).ln() / (1.0 - p).ln()
    }
}

/// Gauge `k` of a run seeded with `seed`; gauge 0 is always the identity.
pub fn gauge_for(n: usize, seed: u64, k: usize) -> Gauge {
    if k == 0 {
        Gauge::identity(n)
    } else {
        Gauge::random(n, &mut substream(seed, "gauge", k as u64))
    }
}

/// Runs `engine` under `num_gauges` spin-reversal transforms and merges the
/// decoded samples, tagged with their gauge.
///
/// Gauge 0 is the identity and keeps the engine's own seed, so a single
/// gauge (or zero, treated as one) reproduces a direct engine run exactly.
pub fn gauge_average<T: Real>(
    m: &IsingModel<T>,
    engine: &Engine,
    num_gauges: usize,
    seed: u64,
) -> Result<SampleSet<T>> {
    let num_gauges = num_gauges.max(1);
    if num_gauges == 1 {
        return engine.sample(m);
    }
    let runs = (0..num_gauges)
        .into_par_iter()
        .map(|k| {
            let g = gauge_for(m.num_vars(), seed, k);
            let e = if k == 0 {
                engine.clone()
            } else {
                engine.with_seed(derive_seed(engine.seed(), "gauge-run", k as u64))
            };
            let mut set = decode_gauge(&e.sample(&apply_gauge(m, &g)?)?, &g, m)?;
            for s in &mut set.samples {
                s.gauge = Some(k as u32);
            }
            Ok(set)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut runs = runs.into_iter();
    let mut merged = runs.next().expect("at least one gauge");
    for r in runs {
        merged.extend_from(r)?;
    }
    merged.provenance.seed = engine.seed();
    merged.provenance.gauges = (0..num_gauges as u32).collect();
    Ok(merged)
}
