use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::anneal::Engine;
use crate::bench::{gauge_average, tts};
use crate::chimera::{
    clique_embedding, embed_ising, find_embedding_with_retries, suggest_chain_strength, unembed, ChainBreakStrategy,
    Embedding, HardwareGraph, HardwareSpec, DEFAULT_CHAIN_ALPHA, DEFAULT_EMBED_RETRIES,
};
use crate::error::{Error, Result};
use crate::ising::{brute_force_with_cap, reduce_degree, reduce_degree_auto, spins_to_bits, DEFAULT_BRUTE_FORCE_CAP};
use crate::mappers::{Decoded, Instance};
use crate::parallel::derive_seed;

/// Largest Chimera grid tried when the hardware is chosen automatically.
pub const MAX_AUTO_GRID: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMethod {
    /// Seeded chain growth.
    #[default]
    Heuristic,
    /// Deterministic complete-graph layout.
    Clique,
    /// Spin `i` on qubit `i`; for models already defined on the hardware.
    Native,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedSettings {
    /// Target hardware. When absent, the instance's own hardware hint is
    /// used, else the smallest Chimera grid on which embedding succeeds.
    pub hardware: Option<HardwareSpec>,
    pub method: EmbedMethod,
    /// Multiplier for the suggested chain strength.
    pub chain_alpha: f64,
    /// Explicit chain coupling (negative); overrides `chain_alpha`.
    pub chain_strength: Option<f64>,
    pub retries: usize,
    pub chain_break: ChainBreakStrategy,
}

impl Default for EmbedSettings {
    fn default() -> Self {
        Self {
            hardware: None,
            method: EmbedMethod::Heuristic,
            chain_alpha: DEFAULT_CHAIN_ALPHA,
            chain_strength: None,
            retries: DEFAULT_EMBED_RETRIES,
            chain_break: ChainBreakStrategy::Majority,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub instance: Instance,
    /// Degree-reduction penalty; the safe bound is used when absent.
    #[serde(default)]
    pub reduction_penalty: Option<f64>,
    #[serde(default)]
    pub embed: EmbedSettings,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "one")]
    pub num_gauges: usize,
    #[serde(default)]
    pub seed: u64,
    /// Exhaustive oracle runs when the logical model has at most this many variables.
    #[serde(default = "default_cap")]
    pub oracle_cap: usize,
    /// Directory receiving intermediate artifacts as JSON.
    #[serde(default)]
    pub persist_dir: Option<PathBuf>,
    /// Include wall-clock measurements. Off by default so that reports are
    /// byte-identical across runs.
    #[serde(default)]
    pub timing: bool,
}

fn one() -> usize {
    1
}

fn default_cap() -> usize {
    DEFAULT_BRUTE_FORCE_CAP
}

impl RunConfig {
    pub fn new(instance: Instance) -> Self {
        Self {
            instance,
            reduction_penalty: None,
            embed: EmbedSettings::default(),
            engine: Engine::default(),
            num_gauges: 1,
            seed: 0,
            oracle_cap: DEFAULT_BRUTE_FORCE_CAP,
            persist_dir: None,
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub embed_seconds: f64,
    pub solve_seconds: f64,
    pub seconds_per_read: f64,
    #[serde(with = "float_or_inf")]
    pub tts99_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: String,
    pub seed: u64,
    pub engine: String,
    pub sweeps_per_read: usize,
    /// Binary variables produced by the mapper.
    pub num_variables: usize,
    /// Variables of the solved logical model (unused ones dropped, ancillas added).
    pub num_logical: usize,
    pub num_ancillas: usize,
    pub reduction_penalty: Option<f64>,
    pub hardware: HardwareSpec,
    pub physical_qubits: usize,
    pub max_chain_length: usize,
    pub chain_strength: f64,
    pub num_gauges: usize,
    pub total_reads: u64,
    pub best_energy: Option<f64>,
    pub oracle_energy: Option<f64>,
    pub oracle_ground_states: Option<usize>,
    /// Fraction of all reads whose decoded energy hits the oracle minimum.
    pub success_probability: Option<f64>,
    /// Sweeps needed for 99% confidence of one success; `"inf"` when `p = 0`.
    #[serde(with = "float_or_inf")]
    pub tts99_sweeps: Option<f64>,
    pub chain_break_fraction: f64,
    pub gauge_success: Vec<f64>,
    pub gauge_variance: Option<f64>,
    pub best_assignment: Option<Vec<i8>>,
    pub best_solution: Option<Decoded>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() => s.serialize_str("inf"),
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(match Option::<Repr>::deserialize(d)? {
            None => None,
            Some(Repr::Num(x)) => Some(x),
            Some(Repr::Text(t)) if t == "inf" => Some(f64::INFINITY),
            Some(Repr::Text(t)) => return Err(serde::de::Error::custom(format!("unexpected value `{t}`"))),
        })
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    kind: &'a str,
    seed: u64,
    engine: &'a str,
    num_variables: usize,
    num_logical: usize,
    physical_qubits: usize,
    max_chain_length: usize,
    chain_strength: f64,
    num_gauges: usize,
    total_reads: u64,
    best_energy: Option<f64>,
    oracle_energy: Option<f64>,
    success_probability: Option<f64>,
    tts99_sweeps: Option<String>,
    chain_break_fraction: f64,
    gauge_variance: Option<f64>,
    seconds_per_read: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat CSV summary with a header row, one line per report.
    pub fn to_csv(reports: &[RunReport]) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in reports {
            w.serialize(CsvRow {
                kind: &r.kind,
                seed: r.seed,
                engine: &r.engine,
                num_variables: r.num_variables,
                num_logical: r.num_logical,
                physical_qubits: r.physical_qubits,
                max_chain_length: r.max_chain_length,
                chain_strength: r.chain_strength,
                num_gauges: r.num_gauges,
                total_reads: r.total_reads,
                best_energy: r.best_energy,
                oracle_energy: r.oracle_energy,
                success_probability: r.success_probability,
                tts99_sweeps: r
                    .tts99_sweeps
                    .map(|t| if t.is_infinite() { "inf".into() } else { t.to_string() }),
                chain_break_fraction: r.chain_break_fraction,
                gauge_variance: r.gauge_variance,
                seconds_per_read: r.timing.as_ref().map(|t| t.seconds_per_read),
            })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn persist<S: Serialize>(cfg: &RunConfig, name: &str, value: &S) -> Result<()> {
    if let Some(dir) = &cfg.persist_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), serde_json::to_string_pretty(value)?)?;
    }
    Ok(())
}

fn choose_embedding(
    cfg: &RunConfig,
    num_vars: usize,
    edges: &[(usize, usize)],
    kept: &[usize],
) -> Result<(HardwareGraph, Embedding)> {
    let settings = &cfg.embed;
    let hint = match &cfg.instance {
        Instance::Ising(i) => i.hardware.clone(),
        _ => None,
    };
    let seed = derive_seed(cfg.seed, "embed", 0);
    let attempt = |hw: &HardwareGraph| -> Result<Embedding> {
        match settings.method {
            EmbedMethod::Heuristic => find_embedding_with_retries(num_vars, edges, hw, seed, settings.retries),
            EmbedMethod::Clique => clique_embedding(num_vars, hw),
            EmbedMethod::Native => {
                let emb = Embedding {
                    chains: kept.iter().map(|&q| vec![q]).collect(),
                    hardware: hw.spec(),
                };
                emb.validate(hw, edges)?;
                Ok(emb)
            }
        }
    };
    if let Some(spec) = settings.hardware.clone().or(hint) {
        let hw = spec.build()?;
        let emb = attempt(&hw)?;
        return Ok((hw, emb));
    }
    if settings.method == EmbedMethod::Native {
        return Err(Error::Embedding("native embedding needs a hardware description".into()));
    }
    let mut last = None;
    let start = ((num_vars as f64 / 8.0).sqrt().ceil() as usize).max(1);
    for n in start..=MAX_AUTO_GRID {
        let hw = HardwareSpec::chimera(n).build()?;
        match attempt(&hw) {
            Ok(emb) => return Ok((hw, emb)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Embedding("no Chimera grid up to the limit fits the problem".into())))
}

/// Map, reduce, convert, embed, sample under gauges, unembed, decode and
/// summarize one instance. Any failure names the stage it came from.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport> {
    let compiled = cfg.instance.compile::<f64>().map_err(|e| e.at_stage("map"))?;
    persist(cfg, "objective.json", &compiled).map_err(|e| e.at_stage("persist"))?;
    let num_variables = compiled.objective.num_vars();
    let (objective, kept) = compiled.objective.compact();

    let reduction = match cfg.reduction_penalty {
        Some(w) => reduce_degree(&objective, w),
        None => reduce_degree_auto(&objective),
    }
    .map_err(|e| e.at_stage("reduce"))?;
    let reduction_penalty = (!reduction.ancillas.ancillas.is_empty()).then_some(reduction.penalty);
    let logical = reduction.qubo.to_ising();
    logical.validate().map_err(|e| e.at_stage("convert"))?;
    persist(cfg, "qubo.json", &reduction.qubo).map_err(|e| e.at_stage("persist"))?;
    persist(cfg, "ising.json", &logical).map_err(|e| e.at_stage("persist"))?;
    let num_logical = logical.num_vars();

    let oracle = if num_logical <= cfg.oracle_cap {
        Some(brute_force_with_cap(&logical, cfg.oracle_cap).map_err(|e| e.at_stage("oracle"))?)
    } else {
        None
    };

    let embed_clock = Instant::now();
    let edges = logical.interaction_edges();
    let (hw, emb) = choose_embedding(cfg, num_logical, &edges, &kept).map_err(|e| e.at_stage("embed"))?;
    let chain_strength = match cfg.embed.chain_strength {
        Some(j) => j,
        None => {
            if logical.max_abs_coefficient() == 0.0 {
                -1.0
            } else {
                suggest_chain_strength(&logical, cfg.embed.chain_alpha).map_err(|e| e.at_stage("embed"))?
            }
        }
    };
    let embedded = embed_ising(&logical, &emb, &hw, chain_strength).map_err(|e| e.at_stage("embed"))?;
    let embed_seconds = embed_clock.elapsed().as_secs_f64();
    persist(cfg, "embedding.json", &emb).map_err(|e| e.at_stage("persist"))?;
    persist(cfg, "physical.json", &embedded.physical).map_err(|e| e.at_stage("persist"))?;

    let solve_clock = Instant::now();
    let engine = cfg.engine.with_seed(derive_seed(cfg.seed, "engine", 0));
    let physical = gauge_average(
        &embedded.physical,
        &engine,
        cfg.num_gauges,
        derive_seed(cfg.seed, "gauges", 0),
    )
    .map_err(|e| e.at_stage("solve"))?;
    let solve_seconds = solve_clock.elapsed().as_secs_f64();
    persist(cfg, "physical_samples.json", &physical).map_err(|e| e.at_stage("persist"))?;

    let unembedded = unembed(
        &physical,
        &embedded,
        cfg.embed.chain_break,
        derive_seed(cfg.seed, "unembed", 0),
    )
    .map_err(|e| e.at_stage("unembed"))?;
    persist(cfg, "samples.json", &unembedded.samples).map_err(|e| e.at_stage("persist"))?;
    let samples = &unembedded.samples;

    let decode_bits = |spins: &[i8]| -> Vec<i8> {
        let bits = spins_to_bits(spins);
        let mut out = vec![0i8; num_variables];
        for (c, &orig) in kept.iter().enumerate() {
            out[orig] = bits[c];
        }
        for &(i, v) in &compiled.var_map.fixed {
            out[i] = i8::from(v);
        }
        out
    };

    let num_gauges = cfg.num_gauges.max(1);
    let total_reads = unembedded.total_reads;
    let best = samples.best();
    let best_energy = best.map(|s| s.energy);
    let best_assignment = best.map(|s| decode_bits(&s.values));
    let best_solution = best_assignment.as_ref().map(|b| cfg.instance.decode(b));

    let (oracle_energy, oracle_ground_states) = match &oracle {
        Some(g) => (Some(g.min_energy), Some(g.states.len())),
        None => (None, None),
    };
    let tol = 1e-9 * (1.0 + oracle_energy.map_or(0.0, f64::abs));
    let (success_probability, gauge_success) = match oracle_energy {
        Some(min) => {
            let hits = samples.count_at_or_below(min, tol);
            let per_gauge_reads = (total_reads / num_gauges as u64).max(1) as f64;
            let gauge_success = (0..num_gauges as u32)
                .map(|g| {
                    let h: u64 = samples
                        .samples
                        .iter()
                        .filter(|s| s.gauge.unwrap_or(0) == g && s.energy <= min + tol)
                        .map(|s| s.count)
                        .sum();
                    h as f64 / per_gauge_reads
                })
                .collect::<Vec<_>>();
            (Some(hits as f64 / total_reads as f64), gauge_success)
        }
        None => (None, Vec::new()),
    };
    let gauge_variance = (!gauge_success.is_empty()).then(|| {
        let mean = gauge_success.iter().sum::<f64>() / gauge_success.len() as f64;
        gauge_success.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / gauge_success.len() as f64
    });
    let sweeps = engine.sweeps();
    let tts99_sweeps = success_probability.map(|p| tts(p, sweeps as f64));
    let timing = cfg.timing.then(|| {
        let per_read = solve_seconds / total_reads.max(1) as f64;
        Timing {
            embed_seconds,
            solve_seconds,
            seconds_per_read: per_read,
            tts99_seconds: success_probability.map(|p| tts(p, per_read)),
        }
    });

    Ok(RunReport {
        kind: cfg.instance.kind().to_string(),
        seed: cfg.seed,
        engine: engine.name().to_string(),
        sweeps_per_read: sweeps,
        num_variables,
        num_logical,
        num_ancillas: reduction.ancillas.ancillas.len(),
        reduction_penalty,
        hardware: hw.spec(),
        physical_qubits: embedded.num_physical(),
        max_chain_length: emb.max_chain_length(),
        chain_strength,
        num_gauges,
        total_reads,
        best_energy,
        oracle_energy,
        oracle_ground_states,
        success_probability,
        tts99_sweeps,
        chain_break_fraction: unembedded.chain_break_fraction(),
        gauge_success,
        gauge_variance,
        best_assignment,
        best_solution,
        timing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anneal::SaParams;
    use crate::mappers::ColoringInstance;

    fn triangle_config() -> RunConfig {
        let mut cfg = RunConfig::new(Instance::Coloring(ColoringInstance::complete(3, 3)));
        cfg.engine = Engine::Sa(SaParams {
            num_reads: 50,
            sweeps: 500,
            ..Default::default()
        });
        cfg.seed = 17;
        cfg
    }

    #[test]
    fn triangle_coloring_end_to_end() {
        let mut cfg = triangle_config();
        cfg.embed.hardware = Some(HardwareSpec::chimera(2));
        let r = run_pipeline(&cfg).unwrap();
        assert_eq!(r.oracle_energy, Some(0.0));
        assert_eq!(r.best_energy, Some(0.0));
        assert!(matches!(r.best_solution, Some(Decoded::Coloring { proper: true, .. })));
        assert!(r.success_probability.unwrap() > 0.0);
    }

    #[test]
    fn single_gauge_matches_zero_gauges() {
        let mut a = triangle_config();
        a.num_gauges = 0;
        let mut b = triangle_config();
        b.num_gauges = 1;
        assert_eq!(
            run_pipeline(&a).unwrap().to_json().unwrap(),
            run_pipeline(&b).unwrap().to_json().unwrap()
        );
    }

    #[test]
    fn embedding_failure_is_reported_by_stage() {
        let mut cfg = triangle_config();
        cfg.embed.hardware = Some(HardwareSpec::chimera(1));
        cfg.embed.method = EmbedMethod::Clique;
        let err = run_pipeline(&cfg).unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::Embedding);
        assert!(err.to_string().contains("embed"));
    }

    #[test]
    fn report_round_trips_and_csv_has_header() {
        let r = run_pipeline(&triangle_config()).unwrap();
        let back: RunReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let csv = RunReport::to_csv(&[r]).unwrap();
        assert!(csv.starts_with("kind,seed,engine"));
        assert_eq!(csv.lines().count(), 2);
    }
}
