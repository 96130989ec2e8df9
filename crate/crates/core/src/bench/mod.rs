//! Benchmark harness: instance generation, the end-to-end pipeline, run
//! statistics and the makespan search driver.

mod generate;
mod makespan;
mod pipeline;
mod stats;

pub use generate::{generate_instance, random_broken, GenParams, INSTANCE_KINDS};
pub use makespan::{feasible_at, makespan_binary_search, MakespanResult};
pub use pipeline::{run_pipeline, EmbedMethod, EmbedSettings, RunConfig, RunReport, Timing, MAX_AUTO_GRID};
pub use stats::{gauge_average, gauge_for, tts};
