//! Chimera hardware graphs, minor embedding and chain decoding.

mod embed;
mod embedding;
mod graph;

pub use embed::{
    embed_ising, suggest_chain_strength, unembed, ChainBreakStrategy, EmbeddedIsing, Unembedded, DEFAULT_CHAIN_ALPHA,
};
pub use embedding::{clique_embedding, find_embedding, find_embedding_with_retries, Embedding, DEFAULT_EMBED_RETRIES};
pub use graph::{chimera, chimera_node, ChimeraCoord, HardwareGraph, HardwareSpec};
