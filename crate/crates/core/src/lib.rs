//! Synthesis of reach-avoid policies for cooperative multi-agent MDPs with
//! bounded communication.

pub mod costfn;
pub mod error;
pub mod exec;
pub mod jsonfloat;
pub mod model;
pub mod reachlp;
pub mod synth;
pub mod tolerances;

pub use error::{Error, Result};

/// Caps the worker pool used for restarts and simulation. Call it before any
/// parallel work; later calls fail.
#[cfg(feature = "parallel")]
pub fn set_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}
