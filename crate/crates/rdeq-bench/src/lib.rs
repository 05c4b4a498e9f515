//! Shared fixtures for the benchmarks.

use rdeq_core::prob::{CondPmf, SourceSpec};
use rdeq_core::regions::{AuxConfig, XhatMap};

/// The binary reference setup: uniform source, symmetric observation
/// channels, a noisier eavesdropper channel.
pub fn binary_source() -> SourceSpec {
    SourceSpec::binary_symmetric(0.1, 0.3)
}

/// Transparent refinements over a coarse binary-symmetric layer.
pub fn layered_aux() -> AuxConfig {
    AuxConfig::new(
        CondPmf::identity(2),
        CondPmf::identity(2),
        CondPmf::bsc(0.25),
        CondPmf::bsc(0.25),
        XhatMap::new(vec![0, 0, 1, 1], 2, 2),
    )
    .expect("consistent configuration")
}
