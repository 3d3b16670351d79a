//! Shared fixtures for the kernel benchmarks.

use torcat_core::fock_oracle::{build_state_with_tolerance, tensor, FockDensityMatrix, OracleState};
use torcat_core::protocols::CatPrepConfig;
use torcat_core::Axis;

/// Reference GPS configuration with `m` detected photons.
pub fn gps_config(m: usize) -> CatPrepConfig {
    CatPrepConfig { m, ..CatPrepConfig::default() }
}

/// Two squeezed vacua at ±r ready for the beam splitter.
pub fn squeezed_pair(r: f64, truncation: usize) -> FockDensityMatrix {
    let a = build_state_with_tolerance(OracleState::Squeezed(r), truncation, 1.0).expect("valid squeezing");
    let b = build_state_with_tolerance(OracleState::Squeezed(-r), truncation, 1.0).expect("valid squeezing");
    tensor(&a, &b).expect("matching truncations")
}

pub fn square_axis(half_span: f64, points: usize) -> Axis {
    Axis::symmetric(half_span, points).expect("valid axis")
}
