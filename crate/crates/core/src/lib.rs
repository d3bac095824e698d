//! Spectra, Green functions and Casimir energies of quantum graphs.
//!
//! Units: `hbar = 2m = 1`, so energies are `k^2` and the zero-point energy of
//! a mode is `k / 2`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod casimir;
pub mod cli;
pub mod error;
pub mod graph;
pub mod greens;
pub mod numfmt;
pub mod quadrature;
pub mod scattering;
pub mod spectrum;

pub use casimir::{
    casimir_green_method, casimir_integrand, casimir_mode_sum, extrapolate_tau, CasimirMethod,
    CasimirResult, RegularizationConfig, TauFit, TwoVertexConfig,
};
pub use error::{Error, Result};
pub use graph::{parse_graph, total_length, validate, Bond, Graph, Lead, Vertex, VertexCoupling};
pub use greens::{
    bond_wavefunction, free_green, star_green, trace_gamma, two_vertex_green, GreenDecomposition,
};
pub use scattering::{
    build_vertex_smatrix, composite_amplitudes, vertex_reflection_transmission,
    CompositeAmplitudes, RTPair, VertexSMatrix,
};
pub use spectrum::{
    dirichlet_eigenvalues, find_eigenvalues, secular_function, weyl_count, SpectrumResult,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
