//! Fourier extension frame approximations on arbitrary 2D domains.
//!
//! A function sampled on a domain `Omega` inside the box `[-T, T]^D` is
//! approximated by a Fourier series periodic on the box. The collocation
//! matrix is a subblock of the unitary DFT, so the least-squares problem is
//! solved by projecting onto the plunge region of its spectrum, solving a
//! small low-rank system there, and correcting with the adjoint.

pub mod domain;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod grid;
pub mod linalg;
pub mod solver;
pub mod spectral;
pub mod stats;
pub mod topology;

pub use domain::{DomainMask, DomainSpec, Shape};
pub use error::{Error, Result};
pub use experiments::{CsvTable, ExperimentConfig, ExperimentKind, TestFunction};
pub use fourier::{CoeffVector, FrameOperator, SampleVector};
pub use grid::{FreqWindow, GridSpec, MultiIndex};
pub use solver::{solve_algorithm1, solve_dense_tsvd, SolveReport, SolverConfig};
pub use spectral::{ProlateSet, SpectralProfile};
pub use topology::LayerDecomposition;
