//! Sign-indefinite second-order operators `-(d/dx) sgn (d/dx)` on finite metric graphs.
//!
//! Edges carry a sign. On positive edges the operator acts as `-d²/dx²`, on
//! negative edges as `+d²/dx²`, and the edges are coupled through boundary
//! conditions `A ψ + B ψ' = 0` on the space of boundary values. The crate covers
//!
//! * the graph model and the canonical ordering of boundary slots ([`graph`]),
//! * validation and normal forms of boundary conditions ([`bc`]),
//! * the secular matrices and coefficient matrices ([`secular`]),
//! * eigenvalues, resonances, zero modes and counting functions ([`spectral`]),
//! * the resolvent kernel and its application by quadrature ([`resolvent`]),
//! * generalized eigenfunctions, scattering matrices and gluing ([`scattering`]).
//!
//! ```
//! use signgraph::{models, secular::SpectralParams, scattering};
//!
//! let (graph, bc) = models::two_vertex(1.0);
//! let s = scattering::scattering_matrix(&bc, &graph, 4.0).unwrap();
//! let expected = num_complex::Complex64::new(0.0, (2.0f64).tanh());
//! assert!((s.matrix[(0, 0)] - expected).norm() < 1e-10);
//! # let _ = SpectralParams::positive_energy(1.0);
//! ```

pub mod bc;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod models;
pub mod report;
pub mod resolvent;
pub mod scattering;
pub mod secular;
pub mod spectral;
#[cfg(test)]
pub(crate) mod testing;

pub use bc::{BoundaryConditions, ProjectorForm, SelfAdjointReport, SignatureMatrices};
pub use error::{Error, Result};
pub use graph::{BoundaryIndex, Endpoint, MetricGraph, Sign};
pub use linalg::CMatrix;
pub use num_complex::Complex64;

pub use resolvent::{EdgePoint, ResolventContext};
pub use scattering::{ScatteringData, ScatteringMatrix};
pub use secular::{SecularAssembly, SpectralParams};
pub use spectral::{Branch, SpectrumReport};
