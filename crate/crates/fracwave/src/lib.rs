//! Solvers for the 1-D time-fractional diffusion-wave equation (Caputo order
//! 1 < alpha < 2) on an interval with Dirichlet boundary: forward evolution
//! through the Mittag-Leffler operator calculus, backward adjoint states,
//! and reconstruction of a separable source's spatial factor from boundary
//! flux measurements.
//!
//! The crate is organized around the pipeline:
//!
//! * [`mlf`] — certified Mittag-Leffler kernels;
//! * [`fracops`] — Riemann-Liouville integrals, the operator-form Caputo
//!   derivative, and weakly singular product-integration convolutions;
//! * [`spatial`] — conservative finite-difference elliptic operators, their
//!   eigenbasis, and conormal boundary fluxes;
//! * [`forward`] — spectral/Volterra evolution solvers and flux extraction;
//! * [`adjoint`] — time-reversed adjoint states, the bilinear pairing and the
//!   flux-data norm it induces;
//! * [`inverse`] — the linear source-to-flux map, Tikhonov/CGLS
//!   reconstruction, and the flux deconvolution behind the uniqueness
//!   argument;
//! * [`ucp`] — Laplace-domain correspondence checks between the fractional,
//!   elliptic-resolvent, and parabolic descriptions;
//! * [`verify`] — the named check suites wired into the CLI and the
//!   acceptance tests.
//!
//! `examples/` holds one runnable walkthrough per capability; the thin
//! `fracwave` binary drives the same library from TOML run configurations.

pub mod adjoint;
pub mod config;
pub mod eigen;
pub mod expr;
pub mod forward;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod fracops;
pub mod mlf;
pub mod spatial;
pub mod special;
pub mod ucp;
pub mod verify;

pub use mlf::{mlf_eval, relaxation_triple, MlfError, MlfParams, RelaxationTriple};
