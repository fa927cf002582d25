//! Desk-scale spectral laboratory for SG-elliptic model operators on the real
//! line and for periodic evolution equations `D_t u + ωPu = f` on `𝕋 × ℝ`.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: truncated grids, the model operators
//!   `⟨x⟩^{m/2}(1−∂²)^{μ/2}⟨x⟩^{m/2}` as symmetric matrices, direct weighted
//!   Sobolev norms.
//! * [`spectral`]: eigendecomposition, analysis/synthesis in the eigenbasis,
//!   series norms, counting function and eigenvalue-asymptotics fitting.
//! * [`diophantine`]: small divisors, the Diophantine conditions on `αλ_j`,
//!   Liouville witnesses and failing subsequences in exact arithmetic.
//! * [`evolution`]: mode-by-mode solvers, resonance and admissibility
//!   bookkeeping, decay classification and the two counterexample
//!   constructions.
//! * [`io`]: binary archives, CSV schemas and static SVG plots.

pub mod diophantine;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};
