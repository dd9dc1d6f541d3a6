pub mod cli;
pub mod complex;
pub mod dictionary;
pub mod error;
pub mod filter;
pub mod fixtures;
pub mod infer;
pub mod io;
pub mod linalg;
pub mod sampling;
pub mod spatiotemporal;
pub mod spectral;

pub use complex::{Cochain, ComplexKind, ComplexSignal, LaplacianPart, SimplicialComplex};
pub use error::{Error, Result};
pub use linalg::Tolerance;
