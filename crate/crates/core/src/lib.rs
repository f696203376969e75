//! Hilbert–Schmidt distances and Holevo bounds for a continuous-variable
//! encryption channel built from coherent states, displacements and phase
//! shifts.

pub mod distances;
pub mod ensembles;
pub mod error;
pub mod fock;
pub mod holevo;
pub mod optimizer;
pub mod specialfns;

pub use error::{Error, Result};
pub use fock::{CoherentLabel, CutoffPolicy, FockOperator, C64};
pub use specialfns::SeriesTolerance;
