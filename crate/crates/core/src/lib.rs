//! Finite-dimensional toolkit for decoherence functionals and their operator
//! representations.

pub mod decoherence;
pub mod error;
pub mod harness;
pub mod histories;
pub mod ils;
pub mod linalg;
pub mod probes;
pub mod sampling;
pub mod tracial;

pub use decoherence::{check_axioms, extend_to_bilinear, AxiomReport, DecoherenceFunctional};
pub use error::{Error, IlsCondition, Result};
pub use ils::{df_from_operator, extract_ils, verify_ils_conditions, IlsOperator};
pub use linalg::{ComplexMatrix, Projection, Vector, C64};
pub use probes::{tensor_bound_probe, tracial_bound_probe, SweepReport, Verdict};
pub use tracial::{build_tracial_operator, hermitian_form_decomposition, pure_state_m, TracialOperator};
