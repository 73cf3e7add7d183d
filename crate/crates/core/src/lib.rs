//! Numerical toolkit for quantum wiretap channels with unreliable
//! entanglement assistance.
//!
//! The crate covers labeled multi-register linear algebra, wiretap channel
//! construction and degradedness search, entropic functionals, rate-region
//! evaluation and search, method-of-types checks, and an exact small-blocklength
//! simulation of a superposition code with Heisenberg-Weyl satellite rotations.

pub mod channels;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod random;
pub mod regions;
pub mod spc;
pub mod tensor;
pub mod typicality;

pub use channels::{
    from_choi, make_channel, to_choi, validate_cptp, ChannelSpec, ChoiMatrix, CptpReport, KrausSet, Receiver,
    WiretapChannel,
};
pub use entropy::{
    conditional_entropy, conditional_mutual_information, holevo_chi, mutual_information, von_neumann,
    EntropyReport,
};
pub use error::{Error, Result};
pub use regions::{
    baseline, build_omega, eve_assist_ensemble, optimize_region, rate_pair_no_interception, rate_pair_nonsecure, rate_pair_secure,
    regularized_points, BaselineKind, CodingConfig, RatePoint, RegionOptions, RegionSample,
};
pub use spc::{
    block_unitary, evaluate_code, encode, generate_codebook, heisenberg_weyl, pgm, CodeEvaluation, Codebook,
    HWParams, Rates,
};
pub use tensor::{
    eig_hermitian, partial_trace, purify, schmidt_decompose, schmidt_decompose_complete, tensor,
    trace_distance, LabeledOperator, OperatorKind, PureState, Register, SchmidtDecomposition,
};
pub use typicality::{
    conditional_typical_projector, covering_experiment, typical_projector, typical_set, verify_covering_properties,
    verify_projector_properties, CoveringStats, TypeClass, TypicalProjector,
};
