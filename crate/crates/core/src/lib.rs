//! Gaussian entanglement of formation for bosonic continuous-variable states.
//!
//! States are described by covariance matrices normalized so that the vacuum
//! is the identity. Entanglement values are in ebits. The closed-form
//! two-mode solution lives in [`eof_analytic`], a general numeric search over
//! pure covariance matrices in [`eof_numeric`], and lossy fiber models in
//! [`channels`].

pub mod channels;
pub mod decomp;
pub mod eof_analytic;
pub mod eof_numeric;
pub mod error;
pub mod linalg;
pub mod nelder_mead;
pub mod normal_form;
pub mod pure_states;
pub mod sample;
pub mod symplectic;
mod williamson;

pub use channels::{apply_glocc, fiber_output, n_thermal, ChannelCM, FiberSpec, Setting};
pub use decomp::{lemma3_witness, mixing_noise_cm, GaussMixture, Witness};
pub use eof_analytic::{eof_symmetric, eof_two_mode, EofOptions, EofResult};
pub use eof_numeric::{additivity_gap, eof_numeric, NumericEof, OptimizerConfig};
pub use error::{Error, Result};
pub use normal_form::{standard_form_cm, two_mode_invariants, TwoModeInvariants};
pub use pure_states::{entanglement_entropy, tmss_cm, EntanglementValue, PureCMParam};
pub use symplectic::{
    is_pure, is_valid_state, log_negativity, partial_transpose, symplectic_eigenvalues,
    GaussianState, ModeOrdering, Partition,
};
