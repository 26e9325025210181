//! Verification of two-qubit polarization states: analyzer projectors,
//! witness, fidelity, CHSH, maximum-likelihood tomography and Poisson error bars.

pub mod density;
pub mod setting;
pub mod tomography;
pub mod witness;

pub use density::{hermitian_eigenvalues, kron, DensityMatrixJson, Matrix4, TwoQubitDensityMatrix};
pub use setting::{projector_from_setting, standard_tomography_settings, ArmSetting, MeasurementSetting, Port};
pub use tomography::{
    correlation_settings, expected_counts, fidelity_from_counts, mle_tomography, poisson_error_bars,
    read_count_records, sample_counts, witness_from_counts, write_count_records, CountRecord, MleOptions,
    MleResult,
};
pub use witness::{
    chsh_s, correlation, fidelity_direct, fidelity_pauli, fidelity_phi_plus, pauli_correlator, witness_expectation,
    witness_operator, ChshSettings,
};
