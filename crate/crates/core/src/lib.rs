//! Krylov–Bogolyubov averaging for systems `v̇ + iΛv = εP(v)` whose linear
//! part has purely imaginary spectrum.
//!
//! * [`field`]: sparse complex polynomial fields, generic Lipschitz fields,
//!   Wirtinger derivatives.
//! * [`resonance`]: rotations `Φ_w`, resonance tests, the resonant part and
//!   numerical averaging.
//! * [`dynamics`]: RK4 integration of the fast, slow, interaction and
//!   effective equations.
//! * [`hamiltonian`]: Hamiltonian fields, averaged Hamiltonians, action
//!   diagnostics and small-amplitude rescaling.
//! * [`exec`]: sequential/parallel execution policy for batch loops.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod field;
pub mod hamiltonian;
pub mod resonance;

pub use num_complex::Complex64;

pub use dynamics::{
    amplitude_errors, from_interaction, horizon_theta, integrate_effective, integrate_fast, integrate_interaction,
    integrate_slow, sup_distance, to_interaction, Form, SimulationProblem, Trajectory,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{
    Field, GenericField, LipschitzWitness, Monomial, MultiIndex, Polynomial, PolynomialField, VectorField,
};
pub use hamiltonian::{
    action_drift, averaged_hamiltonian, check_ham_eff, hamiltonian_field, rescale_small, ActionAngle, HamiltonianPoly,
};
pub use resonance::{
    average, interaction_field, is_nonresonant, is_resonant, partial_average, resonant_part, rotate, FrequencyVector,
    ResonanceReport,
};
