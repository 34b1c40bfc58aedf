//! Numerical laboratory for the one-dimensional Hamiltonian abcd Boussinesq
//! system.
//!
//! The crate provides four layers:
//!
//! - [`params`] / [`regions`] / [`atlas`]: validation of the admissible
//!   parameter triples, every closed-form decay-region predicate, and a
//!   rasterizer for parameter-plane maps;
//! - [`waves`]: dispersion relation, group velocity, plane-wave velocity
//!   ranges, and zero-group-velocity detection for the linearized system;
//! - [`solver`] / [`spectral`]: a pseudospectral integrator for the
//!   normalized system on a periodic domain with an exact linear propagator
//!   and conserved-energy evaluation;
//! - [`virial`] / [`diagnostics`]: weighted virial functionals, their
//!   time-derivative decomposition, positivity certificates, and windowed
//!   decay reports over trajectories.

// negated comparisons are kept where they also reject NaN inputs, and
// indexed loops over several same-length arrays stay as written
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod atlas;
pub mod diagnostics;
pub mod params;
pub mod regions;
pub mod solver;
pub mod spectral;
pub mod traj;
pub mod virial;
pub mod waves;

pub use params::{
    a_equals_c_line, from_nu_b, normalize, to_nu_b, validate_phys, NormParams, NuB, ParamError,
    ParamsSpec, PhysParams,
};
pub use regions::{
    classify, exterior_conditions, in_r_sharp, is_dispersion_like, is_refined_dispersion_like,
    kappa_scales, sigma_ac, thresholds, DecayScenario, ExteriorConditions, KappaScales,
    RegionError, ScenarioLabel, Thresholds,
};
pub use solver::{energy, evolve, linear_propagator, rhs, FieldPair, SolverConfig, SolverError};
pub use spectral::{Grid, GridError};
pub use traj::{TrajError, Trajectory};
pub use virial::{
    eval_decomposition, eval_functionals, positivity_certificate, quad_coeffs, sos_certificate,
    star_coeffs, Certificate, CertificateKind, DiscreteWeight, ScaleLaw, SosWitness, VirialError,
    WeightProfile,
};
pub use waves::{
    group_velocity, omega, pw_range, sample, zero_gv_wavenumbers, PmuProfile, PwRange, WaveError,
    WaveSample,
};
