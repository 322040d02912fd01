//! Spectral theory, exact dynamics and Lax-Phillips scattering for
//! generalized Lamb models: a wave field on the half-line coupled at the
//! origin to an n-dimensional oscillator system through the boundary
//! condition `θ φ'(0+) + φ(0+) = <w, y>`.
//!
//! The crate computes every quantity along at least two independent routes
//! and cross-validates them:
//!
//! * [`model`]: model normalization to the oscillator eigenbasis, the
//!   Weyl-type function Γ(z) and the resolvent-difference identity.
//! * [`poly`]: the boundary polynomial p (recursion/Vandermonde route and
//!   closed form), its roots, and the split into eigenvalues and resonances.
//! * [`spectral`]: essential spectrum, the eigenvalue equation θ + Γ(λ) = 0
//!   and the empty-point-spectrum criterion.
//! * [`dynamics`]: exact evolution by characteristics: the wave equation is
//!   reduced to a finite ODE for (b, y, ẏ) without discretizing the PDE;
//!   energy functionals; anharmonic oscillators.
//! * [`scattering`]: incoming/outgoing translation representations, the
//!   unimodular multiplier -p(iκ)/p(-iκ), Parseval/energy identities and the
//!   finite-dimensional Lax-Phillips semigroup e^{-tB}.
//! * [`config`] / [`commands`]: the TOML-driven CLI surface
//!   (`lambscat analyze|simulate|scatter|lp`).
//!
//! See the `examples/` directory for one runnable walkthrough per capability.

pub mod commands;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod potential;
pub mod profile;
pub mod quad;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{build_chain, gamma, krein_identity_residual, normalize, ChainSpec, ModelSpec, NormalizedModel};
pub use poly::{build_p_closed_form, build_p_vandermonde, build_pk_sequence, classify_roots, find_roots, RealPolynomial, Root, RootSet};
pub use spectral::{essential_spectrum, point_spectrum, pp_empty_check, SpectralData};
pub use dynamics::{evolve, lift_class_d, Characteristics, DataMode, EnergyBreakdown, InitialData, Trajectory};
pub use potential::{parse_poly, GrowthCondition, PolyPotential, Potential};
pub use profile::{FieldProfile, ProfileTerm};
pub use scattering::{
    build_lp_semigroup, dft_frequencies, incoming_rep, lp_evolve_check, outgoing_rep,
    translation_covariance_check, verify_scattering_relation, LPSemigroup, TransferFunction,
    TranslationRep,
};
