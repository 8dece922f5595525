//! Instance-level checks of the universal properties: the category of
//! quotient rings, the morphism `psi` into solution targets, the quotient
//! morphism `tau`, and the quotient-ring conditions.

pub mod psi;
pub mod qlaws;
pub mod report;
pub mod ring;
pub mod target;
pub mod tau;

pub use psi::{build_psi, build_psi_via, check_uniqueness, compose_identity, witness, MorphismWitness, PsiEntry, PsiRoute, UniquenessReport};
pub use qlaws::{check_q_laws, reference_q_instance, QArrow, QObject};
pub use report::{Condition, Report, FALSIFICATION_NOTE};
pub use ring::{check_quotient_ring_conditions, ring_axioms, trichotomy};
pub use target::{
    check_target, delta_multi, enumerate_sections, enumerated_intervals, ColombeauTarget, EnumConfig, IdentityTarget, ShiftedSection,
    ShiftedTarget, SolutionTarget,
};
pub use tau::{check_colombeau_tau, reference_tau_instances, KernelQuotient, TauReport};
