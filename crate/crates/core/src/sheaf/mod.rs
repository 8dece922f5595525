//! The sheaf of formal distributions over a dyadic base and the completion
//! of compatible families.

pub mod base;
pub mod family;
pub mod laws;
pub mod presheaf;

pub use base::BaseIndex;
pub use family::{eta_embed, locally_equal, maximalize, CompatibleFamily, MaximalFamily, Status};
pub use laws::{sheaf_laws_check, LawCheck, LawsReport};
pub use presheaf::{glue_formal, FdPresheaf, GlueOutcome, Presheaf};
