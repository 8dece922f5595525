//! Nets of smooth functions, moderateness on compacts, generalized smooth
//! functions and the regularization of formal distributions.

pub mod gsf;
pub mod moderate;
pub mod mollify;
pub mod universal_phi;

pub use gsf::*;
pub use moderate::{analyze_net, net_class_equal, net_is_infinitesimal_on, net_is_moderate_on, net_is_negligible_on, NetReport, OrderVerdict, SampleConfig, SmoothNet, Verdict};
pub use mollify::{bump_constant, Mollified};
pub use universal_phi::*;
