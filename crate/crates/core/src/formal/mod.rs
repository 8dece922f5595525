//! Formal distributions `D^alpha f` with continuous piecewise-polynomial
//! representatives on n-dimensional intervals.

mod distribution;
mod interval;
mod multi_index;
mod piecewise;
mod pm;
mod syntax;

pub use distribution::FormalDistribution;
pub use interval::Interval;
pub use multi_index::MultiIndex;
pub use piecewise::PiecewisePoly;
pub use pm::{p_m_member, p_m_member_divided, p_m_member_monomial, test_grid};
pub use syntax::{parse_distribution, parse_piecewise};
