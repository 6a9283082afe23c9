//! Computational toolkit for semidirect products `Z^n ⋊_φ Z`.
//!
//! The crate covers the group itself (normal forms, Cayley balls), the
//! mapping telescope of the linear map `φ` acting on `R^n` together with its
//! straightening map to `R^n × R`, the slope-function compactification of
//! `R^n × R` with suspension boundary, and the numeric experiments built on
//! top of those (nullity decay, boundary action, coarse control functions).

pub mod algebra;
pub mod boundary_action;
pub mod coarse;
pub mod compactification;
pub mod config;
mod error;
pub mod linalg;
pub mod nullity;
pub mod telescope;

pub use algebra::{Automorphism, Ball, Group, GroupElement};
pub use boundary_action::BoundaryAction;
pub use compactification::{BoundaryPoint, ChartPoint, Fit, PsiMode, PsiSpec, RayPoint, RayTarget};
pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use nullity::{DecayCurve, EtaTable, Family, FamilySpec};
pub use telescope::{FundamentalDomain, ProductPoint, TelescopePoint};
