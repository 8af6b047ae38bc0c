pub mod counter;
pub mod error;
pub mod exact;
pub mod families;
pub mod polytope;
pub mod presets;
pub mod quadrature;
pub mod rational;
pub mod rootlat;
pub mod simplex;
pub mod strata;
pub mod testfn;
pub mod volasym;

pub use error::{Error, Result};
pub use rational::Rational;
