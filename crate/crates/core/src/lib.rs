//! Certificates that the set of gradient trajectories of a real polynomial
//! converging to a critical point is infinite.

pub mod certifier;
pub mod degree;
pub mod flow;
pub mod morse;
pub mod poly;
pub mod sphere;
pub mod unionfind;
