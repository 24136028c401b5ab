//! Exact-arithmetic convex polynomial programming.

pub mod linalg;
pub mod polynomial;
pub mod rat;
pub mod lp;
pub mod structure;
pub mod bounds;
pub mod ellipsoid;
pub mod solver;
