//! Exact kinematics workbench: numeric backends, spacetime geometry,
//! coordinate transformations, a two-sorted first-order language with the
//! kinematic axiom systems, translations between them, and a model checker
//! for desk-scale models.

pub mod scalar;
pub mod spacetime;
pub mod transforms;
pub mod logic;
pub mod models;
pub mod translate;
