//! Universal-algebra engine for free lattices, free vector lattices and free
//! (unital) vector lattice algebras, with exact rational arithmetic.

pub mod finite_algebra;
pub mod fourier_motzkin;
pub mod egraph;
pub mod fvl_model;
pub mod lattice_engine;
pub mod models;
pub mod partition;
pub mod rational;
pub mod term_algebra;
pub mod terms;
pub mod theories;
pub mod vla_engine;
