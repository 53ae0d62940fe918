//! Workbench for McCarthy's three-valued if-then-else logic: C-algebras,
//! adas, C-sets and B-sets, with decision procedures and subdirect
//! decompositions of finite models.

pub mod cli;
pub mod congruence;
pub mod decision;
pub mod logic;
pub mod models;
pub mod report;
pub mod terms;
