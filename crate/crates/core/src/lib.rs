pub mod lattice;
pub mod group;
pub mod plectic;
pub mod cm;
pub mod recip;
pub mod actions;
pub mod config;
pub mod harness;
