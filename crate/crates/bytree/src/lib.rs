//! Tamagawa numbers and Néron component groups of semistable hyperelliptic
//! curves, computed from signed metric trees ("BY trees/forests"): exact
//! algorithms, a symbolic expression engine, an independent lattice-theoretic
//! oracle, double-cover correspondence checks, and base-change growth
//! analysis.

pub mod abelian;
pub mod cover;
pub mod expr;
pub mod forest;
pub mod formula;
pub mod genus2;
pub mod gen;
pub mod io;
pub mod neron;
pub mod oracle;
pub mod snf;
pub mod table;
pub mod tamagawa;
pub mod towers;
