//! Inversion of polynomially computable keystream generators through SAT.
//!
//! The pipeline: a generator is encoded into CNF with Tseitin
//! transformations ([`encoder`]), the observed keystream is bound as unit
//! clauses, a decomposition set over the key variables splits the instance
//! into a family of simpler SAT problems ([`decomposition`]), a predictive
//! function estimates the total solving time of a candidate family, and a
//! worker pool processes the chosen family as a task list ([`runner`]) with a
//! CDCL solver tuned for these instances ([`solver`]).

pub mod cnf;
pub mod decomposition;
pub mod dimacs;
pub mod encoder;
pub mod generators;
pub mod runner;
pub mod solver;
