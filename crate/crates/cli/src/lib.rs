//! Library side of the `kinlog` binary: lemma suites, formula commands,
//! the Michelson–Morley demo and the report format they share.

pub mod commands;
pub mod lemmas;
pub mod mm;
pub mod report;
