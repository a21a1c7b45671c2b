pub mod acceptance;
pub mod automaton;
pub mod context;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod exact;
pub mod extension;
pub mod instance;
pub mod perm;
pub mod quotient;
pub mod set;
pub mod word;
