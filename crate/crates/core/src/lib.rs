pub mod netmodel;
pub mod schedule;
pub mod environment;
pub mod policies;
pub mod engine;
pub mod bound;
