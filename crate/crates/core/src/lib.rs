//! Multi-agent generation of multiple-choice questions with deterministic
//! critique, plus rubric-based evaluation of the resulting question bank.

pub mod eval;
pub mod export;
pub mod gateway;
pub mod generator;
pub mod iwf;
pub mod language;
pub mod mcq;
pub mod prompt;
pub mod supervisor;
