//! Reference computations shared by the core tests and the CLI acceptance
//! suite.
#![allow(dead_code)]

pub mod checks;
pub mod numerical_fim;
