//! Reference implementations the library is checked against. Each is
//! written directly from the defining formula and shares no code with the
//! crate beyond its public types.
#![allow(dead_code)]

pub mod gradient;
pub mod metrics;
pub mod optimizer;
pub mod shapley;
