//! Process-based ontological models of a single qubit.
//!
//! A prepared system is not sitting in one ontic state; it is moving through
//! the ontic space, and a measurement reads its outcome off that movement.
//! This crate implements four variants of that idea and the exact quantum
//! reference they are checked against:
//!
//! - [`qubit`]: Bloch-vector directions, eigenstates and Born probabilities.
//! - [`dd`]: the fully dynamical model. Preparations are processes obeying the
//!   relative frequency rule; measurements pick uniformly among the visits
//!   they can see.
//! - [`dp`]: dynamical preparation, probabilistic (moment-sampled) detection
//!   over four abstract ontic states.
//! - [`pd`]: distribution-based preparation with trajectory-triggered
//!   outcomes, plus a validator for the two trajectory rules.
//! - [`ppp`]: distributions over paths, path equivalence, reduction to a
//!   standard ontological model and the single-system overlap check.
//! - [`stats`]: per-trial seed streams and the frequency verdict.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod dd;
pub mod dp;
pub mod path;
pub mod pd;
pub mod ppp;
pub mod qubit;
pub mod stats;

pub use path::Path;
pub use qubit::{
    born_probability, sequential_probability, Direction, DirectionGrid, Eigenstate, QubitState,
    Sign,
};
