//! Multilevel compressed sensing core.
//!
//! Unitary transforms, coherence and sparsity diagnostics, multilevel sampling
//! maps, convex reconstruction, the flip test, the fluorescence-microscopy
//! forward chain and infinite-dimensional recovery. Everything here is
//! `no_std` with `alloc`; file formats and the command-line front end live in
//! the companion `mlcs` crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `num_traits::Float` supplies float methods without std. Whenever std is in
// the build graph (tests, std dependants) its inherent methods win and the
// import looks unused.
#![allow(unused_imports)]

extern crate alloc;

pub mod coherence;
pub mod error;
pub mod fliptest;
pub mod fmsim;
pub mod infdim;
pub mod levels;
pub mod linalg;
pub mod phantom;
pub mod rng;
pub mod sampling;
pub mod signal;
pub mod solvers;
pub mod sparsity;
pub mod transforms;

pub use error::{Error, Result};
pub use levels::LevelStructure;
pub use num_complex::Complex64 as C64;
pub use signal::{Shape, Signal};
pub use transforms::{LinearOperator, Operator};
