//! Recurrent adversarial representation learning for multi-channel sequences.
//!
//! The crate is `no_std` + `alloc` with an optional `std` feature (enabled by
//! default) that only switches on runtime CPU feature detection in the matrix
//! kernels and `std::error::Error` impls. Everything here is pure computation:
//! file formats, ingestion from disk and the command line live in the
//! `guided-gan` companion crate.
//!
//! Layout:
//!
//! * [`datapipe`] turns raw streams and digit images into normalized windows.
//! * [`netcore`] holds the recurrent blocks (generator, encoder, data and
//!   joint discriminators) with hand-written backpropagation.
//! * [`frameworks`] composes the blocks into the trainable frameworks, defines
//!   their losses and runs the alternating optimisation loop.
//! * [`evalkit`] implements the frozen-extractor linear probe and the
//!   experiments built on top of it.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod datapipe;
pub mod error;
pub mod evalkit;
pub mod frameworks;
pub mod netcore;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{Matrix, Real, SeqBatch, Tensor};
