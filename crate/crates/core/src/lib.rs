//! Interleave/deinterleave-transformed quasi-cyclic (IDT-QC) coding for
//! asynchronous physical-layer network coding.
//!
//! The crate is layered bottom-up: [`galois`] supplies prime-field and
//! `F_p[D]/(D^L - 1)` algebra, [`qc_ldpc`] builds and decodes quasi-cyclic
//! LDPC codes, [`idt`] turns linear delays into circular codeword shifts,
//! [`channels`] simulates the ISI and asynchronous multi-source channels,
//! [`receivers`] decodes them, and [`rates`] evaluates computation rates.

pub mod channels;
pub mod error;
pub mod galois;
mod linalg;
pub mod idt;
pub mod qc_ldpc;
pub mod rates;
pub mod receivers;

pub use error::{Error, Result};
