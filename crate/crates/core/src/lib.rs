//! Contraction certificates and minimum-effort local gains for networked
//! dynamical systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`matrix`]: Metzler validation, graph classification, spectral abscissa,
//!   Perron pairs and matrix measures.
//! * [`balancing`]: diagonal similarity scaling to a balanced matrix.
//! * [`stabilization`]: minimum-effort diagonal stabilization of irreducible
//!   Metzler matrices and the associated certificates.
//! * [`hierarchy`]: block bound matrices, constant Jacobian bounds and gain
//!   synthesis for networks of subsystems.
//! * [`fhn`]: FitzHugh–Nagumo neuron networks with local feedback.
//! * [`io`]: Matrix Market and CSV matrix ingestion and emission.
//! * [`ode`]: fixed-step Runge–Kutta integration.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balancing;
pub mod error;
pub mod fhn;
pub mod hierarchy;
pub mod io;
pub mod matrix;
pub mod ode;
pub mod stabilization;

pub use error::{Error, Result};
pub use matrix::{classify, MetzlerMatrix, Norm, PerronPair, Structure};
pub use nalgebra::{DMatrix, DVector};
