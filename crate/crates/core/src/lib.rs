//! Loewner transform toolkit.
//!
//! Converts between simple planar curves and their driving functions,
//! computes chordal, arc and loop Loewner energies, and searches for
//! energy minimizing curves through prescribed points.

#![no_std]
#![cfg_attr(test, allow(unused_imports))]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod catalog;
pub mod curve;
pub mod driving;
pub mod energy;
pub mod error;
pub mod maps;
pub mod minimizer;
pub mod regularity;
pub mod tracer;
pub mod zipper;

pub use curve::CurveSamples;
pub use driving::DrivingFunction;
pub use error::{Error, Result};
pub use maps::{ComplexPoint, ConformalComposition, MapStep, MobiusMap, TiltedSlitParams};
