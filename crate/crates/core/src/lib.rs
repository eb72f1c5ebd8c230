//! Affine invariants of locally convex surfaces and the affine mid-planes
//! evolute, over exact rationals or floats.

#![no_std]

extern crate alloc;

pub mod evolute;
pub mod frames;
pub mod invariants;
pub mod jets;
pub mod linalg;
pub mod midplanes;
pub mod scalar;

pub use frames::{normalize_at, rotate_frame, BlaschkeFrame, FrameError, Height, Patch, Rotation, SurfaceModel};
pub use jets::{Jet2, Jet4, JetError, LinearFormJet};
pub use linalg::AffineMap3;
pub use scalar::{Mode, Scalar, ScalarError};
