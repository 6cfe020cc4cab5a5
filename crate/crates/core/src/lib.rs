//! Core algorithms for predicting low-dimensional tactile readings from small
//! depth patches, and for using those predictions in touch-based object
//! recognition and grasp-stability prediction.
//!
//! The crate is `no_std` with `alloc`; file formats, IO and the command-line
//! front end live in the companion `pseudotouch` crate.

#![no_std]

extern crate alloc;

pub mod datasets;
pub mod geometry;
pub mod grasp;
pub mod math;
pub mod model;
pub mod oracle;
pub mod patch;
pub mod presets;
pub mod recognition;
