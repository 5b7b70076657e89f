//! Six-month mortality prediction from administrative claims.
//!
//! The pipeline turns beneficiary and claims files into traditional
//! (comorbidity indicator) and augmented (two-window count) feature sets,
//! screens class-rebalanced classifiers with a greedy one-parameter-at-a-time
//! tuner, and evaluates them by AUC with a bootstrap standard deviation.
//! A synthetic claims generator stands in for restricted data.

pub mod claims;
pub mod cli;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod features;
pub mod learners;
pub mod matrix;
pub mod seeds;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
