//! Multi-view depth rendering, entropy-based view selection, analytic grasp
//! synthesis and open-ended category learning for point-cloud objects.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod grasp;
pub mod grid;
pub mod learner;
pub mod pipeline;
pub mod projection;
pub mod protocol;
pub mod representation;
pub mod service;
pub mod textfmt;
pub mod view_selection;

pub use error::{Error, Result};
