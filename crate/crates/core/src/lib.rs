//! Structure-preserving solver for the spatially homogeneous multispecies
//! Fokker-Planck-Landau system with Dougherty-type collision operators.
//!
//! Each species `i` relaxes under `sum_j c_ji div(grad f_i + m_i (v - u_ji) / T_ji f_i)`
//! on a truncated velocity box. The discretisation is a flux-form
//! exponential-fitting scheme that is positive, exactly mass conserving,
//! stationary on discrete Maxwellians and, in its default mode, conserves
//! total momentum and energy of the semi-discrete system.

pub mod cli;
pub mod coefficients;
pub mod collision;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod linalg;
pub mod model;
pub mod moments;
pub mod oracle;
pub mod vec3;

pub use error::{Error, Result};
