//! Discrete-time Kalman filtering with minimum-variance output estimates for
//! systems where the process noise feeds through to the outputs or is
//! correlated with the measurement noise.
//!
//! The plant model is the discrete-time state space
//!
//! ```text
//! x[n+1] = A x[n] + B u[n] + G w[n]          (state)
//! y[n]   = C x[n] + D u[n] + H w[n]          (outputs to estimate)
//! z[n]   = Cm x[n] + Dm u[n] + Hm w[n] + v[n] (measurements)
//! ```
//!
//! with `E(w w') = Q`, `E(v v') = R`, and cross-covariance `E(w v') = N`.
//!
//! The textbook output update `y = C x_post + D u` ignores the `H w` term and
//! is a minimum-variance estimate only when `Hm = 0` and `N = 0`. Whenever the
//! measurements carry a direct imprint of the process noise (`Hm != 0`) or the
//! noises are correlated (`N != 0`), the current measurement is informative
//! about `w[n]` itself, and the conditional expectation
//!
//! ```text
//! w_post = Kg2 (z - Cm x_prior - Dm u),   Kg2 = (Q Hm' + N) S^-1
//! ```
//!
//! is nonzero. Adding the feedthrough of that estimate gives the corrected
//! output update `y_post = C x_post + D u + H w_post`, which this crate
//! implements alongside the traditional one so the two can be compared on the
//! same data.
//!
//! Module layout:
//!
//! - [`model`]: system types, validation, discretization, JSON loading
//! - [`gaussian`]: joint-Gaussian conditioning, PSD factorization, correlated
//!   noise sampling
//! - [`filter_tv`]: time-varying filter (gains, measurement update, batch run)
//! - [`filter_ss`]: steady-state covariance solver and the constant-gain filter
//! - [`sim`]: truth simulation scenarios and error statistics
//! - [`cli`]: the command-line harness (`riccati`, `run`, `compare`)
//!
//! The `examples/` directory is the fastest tour: each example exercises one
//! capability end to end on a small feedthrough system.
//!
//! # Quick start
//!
//! ```
//! use feedkal::{filter_ss, DiscreteSystem, OutputMode, SteadyFilter};
//! use nalgebra::{dmatrix, dvector, DMatrix, DVector};
//!
//! // One leaky state; the disturbance w drives it and leaks straight into
//! // both the output and the measurement.
//! let sys = DiscreteSystem::new(
//!     dmatrix![0.99],       // A
//!     DMatrix::zeros(1, 0), // B (no commanded input)
//!     dmatrix![0.2],        // G
//!     dmatrix![1.0],        // C
//!     DMatrix::zeros(1, 0), // D
//!     dmatrix![1.0],        // H
//!     dmatrix![1.0],        // Cm
//!     DMatrix::zeros(1, 0), // Dm
//!     dmatrix![1.0],        // Hm: the measurement sees w directly
//!     dmatrix![1.0],        // Q
//!     dmatrix![0.1],        // R
//!     dmatrix![0.0],        // N
//!     0.1,                  // dt
//! )?;
//!
//! let p_star = filter_ss::solve_riccati_default(&sys)?.p_star;
//! let filter = SteadyFilter::build(&sys, &p_star)?;
//! let (frame, _x_next) = filter.step(
//!     &dvector![0.0],       // predicted state
//!     &dvector![0.8],       // measurement
//!     &DVector::zeros(0),   // no input
//!     OutputMode::Corrected,
//! )?;
//! // Most of the surprise in z is attributed to the current disturbance.
//! assert!(frame.w_post[0] > 0.5);
//! assert!((frame.y_post[0] - frame.x_post[0] - frame.w_post[0]).abs() < 1e-12);
//! # Ok::<(), feedkal::Error>(())
//! ```

pub mod cli;
mod error;
pub mod filter_ss;
pub mod filter_tv;
pub mod gaussian;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
pub use filter_ss::{RiccatiSolution, SteadyFilter};
pub use filter_tv::{CovarianceForm, EstimateFrame, FilterState, GainSet, OutputMode};
pub use gaussian::{Gaussian, JointPartition};
pub use model::{
    discretize, load_system, ContinuousSystem, DiscreteSystem, DiscretizationMethod, LoadedSystem,
};
pub use sim::{ErrorStats, Scenario, ScenarioKind, Trajectory};
