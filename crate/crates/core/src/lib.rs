//! Sliced Wasserstein distances with Markov-chain projection sampling.
//!
//! The crate provides the sliced Wasserstein (SW) estimator and its baselines
//! (Max-SW, K-SW, Max-K-SW), the Markovian sliced Wasserstein (MSW) family with four
//! transition kernels, analytic subgradients with respect to supports and directions,
//! an exact assignment-based Wasserstein oracle, Euler gradient flows and a palette
//! color-transfer pipeline.
//!
//! Estimators are also available by name through [`Registry`]:
//!
//! ```
//! use msw_core::{DistanceParams, EmpiricalMeasure, Registry, RngStream};
//!
//! let mu = EmpiricalMeasure::from_points(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
//! let nu = EmpiricalMeasure::from_points(&[[0.0, 1.0], [1.0, 1.0]]).unwrap();
//! let params = DistanceParams { projections: 4, steps: 3, ..Default::default() };
//! let msw = Registry::with_builtins().build("msw-i", &params).unwrap();
//! let value = msw.evaluate(&mu, &nu, &RngStream::new(7, 0)).unwrap();
//! assert!(value > 0.0 && value <= 1.0 + 1e-12);
//! ```

pub mod color;
pub mod error;
pub mod exact_ot;
pub mod flow;
pub mod gradients;
pub mod max_sw;
pub mod measure;
pub mod msw;
pub mod ot1d;
pub mod registry;
pub mod sphere;
pub mod sw_family;

pub use error::{Error, Result};
pub use measure::{project, Direction, EmpiricalMeasure, ProjectedMeasure};
pub use registry::{Distance, DistanceParams, Registry};
pub use sphere::RngStream;
