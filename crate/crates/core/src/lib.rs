//! Stable 3-forms in dimensions 6 and 7.
//!
//! * [`exterior`]: forms, wedge, interior product, pullback, Hodge star.
//! * [`forms6`]: λ, K, the hat map, complex structure and special Kähler data on R^6.
//! * [`lorentz6`]: self-duality in signature (5,1).
//! * [`g2`]: positive 3-forms on R^7 and their metrics.
//! * [`torus`]: truncated Fourier fields on flat tori and the volume functionals.
//! * [`report`], [`suite`]: JSON output and invariant suites.

pub mod error;
pub mod exterior;
pub mod forms6;
pub mod g2;
pub mod io;
pub mod lorentz6;
pub mod report;
pub mod sample;
pub mod suite;
pub mod torus;

pub use error::{Error, Result};
pub use exterior::{Form, MetricG, MultiIndex, VolumeElement};
